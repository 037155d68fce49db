"""Narrowband ambiguity function, matched filtering and the coupling and
symmetry analyses built on them.

The ambiguity surface is

    chi(k, f) = sum_n exp(-i 2 pi f t_n) s[n] conj(s[n - k])

evaluated on integer-sample delays k and a uniform Doppler grid.  Samples
outside the buffer are zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, NamedTuple, Optional

import numpy as np
import scipy.fft
import scipy.signal

from .params import RadarParams
from .peaks import parabolic_offset
from .waveforms import SampleBuffer

_ROW_CHUNK = 256


@dataclass(frozen=True, eq=False)
class AmbiguitySurface:
    """|chi| on a delay x Doppler grid.

    ``values[j, k]`` belongs to ``doppler_axis[j]`` and ``delay_axis[k]``.  In
    raw normalization the axes are seconds and Hz; in ``fractional`` normalization
    delay is expressed as R / R_unambiguous and Doppler as f_D / |delta_f|.
    """

    values: np.ndarray
    delay_axis: np.ndarray
    doppler_axis: np.ndarray
    normalization: str = "raw"
    prf: Optional[float] = None
    delta_f: Optional[float] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (len(self.doppler_axis), len(self.delay_axis)):
            raise ValueError(
                f"values shape {v.shape} does not match axes "
                f"({len(self.doppler_axis)}, {len(self.delay_axis)})"
            )
        if np.any(v < 0):
            raise ValueError("ambiguity magnitudes must be non-negative")
        if self.normalization not in ("raw", "fractional"):
            raise ValueError(f"unknown normalization {self.normalization!r}")
        for name, arr in (("values", v), ("delay_axis", self.delay_axis), ("doppler_axis", self.doppler_axis)):
            a = np.array(arr, dtype=np.float64)
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @property
    def peak_index(self) -> tuple:
        return np.unravel_index(int(np.argmax(self.values)), self.values.shape)

    @property
    def origin_index(self) -> tuple:
        return int(np.argmin(np.abs(self.doppler_axis))), int(np.argmin(np.abs(self.delay_axis)))


def doppler_grid(doppler_span: float, n_doppler: int) -> np.ndarray:
    """Uniform grid of ``n_doppler`` points spanning ``doppler_span`` Hz, centered on 0."""
    if n_doppler < 1:
        raise ValueError(f"n_doppler must be >= 1, got {n_doppler}")
    if n_doppler == 1:
        return np.zeros(1)
    if not doppler_span > 0:
        raise ValueError(f"doppler_span must be positive, got {doppler_span}")
    step = doppler_span / (n_doppler - 1)
    return (np.arange(n_doppler) - (n_doppler - 1) / 2) * step


def _lag_products(x: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """Rows x[n] * conj(x[n - k]) for each shift k, zero outside the support."""
    n = len(x)
    pad = int(np.max(np.abs(shifts))) if len(shifts) else 0
    xp = np.concatenate([np.zeros(pad, complex), x, np.zeros(pad, complex)])
    idx = pad + np.arange(n)[None, :] - shifts[:, None]
    return x[None, :] * np.conj(xp[idx])


def _doppler_transform(rows: np.ndarray, freqs: np.ndarray, fs: float) -> np.ndarray:
    """sum_n rows[:, n] * exp(-i 2 pi f n / fs) for each f in ``freqs``.

    Uses a zero-padded FFT when the grid lands on bins of a modest-length DFT,
    a chirp-z transform otherwise.
    """
    n = rows.shape[1]
    if len(freqs) == 1:
        return np.exp(-2j * np.pi * freqs[0] * np.arange(n) / fs)[None, :] @ rows.T
    step = freqs[1] - freqs[0]
    # steps this fine would need an absurd FFT; leave them to the chirp-z path
    n_fft = fs / step if step > fs * 1e-9 else 0.0
    n_fft_int = int(round(n_fft))
    bins = freqs / step
    on_grid = (
        n_fft > 0
        and abs(n_fft - n_fft_int) < 1e-9 * n_fft
        and n <= n_fft_int <= 4 * (n + len(freqs))
        and np.allclose(bins, np.round(bins), atol=1e-9)
    )
    if on_grid:
        spec = scipy.fft.fft(rows, n=n_fft_int, axis=1)
        return spec[:, np.round(bins).astype(int) % n_fft_int].T
    w = np.exp(-2j * np.pi * step / fs)
    a = np.exp(2j * np.pi * freqs[0] / fs)
    return scipy.signal.czt(rows, m=len(freqs), w=w, a=a, axis=1).T


def ambiguity_surface(
    s: SampleBuffer, max_delay: float, doppler_span: float, n_doppler: int
) -> AmbiguitySurface:
    """Evaluate |chi| for delays within +-max_delay and ``n_doppler`` Doppler bins.

    Args:
        s: waveform samples.
        max_delay: largest |delay| in seconds; rounded to whole samples and
            required to stay inside the waveform support.
        doppler_span: full width of the Doppler grid in Hz.
        n_doppler: number of Doppler bins (odd counts include f = 0).

    Returns:
        AmbiguitySurface with raw axes.
    """
    if len(s) == 0:
        raise ValueError("empty waveform")
    if max_delay < 0 or max_delay >= s.duration:
        raise ValueError(
            f"max_delay {max_delay:g} s must lie in [0, duration={s.duration:g} s)"
        )
    fs = s.sample_rate
    k_max = int(round(max_delay * fs))
    if k_max >= len(s):
        raise ValueError("delay grid exceeds the signal support")
    shifts = np.arange(-k_max, k_max + 1)
    freqs = doppler_grid(doppler_span, n_doppler)
    x = s.samples.astype(np.complex128)

    values = np.empty((len(freqs), len(shifts)))
    for start in range(0, len(shifts), _ROW_CHUNK):
        sl = slice(start, start + _ROW_CHUNK)
        rows = _lag_products(x, shifts[sl])
        values[:, sl] = np.abs(_doppler_transform(rows, freqs, fs))
    return AmbiguitySurface(values, shifts / fs, freqs)


def matched_filter_output(reference: SampleBuffer, received: SampleBuffer) -> SampleBuffer:
    """Full cross-correlation y[k] = sum_n rx[n] conj(ref[n - k]).

    The returned buffer's time axis is the lag: sample i sits at lag
    i - (N_ref - 1) samples, offset by the two buffers' start times.
    """
    if reference.sample_rate != received.sample_rate:
        raise ValueError(
            f"sample-rate mismatch: reference {reference.sample_rate:g} Hz, "
            f"received {received.sample_rate:g} Hz"
        )
    if len(reference) == 0 or len(received) == 0:
        raise ValueError("empty buffer")
    fs = reference.sample_rate
    y = scipy.signal.correlate(
        received.samples.astype(np.complex128), reference.samples.astype(np.complex128), mode="full"
    )
    t0 = (received.t0 - reference.t0) - (len(reference) - 1) / fs
    return SampleBuffer(y, fs, t0)


class RidgePoint(NamedTuple):
    doppler: float
    delay_at_peak: float
    peak_magnitude: float


def coupling_ridge(surface: AmbiguitySurface) -> List[RidgePoint]:
    """Per Doppler row: parabolically refined delay of the strongest response.

    Ties go to the smallest delay.  Units follow the surface's axes.
    """
    if surface.values.size == 0:
        raise ValueError("empty surface")
    step = surface.delay_axis[1] - surface.delay_axis[0] if len(surface.delay_axis) > 1 else 0.0
    ridge = []
    for f, row in zip(surface.doppler_axis, surface.values):
        i = int(np.argmax(row))
        p, height = parabolic_offset(row, i)
        ridge.append(RidgePoint(float(f), float(surface.delay_axis[i] + p * step), float(height)))
    return ridge


def ridge_slope(ridge: List[RidgePoint], band: Optional[float] = None) -> tuple:
    """Least-squares delay-vs-Doppler slope of a ridge.

    Only rows with |doppler| <= band are used when ``band`` is given.
    Returns (slope, intercept, max |residual|).
    """
    f = np.array([r.doppler for r in ridge])
    d = np.array([r.delay_at_peak for r in ridge])
    if band is not None:
        keep = np.abs(f) <= band * (1 + 1e-12)
        f, d = f[keep], d[keep]
    if len(f) < 2:
        raise ValueError("need at least two ridge points inside the band")
    slope, intercept = np.polyfit(f, d, 1)
    resid = d - (slope * f + intercept)
    return float(slope), float(intercept), float(np.max(np.abs(resid)))


class SymmetryReport(NamedTuple):
    max_asymmetry: float
    passed: bool


def _is_symmetric_axis(axis: np.ndarray) -> bool:
    scale = max(np.max(np.abs(axis)), 1e-300)
    return np.allclose(axis, -axis[::-1], rtol=0, atol=1e-9 * scale)


def check_cs_symmetry(surface: AmbiguitySurface, tol: float = 1e-6) -> SymmetryReport:
    """Largest deviation from four-way symmetry, relative to |chi(0, 0)|."""
    if not (_is_symmetric_axis(surface.delay_axis) and _is_symmetric_axis(surface.doppler_axis)):
        raise ValueError("surface axes are not symmetric about zero")
    v = surface.values
    ref = v[surface.origin_index]
    if ref <= 0:
        raise ValueError("zero response at the origin")
    dev = max(
        np.max(np.abs(v - v[:, ::-1])),
        np.max(np.abs(v - v[::-1, :])),
        np.max(np.abs(v - v[::-1, ::-1])),
    )
    worst = float(dev / ref)
    return SymmetryReport(worst, worst <= tol)


def normalize_axes(surface: AmbiguitySurface, params: RadarParams) -> AmbiguitySurface:
    """Rescale axes to range / unambiguous range and Doppler / |delta_f|."""
    if surface.normalization != "raw":
        raise ValueError("surface axes are already normalized")
    if params.delta_f == 0:
        raise ValueError("delta_f is zero; Doppler cannot be normalized by bandwidth")
    delay = (params.c * surface.delay_axis / 2) / params.unambiguous_range
    doppler = surface.doppler_axis / abs(params.delta_f)
    return AmbiguitySurface(
        surface.values, delay, doppler, normalization="fractional", prf=params.prf, delta_f=params.delta_f
    )
