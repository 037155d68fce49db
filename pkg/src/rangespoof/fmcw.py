"""Simulated FMCW receiver: passband synthesis, real mixing, FIR lowpass,
spectral peak reading and beat-to-range conversion, plus the triangular-sweep
and conjugate-symmetric resolvers that undo artificial Doppler.

Beat frequencies handed to the range estimators are *range-oriented*: the
delay term |delta_f|*tau/T is positive.  A real mixer only ever reports
|beat|; the quadrature receiver keeps the sign, so deceived ranges can go
negative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np
import scipy.fft
import scipy.signal

from .params import RadarParams
from .peaks import local_maxima, parabolic_offset
from .scene import (
    ModulationProfile,
    TargetSpec,
    apply_phase_modulation,
    doppler_from_velocity,
    synthesize_echo,
)
from .waveforms import SampleBuffer, WaveformSpec, generate

WINDOWS = ("rectangular", "hann")
RECEIVERS = ("real", "quadrature")
SWEEPS = ("sawtooth", "triangular")


# -- passband and mixing ---------------------------------------------------

def _occupied_band(s: SampleBuffer, floor: float = 1e-3) -> float:
    """Highest |f| (Hz) where the spectrum exceeds ``floor`` times its peak."""
    x = s.samples.astype(np.complex128)
    mag = np.abs(scipy.fft.fft(x))
    if mag.max() == 0:
        return 0.0
    f = scipy.fft.fftfreq(len(x), 1 / s.sample_rate)
    return float(np.max(np.abs(f[mag >= floor * mag.max()])))


def _to_rf_grid(s: SampleBuffer, fs_rf: float) -> SampleBuffer:
    if fs_rf == s.sample_rate:
        return s
    ratio = fs_rf / s.sample_rate
    factor = int(round(ratio))
    if factor < 1 or abs(ratio - factor) > 1e-9 * ratio:
        raise ValueError(
            f"fs_rf {fs_rf:g} Hz is not an integer multiple of the source rate {s.sample_rate:g} Hz"
        )
    return SampleBuffer(np.repeat(s.samples, factor), fs_rf, s.t0)


def passband(
    s: SampleBuffer, f_carrier: float, fs_rf: float, band: Optional[float] = None, guard: float = 0.0
) -> SampleBuffer:
    """Analytic passband s(t) * exp(-i 2 pi f_carrier t) on the fs_rf grid.

    ``band`` is the largest baseband |frequency| of ``s``; it is measured from
    the spectrum when omitted.  A source at a lower rate is held (zero-order)
    by an integer factor.
    """
    if f_carrier <= 0:
        raise ValueError(f"carrier must be positive, got {f_carrier}")
    s = _to_rf_grid(s, fs_rf)
    if band is None:
        band = _occupied_band(s)
    top = f_carrier + band + guard
    if fs_rf <= 2 * top:
        raise ValueError(
            f"fs_rf = {fs_rf:g} Hz cannot carry content up to {top:g} Hz (Nyquist)"
        )
    if f_carrier - band <= 0:
        raise ValueError(
            f"carrier {f_carrier:g} Hz is below the signal half-band {band:g} Hz"
        )
    rot = np.exp(-1j * (2 * np.pi * f_carrier * s.t))
    return s.with_samples(s.samples * rot)


def upconvert(
    s: SampleBuffer, f_carrier: float, fs_rf: float, band: Optional[float] = None, guard: float = 0.0
) -> SampleBuffer:
    """Real passband signal Re{s(t) exp(-i 2 pi f_carrier t)}."""
    pb = passband(s, f_carrier, fs_rf, band=band, guard=guard)
    return pb.with_samples(pb.samples.real)


def _check_pair(a: SampleBuffer, b: SampleBuffer) -> None:
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)} samples")
    if a.sample_rate != b.sample_rate:
        raise ValueError(f"sample-rate mismatch: {a.sample_rate:g} vs {b.sample_rate:g} Hz")


def mix(tx_real: SampleBuffer, rx_real: SampleBuffer) -> SampleBuffer:
    """Pointwise product of two real signals (a single real mixer)."""
    _check_pair(tx_real, rx_real)
    if tx_real.is_complex or rx_real.is_complex:
        raise ValueError("mix expects real signals; take the real part first")
    return tx_real.with_samples(tx_real.samples * rx_real.samples)


def quadrature_mix(lo: SampleBuffer, rx_real: SampleBuffer) -> SampleBuffer:
    """I/Q mixer: two real mixers driven by Re(lo) and Im(lo).

    After lowpass filtering the output rotates at f_rx - f_tx, so its sign
    survives (unlike :func:`mix`).
    """
    _check_pair(lo, rx_real)
    if rx_real.is_complex:
        raise ValueError("rx must be real")
    i = mix(lo.with_samples(lo.samples.real), rx_real).samples
    q = mix(lo.with_samples(lo.samples.imag), rx_real).samples
    return lo.with_samples(i + 1j * q)


# -- filtering --------------------------------------------------------------

STOPBAND_DB = 65.0


def design_lowpass(cutoff: float, fs: float, numtaps: int = 255) -> np.ndarray:
    """Kaiser-windowed linear-phase FIR; odd length so the delay is whole.

    A Hamming window bottoms out near 53 dB, so the Kaiser beta is sized for
    STOPBAND_DB instead.
    """
    if not 0 < cutoff < fs / 2:
        raise ValueError(f"cutoff {cutoff:g} Hz must lie in (0, fs/2 = {fs / 2:g} Hz)")
    if numtaps % 2 == 0:
        numtaps += 1
    beta = scipy.signal.kaiser_beta(STOPBAND_DB)
    return scipy.signal.firwin(numtaps, cutoff, window=("kaiser", beta), fs=fs)


def lowpass(s: SampleBuffer, cutoff: float, numtaps: int = 255) -> SampleBuffer:
    """Filter with :func:`design_lowpass`, removing the group delay."""
    taps = design_lowpass(cutoff, s.sample_rate, numtaps)
    delay = (len(taps) - 1) // 2
    y = scipy.signal.oaconvolve(s.samples, taps, mode="full")
    return s.with_samples(y[delay : delay + len(s)])


# -- spectra and peaks ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Spectrum:
    freqs: np.ndarray
    magnitudes: np.ndarray
    resolution: float
    window: str
    two_sided: bool = False


def baseband_spectrum(s: SampleBuffer, window: str = "rectangular", n_fft: Optional[int] = None) -> Spectrum:
    """Windowed DFT magnitude, scaled so a complex tone of amplitude A reads A.

    Real input yields the one-sided spectrum, complex input the two-sided one
    ordered from negative to positive frequency.
    """
    n = len(s)
    if n == 0:
        raise ValueError("empty buffer")
    n_fft = n if n_fft is None else int(n_fft)
    if n_fft < n:
        raise ValueError(f"n_fft = {n_fft} is shorter than the signal ({n})")
    if window == "rectangular":
        w = np.ones(n)
    elif window == "hann":
        w = scipy.signal.get_window("hann", n)
    else:
        raise ValueError(f"unknown window {window!r}; expected one of {WINDOWS}")
    x = s.samples * w
    fs = s.sample_rate
    if s.is_complex:
        X = scipy.fft.fftshift(scipy.fft.fft(x, n_fft))
        f = scipy.fft.fftshift(scipy.fft.fftfreq(n_fft, 1 / fs))
        two_sided = True
    else:
        X = scipy.fft.rfft(x, n_fft)
        f = scipy.fft.rfftfreq(n_fft, 1 / fs)
        two_sided = False
    return Spectrum(f, np.abs(X) / w.sum(), fs / n_fft, window, two_sided)


class Peak(NamedTuple):
    frequency: float
    magnitude: float
    tie: bool


def dominant_frequency(
    spec: Spectrum, search_band: Optional[Tuple[float, float]] = None, tie_rtol: float = 1e-9
) -> Peak:
    """Strongest line in ``search_band`` with parabolic sub-bin refinement.

    Distinct local maxima within ``tie_rtol`` of the maximum count as a tie;
    the lowest frequency wins and ``tie`` is set.
    """
    f, mag = spec.freqs, spec.magnitudes
    if search_band is None:
        lo, hi = f[0], f[-1]
    else:
        lo, hi = search_band
    idx = np.flatnonzero((f >= lo) & (f <= hi))
    if len(idx) == 0:
        raise ValueError(f"search band [{lo:g}, {hi:g}] Hz contains no spectral bins")
    band = mag[idx]
    top = band.max()
    if top <= 0:
        raise ValueError("spectrum is zero inside the search band")
    maxima = local_maxima(band, threshold=top * (1 - tie_rtol))
    if len(maxima) == 0:
        maxima = np.array([int(np.argmax(band))])
    i = int(idx[maxima[0]])
    p, height = parabolic_offset(mag, i)
    return Peak(float(f[i] + p * spec.resolution), float(height), len(maxima) > 1)


# -- range estimation -------------------------------------------------------

class RangeEstimate(NamedTuple):
    beat_frequency: float
    range: float
    peak_magnitude: float
    assumed_doppler: float

    @property
    def negative(self) -> bool:
        return self.range < 0


def estimate_range(
    f_beat: float,
    params: RadarParams,
    assumed_doppler: float = 0.0,
    *,
    peak_magnitude: float = float("nan"),
    signed: bool = False,
) -> RangeEstimate:
    """Range from a range-oriented beat: R = c*T/(2|df|) * (f_beat + sign(df)*f_D).

    ``assumed_doppler`` is in Hz with approaching targets positive.  Negative
    beats only arise from the quadrature receiver and need ``signed=True``.
    """
    if params.delta_f == 0:
        raise ValueError("delta_f is zero: range cannot be derived from a beat")
    if f_beat < 0 and not signed:
        raise ValueError(f"negative beat {f_beat:g} Hz from a real receiver")
    rng = params.beat_to_range * (f_beat + params.chirp_sign * assumed_doppler)
    return RangeEstimate(float(f_beat), float(rng), float(peak_magnitude), float(assumed_doppler))


class TriangularEstimate(NamedTuple):
    range: float
    doppler: float
    f_up: float
    f_down: float

    @property
    def negative(self) -> bool:
        return self.range < 0


def triangular_resolve(f_beat_up: float, f_beat_down: float, params: RadarParams) -> TriangularEstimate:
    """Range from the mean of the up- and down-sweep beats, Doppler from half
    their difference.  Negative ranges are reported, not clamped."""
    if params.delta_f == 0:
        raise ValueError("delta_f is zero")
    mean = 0.5 * (f_beat_up + f_beat_down)
    return TriangularEstimate(
        params.beat_to_range * mean, 0.5 * (f_beat_down - f_beat_up), float(f_beat_up), float(f_beat_down)
    )


class CSEstimate(NamedTuple):
    range: float
    peak_separation: float
    delay: float
    merged: bool


def cs_resolve_range(
    mf_output: SampleBuffer,
    c: float = 2.99792458e8,
    threshold: float = 0.1,
    pair_ratio: float = 0.5,
) -> CSEstimate:
    """Target range from the midpoint of the two CS matched-filter peaks.

    Local maxima below ``threshold`` times the global maximum are ignored.  The
    runner-up only counts as the second CS peak when it reaches ``pair_ratio``
    of the strongest; otherwise the peaks are treated as merged and the
    separation is 0.
    """
    mag = np.abs(mf_output.samples)
    top = mag.max() if len(mag) else 0.0
    if top <= 0:
        raise ValueError("matched-filter output is identically zero")
    cand = local_maxima(mag, threshold * top)
    if len(cand) == 0:
        raise ValueError("no local maxima above threshold")
    order = sorted(cand, key=lambda i: (-mag[i], i))
    first = order[0]
    second = next((i for i in order[1:] if mag[i] >= pair_ratio * mag[first]), None)
    fs = mf_output.sample_rate

    def lag(i: int) -> float:
        return i + parabolic_offset(mag, i)[0]

    if second is None:
        mid, sep, merged = lag(first), 0.0, True
    else:
        a, b = lag(first), lag(second)
        mid, sep, merged = 0.5 * (a + b), abs(a - b) / fs, False
    delay = mf_output.t0 + mid / fs
    return CSEstimate(c * delay / 2, sep, delay, merged)


# -- end-to-end pipeline ----------------------------------------------------

@dataclass(frozen=True)
class CaptureConfig:
    """Receiver and capture settings.  Defaults give a 20-sweep capture."""

    n_periods: int = 20
    n_fft: Optional[int] = None
    window: str = "rectangular"
    cutoff: float = 5e6
    numtaps: int = 255
    receiver: str = "real"
    tie_rtol: float = 1e-9
    peak_threshold: float = 0.1
    pair_ratio: float = 0.5

    def __post_init__(self):
        if self.n_periods < 1:
            raise ValueError(f"n_periods must be >= 1, got {self.n_periods}")
        if self.window not in WINDOWS:
            raise ValueError(f"unknown window {self.window!r}")
        if self.receiver not in RECEIVERS:
            raise ValueError(f"unknown receiver {self.receiver!r}; expected one of {RECEIVERS}")


def sweep_spec(params: RadarParams, sweep: str = "sawtooth") -> WaveformSpec:
    if sweep == "sawtooth":
        return WaveformSpec("lfm", params.T, params.sample_rate, f0=params.f0, delta_f=params.delta_f)
    if sweep == "triangular":
        return WaveformSpec("triangular", params.T, params.sample_rate, f0=params.f0, delta_f=params.delta_f)
    raise ValueError(f"unknown sweep {sweep!r}; expected one of {SWEEPS}")


def _sweep_band(params: RadarParams) -> float:
    return max(abs(params.f0), abs(params.f0 + params.delta_f))


def transmit(params: RadarParams, n_periods: int, sweep: str = "sawtooth") -> SampleBuffer:
    """Continuous transmission: ``n_periods`` back-to-back sweeps at complex baseband."""
    one = generate(sweep_spec(params, sweep))
    return SampleBuffer(np.tile(one.samples, n_periods), params.sample_rate)


def fmcw_baseband(
    params: RadarParams,
    target: TargetSpec,
    profile: ModulationProfile,
    capture: CaptureConfig = CaptureConfig(),
    sweep: str = "sawtooth",
) -> SampleBuffer:
    """Lowpassed mixer output for one scene.

    The echo is the periodic transmission delayed circularly (steady state),
    Doppler-rotated by the target's motion and phase-modulated by the
    scatterer, then both signals are carried to passband before mixing.
    """
    tx = transmit(params, capture.n_periods, sweep)
    echo = apply_phase_modulation(synthesize_echo(tx, target, params, circular=True), profile)
    band = _sweep_band(params)
    lo = passband(tx, params.f_carrier, params.sample_rate, band=band)
    f_d = doppler_from_velocity(target.radial_velocity, params.f_carrier, params.c)
    rx = passband(echo, params.f_carrier, params.sample_rate, band=band + abs(profile.f_mod) + abs(f_d))
    rx_real = rx.with_samples(rx.samples.real)
    if capture.receiver == "real":
        bb = mix(lo.with_samples(lo.samples.real), rx_real)
    else:
        bb = quadrature_mix(lo, rx_real)
    return lowpass(bb, capture.cutoff, capture.numtaps)


def _default_band(capture: CaptureConfig) -> Tuple[float, float]:
    if capture.receiver == "real":
        return (0.0, capture.cutoff)
    return (-capture.cutoff, capture.cutoff)


def _range_oriented(freq: float, slope_sign: int, receiver: str) -> float:
    # quadrature output rotates at f_rx - f_tx = -sign(slope) * (range-oriented beat)
    return freq if receiver == "real" else -slope_sign * freq


class FmcwResult(NamedTuple):
    baseband: SampleBuffer
    spectrum: Spectrum
    peak: Peak
    estimate: RangeEstimate


def run_fmcw(
    params: RadarParams,
    target: TargetSpec,
    profile: ModulationProfile = ModulationProfile(),
    capture: CaptureConfig = CaptureConfig(),
    assumed_doppler: float = 0.0,
    search_band: Optional[Tuple[float, float]] = None,
) -> FmcwResult:
    """Sawtooth FMCW measurement: mix, filter, read the dominant beat, convert to range."""
    bb = fmcw_baseband(params, target, profile, capture)
    spec = baseband_spectrum(bb, capture.window, capture.n_fft)
    peak = dominant_frequency(spec, search_band or _default_band(capture), capture.tie_rtol)
    f_beat = _range_oriented(peak.frequency, params.chirp_sign, capture.receiver)
    if capture.receiver == "real":
        f_beat = max(f_beat, 0.0)
    est = estimate_range(
        f_beat, params, assumed_doppler, peak_magnitude=peak.magnitude, signed=capture.receiver == "quadrature"
    )
    return FmcwResult(bb, spec, peak, est)


def run_triangular(
    params: RadarParams,
    target: TargetSpec,
    profile: ModulationProfile = ModulationProfile(),
    capture: CaptureConfig = CaptureConfig(),
) -> TriangularEstimate:
    """Triangular FMCW: gate the baseband into up and down half-sweeps, read
    each beat and resolve range and Doppler."""
    bb = fmcw_baseband(params, target, profile, capture, sweep="triangular")
    n_half = int(round(params.T * params.sample_rate))
    phase = np.arange(len(bb)) % (2 * n_half)
    up_gate = phase < n_half
    band = _default_band(capture)
    beats = []
    for gate, slope in ((up_gate, 1), (~up_gate, -1)):
        spec = baseband_spectrum(bb.with_samples(bb.samples * gate), capture.window, capture.n_fft)
        peak = dominant_frequency(spec, band, capture.tie_rtol)
        beats.append(_range_oriented(peak.frequency, slope, capture.receiver))
    if capture.receiver == "real":
        beats = [max(b, 0.0) for b in beats]
    return triangular_resolve(beats[0], beats[1], params)
