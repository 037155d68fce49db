"""Transmit waveform synthesis: noise, LFM chirps, P3 polyphase codes,
triangular FMCW sweeps and the conjugate-symmetric (CS) wrapper.

All complex signals follow the exp(-i*omega*t) convention: a sample sequence
exp(-i*phi[n]) has instantaneous frequency +dphi/dt / 2pi.  Signals live on the
uniform grid t_n = t0 + n / sample_rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

WAVEFORM_KINDS = ("noise", "lfm", "p3", "cs", "triangular")
P3_VARIANTS = ("literal", "standard")


@dataclass(frozen=True, eq=False)
class SampleBuffer:
    """Uniformly sampled signal with its sample rate and start time.

    The sample array is stored read-only so buffers can be shared freely.
    """

    samples: np.ndarray
    sample_rate: float
    t0: float = 0.0

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        arr = np.array(self.samples, copy=True)
        if arr.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if np.iscomplexobj(arr):
            arr = arr.astype(np.complex128)
        else:
            arr = arr.astype(np.float64)
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))
        object.__setattr__(self, "t0", float(self.t0))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.samples)

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    @property
    def t(self) -> np.ndarray:
        return self.t0 + np.arange(len(self)) / self.sample_rate

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2))

    def with_samples(self, samples: np.ndarray) -> "SampleBuffer":
        return SampleBuffer(samples, self.sample_rate, self.t0)


@dataclass(frozen=True)
class WaveformSpec:
    """Declarative description of a transmit waveform.

    ``T`` is the duration of one pulse or sweep.  For ``cs`` the parameters of
    the wrapped waveform live in ``inner`` and the result lasts 2T; a
    ``triangular`` sweep is an up chirp followed by a down chirp, also 2T long.
    ``delta_f`` is signed: positive sweeps up, negative sweeps down.
    """

    kind: str
    T: float
    sample_rate: float
    sigma: float = 1.0
    f0: float = 0.0
    delta_f: float = 0.0
    M: Optional[int] = None
    p3_variant: str = "literal"
    seed: Optional[int] = None
    inner: Optional["WaveformSpec"] = field(default=None, compare=True)

    @property
    def n_samples(self) -> int:
        return samples_per_period(self.T, self.sample_rate)

    @property
    def duration(self) -> float:
        if self.kind == "cs":
            return 2 * self.inner.duration
        if self.kind == "triangular":
            return 2 * self.T
        return self.T


def samples_per_period(T: float, sample_rate: float) -> int:
    """Return T*sample_rate as an int, refusing anything off the sample grid."""
    if not T > 0:
        raise ValueError(f"duration T must be positive, got {T}")
    if not sample_rate > 0:
        raise ValueError(f"sample_rate must be positive, got {sample_rate}")
    n = T * sample_rate
    n_int = int(round(n))
    if n_int < 1 or abs(n - n_int) > 1e-6 * max(1.0, n):
        raise ValueError(
            f"T*sample_rate = {n!r} is not a positive integer; the pulse must "
            "cover a whole number of samples"
        )
    return n_int


def _expect_kind(spec: WaveformSpec, kind: str) -> None:
    if spec.kind != kind:
        raise ValueError(f"expected a {kind!r} spec, got {spec.kind!r}")


def gen_noise(spec: WaveformSpec) -> SampleBuffer:
    """Zero-mean circular complex Gaussian noise with E|s|^2 = sigma^2."""
    _expect_kind(spec, "noise")
    if not spec.sigma > 0:
        raise ValueError(f"noise sigma must be positive, got {spec.sigma}")
    if spec.seed is None:
        raise ValueError("noise waveform needs an explicit seed")
    n = spec.n_samples
    rng = np.random.default_rng(spec.seed)
    scale = spec.sigma / np.sqrt(2.0)
    samples = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return SampleBuffer(samples, spec.sample_rate)


def _check_chirp_band(f0: float, delta_f: float, sample_rate: float) -> None:
    nyquist = sample_rate / 2
    if abs(delta_f) >= nyquist:
        raise ValueError(
            f"|delta_f| = {abs(delta_f):g} Hz aliases at sample rate {sample_rate:g} Hz"
        )
    if max(abs(f0), abs(f0 + delta_f)) >= nyquist:
        raise ValueError(
            f"chirp band [{f0:g}, {f0 + delta_f:g}] Hz exceeds Nyquist {nyquist:g} Hz"
        )


def lfm_phase(t: np.ndarray, T: float, f0: float, delta_f: float) -> np.ndarray:
    """Chirp phase 2*pi*(f0 + delta_f*t/(2T))*t; frequency sweeps f0 -> f0+delta_f."""
    return 2 * np.pi * (f0 + delta_f / (2 * T) * t) * t


def gen_lfm(spec: WaveformSpec) -> SampleBuffer:
    _expect_kind(spec, "lfm")
    _check_chirp_band(spec.f0, spec.delta_f, spec.sample_rate)
    n = spec.n_samples
    t = np.arange(n) / spec.sample_rate
    return SampleBuffer(np.exp(-1j * lfm_phase(t, spec.T, spec.f0, spec.delta_f)), spec.sample_rate)


def p3_chip_phases(M: int, variant: str = "literal") -> np.ndarray:
    """Phase of each of the M chips, indexed m = 1..M.

    ``literal`` uses (m-1)^2 for even m and (m-1)*m for odd m, in raw
    radians.  ``standard`` is the textbook P3 code pi*(m-1)^2/M.
    """
    if M < 2:
        raise ValueError(f"P3 code needs M >= 2 chips, got {M}")
    m = np.arange(1, M + 1, dtype=np.float64)
    if variant == "literal":
        return np.where(m % 2 == 0, (m - 1) ** 2, (m - 1) * m)
    if variant == "standard":
        return np.pi * (m - 1) ** 2 / M
    raise ValueError(f"unknown p3_variant {variant!r}; expected one of {P3_VARIANTS}")


def gen_p3(spec: WaveformSpec) -> SampleBuffer:
    _expect_kind(spec, "p3")
    if spec.M is None or spec.M < 2:
        raise ValueError(f"P3 code needs M >= 2 chips, got {spec.M}")
    n = spec.n_samples
    if n % spec.M:
        raise ValueError(f"M = {spec.M} does not divide N = {n}; fractional chips are not supported")
    phases = p3_chip_phases(spec.M, spec.p3_variant)
    chip = (np.arange(n) * spec.M) // n
    return SampleBuffer(np.exp(-1j * phases[chip]), spec.sample_rate)


def gen_triangular(spec: WaveformSpec) -> SampleBuffer:
    """Phase-continuous up/down sweep over [f0, f0 + |delta_f|], total length 2T."""
    _expect_kind(spec, "triangular")
    bw = abs(spec.delta_f)
    lo = min(spec.f0, spec.f0 + spec.delta_f)
    _check_chirp_band(lo, bw, spec.sample_rate)
    n = spec.n_samples
    t = np.arange(2 * n) / spec.sample_rate
    up = lfm_phase(t[:n], spec.T, lo, bw)
    t_down = t[n:] - spec.T
    phase_turn = lfm_phase(np.array(spec.T), spec.T, lo, bw)
    down = phase_turn + lfm_phase(t_down, spec.T, lo + bw, -bw)
    return SampleBuffer(np.exp(-1j * np.concatenate([up, down])), spec.sample_rate)


def make_conjugate_symmetric(s: SampleBuffer) -> SampleBuffer:
    """Append the time-reversed conjugate: c = [s, conj(s[::-1])].

    The mirror axis lies between samples N-1 and N, so c[N-1-k] == conj(c[N+k]).
    """
    if len(s) == 0:
        raise ValueError("cannot symmetrize an empty buffer")
    x = s.samples
    return SampleBuffer(np.concatenate([x, np.conj(x[::-1])]), s.sample_rate, s.t0)


def generate(spec: WaveformSpec) -> SampleBuffer:
    """Dispatch on ``spec.kind``."""
    if spec.kind == "noise":
        return gen_noise(spec)
    if spec.kind == "lfm":
        return gen_lfm(spec)
    if spec.kind == "p3":
        return gen_p3(spec)
    if spec.kind == "triangular":
        return gen_triangular(spec)
    if spec.kind == "cs":
        if spec.inner is None:
            raise ValueError("cs waveform needs an inner spec")
        if spec.inner.kind == "cs":
            raise ValueError("nested cs waveforms are not supported")
        return make_conjugate_symmetric(generate(spec.inner))
    raise ValueError(f"unknown waveform kind {spec.kind!r}; expected one of {WAVEFORM_KINDS}")


def cs_of(inner: WaveformSpec) -> WaveformSpec:
    """Wrap ``inner`` in a cs spec sharing its timing."""
    return WaveformSpec("cs", T=inner.T, sample_rate=inner.sample_rate, inner=inner)


def with_sample_rate(spec: WaveformSpec, sample_rate: float) -> WaveformSpec:
    inner = with_sample_rate(spec.inner, sample_rate) if spec.inner is not None else None
    return replace(spec, sample_rate=sample_rate, inner=inner)


def instantaneous_frequency(s: SampleBuffer, min_magnitude: float = 1e-9) -> np.ndarray:
    """Finite-difference instantaneous frequency in Hz, length N-1.

    Uses the package's exp(-i*omega*t) convention, so an up chirp gives a rising
    ramp.
    """
    if not s.is_complex:
        raise ValueError("instantaneous frequency needs a complex (analytic) signal")
    mag = np.abs(s.samples)
    if mag.size and (mag.max() == 0 or mag.min() < min_magnitude * mag.max()):
        raise ValueError("signal has near-zero samples; phase is undefined there")
    phase = np.unwrap(np.angle(s.samples))
    return -np.diff(phase) * s.sample_rate / (2 * np.pi)
