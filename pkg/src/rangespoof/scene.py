"""Point-target echoes and the time-modulated scatterer's phase program."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .params import SPEED_OF_LIGHT, RadarParams
from .waveforms import SampleBuffer

MODULATION_KINDS = ("none", "constant_phase", "linear", "table")


@dataclass(frozen=True)
class TargetSpec:
    """Point scatterer.  Positive ``radial_velocity`` means approaching."""

    range: float
    radial_velocity: float = 0.0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.range < 0:
            raise ValueError(f"target range must be >= 0, got {self.range}")

    def delay(self, c: float) -> float:
        return 2 * self.range / c


@dataclass(frozen=True)
class ModulationProfile:
    """Reflection-phase program phi(t) imprinted by the scatterer.

    The echo is multiplied by exp(-i * sign * phi(t)).  With the default
    ``sign = +1`` a linear program phi = 2*pi*f_mod*t with f_mod > 0 looks
    exactly like an approaching target; ``sign = -1`` flips that.
    """

    kind: str = "none"
    phase: float = 0.0
    f_mod: float = 0.0
    times: Optional[Tuple[float, ...]] = None
    phases: Optional[Tuple[float, ...]] = None
    sign: int = 1

    def __post_init__(self):
        if self.kind not in MODULATION_KINDS:
            raise ValueError(f"unknown modulation kind {self.kind!r}; expected one of {MODULATION_KINDS}")
        if self.sign not in (1, -1):
            raise ValueError(f"modulation sign must be +1 or -1, got {self.sign}")
        if self.kind == "table":
            if self.times is None or self.phases is None:
                raise ValueError("table modulation needs times and phases")
            t = np.asarray(self.times, dtype=float)
            if len(t) != len(self.phases) or len(t) < 2:
                raise ValueError("table needs at least two (time, phase) pairs of equal length")
            if np.any(np.diff(t) <= 0):
                raise ValueError("table times must be strictly increasing")
            object.__setattr__(self, "times", tuple(float(v) for v in self.times))
            object.__setattr__(self, "phases", tuple(float(v) for v in self.phases))

    @classmethod
    def none(cls) -> "ModulationProfile":
        return cls()

    @classmethod
    def constant_phase(cls, phase: float, sign: int = 1) -> "ModulationProfile":
        return cls(kind="constant_phase", phase=phase, sign=sign)

    @classmethod
    def linear(cls, f_mod: float, sign: int = 1) -> "ModulationProfile":
        return cls(kind="linear", f_mod=f_mod, sign=sign)

    @classmethod
    def table(cls, times, phases, sign: int = 1) -> "ModulationProfile":
        return cls(kind="table", times=tuple(times), phases=tuple(phases), sign=sign)

    @property
    def apparent_doppler(self) -> float:
        """Doppler (Hz, approaching positive) that a linear program mimics."""
        return self.sign * self.f_mod if self.kind == "linear" else 0.0

    def phase_at(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "none":
            return np.zeros_like(t)
        if self.kind == "constant_phase":
            return np.full_like(t, self.phase)
        if self.kind == "linear":
            return 2 * np.pi * self.f_mod * t
        times = np.asarray(self.times)
        if t.size and (t.min() < times[0] or t.max() > times[-1]):
            raise ValueError(
                f"phase table covers [{times[0]:g}, {times[-1]:g}] s but the echo spans "
                f"[{t.min():g}, {t.max():g}] s"
            )
        return np.interp(t, times, np.asarray(self.phases))


def doppler_from_velocity(v: float, f_carrier: float, c: float = SPEED_OF_LIGHT) -> float:
    """Two-way Doppler 2*v*f_c/c; positive for approaching targets."""
    return 2 * v * f_carrier / c


def doppler_rotation(t: np.ndarray, f_d: float) -> np.ndarray:
    """exp(-i 2 pi f_d t): shifts a signal up by f_d under the package convention."""
    return np.exp(-1j * (2 * np.pi * f_d * t))


def delay_samples(delay: float, sample_rate: float) -> int:
    return int(round(delay * sample_rate))


def synthesize_echo(
    tx: SampleBuffer, target: TargetSpec, params: RadarParams, *, circular: bool = False
) -> SampleBuffer:
    """Echo of ``tx`` from ``target``: scaled, delayed to the nearest sample and
    Doppler-rotated.

    With ``circular=True`` the delay wraps around, which models a steady-state
    periodic (FMCW) transmission; otherwise the leading samples are zero.
    """
    fs = tx.sample_rate
    tau = target.delay(params.c)
    if tau >= tx.duration:
        raise ValueError(
            f"echo delay {tau:g} s is not shorter than the transmit buffer ({tx.duration:g} s)"
        )
    k = delay_samples(tau, fs)
    x = tx.samples.astype(np.complex128)
    if circular:
        delayed = np.roll(x, k)
    else:
        delayed = np.zeros_like(x)
        delayed[k:] = x[: len(x) - k]
    f_d = doppler_from_velocity(target.radial_velocity, params.f_carrier, params.c)
    echo = target.amplitude * delayed
    if f_d != 0:
        echo = echo * doppler_rotation(tx.t, f_d)
    return SampleBuffer(echo, fs, tx.t0)


def apply_phase_modulation(echo: SampleBuffer, profile: ModulationProfile) -> SampleBuffer:
    if profile.kind == "none":
        return echo
    if profile.kind == "linear":
        rot = doppler_rotation(echo.t, profile.sign * profile.f_mod)
    else:
        rot = np.exp(-1j * profile.sign * profile.phase_at(echo.t))
    return echo.with_samples(echo.samples * rot)
