"""Scenario: everything one experiment run needs, as plain frozen dataclasses."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .fmcw import CaptureConfig
from .params import RadarParams
from .scene import ModulationProfile, TargetSpec
from .waveforms import WaveformSpec


@dataclass(frozen=True)
class SweepConfig:
    f_mod_min: float = -400e3
    f_mod_max: float = 400e3
    n_points: int = 21
    workers: int = 1

    def grid(self) -> np.ndarray:
        if self.n_points < 2:
            raise ValueError("a sweep needs at least two points")
        return np.linspace(self.f_mod_min, self.f_mod_max, self.n_points)


@dataclass(frozen=True)
class AmbiguityConfig:
    max_delay: Optional[float] = None
    doppler_span: Optional[float] = None
    n_doppler: int = 101
    normalize: bool = True
    symmetry_tol: float = 1e-6


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    formats: Tuple[str, ...] = ("csv",)


@dataclass(frozen=True)
class Scenario:
    radar: RadarParams
    waveform: WaveformSpec
    target: TargetSpec = TargetSpec(range=0.0)
    modulation: ModulationProfile = ModulationProfile()
    capture: CaptureConfig = CaptureConfig()
    sweep: SweepConfig = SweepConfig()
    ambiguity: AmbiguityConfig = AmbiguityConfig()
    outputs: OutputConfig = OutputConfig()
    config_hash: str = field(default="", compare=False)
