"""Radar range deception with time-modulated scatterers, and the
conjugate-symmetric waveform countermeasure, simulated end to end."""

from .ambiguity import AmbiguitySurface, ambiguity_surface, check_cs_symmetry, matched_filter_output
from .analysis import countermeasure_eval, deception_sweep, fit_linear, max_range_shift
from .config import ScenarioError, load_scenario
from .fmcw import CaptureConfig, run_fmcw, run_triangular
from .params import RadarParams
from .scenario import Scenario
from .scene import ModulationProfile, TargetSpec, apply_phase_modulation, synthesize_echo
from .waveforms import SampleBuffer, WaveformSpec, generate, make_conjugate_symmetric

__version__ = "0.1.0"

__all__ = [
    "AmbiguitySurface",
    "CaptureConfig",
    "ModulationProfile",
    "RadarParams",
    "SampleBuffer",
    "Scenario",
    "ScenarioError",
    "TargetSpec",
    "WaveformSpec",
    "ambiguity_surface",
    "apply_phase_modulation",
    "check_cs_symmetry",
    "countermeasure_eval",
    "deception_sweep",
    "fit_linear",
    "generate",
    "load_scenario",
    "make_conjugate_symmetric",
    "matched_filter_output",
    "max_range_shift",
    "run_fmcw",
    "run_triangular",
    "synthesize_echo",
]
