"""Scenario-level experiments: the perceived-range sweep, its linear fit, the
attainable-shift bound and the countermeasure comparison."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from .ambiguity import matched_filter_output
from .fmcw import CSEstimate, cs_resolve_range, run_fmcw, run_triangular, sweep_spec
from .params import RadarParams
from .scenario import Scenario
from .scene import ModulationProfile, TargetSpec, apply_phase_modulation, synthesize_echo
from .waveforms import SampleBuffer, WaveformSpec, cs_of, generate


class PipelineError(RuntimeError):
    """A simulation step failed for a specific sweep point."""


class SweepRow(NamedTuple):
    f_mod: float
    perceived_range: float
    peak_magnitude: float

    @property
    def negative(self) -> bool:
        return self.perceived_range < 0


@dataclass(frozen=True)
class SweepTable:
    rows: List[SweepRow]
    true_range: float
    params: RadarParams
    provenance: Dict[str, str] = field(default_factory=dict)

    @property
    def f_mod(self) -> np.ndarray:
        return np.array([r.f_mod for r in self.rows])

    @property
    def perceived_range(self) -> np.ndarray:
        return np.array([r.perceived_range for r in self.rows])


def _static(scenario: Scenario) -> None:
    if scenario.target.radial_velocity != 0:
        raise ValueError("the deception sweep needs a static target (radial_velocity = 0)")


def deception_sweep(scenario: Scenario, f_mod_list: Sequence[float], workers: int = 1) -> SweepTable:
    """Perceived range for each modulation frequency, read with zero assumed
    Doppler as a plain FMCW radar would.

    Rows come back sorted by f_mod whatever the worker count.
    """
    _static(scenario)
    cutoff = scenario.capture.cutoff
    freqs = sorted(float(f) for f in f_mod_list)
    for f in freqs:
        if abs(f) >= cutoff:
            raise ValueError(f"f_mod = {f:g} Hz falls outside the {cutoff:g} Hz baseband passband")
    sign = scenario.modulation.sign

    def one(f_mod: float) -> SweepRow:
        try:
            res = run_fmcw(scenario.radar, scenario.target, ModulationProfile.linear(f_mod, sign), scenario.capture)
        except Exception as exc:
            raise PipelineError(f"sweep point f_mod = {f_mod:g} Hz failed: {exc}") from exc
        return SweepRow(f_mod, res.estimate.range, res.estimate.peak_magnitude)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, freqs))
    else:
        rows = [one(f) for f in freqs]
    prov = {"config_sha256": scenario.config_hash} if scenario.config_hash else {}
    return SweepTable(rows, scenario.target.range, scenario.radar, prov)


class LinearFit(NamedTuple):
    slope: float
    intercept: float
    max_residual: float


def fit_linear(table: SweepTable) -> LinearFit:
    """Least-squares line through (f_mod, perceived_range)."""
    x, y = table.f_mod, table.perceived_range
    if len(x) < 2:
        raise ValueError("need at least two sweep rows to fit a line")
    if np.ptp(x) == 0:
        raise ValueError("all f_mod values are equal; the fit is degenerate")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return LinearFit(float(slope), float(intercept), float(np.max(np.abs(resid))))


class ShiftBound(NamedTuple):
    fraction: float
    shift: float
    note: str


def max_range_shift(params: RadarParams, f_mod_max: float) -> ShiftBound:
    """Largest range shift from a fake Doppler of ``f_mod_max``, as a fraction of
    the unambiguous range: PRF * T * f_mod_max / |delta_f|."""
    if f_mod_max < 0:
        raise ValueError("f_mod_max must be non-negative")
    shift = params.beat_to_range * f_mod_max
    fraction = params.prf * params.T * (f_mod_max / abs(params.delta_f))
    note = (
        "the fraction scales as PRF*T/|delta_f|: a wider sweep or a lower PRF "
        "shrinks the attainable shift"
    )
    return ShiftBound(fraction, shift, note)


def coupling_bandwidth(spec: WaveformSpec) -> float:
    """Signed bandwidth that sets delay/Doppler coupling for a waveform family."""
    if spec.kind == "cs":
        return coupling_bandwidth(spec.inner)
    if spec.kind in ("lfm", "triangular"):
        return spec.delta_f
    if spec.kind == "p3":
        return spec.M / spec.T
    raise ValueError(f"{spec.kind} waveforms have no range-Doppler coupling")


class CSMeasurement(NamedTuple):
    estimate: CSEstimate
    doppler_magnitude: float
    peak_magnitude: float


def cs_measure(
    params: RadarParams,
    target: TargetSpec,
    profile: ModulationProfile,
    inner: Optional[WaveformSpec] = None,
    threshold: float = 0.1,
    pair_ratio: float = 0.5,
) -> CSMeasurement:
    """Pulse the CS version of ``inner`` at the target and resolve range from
    the matched-filter peak pair.

    The pulse is followed by an equally long listening window so the echo is
    never truncated.  |Doppler| follows from the peak separation; its sign is
    lost to the CS symmetry.
    """
    inner = inner or sweep_spec(params)
    cs_spec = inner if inner.kind == "cs" else cs_of(inner)
    pulse = generate(cs_spec)
    window = SampleBuffer(np.concatenate([pulse.samples, np.zeros(len(pulse))]), pulse.sample_rate)
    echo = apply_phase_modulation(synthesize_echo(window, target, params), profile)
    mf = matched_filter_output(pulse, echo)
    est = cs_resolve_range(mf, params.c, threshold, pair_ratio)
    bw = abs(coupling_bandwidth(cs_spec))
    T_inner = cs_spec.inner.T
    return CSMeasurement(est, bw * est.peak_separation / (2 * T_inner), float(np.abs(mf.samples).max()))


@dataclass(frozen=True)
class CountermeasureReport:
    f_mod: float
    true_range: float
    plain_range: float
    triangular_range: float
    cs_range: float
    plain_bias: float
    expected_plain_bias: float
    residual_biases: Dict[str, float]
    triangular_doppler: float
    cs_doppler_magnitude: float
    range_bin: float
    provenance: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "f_mod_hz": self.f_mod,
            "true_range_m": self.true_range,
            "plain_range_m": self.plain_range,
            "triangular_range_m": self.triangular_range,
            "cs_range_m": self.cs_range,
            "plain_bias_m": self.plain_bias,
            "expected_plain_bias_m": self.expected_plain_bias,
            "residual_biases_m": dict(self.residual_biases),
            "triangular_doppler_hz": self.triangular_doppler,
            "cs_doppler_magnitude_hz": self.cs_doppler_magnitude,
            "range_bin_m": self.range_bin,
            "provenance": dict(self.provenance),
        }


def _cs_inner(scenario: Scenario) -> WaveformSpec:
    wf = scenario.waveform
    if wf.kind in ("cs", "lfm", "p3"):
        return wf
    return sweep_spec(scenario.radar)


def countermeasure_eval(scenario: Scenario, f_mod: float) -> CountermeasureReport:
    """Run the plain, triangular and CS paths on the same modulated target."""
    params = scenario.radar
    profile = ModulationProfile.linear(f_mod, scenario.modulation.sign)
    cap = scenario.capture
    plain = run_fmcw(params, scenario.target, profile, cap).estimate
    tri = run_triangular(params, scenario.target, profile, cap)
    cs = cs_measure(params, scenario.target, profile, _cs_inner(scenario), cap.peak_threshold, cap.pair_ratio)
    true_range = scenario.target.range
    expected = -params.chirp_sign * params.beat_to_range * profile.apparent_doppler
    prov = {"config_sha256": scenario.config_hash} if scenario.config_hash else {}
    return CountermeasureReport(
        f_mod=float(f_mod),
        true_range=true_range,
        plain_range=plain.range,
        triangular_range=tri.range,
        cs_range=cs.estimate.range,
        plain_bias=plain.range - true_range,
        expected_plain_bias=expected,
        residual_biases={"triangular": tri.range - true_range, "cs": cs.estimate.range - true_range},
        triangular_doppler=tri.doppler,
        cs_doppler_magnitude=cs.doppler_magnitude,
        range_bin=params.range_bin,
        provenance=prov,
    )
