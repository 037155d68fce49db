"""Command-line front end: ``rangespoof <command> --scenario FILE``.

Exit codes: 0 success, 2 config error, 3 numeric or pipeline error.  Errors
are also written to stderr as a one-line JSON record.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import formats
from .ambiguity import (
    AmbiguitySurface,
    ambiguity_surface,
    check_cs_symmetry,
    coupling_ridge,
    normalize_axes,
    ridge_slope,
)
from .analysis import (
    PipelineError,
    coupling_bandwidth,
    countermeasure_eval,
    deception_sweep,
    fit_linear,
    max_range_shift,
)
from .config import OUTPUT_FORMATS, ScenarioError, effective_config, load_scenario, with_seed
from .fmcw import run_fmcw
from .scenario import Scenario
from .waveforms import generate

COMMANDS = ("ambiguity", "fmcw-sim", "sweep", "countermeasure")
EXIT_OK, EXIT_CONFIG, EXIT_PIPELINE = 0, 2, 3


class _Writer:
    """Writes artifacts into one directory and remembers their names."""

    def __init__(self, out: Path, scenario: Scenario, fmt: Sequence[str]):
        self.out = out
        self.hash = scenario.config_hash
        self.formats = tuple(fmt)
        self.written: List[str] = []
        out.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        self.written.append(name)
        return self.out / name

    def json(self, name: str, payload: dict) -> None:
        body = dict(payload, config_sha256=self.hash)
        self.path(name).write_text(json.dumps(_plain(body), indent=2, sort_keys=True) + "\n")

    def text(self, name: str, text: str) -> None:
        self.path(name).write_text(f"# config_sha256={self.hash}\n{text}")


def _plain(obj):
    """Recursively convert numpy scalars and tuples for json."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _provenance(scenario: Scenario) -> dict:
    w = scenario.waveform
    seed = w.inner.seed if w.kind == "cs" else w.seed
    return {"seed": seed, "waveform": w.kind}


# -- commands ---------------------------------------------------------------

def _surface_files(w: _Writer, name: str, surface: AmbiguitySurface) -> None:
    if "csv" in w.formats:
        formats.surface_csv(w.path(f"{name}.csv"), surface, w.hash)
    if "binary" in w.formats:
        formats.write_bytes(w.path(f"{name}.bin"), formats.encode_grid(surface, w.hash))


def cmd_ambiguity(scenario: Scenario, w: _Writer) -> dict:
    cfg = scenario.ambiguity
    buf = generate(scenario.waveform)
    surface = ambiguity_surface(buf, cfg.max_delay, cfg.doppler_span, cfg.n_doppler)
    _surface_files(w, "surface", normalize_axes(surface, scenario.radar) if cfg.normalize else surface)
    if "binary" in w.formats:
        formats.write_bytes(w.path("waveform.bin"), formats.encode_buffer(buf, w.hash))

    ridge = coupling_ridge(surface)
    formats.ridge_csv(w.path("ridge.csv"), ridge, w.hash)
    summary: Dict[str, object] = {
        "normalization": "fractional" if cfg.normalize else "raw",
        "n_samples": len(buf),
        "grid_shape": list(surface.values.shape),
        "peak_magnitude": float(surface.values.max()),
        "origin_magnitude": float(surface.values[surface.origin_index]),
        "peak_at_origin": surface.peak_index == surface.origin_index,
    }
    try:
        sym = check_cs_symmetry(surface, cfg.symmetry_tol)
        summary["symmetry"] = {"max_asymmetry": sym.max_asymmetry, "passed": sym.passed, "tol": cfg.symmetry_tol}
    except ValueError as exc:
        summary["symmetry"] = {"skipped": str(exc)}
    try:
        bw = coupling_bandwidth(scenario.waveform)
        slope, intercept, resid = ridge_slope(ridge)
        summary["ridge"] = {
            "slope_s_per_hz": slope,
            "expected_slope_s_per_hz": -scenario.waveform.T / bw if scenario.waveform.kind != "cs" else None,
            "intercept_s": intercept,
            "max_residual_s": resid,
        }
    except ValueError as exc:
        summary["ridge"] = {"skipped": str(exc)}
    summary["provenance"] = _provenance(scenario)
    w.json("summary.json", summary)
    return summary


def cmd_fmcw(scenario: Scenario, w: _Writer) -> dict:
    cap = scenario.capture
    res = run_fmcw(scenario.radar, scenario.target, scenario.modulation, cap)
    lo = 0.0 if cap.receiver == "real" else -cap.cutoff
    keep = (res.spectrum.freqs >= lo) & (res.spectrum.freqs <= cap.cutoff)
    if "csv" in w.formats:
        formats.spectrum_csv(w.path("spectrum.csv"), res.spectrum.freqs[keep], res.spectrum.magnitudes[keep], w.hash)
    if "binary" in w.formats:
        formats.write_bytes(w.path("baseband.bin"), formats.encode_buffer(res.baseband, w.hash))
    est = res.estimate
    report = {
        "beat_frequency_hz": est.beat_frequency,
        "range_m": est.range,
        "negative": est.negative,
        "peak_magnitude": est.peak_magnitude,
        "assumed_doppler_hz": est.assumed_doppler,
        "true_range_m": scenario.target.range,
        "range_bin_m": scenario.radar.range_bin,
        "spectral_resolution_hz": res.spectrum.resolution,
        "receiver": cap.receiver,
        "provenance": _provenance(scenario),
    }
    w.json("estimate.json", report)
    return report


def cmd_sweep(scenario: Scenario, w: _Writer) -> dict:
    table = deception_sweep(scenario, scenario.sweep.grid(), scenario.sweep.workers)
    formats.sweep_csv(w.path("sweep.csv"), table.rows, w.hash)
    fit = fit_linear(table)
    radar = scenario.radar
    f_max = float(np.max(np.abs(table.f_mod)))
    bound = max_range_shift(radar, f_max)
    report = {
        "slope_m_per_hz": fit.slope,
        "intercept_m": fit.intercept,
        "max_residual_m": fit.max_residual,
        "expected_abs_slope_m_per_hz": radar.beat_to_range,
        "true_range_m": table.true_range,
        "range_bin_m": radar.range_bin,
        "closer_f_mod_hz": [r.f_mod for r in table.rows if r.perceived_range < table.true_range],
        "negative_f_mod_hz": [r.f_mod for r in table.rows if r.negative],
        "max_shift_fraction": bound.fraction,
        "max_shift_m": bound.shift,
        "max_shift_note": bound.note,
        "provenance": _provenance(scenario),
    }
    w.json("fit.json", report)
    return report


def cmd_countermeasure(scenario: Scenario, w: _Writer) -> dict:
    f_mod = scenario.modulation.f_mod if scenario.modulation.kind == "linear" else 0.0
    report = countermeasure_eval(scenario, f_mod).to_dict()
    report["provenance"].update(_provenance(scenario))
    w.json("report.json", report)
    return report


_HANDLERS = {
    "ambiguity": cmd_ambiguity,
    "fmcw-sim": cmd_fmcw,
    "sweep": cmd_sweep,
    "countermeasure": cmd_countermeasure,
}


def run(command: str, scenario: Scenario, out: Path, fmt: Optional[Sequence[str]] = None) -> dict:
    """Run one command and write its artifacts (plus the effective config) into ``out``."""
    if command not in _HANDLERS:
        raise ValueError(f"unknown command {command!r}; expected one of {COMMANDS}")
    w = _Writer(out, scenario, fmt or scenario.outputs.formats)
    w.text("effective_config.ini", effective_config(scenario))
    result = _HANDLERS[command](scenario, w)
    return {"command": command, "out": str(out), "files": w.written, "result": result}


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, help="scenario file")
    common.add_argument("--out", help="output directory (default: from the scenario)")
    common.add_argument("--format", choices=OUTPUT_FORMATS, help="output format (default: from the scenario)")
    common.add_argument("--seed", type=int, help="override the waveform seed")
    common.add_argument("--quiet", action="store_true", help="print nothing on success")

    parser = argparse.ArgumentParser(prog="rangespoof", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "ambiguity": "ambiguity surface, ridge and symmetry summary",
        "fmcw-sim": "one FMCW measurement: spectrum and range estimate",
        "sweep": "perceived range versus modulation frequency, with a linear fit",
        "countermeasure": "plain, triangular and CS range estimates for one modulation",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _fail(code: int, kind: str, message: str, **extra) -> int:
    record = {"status": "error", "exit_code": code, "kind": kind, "message": message, **extra}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.scenario)
        if args.seed is not None:
            scenario = with_seed(scenario, args.seed)
    except ScenarioError as exc:
        return _fail(EXIT_CONFIG, "config", exc.message, line=exc.line, path=exc.path)

    out = Path(args.out or scenario.outputs.directory)
    fmt = (args.format,) if args.format else None
    try:
        summary = run(args.command, scenario, out, fmt)
    except (PipelineError, ValueError, ArithmeticError, RuntimeError) as exc:
        return _fail(EXIT_PIPELINE, "pipeline", str(exc), command=args.command)
    except OSError as exc:
        return _fail(EXIT_PIPELINE, "io", f"{exc.strerror}: {exc.filename}", command=args.command)

    if not args.quiet:
        print(json.dumps(_plain(summary), indent=2, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
