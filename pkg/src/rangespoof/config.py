"""Scenario files: sectioned key = value text with SI-suffixed numbers.

Loading validates every field and the cross-field invariants, fills in all
defaults and renders the effective config back as canonical text.  The SHA-256
of that text is the scenario's provenance hash.
"""

from __future__ import annotations

import configparser
import hashlib
import math
import re
from contextlib import contextmanager
from dataclasses import replace
from decimal import Decimal
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

from .fmcw import RECEIVERS, WINDOWS, CaptureConfig
from .params import SPEED_OF_LIGHT, RadarParams
from .scenario import AmbiguityConfig, OutputConfig, Scenario, SweepConfig
from .scene import MODULATION_KINDS, ModulationProfile, TargetSpec
from .waveforms import P3_VARIANTS, WAVEFORM_KINDS, WaveformSpec, generate, samples_per_period

SECTIONS = ("radar", "waveform", "target", "modulation", "capture", "sweep", "ambiguity", "outputs")
OUTPUT_FORMATS = ("csv", "binary")


class ScenarioError(ValueError):
    """Invalid scenario file; carries the offending line when known."""

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.message = message
        self.line = line
        self.path = path
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)

    def to_record(self) -> dict:
        return {"error": "config", "message": self.message, "line": self.line, "path": self.path}


# -- quantities --------------------------------------------------------------

# decimal exponents, applied exactly so 50us == 5e-05
_PREFIX = {"p": -12, "n": -9, "u": -6, "µ": -6, "m": -3, "k": 3, "M": 6, "G": 9}
_UNITS = ("Hz", "s", "m", "rad", "m/s")
_NUMBER = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*([^\s\d.+-][^\s]*)?\s*$")


def parse_quantity(text: str, unit: Optional[str] = None) -> float:
    """Parse '50us', '40MHz', '-400kHz', '150m', '1e3' and the like.

    A bare 'm' means metres, never milli.  When ``unit`` is given, any unit
    written in the text must match it.
    """
    m = _NUMBER.match(text)
    if not m:
        raise ValueError(f"cannot parse {text!r} as a number")
    number, suffix = m.group(1), m.group(2) or ""
    if not suffix:
        return float(number)
    if suffix in _UNITS:
        exp, written = 0, suffix
    elif suffix[0] in _PREFIX and (suffix[1:] in _UNITS or suffix[1:] == ""):
        exp, written = _PREFIX[suffix[0]], suffix[1:]
    else:
        raise ValueError(f"unknown unit suffix {suffix!r} in {text!r}")
    if written and unit is not None and written != unit:
        raise ValueError(f"{text!r} is in {written}, expected {unit}")
    if written and unit is None:
        raise ValueError(f"{text!r} carries a unit but this key is dimensionless")
    return float(Decimal(number).scaleb(exp))


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


# -- key schema -------------------------------------------------------------

def _float(unit: Optional[str] = None) -> Callable[[str], float]:
    def conv(text: str) -> float:
        v = parse_quantity(text, unit)
        if not math.isfinite(v):
            raise ValueError(f"{text!r} is not finite")
        return v

    return conv


def _int(text: str) -> int:
    v = parse_quantity(text)
    if not math.isfinite(v) or v != int(v):
        raise ValueError(f"{text!r} is not an integer")
    return int(v)


def _opt(conv: Callable[[str], object]) -> Callable[[str], object]:
    return lambda text: None if text.strip().lower() == "none" else conv(text)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"{text!r} is not a boolean")


def _choice(options) -> Callable[[str], str]:
    def conv(text: str) -> str:
        t = text.strip()
        if t not in options:
            raise ValueError(f"{t!r} is not one of {', '.join(options)}")
        return t

    return conv


def _list(conv: Callable[[str], object]) -> Callable[[str], tuple]:
    return lambda text: tuple(conv(p) for p in text.split(",") if p.strip())


def _sign(text: str) -> int:
    v = _int(text)
    if v not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return v


# section -> canonical key -> converter; order is the echo order
_SCHEMA: Dict[str, Dict[str, Callable[[str], object]]] = {
    "radar": {
        "prf": _float("Hz"),
        "T": _float("s"),
        "delta_f": _float("Hz"),
        "f0": _float("Hz"),
        "f_carrier": _float("Hz"),
        "sample_rate": _float("Hz"),
        "c": _float("m/s"),
    },
    "waveform": {
        "kind": _choice(WAVEFORM_KINDS),
        "inner": _opt(_choice(tuple(k for k in WAVEFORM_KINDS if k != "cs"))),
        "T": _float("s"),
        "sample_rate": _float("Hz"),
        "sigma": _float(),
        "f0": _float("Hz"),
        "delta_f": _float("Hz"),
        "M": _opt(_int),
        "p3_variant": _choice(P3_VARIANTS),
        "seed": _int,
    },
    "target": {"range": _float("m"), "radial_velocity": _float("m/s"), "amplitude": _float()},
    "modulation": {
        "kind": _choice(MODULATION_KINDS),
        "phase": _float("rad"),
        "f_mod": _float("Hz"),
        "times": _opt(_list(_float("s"))),
        "phases": _opt(_list(_float("rad"))),
        "sign": _sign,
    },
    "capture": {
        "n_periods": _int,
        "n_fft": _opt(_int),
        "window": _choice(WINDOWS),
        "cutoff": _float("Hz"),
        "numtaps": _int,
        "receiver": _choice(RECEIVERS),
        "tie_rtol": _float(),
        "peak_threshold": _float(),
        "pair_ratio": _float(),
    },
    "sweep": {"f_mod_min": _float("Hz"), "f_mod_max": _float("Hz"), "n_points": _int, "workers": _int},
    "ambiguity": {
        "max_delay": _float("s"),
        "doppler_span": _float("Hz"),
        "n_doppler": _int,
        "normalize": _bool,
        "symmetry_tol": _float(),
    },
    "outputs": {"directory": str.strip, "formats": _list(_choice(OUTPUT_FORMATS))},
}

_REQUIRED = {"radar": ("prf", "T", "delta_f", "sample_rate"), "waveform": ("kind",)}


# -- parsing ----------------------------------------------------------------

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^([^\s#;=:][^=:]*?)\s*[=:]")


def _line_index(text: str) -> Tuple[Dict[str, int], Dict[Tuple[str, str], int]]:
    sections: Dict[str, int] = {}
    keys: Dict[Tuple[str, str], int] = {}
    current = None
    for n, line in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(line)
        if m:
            current = m.group(1).strip().lower()
            sections.setdefault(current, n)
            continue
        m = _KEY_RE.match(line)
        if m and current is not None:
            keys.setdefault((current, m.group(1).strip().lower()), n)
    return sections, keys


class _Raw:
    """Parsed text plus line lookups for error messages."""

    def __init__(self, text: str, path: Optional[str]):
        self.path = path
        cp = configparser.ConfigParser(
            interpolation=None, inline_comment_prefixes=("#", ";"), default_section="__defaults__"
        )
        cp.optionxform = str.lower
        try:
            cp.read_string(text)
        except configparser.MissingSectionHeaderError as exc:
            raise ScenarioError("key outside any [section]", exc.lineno, path) from None
        except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as exc:
            raise ScenarioError(exc.message.split(":", 1)[-1].strip(), exc.lineno, path) from None
        except configparser.ParsingError as exc:
            lineno = exc.errors[0][0] if exc.errors else None
            raise ScenarioError("cannot parse line (expected 'key = value')", lineno, path) from None
        self.cp = cp
        self.section_lines, self.key_lines = _line_index(text)

    def line(self, section: str, key: Optional[str] = None) -> Optional[int]:
        if key is not None and (section, key.lower()) in self.key_lines:
            return self.key_lines[(section, key.lower())]
        return self.section_lines.get(section)

    def error(self, message: str, section: str, key: Optional[str] = None) -> ScenarioError:
        return ScenarioError(message, self.line(section, key), self.path)

    def read(self) -> Dict[str, Dict[str, object]]:
        out: Dict[str, Dict[str, object]] = {}
        for section in self.cp.sections():
            name = section.strip().lower()
            if name not in _SCHEMA:
                raise self.error(f"unknown section [{section}]; expected one of {', '.join(SECTIONS)}", name)
            schema = {k.lower(): (k, conv) for k, conv in _SCHEMA[name].items()}
            values: Dict[str, object] = {}
            for key, text in self.cp.items(section):
                if key not in schema:
                    raise self.error(f"unknown key {key!r} in [{name}]", name, key)
                canon, conv = schema[key]
                try:
                    values[canon] = conv(text)
                except ValueError as exc:
                    raise self.error(f"[{name}] {canon}: {exc}", name, key) from None
            out[name] = values
        for name, keys in _REQUIRED.items():
            if name not in out:
                raise ScenarioError(f"missing required section [{name}]", None, self.path)
            for key in keys:
                if key not in out[name]:
                    raise self.error(f"[{name}] is missing required key {key!r}", name)
        return out


# -- building ---------------------------------------------------------------

@contextmanager
def _guard(raw: _Raw, section: str, keys=()):
    """Turn a ValueError from a constructor into a ScenarioError at the best line."""
    try:
        yield
    except ScenarioError:
        raise
    except ValueError as exc:
        msg = str(exc)
        key = next((k for k in keys if k in msg), keys[0] if keys else None)
        raise raw.error(f"[{section}] {msg}", section, key) from None


def _build(raw: _Raw, vals: Dict[str, Dict[str, object]]) -> Scenario:
    r = vals["radar"]
    with _guard(raw, "radar", ("prf", "T", "sample_rate", "c")):
        sample_rate = r["sample_rate"]
        radar = RadarParams(
            prf=r["prf"],
            T=r["T"],
            delta_f=r["delta_f"],
            f0=r.get("f0", 0.0),
            f_carrier=r.get("f_carrier", sample_rate / 4),
            sample_rate=sample_rate,
            c=r.get("c", SPEED_OF_LIGHT),
        )
    with _guard(raw, "radar", ("T", "sample_rate")):
        samples_per_period(radar.T, radar.sample_rate)

    w = vals["waveform"]
    kind = w["kind"]
    inner_kind = w.get("inner")
    if kind == "cs" and inner_kind is None:
        raise raw.error("cs waveform needs an 'inner' kind", "waveform", "kind")
    if kind != "cs" and inner_kind is not None:
        raise raw.error(f"'inner' only applies to cs waveforms, not {kind}", "waveform", "inner")
    base_kind = inner_kind if kind == "cs" else kind
    wT = w.get("T", radar.T)
    if not math.isclose(wT, radar.T, rel_tol=1e-12):
        raise raw.error(f"waveform T = {wT!r} s differs from radar T = {radar.T!r} s", "waveform", "T")
    M = w.get("M")
    if base_kind == "p3" and M is None:
        raise raw.error("p3 waveform needs M (number of chips)", "waveform", "kind")
    spec = WaveformSpec(
        base_kind,
        T=wT,
        sample_rate=w.get("sample_rate", radar.sample_rate),
        sigma=w.get("sigma", 1.0),
        f0=w.get("f0", radar.f0),
        delta_f=w.get("delta_f", radar.delta_f),
        M=M,
        p3_variant=w.get("p3_variant", "literal"),
        seed=w.get("seed", 0),
    )
    if kind == "cs":
        spec = WaveformSpec("cs", T=spec.T, sample_rate=spec.sample_rate, seed=spec.seed, inner=spec)
    with _guard(raw, "waveform", ("T", "sample_rate", "M", "sigma", "delta_f", "f0", "p3_variant")):
        generate(spec)

    band = max(abs(radar.f0), abs(radar.f0 + radar.delta_f))
    if radar.f_carrier <= band:
        raise raw.error(
            f"f_carrier = {radar.f_carrier!r} Hz must exceed the sweep band edge {band!r} Hz", "radar", "f_carrier"
        )
    if radar.sample_rate <= 2 * (radar.f_carrier + band):
        raise raw.error(
            f"sample_rate = {radar.sample_rate!r} Hz is below Nyquist for a carrier of "
            f"{radar.f_carrier!r} Hz plus a {band!r} Hz sweep",
            "radar",
            "sample_rate",
        )

    t = vals.get("target", {})
    with _guard(raw, "target", ("range", "amplitude")):
        target = TargetSpec(t.get("range", 0.0), t.get("radial_velocity", 0.0), t.get("amplitude", 1.0))
    if target.delay(radar.c) >= radar.T:
        raise raw.error(
            f"echo delay {target.delay(radar.c)!r} s is not shorter than T = {radar.T!r} s", "target", "range"
        )

    m = vals.get("modulation", {})
    with _guard(raw, "modulation", ("times", "phases", "kind", "sign")):
        modulation = ModulationProfile(
            kind=m.get("kind", "none"),
            phase=m.get("phase", 0.0),
            f_mod=m.get("f_mod", 0.0),
            times=m.get("times"),
            phases=m.get("phases"),
            sign=m.get("sign", 1),
        )

    c = vals.get("capture", {})
    with _guard(raw, "capture", ("n_periods", "window", "receiver", "numtaps", "cutoff")):
        capture = CaptureConfig(
            n_periods=c.get("n_periods", 20),
            n_fft=c.get("n_fft"),
            window=c.get("window", "rectangular"),
            cutoff=c.get("cutoff", min(5e6, radar.sample_rate / 8)),
            numtaps=c.get("numtaps", 255),
            receiver=c.get("receiver", "real"),
            tie_rtol=c.get("tie_rtol", 1e-9),
            peak_threshold=c.get("peak_threshold", 0.1),
            pair_ratio=c.get("pair_ratio", 0.5),
        )
    n_capture = capture.n_periods * samples_per_period(radar.T, radar.sample_rate)
    if capture.n_fft is not None and capture.n_fft < n_capture:
        raise raw.error(f"n_fft = {capture.n_fft} is shorter than the {n_capture}-sample capture", "capture", "n_fft")
    if not 0 < capture.cutoff < radar.sample_rate / 2:
        raise raw.error("cutoff must lie between 0 and sample_rate/2", "capture", "cutoff")
    if capture.numtaps < 3 or capture.numtaps % 2 == 0:
        raise raw.error("numtaps must be an odd integer >= 3", "capture", "numtaps")
    for key in ("peak_threshold", "pair_ratio"):
        if not 0 < getattr(capture, key) <= 1:
            raise raw.error(f"{key} must lie in (0, 1]", "capture", key)

    s = vals.get("sweep", {})
    sweep = SweepConfig(
        s.get("f_mod_min", -400e3), s.get("f_mod_max", 400e3), s.get("n_points", 21), s.get("workers", 1)
    )
    if sweep.n_points < 2:
        raise raw.error("n_points must be >= 2", "sweep", "n_points")
    if sweep.f_mod_max <= sweep.f_mod_min:
        raise raw.error("f_mod_max must exceed f_mod_min", "sweep", "f_mod_max")
    if max(abs(sweep.f_mod_min), abs(sweep.f_mod_max)) >= capture.cutoff:
        raise raw.error("the sweep range must stay inside the lowpass cutoff", "sweep", "f_mod_max")
    if sweep.workers < 1:
        raise raw.error("workers must be >= 1", "sweep", "workers")

    a = vals.get("ambiguity", {})
    fs_w = spec.sample_rate
    ambiguity = AmbiguityConfig(
        max_delay=a.get("max_delay", spec.duration - 1 / fs_w),
        doppler_span=a.get("doppler_span", _default_span(radar, spec)),
        n_doppler=a.get("n_doppler", 101),
        normalize=a.get("normalize", radar.delta_f != 0),
        symmetry_tol=a.get("symmetry_tol", 1e-6),
    )
    if not 0 <= ambiguity.max_delay < spec.duration:
        raise raw.error("max_delay must be non-negative and shorter than the waveform", "ambiguity", "max_delay")
    if ambiguity.doppler_span < 0:
        raise raw.error("doppler_span must be non-negative", "ambiguity", "doppler_span")
    if ambiguity.n_doppler < 1:
        raise raw.error("n_doppler must be >= 1", "ambiguity", "n_doppler")
    if ambiguity.normalize and radar.delta_f == 0:
        raise raw.error("normalized axes need a nonzero radar delta_f", "ambiguity", "normalize")

    o = vals.get("outputs", {})
    formats = o.get("formats", ("csv",))
    if not formats:
        raise raw.error("formats must name at least one format", "outputs", "formats")
    outputs = OutputConfig(o.get("directory", "out"), tuple(formats))
    return Scenario(radar, spec, target, modulation, capture, sweep, ambiguity, outputs)


def _default_span(radar: RadarParams, spec: WaveformSpec) -> float:
    if radar.delta_f != 0:
        return abs(radar.delta_f)
    base = spec.inner if spec.kind == "cs" else spec
    if base.kind == "p3":
        return base.M / base.T
    if base.delta_f != 0:
        return abs(base.delta_f)
    return 10 / base.T


# -- echo -------------------------------------------------------------------

def effective_config(scenario: Scenario) -> str:
    """Canonical text of the fully materialized scenario."""
    r, w, t, m = scenario.radar, scenario.waveform, scenario.target, scenario.modulation
    base = w.inner if w.kind == "cs" else w
    sections = {
        "radar": {
            "prf": r.prf, "T": r.T, "delta_f": r.delta_f, "f0": r.f0,
            "f_carrier": r.f_carrier, "sample_rate": r.sample_rate, "c": r.c,
        },
        "waveform": {
            "kind": w.kind,
            "inner": base.kind if w.kind == "cs" else None,
            "T": base.T, "sample_rate": base.sample_rate, "sigma": base.sigma, "f0": base.f0,
            "delta_f": base.delta_f, "M": base.M, "p3_variant": base.p3_variant, "seed": base.seed,
        },
        "target": {"range": t.range, "radial_velocity": t.radial_velocity, "amplitude": t.amplitude},
        "modulation": {
            "kind": m.kind, "phase": m.phase, "f_mod": m.f_mod,
            "times": m.times, "phases": m.phases, "sign": m.sign,
        },
        "capture": dict(vars(scenario.capture)),
        "sweep": dict(vars(scenario.sweep)),
        "ambiguity": dict(vars(scenario.ambiguity)),
        "outputs": {"directory": scenario.outputs.directory, "formats": scenario.outputs.formats},
    }
    lines: List[str] = []
    for name in SECTIONS:
        lines.append(f"[{name}]")
        for key in _SCHEMA[name]:
            lines.append(f"{key} = {_fmt(sections[name][key])}")
        lines.append("")
    return "\n".join(lines)


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def finalize(scenario: Scenario) -> Scenario:
    """Attach the hash of the effective config."""
    return replace(scenario, config_hash=config_hash(effective_config(scenario)))


def parse_scenario(text: str, path: Optional[str] = None) -> Scenario:
    raw = _Raw(text, path)
    return finalize(_build(raw, raw.read()))


def load_scenario(path: Union[str, Path]) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file: {exc.strerror}", None, str(p)) from None
    return parse_scenario(text, str(p))


def with_seed(scenario: Scenario, seed: int) -> Scenario:
    """Override the waveform seed and rehash."""
    w = scenario.waveform
    if w.kind == "cs":
        w = replace(w, seed=seed, inner=replace(w.inner, seed=seed))
    else:
        w = replace(w, seed=seed)
    return finalize(replace(scenario, waveform=w))
