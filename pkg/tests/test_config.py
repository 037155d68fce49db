import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rangespoof.config import (
    ScenarioError,
    effective_config,
    load_scenario,
    parse_quantity,
    parse_scenario,
    with_seed,
)

MINIMAL = """\
[radar]
prf = 20kHz
T = 50us
delta_f = -40MHz
sample_rate = 240MHz

[waveform]
kind = lfm
"""


def test_parse_quantity_prefixes():
    assert parse_quantity("50us", "s") == 5e-05
    assert parse_quantity("40MHz", "Hz") == 40e6
    assert parse_quantity("-400kHz", "Hz") == -400e3
    assert parse_quantity("150m", "m") == 150.0
    assert parse_quantity("1.5e3") == 1500.0
    assert parse_quantity("3mm", "m") == 0.003


def test_parse_quantity_rejects_bad_input():
    with pytest.raises(ValueError, match="expected Hz"):
        parse_quantity("5us", "Hz")
    with pytest.raises(ValueError, match="unknown unit"):
        parse_quantity("5parsecs", "m")
    with pytest.raises(ValueError, match="cannot parse"):
        parse_quantity("fast", "Hz")
    with pytest.raises(ValueError, match="dimensionless"):
        parse_quantity("3Hz")


@given(st.integers(-10**9, 10**9), st.sampled_from([("k", 3), ("M", 6), ("u", -6), ("n", -9)]))
def test_parse_quantity_prefix_is_exact(mantissa, prefix):
    letter, exp = prefix
    assert parse_quantity(f"{mantissa}{letter}Hz", "Hz") == float(f"{mantissa}e{exp}")


def test_minimal_defaults_are_echoed():
    sc = parse_scenario(MINIMAL)
    text = effective_config(sc)
    assert "f_carrier = 60000000.0" in text
    assert "cutoff = 5000000.0" in text
    assert "receiver = real" in text
    assert "p3_variant = literal" in text
    assert "seed = 0" in text
    assert len(sc.config_hash) == 64


def test_effective_config_round_trips():
    sc = parse_scenario(MINIMAL)
    again = parse_scenario(effective_config(sc))
    assert again == sc
    assert again.config_hash == sc.config_hash
    assert effective_config(again) == effective_config(sc)


def test_hash_ignores_comments_and_spelling():
    a = parse_scenario(MINIMAL)
    b = parse_scenario("# header\n" + MINIMAL.replace("50us", "0.00005s").replace("20kHz", "20000Hz ; prf"))
    assert a.config_hash == b.config_hash


def test_hash_changes_with_content():
    a = parse_scenario(MINIMAL)
    b = parse_scenario(MINIMAL + "\n[target]\nrange = 30m\n")
    assert a.config_hash != b.config_hash


def test_with_seed_rehashes():
    sc = parse_scenario(MINIMAL.replace("kind = lfm", "kind = noise"))
    seeded = with_seed(sc, 9)
    assert seeded.waveform.seed == 9
    assert seeded.config_hash != sc.config_hash


def test_with_seed_reaches_cs_inner():
    sc = parse_scenario(MINIMAL.replace("kind = lfm", "kind = cs\ninner = noise"))
    seeded = with_seed(sc, 4)
    assert seeded.waveform.inner.seed == 4


def error_of(text):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(text, "x.ini")
    return info.value


def test_error_non_integer_period():
    err = error_of(MINIMAL.replace("240MHz", "240.01MHz"))
    assert err.line in (3, 5) and "integer" in err.message
    assert err.to_record() == {"error": "config", "message": err.message, "line": err.line, "path": "x.ini"}


def test_error_period_mismatch():
    err = error_of(MINIMAL + "T = 40us\n")
    assert err.line == 9 and "differs" in err.message


def test_error_unknown_key_and_section():
    assert error_of(MINIMAL.replace("delta_f", "bandwidth")).line == 4
    err = error_of(MINIMAL + "\n[jammer]\npower = 1\n")
    assert err.line == 10 and "unknown section" in err.message


def test_error_duplicate_key():
    err = error_of(MINIMAL.replace("T = 50us", "T = 50us\nT = 60us"))
    assert err.line == 4


def test_error_missing_section_and_key():
    assert "missing required section" in error_of(MINIMAL.split("[waveform]")[0]).message
    err = error_of(MINIMAL.replace("delta_f = -40MHz\n", ""))
    assert "delta_f" in err.message and err.line == 1


def test_error_bad_unit_points_at_key():
    err = error_of(MINIMAL.replace("T = 50us", "T = 50kHz"))
    assert err.line == 3 and "expected s" in err.message


def test_error_physical_checks():
    assert "Nyquist" in error_of(MINIMAL.replace("delta_f", "f_carrier = 110MHz\ndelta_f")).message
    far = error_of(MINIMAL + "\n[target]\nrange = 9km\n")
    assert far.line == 11 and "shorter" in far.message
    assert "needs M" in error_of(MINIMAL.replace("kind = lfm", "kind = p3")).message
    assert "inner" in error_of(MINIMAL.replace("kind = lfm", "kind = cs")).message
    assert "cutoff" in error_of(MINIMAL + "\n[sweep]\nf_mod_max = 6MHz\n").message


def test_scenario_files_load(scenarios_dir):
    for path in sorted(scenarios_dir.glob("*.ini")):
        assert len(load_scenario(path).config_hash) == 64, path.name


def test_replica_parameters(scenarios_dir):
    sc = load_scenario(scenarios_dir / "replica.ini")
    r = sc.radar
    assert (r.prf, r.T, r.delta_f, r.f0, r.f_carrier, r.sample_rate) == (20e3, 5e-05, -40e6, 20e6, 60e6, 240e6)
    assert math.isclose(sc.target.delay(r.c), 1e-6, rel_tol=1e-9)
    assert sc.sweep.n_points == 21 and sc.capture.n_periods == 20


def test_missing_file():
    with pytest.raises(ScenarioError, match="cannot read"):
        load_scenario("/nonexistent/scenario.ini")
