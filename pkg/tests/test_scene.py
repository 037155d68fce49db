import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from rangespoof.ambiguity import matched_filter_output
from rangespoof.params import RadarParams
from rangespoof.scene import (
    ModulationProfile,
    TargetSpec,
    apply_phase_modulation,
    delay_samples,
    doppler_from_velocity,
    synthesize_echo,
)
from rangespoof.waveforms import SampleBuffer, WaveformSpec, generate

PARAMS = RadarParams(prf=10e3, T=50e-6, delta_f=0.5e6, f_carrier=750e6, sample_rate=5e6)


def chirp():
    return generate(WaveformSpec("lfm", 50e-6, 5e6, delta_f=0.5e6))


def padded(buf, extra=250):
    return SampleBuffer(np.concatenate([buf.samples, np.zeros(extra)]), buf.sample_rate)


def test_doppler_from_velocity():
    assert doppler_from_velocity(0.0, 750e6) == 0.0
    assert doppler_from_velocity(300.0, 750e6) == pytest.approx(oracles.two_way_doppler(300.0, 750e6), rel=1e-15)
    assert doppler_from_velocity(300.0, 750e6, c=3e8) == 1500.0
    assert doppler_from_velocity(-300.0, 750e6) == -doppler_from_velocity(300.0, 750e6)


def test_zero_range_echo_is_identity():
    tx = chirp()
    echo = synthesize_echo(tx, TargetSpec(0.0), PARAMS)
    assert np.array_equal(echo.samples, tx.samples)


def test_150m_is_five_samples():
    assert delay_samples(TargetSpec(150.0).delay(PARAMS.c), 5e6) == oracles.round_trip_samples(150.0, 5e6) == 5
    tx = padded(chirp())
    echo = synthesize_echo(tx, TargetSpec(150.0), PARAMS)
    assert np.array_equal(echo.samples[:5], np.zeros(5))
    assert np.array_equal(echo.samples[5:], tx.samples[:-5])


def test_circular_delay_wraps():
    tx = chirp()
    echo = synthesize_echo(tx, TargetSpec(150.0), PARAMS, circular=True)
    assert np.array_equal(echo.samples, np.roll(tx.samples, 5))


def test_moving_target_gets_phase_ramp():
    tx = chirp()
    echo = synthesize_echo(tx, TargetSpec(0.0, radial_velocity=300.0), PARAMS)
    f_d = oracles.two_way_doppler(300.0, 750e6)
    assert np.allclose(echo.samples, tx.samples * np.exp(-2j * np.pi * f_d * tx.t), atol=1e-12)


def test_delay_longer_than_buffer_rejected():
    with pytest.raises(ValueError, match="not shorter"):
        synthesize_echo(chirp(), TargetSpec(7500.0), PARAMS)


def test_negative_range_rejected():
    with pytest.raises(ValueError):
        TargetSpec(-1.0)


@settings(max_examples=25)
@given(a=st.floats(-100, 100, allow_nan=False), r=st.integers(0, 40))
def test_echo_linear_in_amplitude(a, r):
    tx = padded(chirp(), 60)
    range_m = r * PARAMS.c / (2 * 5e6)
    unit = synthesize_echo(tx, TargetSpec(range_m), PARAMS)
    scaled = synthesize_echo(tx, TargetSpec(range_m, amplitude=a), PARAMS)
    assert np.array_equal(scaled.samples, a * unit.samples)


@settings(max_examples=20)
@given(r=st.integers(0, 200))
def test_delay_composition(r):
    tx = chirp()
    range_m = r * PARAMS.c / (2 * 5e6)
    echo = synthesize_echo(padded(tx), TargetSpec(range_m), PARAMS)
    mf = matched_filter_output(tx, echo)
    assert round(mf.t[np.argmax(np.abs(mf.samples))] * 5e6) == r


def test_none_modulation_is_identity():
    echo = chirp()
    assert apply_phase_modulation(echo, ModulationProfile.none()) is echo


@pytest.mark.parametrize("f_mod,sign", [(40e3, 1), (-25e3, 1), (40e3, -1)])
def test_linear_modulation_shifts_tone(f_mod, sign):
    fs, f1, n = 1e6, 100e3, 1000
    t = np.arange(n) / fs
    tone = SampleBuffer(np.exp(-2j * np.pi * f1 * t), fs)
    out = apply_phase_modulation(tone, ModulationProfile.linear(f_mod, sign))
    assert oracles.tone_frequency(out.samples, fs) == pytest.approx(f1 + sign * f_mod)


def test_constant_phase():
    echo = chirp()
    out = apply_phase_modulation(echo, ModulationProfile.constant_phase(0.7))
    assert np.allclose(out.samples, echo.samples * np.exp(-0.7j), atol=1e-15)


def test_table_matches_linear_program():
    echo = chirp()
    f = 20e3
    times = [0.0, 1e-3]
    table = ModulationProfile.table(times, [0.0, 2 * np.pi * f * 1e-3])
    a = apply_phase_modulation(echo, table)
    b = apply_phase_modulation(echo, ModulationProfile.linear(f))
    assert np.allclose(a.samples, b.samples, atol=1e-9)


def test_table_must_cover_window():
    table = ModulationProfile.table([0.0, 10e-6], [0.0, 1.0])
    with pytest.raises(ValueError, match="covers"):
        apply_phase_modulation(chirp(), table)


def test_table_validation():
    with pytest.raises(ValueError, match="increasing"):
        ModulationProfile.table([0.0, 0.0], [0.0, 1.0])
    with pytest.raises(ValueError, match="at least two"):
        ModulationProfile.table([0.0], [0.0])
    with pytest.raises(ValueError, match="sign"):
        ModulationProfile.linear(1.0, sign=2)
    with pytest.raises(ValueError, match="unknown"):
        ModulationProfile(kind="sawtooth")


@settings(max_examples=25)
@given(f=st.floats(-1e6, 1e6), phase=st.floats(-10, 10), sign=st.sampled_from([1, -1]))
def test_modulation_preserves_energy(f, phase, sign):
    echo = chirp()
    for profile in (ModulationProfile.linear(f, sign), ModulationProfile.constant_phase(phase, sign)):
        assert apply_phase_modulation(echo, profile).energy == pytest.approx(echo.energy, rel=1e-12)


def test_apparent_doppler():
    assert ModulationProfile.linear(5e3).apparent_doppler == 5e3
    assert ModulationProfile.linear(5e3, sign=-1).apparent_doppler == -5e3
    assert ModulationProfile.constant_phase(1.0).apparent_doppler == 0.0
