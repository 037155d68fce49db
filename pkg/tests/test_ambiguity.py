import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from rangespoof.ambiguity import (
    AmbiguitySurface,
    RidgePoint,
    ambiguity_surface,
    check_cs_symmetry,
    coupling_ridge,
    doppler_grid,
    matched_filter_output,
    normalize_axes,
    ridge_slope,
)
from rangespoof.params import RadarParams
from rangespoof.scene import doppler_rotation
from rangespoof.waveforms import SampleBuffer, WaveformSpec, cs_of, generate

FS = 1e6


def rel_err(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


def test_doppler_grid_is_centered():
    g = doppler_grid(1000.0, 5)
    assert np.allclose(g, [-500, -250, 0, 250, 500])
    assert np.array_equal(doppler_grid(0.0, 1), [0.0])


@pytest.mark.parametrize("n_doppler,span", [(17, 1e6 / 4), (11, 3e5), (7, 12345.0)])
def test_surface_matches_direct_sum(n_doppler, span):
    # first case lands on DFT bins, the others take the chirp-z path
    x = generate(WaveformSpec("lfm", 24e-6, FS, f0=-0.1e6, delta_f=0.3e6))
    surf = ambiguity_surface(x, 23e-6, span, n_doppler)
    ref = oracles.ambiguity_direct(x.samples, FS, np.arange(-23, 24), surf.doppler_axis)
    assert rel_err(surf.values, ref) <= 1e-10


complex_vals = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@settings(max_examples=30, deadline=None)
@given(st.lists(complex_vals, min_size=2, max_size=12), st.integers(1, 9), st.floats(1.0, 1e6))
def test_surface_matches_direct_sum_property(values, n_doppler, span):
    x = SampleBuffer(np.array(values, dtype=complex), FS)
    if np.max(np.abs(x.samples)) < 1e-3:
        return
    k = len(x) - 1
    surf = ambiguity_surface(x, k / FS, span, n_doppler)
    ref = oracles.ambiguity_direct(x.samples, FS, np.arange(-k, k + 1), surf.doppler_axis)
    assert np.max(np.abs(surf.values - ref)) <= 1e-9 * max(1.0, ref.max())


@settings(max_examples=30, deadline=None)
@given(st.lists(complex_vals, min_size=2, max_size=16), st.integers(1, 9), st.floats(1.0, 1e6))
def test_peak_at_origin_property(values, n_doppler, span):
    x = SampleBuffer(np.array(values, dtype=complex), FS)
    surf = ambiguity_surface(x, (len(x) - 1) / FS, span, 2 * n_doppler + 1)
    assert np.all(surf.values >= 0)
    assert surf.values.max() <= surf.values[surf.origin_index] * (1 + 1e-12) + 1e-12


def test_origin_equals_energy():
    x = generate(WaveformSpec("p3", 50e-6, 5e6, M=25))
    surf = ambiguity_surface(x, 10e-6, 1e5, 5)
    assert surf.values[surf.origin_index] == pytest.approx(x.energy, rel=1e-12)


def test_max_delay_outside_support_rejected():
    x = generate(WaveformSpec("lfm", 10e-6, FS, delta_f=0.2e6))
    with pytest.raises(ValueError, match="max_delay"):
        ambiguity_surface(x, 10e-6, 1e3, 3)


def test_surface_rejects_negative_values():
    with pytest.raises(ValueError, match="non-negative"):
        AmbiguitySurface(np.array([[-1.0]]), np.zeros(1), np.zeros(1))


def test_matched_filter_matches_direct_correlation():
    rng = np.random.default_rng(0)
    ref = SampleBuffer(rng.standard_normal(9) + 1j * rng.standard_normal(9), FS)
    rx = SampleBuffer(rng.standard_normal(15) + 1j * rng.standard_normal(15), FS)
    mf = matched_filter_output(ref, rx)
    lags, y = oracles.correlation_direct(ref.samples, rx.samples)
    assert np.allclose(mf.samples, y, atol=1e-12)
    assert np.allclose(mf.t * FS, lags)


def test_matched_filter_recovers_delay():
    ref = generate(WaveformSpec("lfm", 50e-6, 5e6, delta_f=0.5e6))
    padded = np.concatenate([np.zeros(17), ref.samples, np.zeros(20)])
    mf = matched_filter_output(ref, SampleBuffer(padded, 5e6))
    assert mf.t[np.argmax(np.abs(mf.samples))] * 5e6 == pytest.approx(17)


@pytest.mark.parametrize("delta_f", [0.5e6, -0.5e6])
def test_doppler_moves_lfm_peak_by_coupling_law(delta_f):
    T, fs, f_d = 50e-6, 5e6, 20e3
    s = generate(WaveformSpec("lfm", T, fs, delta_f=delta_f))
    echo = SampleBuffer(np.concatenate([s.samples, np.zeros(250)]), fs)
    echo = echo.with_samples(echo.samples * doppler_rotation(echo.t, f_d))
    mf = matched_filter_output(s, echo)
    lag = mf.t[np.argmax(np.abs(mf.samples))] * fs
    assert lag == pytest.approx(-T * f_d / delta_f * fs, abs=1)


def test_lfm_ridge_slope():
    T, fs = 50e-6, 5e6
    s = generate(WaveformSpec("lfm", T, fs, delta_f=0.5e6))
    surf = ambiguity_surface(s, 40e-6, 2e5, 41)
    slope, _, _ = ridge_slope(coupling_ridge(surf))
    assert slope == pytest.approx(-T / 0.5e6, rel=0.02)


def test_ridge_slope_band_filter():
    pts = [(-2.0, 4.0), (-1.0, 2.0), (0.0, 0.0), (1.0, -2.0), (5.0, 0.0)]
    ridge = [RidgePoint(f, d, 1.0) for f, d in pts]
    slope, intercept, resid = ridge_slope(ridge, band=1.0)
    assert slope == pytest.approx(-2.0)
    assert resid == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        ridge_slope(ridge, band=0.1)


def test_symmetry_of_cs_waveforms():
    for inner in (
        WaveformSpec("lfm", 20e-6, FS, delta_f=0.3e6),
        WaveformSpec("p3", 20e-6, FS, M=5, p3_variant="standard"),
        WaveformSpec("noise", 20e-6, FS, seed=2),
    ):
        surf = ambiguity_surface(generate(cs_of(inner)), 39e-6, 2e5, 21)
        report = check_cs_symmetry(surf)
        assert report.passed, inner.kind
        assert report.max_asymmetry <= 1e-12


def test_symmetry_fails_for_plain_lfm():
    surf = ambiguity_surface(generate(WaveformSpec("lfm", 20e-6, FS, delta_f=0.3e6)), 19e-6, 2e5, 21)
    assert not check_cs_symmetry(surf).passed


def test_symmetry_needs_centered_axes():
    surf = AmbiguitySurface(np.ones((2, 3)), np.array([-1.0, 0.0, 1.0]), np.array([0.0, 1.0]))
    with pytest.raises(ValueError, match="symmetric"):
        check_cs_symmetry(surf)


def test_normalize_axes():
    params = RadarParams(prf=10e3, T=50e-6, delta_f=0.5e6, sample_rate=5e6)
    surf = AmbiguitySurface(np.ones((3, 3)), np.array([-1e-5, 0, 1e-5]), np.array([-1e5, 0, 1e5]))
    norm = normalize_axes(surf, params)
    r_unamb = params.c / (2 * params.prf)
    assert norm.normalization == "fractional"
    assert norm.delay_axis[2] == pytest.approx(params.c * 1e-5 / 2 / r_unamb)
    assert np.allclose(norm.doppler_axis, [-0.2, 0, 0.2])
    assert norm.prf == 10e3 and norm.delta_f == 0.5e6
    with pytest.raises(ValueError, match="already"):
        normalize_axes(norm, params)


def test_standard_p3_ridge_tracks_lfm():
    # chips of 10 samples quantize the ridge, so the slope lands a few percent shy
    s = generate(WaveformSpec("p3", 50e-6, 5e6, M=25, p3_variant="standard"))
    surf = ambiguity_surface(s, 49.8e-6, 0.5e6, 101)
    slope, _, _ = ridge_slope(coupling_ridge(surf), band=0.1e6)
    assert slope == pytest.approx(-50e-6 / 0.5e6, rel=0.05)
