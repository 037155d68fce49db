import numpy as np
import pytest

from rangespoof.ambiguity import AmbiguitySurface
from rangespoof.formats import (
    buffer_csv,
    decode_buffer,
    decode_grid,
    encode_buffer,
    encode_grid,
    read_csv,
    surface_csv,
    sweep_csv,
)
from rangespoof.analysis import SweepRow
from rangespoof.waveforms import SampleBuffer

H = "0123456789abcdef" * 4


@pytest.mark.parametrize("samples", [np.arange(5.0) - 2.5, np.exp(1j * np.arange(7)) * 1e-300])
def test_buffer_round_trip(samples):
    buf = SampleBuffer(samples, 2.5e6, t0=-1e-6)
    out, h = decode_buffer(encode_buffer(buf, H))
    assert h == H
    assert out.is_complex == buf.is_complex
    assert np.array_equal(out.samples, buf.samples)
    assert (out.sample_rate, out.t0) == (buf.sample_rate, buf.t0)


def test_buffer_without_hash():
    _, h = decode_buffer(encode_buffer(SampleBuffer(np.ones(2), 1.0)))
    assert h == ""


def test_buffer_rejects_corruption():
    blob = encode_buffer(SampleBuffer(np.ones(4), 1.0), H)
    with pytest.raises(ValueError, match="magic"):
        decode_buffer(b"XXXX" + blob[4:])
    with pytest.raises(ValueError):
        decode_buffer(blob[:-3])
    with pytest.raises(ValueError):
        decode_buffer(blob[:10])
    with pytest.raises(ValueError, match="SHA-256"):
        encode_buffer(SampleBuffer(np.ones(4), 1.0), "abcd")


def surface():
    values = np.arange(12.0).reshape(3, 4)
    return AmbiguitySurface(values, np.array([-1.5, -0.5, 0.5, 1.5]) * 1e-6, np.array([-1e3, 0.0, 1e3]))


def test_grid_round_trip():
    s = surface()
    out, h = decode_grid(encode_grid(s, H))
    assert h == H
    assert np.array_equal(out.values, s.values)
    assert np.allclose(out.delay_axis, s.delay_axis, rtol=0, atol=1e-20)
    assert np.allclose(out.doppler_axis, s.doppler_axis)
    assert out.normalization == "raw" and out.prf is None and out.delta_f is None


def test_grid_keeps_normalization():
    s = surface()
    norm = AmbiguitySurface(s.values, s.delay_axis, s.doppler_axis, normalization="fractional", prf=1e4, delta_f=5e5)
    out, _ = decode_grid(encode_grid(norm))
    assert (out.normalization, out.prf, out.delta_f) == ("fractional", 1e4, 5e5)


def test_grid_rejects_buffer_blob():
    with pytest.raises(ValueError, match="magic"):
        decode_grid(encode_buffer(SampleBuffer(np.ones(40), 1.0)))


def test_csv_hash_line_and_precision(tmp_path):
    buf = SampleBuffer(np.array([1 / 3 + 2j / 7, np.pi]), 3.0)
    path = buffer_csv(tmp_path / "b.csv", buf, H)
    assert path.read_text().splitlines()[0] == f"# config_sha256={H}"
    header, data, h = read_csv(path)
    assert header == ["index", "t", "re", "im"] and h == H
    assert np.array_equal(data[:, 2] + 1j * data[:, 3], buf.samples)


def test_surface_csv_long_form(tmp_path):
    header, data, h = read_csv(surface_csv(tmp_path / "s.csv", surface()))
    assert header == ["delay", "doppler", "magnitude"] and h == ""
    assert data.shape == (12, 3)
    assert np.array_equal(data[:, 2], np.arange(12.0))


def test_sweep_csv(tmp_path):
    rows = [SweepRow(-1e3, 10.5, 2.0), SweepRow(1e3, 11.5, 3.0)]
    header, data, _ = read_csv(sweep_csv(tmp_path / "w.csv", rows, H))
    assert header == ["f_mod_hz", "perceived_range_m", "peak_mag"]
    assert data.tolist() == [[-1e3, 10.5, 2.0], [1e3, 11.5, 3.0]]
