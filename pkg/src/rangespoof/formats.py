"""On-disk formats: a little-endian binary container for sample buffers and
ambiguity grids, plus CSV writers for buffers, surfaces, spectra, ridges and
sweep tables.

Every file can carry the SHA-256 of the effective scenario config: in the
binary header as 32 raw bytes, in CSV as a leading ``# config_sha256=`` line.
"""

from __future__ import annotations

import csv
import io
import struct
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .ambiguity import AmbiguitySurface
from .waveforms import SampleBuffer

BUFFER_MAGIC = b"RSBF"
GRID_MAGIC = b"RSGR"
FORMAT_VERSION = 1

# magic, version, kind (0 real / 1 complex), N, sample_rate, t0, config hash
_BUFFER_HEADER = struct.Struct("<4sHHQdd32s")
# magic, version, normalization (0 raw / 1 fractional), rows, cols,
# delay0, delay_step, doppler0, doppler_step, prf, delta_f, config hash
_GRID_HEADER = struct.Struct("<4sHHQQdddddd32s")

PathLike = Union[str, Path]


def _hash_bytes(config_hash: str) -> bytes:
    if not config_hash:
        return bytes(32)
    raw = bytes.fromhex(config_hash)
    if len(raw) != 32:
        raise ValueError("config hash must be a SHA-256 hex digest")
    return raw


def _hash_str(raw: bytes) -> str:
    return "" if raw == bytes(32) else raw.hex()


def encode_buffer(buf: SampleBuffer, config_hash: str = "") -> bytes:
    kind = 1 if buf.is_complex else 0
    header = _BUFFER_HEADER.pack(
        BUFFER_MAGIC, FORMAT_VERSION, kind, len(buf), buf.sample_rate, buf.t0, _hash_bytes(config_hash)
    )
    if buf.is_complex:
        data = np.empty(2 * len(buf), dtype="<f8")
        data[0::2] = buf.samples.real
        data[1::2] = buf.samples.imag
    else:
        data = buf.samples.astype("<f8")
    return header + data.tobytes()


def decode_buffer(blob: bytes):
    """Return (SampleBuffer, config_hash)."""
    if len(blob) < _BUFFER_HEADER.size:
        raise ValueError("truncated buffer file")
    magic, version, kind, n, fs, t0, h = _BUFFER_HEADER.unpack_from(blob)
    if magic != BUFFER_MAGIC:
        raise ValueError(f"bad magic {magic!r}; not a sample buffer file")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported buffer format version {version}")
    if kind not in (0, 1):
        raise ValueError(f"unknown sample kind {kind}")
    count = n * (2 if kind else 1)
    data = np.frombuffer(blob, dtype="<f8", count=count, offset=_BUFFER_HEADER.size)
    if len(blob) != _BUFFER_HEADER.size + 8 * count:
        raise ValueError("buffer file length does not match its header")
    samples = data[0::2] + 1j * data[1::2] if kind else data.copy()
    return SampleBuffer(samples, fs, t0), _hash_str(h)


def _step(axis: np.ndarray) -> float:
    return float(axis[1] - axis[0]) if len(axis) > 1 else 0.0


def encode_grid(surface: AmbiguitySurface, config_hash: str = "") -> bytes:
    nan = float("nan")
    header = _GRID_HEADER.pack(
        GRID_MAGIC,
        FORMAT_VERSION,
        0 if surface.normalization == "raw" else 1,
        surface.values.shape[0],
        surface.values.shape[1],
        float(surface.delay_axis[0]),
        _step(surface.delay_axis),
        float(surface.doppler_axis[0]),
        _step(surface.doppler_axis),
        nan if surface.prf is None else surface.prf,
        nan if surface.delta_f is None else surface.delta_f,
        _hash_bytes(config_hash),
    )
    return header + surface.values.astype("<f8").tobytes()


def decode_grid(blob: bytes):
    """Return (AmbiguitySurface, config_hash)."""
    if len(blob) < _GRID_HEADER.size:
        raise ValueError("truncated grid file")
    (magic, version, norm, rows, cols, d0, dd, f0, df, prf, delta_f, h) = _GRID_HEADER.unpack_from(blob)
    if magic != GRID_MAGIC:
        raise ValueError(f"bad magic {magic!r}; not an ambiguity grid file")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported grid format version {version}")
    if len(blob) != _GRID_HEADER.size + 8 * rows * cols:
        raise ValueError("grid file length does not match its header")
    values = np.frombuffer(blob, dtype="<f8", count=rows * cols, offset=_GRID_HEADER.size).reshape(rows, cols)
    surface = AmbiguitySurface(
        values.copy(),
        d0 + dd * np.arange(cols),
        f0 + df * np.arange(rows),
        normalization="raw" if norm == 0 else "fractional",
        prf=None if np.isnan(prf) else prf,
        delta_f=None if np.isnan(delta_f) else delta_f,
    )
    return surface, _hash_str(h)


def write_bytes(path: PathLike, blob: bytes) -> Path:
    path = Path(path)
    path.write_bytes(blob)
    return path


# -- CSV --------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(
    path: PathLike, header: Sequence[str], rows: Iterable[Sequence], config_hash: str = ""
) -> Path:
    """Write rows with full float precision; a hash comment line leads when given."""
    path = Path(path)
    out = io.StringIO()
    if config_hash:
        out.write(f"# config_sha256={config_hash}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    path.write_text(out.getvalue())
    return path


def read_csv(path: PathLike):
    """Return (header, rows as float arrays, config_hash)."""
    lines = Path(path).read_text().splitlines()
    config_hash = ""
    if lines and lines[0].startswith("# config_sha256="):
        config_hash = lines[0].split("=", 1)[1].strip()
        lines = lines[1:]
    reader = csv.reader(lines)
    header = next(reader)
    data = np.array([[float(v) for v in row] for row in reader], dtype=float)
    return header, data.reshape(-1, len(header)), config_hash


def buffer_csv(path: PathLike, buf: SampleBuffer, config_hash: str = "") -> Path:
    x = buf.samples
    im = x.imag if buf.is_complex else np.zeros(len(x))
    rows = zip(range(len(x)), buf.t, x.real, im)
    return write_csv(path, ("index", "t", "re", "im"), rows, config_hash)


def surface_csv(path: PathLike, surface: AmbiguitySurface, config_hash: str = "") -> Path:
    """Long form: one (delay, doppler, magnitude) row per grid point."""
    d, f = np.meshgrid(surface.delay_axis, surface.doppler_axis)
    rows = zip(d.ravel(), f.ravel(), surface.values.ravel())
    return write_csv(path, ("delay", "doppler", "magnitude"), rows, config_hash)


def spectrum_csv(path: PathLike, freqs, magnitudes, config_hash: str = "") -> Path:
    return write_csv(path, ("freq_hz", "magnitude"), zip(freqs, magnitudes), config_hash)


def sweep_csv(path: PathLike, rows, config_hash: str = "") -> Path:
    data = ((r.f_mod, r.perceived_range, r.peak_magnitude) for r in rows)
    return write_csv(path, ("f_mod_hz", "perceived_range_m", "peak_mag"), data, config_hash)


def ridge_csv(path: PathLike, ridge, config_hash: str = "") -> Path:
    return write_csv(path, ("doppler", "delay_at_peak", "peak_magnitude"), ridge, config_hash)
