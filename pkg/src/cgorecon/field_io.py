import json
import logging
import struct
from pathlib import Path

import numpy as np

from .config import FIELD_MAGIC, FIELD_VERSION
from .errors import BadMagicError, TruncatedError, VersionError
from .fields import ComplexField, make_grid

# magic, version u32, N u32, L f64, frame 9 x f64
HEADER = struct.Struct("<4sIId9d")
SAMPLE_DTYPE = np.dtype("<c16")


def write_field(f: ComplexField) -> bytes:
    grid = f.grid
    header = HEADER.pack(
        FIELD_MAGIC,
        FIELD_VERSION,
        grid.points_per_axis,
        grid.half_width,
        *grid.basis.ravel(),
    )
    return header + np.ascontiguousarray(f.samples, dtype=SAMPLE_DTYPE).tobytes(order="C")


def read_field(data: bytes) -> ComplexField:
    if len(data) < len(FIELD_MAGIC):
        raise TruncatedError(f"Field payload of {len(data)} bytes is shorter than the magic.")
    if data[: len(FIELD_MAGIC)] != FIELD_MAGIC:
        raise BadMagicError(f"Expected magic {FIELD_MAGIC!r}, got {data[:4]!r}.")
    if len(data) < HEADER.size:
        raise TruncatedError(f"Field header needs {HEADER.size} bytes, got {len(data)}.")
    _, version, n, half_width, *frame = HEADER.unpack_from(data)
    if version != FIELD_VERSION:
        raise VersionError(f"Unsupported field version {version} (expected {FIELD_VERSION}).")
    expected = HEADER.size + n**3 * SAMPLE_DTYPE.itemsize
    if len(data) < expected:
        raise TruncatedError(f"Field payload needs {expected} bytes, got {len(data)}.")
    grid = make_grid(half_width, n, np.array(frame).reshape(3, 3))
    samples = np.frombuffer(data, dtype=SAMPLE_DTYPE, count=n**3, offset=HEADER.size)
    return ComplexField(grid, samples.reshape(grid.shape).astype(complex))


def sidecar_path(path: Path) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}.meta.json")


def write_field_file(path: Path, f: ComplexField, meta: dict | None = None) -> Path:
    """Writes the binary field and, when `meta` is given, its JSON sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(write_field(f))
    if meta is not None:
        sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True))
    logging.info(f"Wrote field {path.name} ({f.grid.points_per_axis}^3 samples)")
    return path


def read_field_file(path: Path) -> tuple[ComplexField, dict]:
    path = Path(path)
    field = read_field(path.read_bytes())
    meta_path = sidecar_path(path)
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    return field, meta
