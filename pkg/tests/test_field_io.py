import numpy as np
import pytest

from cgorecon.errors import BadMagicError, TruncatedError, VersionError
from cgorecon.field_io import HEADER, read_field, read_field_file, sidecar_path, write_field, write_field_file
from cgorecon.fields import make_grid, random_field
from cgorecon.utils import frame_for_direction


@pytest.fixture
def field(rng):
    return random_field(make_grid(2.5, 8, frame_for_direction([0.3, -1.0, 2.0])), rng)


def test_payload_size_and_header(field):
    data = write_field(field)
    assert HEADER.size == 92
    assert len(data) == 92 + 16 * 8**3
    assert data[:4] == b"CGOF"


def test_read_back_is_bit_exact(field):
    restored = read_field(write_field(field))
    assert restored.grid == field.grid
    assert np.array_equal(restored.samples, field.samples)


def test_bad_magic(field):
    data = bytearray(write_field(field))
    data[:4] = b"XXXX"
    with pytest.raises(BadMagicError):
        read_field(bytes(data))


def test_bad_version(field):
    data = bytearray(write_field(field))
    data[4:8] = (99).to_bytes(4, "little")
    with pytest.raises(VersionError):
        read_field(bytes(data))


@pytest.mark.parametrize("length", [2, 50, 92 + 16 * 10])
def test_truncated(field, length):
    with pytest.raises(TruncatedError):
        read_field(write_field(field)[:length])


def test_file_with_sidecar(tmp_path, field):
    path = write_field_file(tmp_path / "out" / "cgo_0.cgof", field, {"t": 4.0, "iterations": 12})
    assert sidecar_path(path).name == "cgo_0.meta.json"
    restored, meta = read_field_file(path)
    assert np.array_equal(restored.samples, field.samples)
    assert meta == {"t": 4.0, "iterations": 12}


def test_file_without_sidecar(tmp_path, field):
    path = write_field_file(tmp_path / "plain.cgof", field)
    _, meta = read_field_file(path)
    assert meta == {}
