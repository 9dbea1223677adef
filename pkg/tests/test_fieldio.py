import numpy as np
import pytest

from fraclab import fields
from fraclab.errors import PreconditionError
from fraclab.fieldio import read_field, sidecar, write_field
from fraclab.grid import Grid


@pytest.mark.parametrize("name", ["u.txt", "u.bin", "u.raw"])
def test_round_trip_is_exact(tmp_path, name):
    g = Grid(2, 16, 3.7)
    u = fields.random_bandlimited(g, seed=11, kmax=4)
    path = tmp_path / name
    write_field(u, path)
    v = read_field(path)
    assert v.grid == g
    assert np.array_equal(u.values, v.values)


def test_binary_layout(tmp_path):
    g = Grid(1, 8, 1.0)
    u = fields.gaussian(g, width=0.2)
    path = tmp_path / "f.bin"
    write_field(u, path)
    assert path.stat().st_size == 8 * 8
    assert sidecar(path).read_text().split() == ["1", "8", "1.0"]
    assert np.array_equal(np.fromfile(path, dtype="<f8"), u.values)


def test_text_header(tmp_path):
    path = tmp_path / "f.txt"
    path.write_text("1 8 2.0\n" + " ".join(str(i) for i in range(8)) + "\n")
    u = read_field(path)
    assert u.grid == Grid(1, 8, 2.0)
    assert list(u.values) == list(range(8))


def test_bad_files(tmp_path):
    short = tmp_path / "short.txt"
    short.write_text("1 8 2.0\n1 2 3\n")
    with pytest.raises(PreconditionError):
        read_field(short)
    bad = tmp_path / "bad.txt"
    bad.write_text("1 8\n" + "0 " * 8)
    with pytest.raises(PreconditionError):
        read_field(bad)
    nan = tmp_path / "nan.txt"
    nan.write_text("1 8 2.0\n" + "nan " * 8)
    with pytest.raises(PreconditionError):
        read_field(nan)
