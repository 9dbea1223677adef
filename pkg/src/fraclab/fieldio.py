"""Field files.

Text format: first line ``n N L``, then ``N^n`` whitespace-separated values
in row-major order.  Binary format: raw little-endian float64 values, with
the same ``n N L`` header in a sidecar file ``<path>.hdr``.  Paths ending in
``.bin`` or ``.raw`` select the binary format.
"""
from pathlib import Path

import numpy as np

from .errors import PreconditionError
from .grid import Field, Grid

BINARY_SUFFIXES = (".bin", ".raw")


def _header(grid):
    return f"{grid.n} {grid.N} {grid.L!r}"


def _parse_header(line):
    parts = line.split()
    if len(parts) != 3:
        raise PreconditionError("field header 'n N L'", f"bad field header: {line!r}")
    return Grid(int(parts[0]), int(parts[1]), float(parts[2]))


def sidecar(path):
    path = Path(path)
    return path.with_name(path.name + ".hdr")


def is_binary(path):
    return Path(path).suffix.lower() in BINARY_SUFFIXES


def write_field(u: Field, path, binary=None):
    path = Path(path)
    if binary is None:
        binary = is_binary(path)
    if binary:
        u.values.ravel().astype("<f8").tofile(path)
        sidecar(path).write_text(_header(u.grid) + "\n")
    else:
        body = "\n".join(repr(float(v)) for v in u.values.ravel())
        path.write_text(_header(u.grid) + "\n" + body + "\n")


def read_field(path, binary=None) -> Field:
    path = Path(path)
    if binary is None:
        binary = is_binary(path)
    if binary:
        grid = _parse_header(sidecar(path).read_text().strip())
        values = np.fromfile(path, dtype="<f8")
    else:
        text = path.read_text()
        first, _, rest = text.partition("\n")
        grid = _parse_header(first)
        try:
            values = np.array(rest.split(), dtype=float)
        except ValueError as exc:
            raise PreconditionError("decimal values", f"unparseable value in {path}") from exc
    return Field(grid, values)
