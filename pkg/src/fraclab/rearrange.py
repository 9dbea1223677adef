"""Schwarz symmetric decreasing rearrangement on the grid.

On a uniform grid every cell has the same measure, so the layer-cake
rearrangement of ``|u|`` reduces to sorting the values in decreasing order
and laying them out along the grid points ordered by distance from the box
centre.  Distance ties are broken lexicographically on the index tuple, which
makes the result bit-reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import PreconditionError
from .grid import Field, Grid, lp_norm


def unit_ball_measure(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


@dataclass(frozen=True)
class BallOrdering:
    grid: Grid
    permutation: np.ndarray
    dist2: np.ndarray  # squared index distance along the permutation

    @property
    def omega_n(self):
        return unit_ball_measure(self.grid.n)


@lru_cache(maxsize=32)
def ball_ordering(grid: Grid) -> BallOrdering:
    c = grid.N // 2
    offs = np.meshgrid(*([np.arange(grid.N) - c] * grid.n), indexing="ij")
    d2 = sum(o.astype(np.int64) ** 2 for o in offs).ravel()
    # stable sort: equal distances keep row-major (lexicographic) order
    perm = np.argsort(d2, kind="stable")
    perm.flags.writeable = False
    d2s = d2[perm]
    d2s.flags.writeable = False
    return BallOrdering(grid, perm, d2s)


def schwarz_rearrange(u: Field) -> Field:
    order = ball_ordering(u.grid)
    a = np.abs(u.values).ravel()
    out = np.empty_like(a)
    out[order.permutation] = np.sort(a)[::-1]
    return Field(u.grid, out)


def asymmetry(u: Field) -> float:
    nrm = lp_norm(u, 2)
    if nrm == 0:
        raise PreconditionError("nonzero field", "asymmetry of the zero field is undefined")
    diff = u.like(np.abs(u.values) - schwarz_rearrange(u).values)
    return lp_norm(diff, 2) / nrm


def is_schwarz_symmetric(u: Field) -> bool:
    vals = u.values.ravel()[ball_ordering(u.grid).permutation]
    return bool(np.all(vals >= 0) and np.all(np.diff(vals) <= 0))


@dataclass
class DecayReport:
    max_ratio: float
    satisfied: bool
    argmax_radius: float
    # same ratio with omega_n^(n/2) in place of omega_n^(1/2)
    alt_exponent_max_ratio: float
    note: str = (
        "bound c/(omega_n^(1/2)|x|^(n/2)) follows from omega_n|x|^n u^2 <= c^2; "
        "the alternative exponent omega_n^(n/2) is reported for comparison"
    )


def radial_decay_check(u: Field, c: float, tol=1e-9) -> DecayReport:
    """Check ``u(x) <= c / (omega_n^(1/2) |x|^(n/2))`` at every nonzero point.

    ``u`` must be Schwarz symmetric with ``||u||_2 = c``.
    """
    if not c > 0:
        raise PreconditionError("c > 0", f"mass level must be positive, got {c}")
    if lp_norm(u, 2) == 0:
        raise PreconditionError("nonzero field", "decay check needs a nonzero field")
    if asymmetry(u) > 1e-10:
        raise PreconditionError("Schwarz symmetric input", "field is not Schwarz symmetric")
    if abs(lp_norm(u, 2) - c) > 1e-10 * c:
        raise PreconditionError("||u||_2 = c", "field norm does not match c")
    g = u.grid
    r = g.radius
    nz = r > 0
    wn = unit_ball_measure(g.n)
    ratio = u.values[nz] * math.sqrt(wn) * r[nz] ** (g.n / 2) / c
    alt = u.values[nz] * wn ** (g.n / 2) * r[nz] ** (g.n / 2) / c
    i = int(np.argmax(ratio))
    mr = float(ratio[i])
    return DecayReport(
        max_ratio=mr,
        satisfied=mr <= 1 + tol,
        argmax_radius=float(r[nz][i]),
        alt_exponent_max_ratio=float(np.max(alt)),
    )
