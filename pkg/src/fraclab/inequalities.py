"""Numerical certificates for the fractional functional inequalities.

Every certifier returns a :class:`CertificateReport`; none of them prove
anything, they evaluate both sides of an inequality on the grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from . import fields
from .errors import PreconditionError
from .grid import (
    Field,
    Grid,
    dirichlet_energy,
    fractional_laplacian,
    lp_norm,
)
from .rearrange import schwarz_rearrange

RECORD_KEYS = ("kind", "n", "s", "p", "q", "r", "theta", "lhs", "rhs", "ratio", "slack", "satisfied", "grid")


@dataclass
class CertificateReport:
    kind: str
    lhs: float
    rhs: float
    ratio: float
    satisfied: bool
    slack: float
    metadata: dict = field(default_factory=dict)

    def as_record(self):
        rec = {k: self.metadata.get(k) for k in RECORD_KEYS}
        rec.update(kind=self.kind, lhs=self.lhs, rhs=self.rhs, ratio=self.ratio,
                   slack=self.slack, satisfied=self.satisfied)
        return rec


def _report(kind, lhs, rhs, tol, u=None, ratio=None, **meta):
    if ratio is None:
        ratio = lhs / rhs if rhs != 0 else (1.0 if lhs == 0 else math.inf)
    slack = (rhs - lhs) / rhs if rhs != 0 else 0.0
    if u is not None:
        meta.setdefault("n", u.grid.n)
        meta["grid"] = u.grid.spec()
    meta["tol"] = tol
    return CertificateReport(kind, float(lhs), float(rhs), float(ratio),
                             bool(lhs <= rhs * (1 + tol)), float(slack), meta)


# -- Polya-Szego -------------------------------------------------------------

def polya_szego_certify(u: Field, s: float, tol=1e-3) -> CertificateReport:
    """``||(-Delta)^(s/2) u*||_2^2 <= ||(-Delta)^(s/2) u||_2^2`` for ``0 <= s <= 1``."""
    if not 0 <= s <= 1:
        raise PreconditionError("0 <= s <= 1", f"Polya-Szego order must lie in [0, 1], got {s}")
    lhs = dirichlet_energy(schwarz_rearrange(u), s)
    rhs = dirichlet_energy(u, s)
    return _report("polya-szego", lhs, rhs, tol, u, s=s)


# -- binomial series for (xi^2/(1+xi^2))^s -----------------------------------

class SeriesTerm(NamedTuple):
    k: int
    coefficient: float
    partial: float


class SeriesCheck(NamedTuple):
    partial: float
    limit: float
    terms: list


def series_coefficients(s: float, K: int) -> np.ndarray:
    """``(-1)^(k+1) binom(s, k)`` for ``k = 1..K``."""
    out = np.empty(K)
    b = 1.0  # binom(s, 0)
    for k in range(1, K + 1):
        b *= (s - k + 1) / k
        out[k - 1] = (-1) ** (k + 1) * b
    return out


def multiplier_series_check(xi2: float, s: float, K: int) -> SeriesCheck:
    if not 0 < s < 1:
        raise PreconditionError("0 < s < 1", f"series order must lie in (0, 1), got {s}")
    if not xi2 >= 0:
        raise PreconditionError("xi2 >= 0", "squared frequency must be nonnegative")
    if K < 1:
        raise PreconditionError("K >= 1", "need at least one term")
    coef = series_coefficients(s, K)
    q = 1.0 / (1.0 + xi2)
    terms = []
    partial = 1.0
    for k in range(1, K + 1):
        partial -= coef[k - 1] * q**k
        terms.append(SeriesTerm(k, float(coef[k - 1]), partial))
    limit = (xi2 / (1.0 + xi2)) ** s
    return SeriesCheck(partial, limit, terms)


# -- Bessel pairings ---------------------------------------------------------

def bessel_pairing(u: Field, k: int) -> float:
    """``(2 pi)^-n int (1+|xi|^2)^-k |u^(xi)|^2 dxi`` on the grid."""
    g = u.grid
    coef = np.fft.fftn(u.values)
    w = (1.0 + g.xi_abs**2) ** (-float(k))
    return g.cell_volume / g.size * float(np.sum(w * np.abs(coef) ** 2))


def bessel_pairing_check(u: Field, k: int, tol=1e-10) -> CertificateReport:
    """Rearrangement increases the Bessel pairing: ``P_k(u) <= P_k(u*)``."""
    if int(k) != k or k < 1:
        raise PreconditionError("k >= 1", f"pairing order must be a positive integer, got {k}")
    lhs = bessel_pairing(u, k)
    rhs = bessel_pairing(schwarz_rearrange(u), k)
    return _report("bessel-pairing", lhs, rhs, tol, u, k=int(k))


def regularized_energy(u: Field, s: float) -> float:
    """``(2 pi)^-n int (|xi|^2/(1+|xi|^2))^s |u^|^2 dxi`` evaluated directly."""
    g = u.grid
    x2 = g.xi_abs**2
    coef = np.fft.fftn(u.values)
    return g.cell_volume / g.size * float(np.sum((x2 / (1 + x2)) ** s * np.abs(coef) ** 2))


def series_energy(u: Field, s: float, K: int) -> float:
    """Same quantity through the truncated binomial series of Bessel pairings."""
    coef = series_coefficients(s, K)
    total = dirichlet_energy(u, 0)
    for k in range(1, K + 1):
        total -= coef[k - 1] * bessel_pairing(u, k)
    return total


# -- Gagliardo-Nirenberg -----------------------------------------------------

@dataclass(frozen=True)
class GNIndexSet:
    n: int
    s: float
    p: float
    q: float
    r: float
    m: float
    theta: float
    p0: float
    route: str  # "hls" (general proof route) or "l2" (p = r = 2, m = q)

    def residual(self):
        mt = self.m * self.theta
        return mt * (1 / self.p - self.s / self.n) + (self.q - mt) / self.r - 1.0


def _fail(name, msg):
    raise PreconditionError(name, f"{name}: {msg}")


def gn_indices_solve(n, s, p, r, m, q) -> GNIndexSet:
    """Solve ``m theta (1/p - s/n) + (q - m theta)/r = 1`` for ``theta``.

    The general route carries the hypotheses of the Hardy-Littlewood-Sobolev
    proof (``1 < p < n/s``, ``r/(q - m theta) > 1``).  The L^2 form
    (``p = r = 2``, ``m = q``) instead needs ``0 < s <= n``, ``q > 2`` and
    ``0 < theta < 1``; it is cross-checked against ``theta = n(q-2)/(2qs)``.
    """
    if n not in (1, 2, 3):
        _fail("n in {1,2,3}", f"got n={n}")
    l2 = p == 2 and r == 2 and m == q
    if l2 and not 0 < s <= n:
        _fail("0 < s <= n (L2 form)", f"got s={s}, n={n}")
    if not l2 and not 0 < s < n:
        _fail("0 < s < n", f"got s={s}, n={n}")
    if not (r > 0 and q > 0):
        _fail("r, q positive", f"got r={r}, q={q}")
    if m == 0:
        _fail("m != 0", "m must be nonzero")
    if not l2 and not 1 < p < n / s:
        _fail("p out of range", f"need 1 < p < n/s = {n / s:g}, got p={p}")
    denom = m * (1 / p - s / n - 1 / r)
    if denom == 0:
        _fail("solvable index relation", "index relation is degenerate (no theta)")
    theta = (1 - q / r) / denom
    mt = m * theta
    if theta == 0:
        _fail("theta != 0", "index relation gives theta = 0")
    if not mt > 0:
        _fail("m theta > 0", f"got m*theta={mt:g}")
    if math.isclose(q, mt, rel_tol=1e-12):
        _fail("q != m theta", f"q equals m*theta={mt:g}")
    inv_p0 = 1 / p - s / n
    p0 = math.inf if inv_p0 == 0 else 1 / inv_p0
    if l2:
        if not q > 2:
            _fail("q > 2", f"L2 form needs q > 2, got {q}")
        if not 0 < theta < 1:
            _fail("0 < theta < 1", f"got theta={theta:g}")
        cor = n * (q - 2) / (2 * q * s)
        if not math.isclose(theta, cor, rel_tol=1e-12):
            _fail("theta = n(q-2)/(2qs)", f"solved {theta!r} vs {cor!r}")
        route = "l2"
    else:
        if not r / (q - mt) > 1:
            _fail("r/(q - m theta) > 1", f"got {r / (q - mt):g}")
        route = "hls"
    idx = GNIndexSet(n, float(s), float(p), float(q), float(r), float(m), float(theta), p0, route)
    if abs(idx.residual()) > 1e-12:
        _fail("index relation", f"residual {idx.residual():g}")
    if m == q:
        res1 = theta * (1 / p - s / n) + (1 - theta) / r - 1 / q
        if abs(res1) > 1e-12:
            _fail("index relation (m = q)", f"residual {res1:g}")
    return idx


def gn_ratio(u: Field, idx: GNIndexSet) -> float:
    """``||u||_q / (||(-Delta)^(s/2) u||_p^theta ||u||_r^(1-theta))``."""
    if lp_norm(u, 2) == 0:
        raise PreconditionError("nonzero field", "GN ratio undefined for the zero field")
    if idx.p == 2:
        grad = math.sqrt(dirichlet_energy(u, idx.s))
    else:
        grad = lp_norm(fractional_laplacian(u, idx.s), idx.p)
    return lp_norm(u, idx.q) / (grad**idx.theta * lp_norm(u, idx.r) ** (1 - idx.theta))


def gn_certify(u: Field, idx: GNIndexSet, tol=1e-3, constant=10.0) -> CertificateReport:
    if idx.m != idx.q:
        raise PreconditionError("m = q", "only the m = q form is certified")
    if idx.n != u.grid.n:
        raise PreconditionError("grid dimension = n", "index set and grid dimension differ")
    ratio = gn_ratio(u, idx)
    lhs = lp_norm(u, idx.q)
    rhs = constant * lhs / ratio
    return _report("gagliardo-nirenberg", lhs, rhs, tol, u, ratio=ratio, s=idx.s, p=idx.p,
                   q=idx.q, r=idx.r, theta=idx.theta, constant=constant, route=idx.route)


# -- sharp Sobolev -------------------------------------------------------------

def sharp_sobolev_constant(n, s) -> float:
    """``pi^(s/2) G((n-s)/2)/G((n+s)/2) (G(n)/G(n/2))^(s/n)`` via log-Gamma."""
    if not 0 < s < n:
        raise PreconditionError("0 < s < n", f"got s={s}, n={n}")
    lg = (s / 2) * math.log(math.pi) + gammaln((n - s) / 2) - gammaln((n + s) / 2) \
        + (s / n) * (gammaln(n) - gammaln(n / 2))
    return math.exp(lg)


def sobolev_exponent(n, s, p) -> float:
    if not 0 < s < n:
        raise PreconditionError("0 < s < n", f"got s={s}, n={n}")
    if not 1 < p < n / s:
        raise PreconditionError("p out of range", f"need 1 < p < n/s = {n / s:g}, got p={p}")
    return p * n / (n - s * p)


def sobolev_certify(u: Field, n, s, p, tol=1e-3, constant=None) -> CertificateReport:
    """``||u||_q <= C0 ||(-Delta)^(s/2) u||_p`` with ``q = pn/(n - sp)``.

    ``C0`` defaults to :func:`sharp_sobolev_constant` when ``p == 2``; other
    exponents need an explicit ``constant``.
    """
    if n != u.grid.n:
        raise PreconditionError("grid dimension = n", "exponent data and grid dimension differ")
    q = sobolev_exponent(n, s, p)
    if constant is None:
        if p != 2:
            raise PreconditionError("constant for p != 2", "no sharp constant configured for p != 2")
        constant = sharp_sobolev_constant(n, s)
    lhs = lp_norm(u, q)
    if p == 2:
        grad = math.sqrt(dirichlet_energy(u, s))
    else:
        grad = lp_norm(fractional_laplacian(u, s), p)
    if grad == 0:
        raise PreconditionError("nonzero field", "fractional gradient vanishes")
    return _report("sobolev", lhs, constant * grad, tol, u, ratio=lhs / grad, s=s, p=p, q=q,
                   constant=constant)


# -- mollifier / Bessel kernel diagnostic ------------------------------------

_DEFAULT_REFERENCE = {1: (1, 2**17, 32.0), 2: (2, 1024, 16.0), 3: (3, 128, 8.0)}


def reference_grid(n=1) -> Grid:
    return Grid(*_DEFAULT_REFERENCE[n])


def _bump_mass(n):
    from scipy.integrate import quad

    from .rearrange import unit_ball_measure

    # int_{|x|<1} exp(-1/(1-|x|^2)) dx as a radial integral
    surface = n * unit_ball_measure(n)
    val, _ = quad(lambda t: surface * t ** (n - 1) * math.exp(-1 / (1 - t * t)), 0, 1,
                  epsabs=1e-15, epsrel=1e-13)
    return val


def mollifier(grid: Grid, ell: float) -> Field:
    """``phi^ell(x) = ell^n phi(ell x)``, ``phi`` the unit-mass bump on the unit ball."""
    phi = fields.bump(grid, radius=1.0 / ell)
    return phi * (ell**grid.n / _bump_mass(grid.n))


def compactness_diagnostic(s, levels, n=1, grid=None) -> list:
    """``||phi^ell * G_s - G_s||_1`` for each mollifier level ``ell``.

    ``G_s`` is represented by its multiplier ``(1+|xi|^2)^(-s/2)``.
    """
    if not 0 < s < n:
        raise PreconditionError("0 < s < n", f"got s={s}, n={n}")
    levels = list(levels)
    if any(l <= 0 for l in levels) or any(b <= a for a, b in zip(levels, levels[1:])):
        raise PreconditionError("levels positive increasing", f"got {levels}")
    g = grid or reference_grid(n)
    if g.n != n:
        raise PreconditionError("grid dimension = n", "reference grid dimension differs")
    G = (1.0 + g.xi_abs**2) ** (-s / 2)
    out = []
    for ell in levels:
        phi = mollifier(g, ell)
        # transform of phi^ell centred at the origin (box centre), phase removed
        ph = np.fft.fftn(np.fft.ifftshift(phi.values)) * g.cell_volume
        diff = np.fft.ifftn((ph - 1.0) * G).real / g.cell_volume
        out.append(float(g.cell_volume * np.sum(np.abs(diff))))
    return out
