"""Weighted power nonlinearities and sampled checks of the growth and
supermodularity assumptions used by the constrained minimization."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import PreconditionError

PROFILES = ("const", "exp", "algebraic", "increasing")


@dataclass(frozen=True)
class NonlinearitySpec:
    """``F(r, u) = a(r) |u|^(l+2) / (l+2)``, or ``F = 0`` for ``family='zero'``.

    Profiles for ``a``: ``const`` (``a0``), ``exp`` (``a0 exp(-r/scale)``),
    ``algebraic`` (``a0 (1 + r/scale)^-2``) and ``increasing``
    (``a0 (1 - exp(-r/scale))``, which violates monotonicity on purpose and is
    only meant for exercising the checker).
    """

    family: str = "power"
    l: float = 1.0
    K: float = 1.0
    profile: str = "const"
    a0: float = 1.0
    scale: float = 1.0
    s: float = 0.5
    n: int = 1

    def __post_init__(self):
        if self.family not in ("power", "zero"):
            raise PreconditionError("family", f"unknown nonlinearity family {self.family!r}")
        if self.profile not in PROFILES:
            raise PreconditionError("profile", f"unknown profile {self.profile!r}")
        if self.family == "power" and not self.l > 0:
            raise PreconditionError("l > 0", f"growth exponent must be positive, got {self.l}")
        if not self.K > 0:
            raise PreconditionError("K > 0", f"growth constant must be positive, got {self.K}")
        if self.a0 < 0 or not self.scale > 0:
            raise PreconditionError("a bounded nonnegative", "profile parameters out of range")

    def a(self, r):
        r = np.asarray(r, dtype=float)
        if self.profile == "const":
            return np.full_like(r, self.a0)
        if self.profile == "exp":
            return self.a0 * np.exp(-r / self.scale)
        if self.profile == "algebraic":
            return self.a0 * (1.0 + r / self.scale) ** -2
        return self.a0 * (1.0 - np.exp(-r / self.scale))

    def to_text(self):
        return (f"family={self.family} l={self.l!r} K={self.K!r} a={self.profile} "
                f"params=a0:{self.a0!r},scale:{self.scale!r},s:{self.s!r},n:{self.n}")

    @classmethod
    def from_mapping(cls, m):
        """Build from ``key=value`` pairs (``family, l, K, a, params``)."""
        kw = {}
        if "family" in m:
            kw["family"] = m["family"]
        for key in ("l", "K"):
            if key in m:
                kw[key] = float(m[key])
        if "a" in m:
            kw["profile"] = m["a"]
        params = m.get("params", "")
        for item in filter(None, (p.strip() for p in params.split(","))):
            k, _, v = item.partition(":")
            k = k.strip()
            if k not in ("a0", "scale", "s", "n"):
                raise PreconditionError("params", f"unknown nonlinearity parameter {k!r}")
            kw[k] = int(v) if k == "n" else float(v)
        for key in ("s", "n", "a0", "scale"):
            if key in m:
                kw[key] = int(m[key]) if key == "n" else float(m[key])
        return cls(**kw)

    @classmethod
    def from_text(cls, text):
        return cls.from_mapping(dict(tok.split("=", 1) for tok in text.split()))


def F_eval(spec: NonlinearitySpec, r, u):
    u = np.asarray(u, dtype=float)
    if spec.family == "zero":
        return np.zeros(np.broadcast(np.asarray(r), u).shape)
    e = spec.l + 2
    return spec.a(r) * np.abs(u) ** e / e


def f_eval(spec: NonlinearitySpec, r, u):
    """Partial derivative of :func:`F_eval` in ``u``."""
    u = np.asarray(u, dtype=float)
    if spec.family == "zero":
        return np.zeros(np.broadcast(np.asarray(r), u).shape)
    return spec.a(r) * np.abs(u) ** spec.l * u


def df_eval(spec: NonlinearitySpec, r, u):
    u = np.asarray(u, dtype=float)
    if spec.family == "zero":
        return np.zeros(np.broadcast(np.asarray(r), u).shape)
    return (spec.l + 1) * spec.a(r) * np.abs(u) ** spec.l


class Criticality(Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


def criticality(spec: NonlinearitySpec) -> Criticality:
    """Compare ``l`` with ``4s/n`` (equality up to 1e-12 relative)."""
    crit = 4 * spec.s / spec.n
    if spec.family == "zero" or (spec.l < crit and not math.isclose(spec.l, crit, rel_tol=1e-12)):
        return Criticality.SUBCRITICAL
    if math.isclose(spec.l, crit, rel_tol=1e-12):
        return Criticality.CRITICAL
    return Criticality.SUPERCRITICAL


@dataclass
class SamplerConfig:
    r_min: float = 1e-3
    r_max: float = 1e3
    n_r: int = 64
    u_max: float = 10.0
    n_u: int = 64
    eps_ladder: tuple = (1e-1, 1e-2, 1e-3, 1e-4)
    seed: int = 0
    n_random: int = 256
    atol: float = 1e-12

    def radii(self):
        rng = np.random.default_rng(self.seed)
        base = np.geomspace(self.r_min, self.r_max, self.n_r)
        extra = np.exp(rng.uniform(math.log(self.r_min), math.log(self.r_max), self.n_random))
        return np.unique(np.concatenate([[0.0], base, extra]))

    def amplitudes(self):
        rng = np.random.default_rng(self.seed + 1)
        base = np.concatenate([np.linspace(0.0, self.u_max, self.n_u),
                               np.geomspace(1e-8 * self.u_max, self.u_max, self.n_u)])
        extra = rng.uniform(0.0, self.u_max, self.n_random)
        return np.unique(np.concatenate([base, extra]))


@dataclass
class AssumptionResult:
    holds: bool
    witness: dict | None = None
    note: str = ""


@dataclass
class AssumptionReport:
    results: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.results[key]

    @property
    def all_hold(self):
        return all(self.results[k].holds for k in ("F0", "F1", "F2", "F3", "F4"))


def _f4_table(spec, r, a, atol, reciprocal):
    """Worst violation of ``F(r,a)+F(R,A) >= F(r,A)+F(R,a)`` over ``r<R, a<A``.

    With ``reciprocal`` the inequality is read in ``t = 1/r``, i.e. the sign
    of the mixed difference flips.
    """
    T = F_eval(spec, r[:, None], a[None, :])
    sign = -1.0 if reciprocal else 1.0
    worst, wit, strict = math.inf, None, True
    scale = max(1.0, float(np.max(np.abs(T))))
    for i in range(len(r) - 1):
        # D[j, k, l] for R = r[j] > r[i], a = a[k] < A = a[l]
        D = sign * (T[i, :, None] + T[i + 1:, None, :] - T[i, None, :] - T[i + 1:, :, None])
        mask = np.triu(np.ones((len(a), len(a)), dtype=bool), 1)
        vals = D[:, mask]
        if vals.size == 0:
            continue
        j = np.unravel_index(np.argmin(vals), vals.shape)
        if vals[j] < worst:
            worst = float(vals[j])
            kk, ll = np.nonzero(mask)
            wit = dict(r=float(r[i]), R=float(r[i + 1 + j[0]]),
                       a=float(a[kk[j[1]]]), A=float(a[ll[j[1]]]), defect=worst)
        if np.any(vals <= atol * scale):
            strict = False
    return worst >= -atol * scale, wit, strict


def check_assumptions(spec: NonlinearitySpec, config: SamplerConfig | None = None) -> AssumptionReport:
    cfg = config or SamplerConfig()
    r = cfg.radii()
    u = cfg.amplitudes()
    R, U = np.meshgrid(r, u, indexing="ij")
    rep = AssumptionReport()
    Fv = F_eval(spec, R, U)
    tol = cfg.atol * max(1.0, float(np.max(np.abs(Fv))))

    rep.results["F0"] = AssumptionResult(True, note="Caratheodory: assumed by construction (closed form)")

    # F1 on signed samples
    d1 = F_eval(spec, R, -U) - F_eval(spec, R, U)
    i = np.unravel_index(np.argmax(d1), d1.shape)
    ok = bool(d1[i] <= tol)
    rep.results["F1"] = AssumptionResult(
        ok, None if ok else dict(r=float(R[i]), u=float(-U[i]), lhs=float(F_eval(spec, R[i], -U[i])),
                                 rhs=float(Fv[i])))

    # F2: 0 <= F <= K(u^2 + u^(l+2))
    bound = spec.K * (U**2 + U ** (spec.l + 2))
    viol = np.maximum(Fv - bound, -Fv)
    i = np.unravel_index(np.argmax(viol), viol.shape)
    ok = bool(viol[i] <= tol)
    rep.results["F2"] = AssumptionResult(
        ok, None if ok else dict(r=float(R[i]), u=float(U[i]), F=float(Fv[i]), bound=float(bound[i])))

    # F3: for each eps find (R0, s0) with F <= eps u^2 on sampled r >= R0, 0 <= u <= s0
    pos = u[u > 0]
    witnesses, ok3 = [], True
    for eps in cfg.eps_ladder:
        found = None
        for i0 in range(len(r)):
            if r[i0] <= 0:
                continue
            Ft = F_eval(spec, r[i0:, None], pos[None, :])
            good = np.all(Ft <= eps * pos[None, :] ** 2 * (1 + cfg.atol), axis=0)
            bad = np.nonzero(~good)[0]
            s0 = pos[bad[0] - 1] if bad.size else math.inf  # largest passing sample
            if bad.size == 0 or bad[0] > 0:
                found = dict(eps=eps, R0=float(r[i0]), s0=float(s0))
                break
        if found is None:
            ok3 = False
            found = dict(eps=eps, R0=float(r[-1]), s0=0.0, F=float(F_eval(spec, r[-1], pos[0])),
                         eps_u2=float(eps * pos[0] ** 2))
        witnesses.append(found)
    rep.results["F3"] = AssumptionResult(ok3, dict(ladder=witnesses))

    # F4 as displayed, and in the reciprocal variable t = 1/r
    rs = np.geomspace(cfg.r_min, cfg.r_max, cfg.n_r)
    us = np.linspace(0.0, cfg.u_max, cfg.n_u)
    ok, wit, strict = _f4_table(spec, rs, us, cfg.atol, reciprocal=False)
    rep.results["F4"] = AssumptionResult(
        ok, None if ok else wit,
        note="orientation=displayed: F(r,a)+F(R,A) >= F(r,A)+F(R,a) for r<R, a<A")
    rep.results["F4_strict"] = AssumptionResult(bool(ok and strict), note="strict sign on all sampled rectangles")
    okr, witr, strictr = _f4_table(spec, rs, us, cfg.atol, reciprocal=True)
    rep.results["F4_reciprocal"] = AssumptionResult(
        okr, None if okr else witr,
        note="orientation=reciprocal: supermodularity of (t,y) -> F(1/t,y)")
    return rep
