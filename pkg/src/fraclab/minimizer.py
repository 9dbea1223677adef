"""Ground states of ``E(u) = ||(-Delta)^(s/2) u||_2^2 - int F(|x|, u)`` on the
sphere ``||u||_2 = c``, by projected gradient descent with backtracking."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import fields
from .errors import PreconditionError
from .grid import Field, Grid, apply_multiplier, dilate, dirichlet_energy, inner, lp_norm, power_symbol
from .nonlinearity import Criticality, F_eval, NonlinearitySpec, criticality, f_eval
from .rearrange import asymmetry, schwarz_rearrange

log = logging.getLogger(__name__)


@dataclass
class SolverConfig:
    grid: Grid
    c: float = 1.0
    s: float = 0.5
    step: float = 1e-2
    backtrack: float = 0.5
    max_iters: int = 20000
    grad_tol: float = 1e-7
    seed: int | None = None
    symmetrize_every: int = 25
    init_width: float | None = None
    init_noise: float = 0.5
    critical_mass: float | None = None

    def __post_init__(self):
        if not self.c > 0:
            raise PreconditionError("c > 0", f"constraint level must be positive, got {self.c}")
        if not 0 < self.s < 1:
            raise PreconditionError("0 < s < 1", f"fractional order must lie in (0, 1), got {self.s}")
        if not self.step > 0:
            raise PreconditionError("step > 0", f"step must be positive, got {self.step}")
        if not 0 < self.backtrack < 1:
            raise PreconditionError("0 < backtrack < 1", f"got {self.backtrack}")


@dataclass
class MinimizerReport:
    u_final: Field
    energy: float
    lam: float
    el_residual: float
    asymmetry: float
    iterations: int
    energy_trace: list
    converged: bool
    flags: list = field(default_factory=list)
    norm_trace: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def as_record(self):
        return dict(energy=self.energy, **{"lambda": self.lam}, residual=self.el_residual,
                    asymmetry=self.asymmetry, iters=self.iterations, converged=self.converged,
                    flags=",".join(self.flags) or "-")


def energy(u: Field, spec: NonlinearitySpec, s: float) -> float:
    g = u.grid
    pot = g.cell_volume * float(np.sum(F_eval(spec, g.radius, u.values)))
    return dirichlet_energy(u, s) - pot


def energy_gradient(u: Field, spec: NonlinearitySpec, s: float) -> Field:
    """L^2 gradient ``2 (-Delta)^s u - f(|x|, u)``."""
    lap = apply_multiplier(u, power_symbol(u.grid, 2 * s))
    return lap.like(2 * lap.values - f_eval(spec, u.grid.radius, u.values))


def project_sphere(u: Field, c: float) -> Field:
    nrm = lp_norm(u, 2)
    if nrm == 0:
        raise PreconditionError("nonzero field", "cannot project the zero field onto the sphere")
    return u * (c / nrm)


def multiplier_and_residual(u: Field, grad: Field, c: float):
    """``lambda = -<grad, u>/(2c^2)`` and ``||grad + 2 lambda u|| / ||u||``."""
    lam = -inner(grad, u) / (2 * c**2)
    res = lp_norm(grad + u * (2 * lam), 2) / lp_norm(u, 2)
    return lam, res


def initial_field(config: SolverConfig) -> Field:
    g = config.grid
    width = config.init_width or g.L / 16
    u = fields.gaussian(g, width=width)
    if config.seed is not None:
        rng = np.random.default_rng(config.seed)
        shift = rng.uniform(-width, width, g.n)
        u = fields.gaussian(g, width=width * rng.uniform(0.7, 1.4), center=shift)
        noise = fields.random_bandlimited(g, seed=int(rng.integers(2**31)), kmax=min(8, g.N // 4))
        noise = noise * (1.0 / np.max(np.abs(noise.values)))
        u = u.like(u.values * (1 + config.init_noise * noise.values))
    return project_sphere(u, config.c)


@dataclass
class _FlowState:
    u: Field
    E: float
    grad: Field
    lam: float
    res: float


def _state(u, spec, cfg):
    gr = energy_gradient(u, spec, cfg.s)
    lam, res = multiplier_and_residual(u, gr, cfg.c)
    return _FlowState(u, energy(u, spec, cfg.s), gr, lam, res)


def _flow(cfg: SolverConfig, spec: NonlinearitySpec, u0: Field, max_iters: int,
          grad_tol: float, symmetrize: bool, observe=None):
    """Projected gradient descent; yields (state, trace, norms, flags, iters)."""
    st = _state(project_sphere(u0, cfg.c), spec, cfg)
    trace, norms, flags = [st.E], [lp_norm(st.u, 2)], []
    tau = cfg.step
    tau_min = cfg.step * 1e-14
    it = 0
    while it < max_iters:
        if st.res <= grad_tol:
            break
        if symmetrize and cfg.symmetrize_every and it % cfg.symmetrize_every == 0:
            w = schwarz_rearrange(st.u)
            Ew = energy(w, spec, cfg.s)
            if Ew <= st.E:
                st = _state(w, spec, cfg)
                trace.append(st.E)
                norms.append(lp_norm(st.u, 2))
                if st.res <= grad_tol:
                    break
        # backtracking: halve until the energy does not increase
        while True:
            v = project_sphere(st.u - st.grad * tau, cfg.c)
            Ev = energy(v, spec, cfg.s)
            if Ev <= st.E:
                break
            tau *= cfg.backtrack
            if tau < tau_min:
                break
        if tau < tau_min:
            flags.append("stalled")
            break
        new = _state(v, spec, cfg)
        # Barzilai-Borwein trial step for the next iteration
        ds = new.u.values - st.u.values
        dy = (new.grad.values + 2 * new.lam * new.u.values) - (st.grad.values + 2 * st.lam * st.u.values)
        sy = float(np.vdot(ds, dy))
        tau = float(np.vdot(ds, ds)) / sy if sy > 0 else 2 * tau
        tau = min(max(tau, cfg.step * 1e-6), 1e6 * cfg.step)
        st = new
        trace.append(st.E)
        norms.append(lp_norm(st.u, 2))
        it += 1
        if observe is not None and observe(st, it):
            break
    return st, trace, norms, flags, it


def minimize(config: SolverConfig, spec: NonlinearitySpec, u0: Field | None = None) -> MinimizerReport:
    crit = criticality(_in_context(spec, config.s, config.grid.n))
    if crit is Criticality.SUPERCRITICAL:
        raise PreconditionError("subcritical nonlinearity", "l > 4s/n: the energy is unbounded below on S_c")
    if crit is Criticality.CRITICAL and (config.critical_mass is None or config.c >= config.critical_mass):
        raise PreconditionError("c below critical mass",
                                "critical nonlinearity needs c below the configured critical_mass")
    if u0 is None:
        u0 = initial_field(config)
    elif u0.grid != config.grid:
        raise PreconditionError("grid match", "initial field grid differs from the solver grid")
    st, trace, norms, flags, iters = _flow(config, spec, u0, config.max_iters, config.grad_tol, symmetrize=True)
    converged = st.res <= config.grad_tol
    if not converged and "stalled" not in flags:
        flags.append("max_iters")
    notes = []
    if spec.family == "zero":
        notes.append("F=0: on the torus the constant field minimizes; on R^n I_c = 0 is not attained")
    if not converged:
        log.warning("minimize did not converge: residual %.3e after %d iterations", st.res, iters)
    return MinimizerReport(
        u_final=st.u, energy=st.E, lam=st.lam, el_residual=st.res, asymmetry=asymmetry(st.u),
        iterations=iters, energy_trace=trace, converged=converged, flags=flags,
        norm_trace=norms, notes=notes)


def _in_context(spec, s, n):
    return spec if (spec.s == s and spec.n == n) else replace(spec, s=s, n=n)


@dataclass
class MassProbeRow:
    c: float
    grad_initial: float
    grad_final: float
    ratio: float
    bounded: bool
    energy: float


def mass_threshold_probe(spec: NonlinearitySpec, cs, config: SolverConfig,
                         blowup=4.0, iters=400) -> list:
    """Run a bounded number of flow steps per mass level ``c``.

    ``bounded`` records whether ``||(-Delta)^(s/2) u||_2`` grew by less than
    ``blowup`` relative to the initial state.
    """
    spec = _in_context(spec, config.s, config.grid.n)
    if criticality(spec) is not Criticality.CRITICAL:
        raise PreconditionError("critical nonlinearity", "mass probe needs l = 4s/n")
    rows = []
    for c in cs:
        cfg = replace(config, c=float(c))
        u0 = initial_field(cfg)
        g0 = math.sqrt(dirichlet_energy(u0, cfg.s))
        with np.errstate(over="ignore", invalid="ignore"):
            st, trace, *_ = _flow(cfg, spec, u0, iters, 0.0, symmetrize=True)
        g1 = math.sqrt(dirichlet_energy(st.u, cfg.s))
        ratio = g1 / g0
        rows.append(MassProbeRow(float(c), g0, g1, ratio, bool(math.isfinite(ratio) and ratio < blowup), st.E))
    return rows


def supercritical_probe(spec: NonlinearitySpec, u: Field, deltas, s=None) -> list:
    """Energies along the mass-preserving dilations ``delta^(n/2) u(delta x)``.

    Dilations are realized on the grid (integer ``delta``) and renormalized to
    ``||u||_2`` exactly.
    """
    s = spec.s if s is None else s
    spec = _in_context(spec, s, u.grid.n)
    if criticality(spec) is not Criticality.SUPERCRITICAL:
        raise PreconditionError("supercritical nonlinearity", "probe needs l > 4s/n")
    c = lp_norm(u, 2)
    out = []
    for d in deltas:
        if int(d) != d or d < 1:
            raise PreconditionError("integer dilation", f"delta={d} is not representable on the grid")
        ud = project_sphere(dilate(u, int(d)) * (d ** (u.grid.n / 2)), c)
        out.append(energy(ud, spec, s))
    return out


def dilation_family(u: Field, deltas) -> list:
    c = lp_norm(u, 2)
    return [project_sphere(dilate(u, int(d)) * (d ** (u.grid.n / 2)), c) for d in deltas]
