"""Solver config files: ``[grid]``, ``[solver]``, ``[nonlinearity]`` and an
optional ``[probe]`` section of ``key=value`` lines."""
import configparser
from dataclasses import replace

from .errors import PreconditionError
from .grid import Grid
from .minimizer import SolverConfig
from .nonlinearity import NonlinearitySpec

_SOLVER_TYPES = dict(c=float, s=float, step=float, backtrack=float, max_iters=int, grad_tol=float,
                     seed=int, symmetrize_every=int, init_width=float, init_noise=float,
                     critical_mass=float)


def _parser():
    cp = configparser.ConfigParser(delimiters=("=",), comment_prefixes=("#", ";"))
    cp.optionxform = str  # keep 'K' distinct from 'k'
    return cp


def parse_config(text):
    cp = _parser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise PreconditionError("config syntax", str(exc)) from exc
    return {name: dict(cp[name]) for name in cp.sections()}


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def grid_from(sections, override=None):
    if override is not None:
        return override
    g = sections.get("grid")
    if not g:
        raise PreconditionError("grid", "no [grid] section and no --grid given")
    return Grid(int(g["n"]), int(g["N"]), float(g["L"]))


def solver_from(sections, grid, **overrides):
    kw = {}
    for k, v in sections.get("solver", {}).items():
        if k not in _SOLVER_TYPES:
            raise PreconditionError("solver key", f"unknown [solver] key {k!r}")
        kw[k] = None if v.strip().lower() in ("", "none") else _SOLVER_TYPES[k](v)
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return SolverConfig(grid=grid, **kw)


def nonlinearity_from(sections, s=None, n=None, **overrides):
    m = dict(sections.get("nonlinearity", {}))
    m.update({k: str(v) for k, v in overrides.items() if v is not None})
    spec = NonlinearitySpec.from_mapping(m)
    ctx = {}
    if s is not None:
        ctx["s"] = s
    if n is not None:
        ctx["n"] = n
    return replace(spec, **ctx) if ctx else spec


def dump_config(grid, solver: SolverConfig, spec: NonlinearitySpec):
    lines = ["[grid]", f"n={grid.n}", f"N={grid.N}", f"L={grid.L!r}", "", "[solver]"]
    for k in _SOLVER_TYPES:
        v = getattr(solver, k)
        if v is not None:
            lines.append(f"{k}={v!r}")
    lines += ["", "[nonlinearity]"]
    lines += spec.to_text().split()
    return "\n".join(lines) + "\n"
