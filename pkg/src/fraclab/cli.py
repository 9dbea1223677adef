"""Command-line front end.

Every invocation writes exactly one record line (``subcommand=... outcome=...``
followed by the payload) to ``--out`` or stdout.  Exit status is 0 for
certified/converged runs, 1 for violations or flagged runs and 2 for invalid
input.
"""
from __future__ import annotations

import argparse
import hashlib
import logging
import os
import shlex
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import config as cfgmod
from . import fields, inequalities as ineq, minimizer as mz, nonlinearity as nl
from .errors import PreconditionError
from .fieldio import read_field, write_field
from .grid import Grid
from .records import format_record, to_csv

log = logging.getLogger("fraclab")

SUBCOMMANDS = ("verify-ps", "verify-gn", "sobolev-const", "series-check", "pairing-check",
               "compactness", "check-F", "minimize", "probe-mass", "probe-super", "make-field")
OUTCOME_EXIT = {"certified": 0, "converged": 0, "violated": 1, "flagged": 1, "error": 2}
OUTCOMES = ("certified", "violated", "converged", "flagged", "error")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _floats(text):
    return [float(t) for t in text.replace(",", " ").split()]


def build_parser():
    p = _Parser(prog="fraclab", description="Fractional inequality certifiers and ground-state solver")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config")
        sp.add_argument("--field", help="field file, or gen:NAME for a built-in generator")
        sp.add_argument("--out")
        sp.add_argument("--csv")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--grid", type=Grid.parse, metavar="n,N,L")
        sp.add_argument("--s", type=float)
        sp.add_argument("--p", type=float)
        sp.add_argument("--q", type=float)
        sp.add_argument("--r", type=float)
        sp.add_argument("--c", type=float)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--timing", action="store_true", help="append wall time to the record")
        if name == "verify-gn":
            sp.add_argument("--const", type=float, default=10.0)
        if name == "sobolev-const":
            sp.add_argument("--n", type=int)
        if name == "series-check":
            sp.add_argument("--xi2", type=float, default=1.0)
            sp.add_argument("--terms", type=int, default=20)
        if name == "pairing-check":
            sp.add_argument("--k", type=int, default=1)
        if name == "compactness":
            sp.add_argument("--levels", type=_floats, default=[2, 4, 8, 16])
        if name in ("check-F", "minimize", "probe-mass", "probe-super"):
            sp.add_argument("--l", type=float)
        if name == "minimize":
            sp.add_argument("--dump", help="write u_final to this field file")
        if name == "probe-mass":
            sp.add_argument("--cs", type=_floats, default=list(np.logspace(-3, 3, 13)))
            sp.add_argument("--blowup", type=float, default=4.0)
            sp.add_argument("--iters", type=int, default=400)
        if name == "probe-super":
            sp.add_argument("--deltas", type=_floats, default=[1, 2, 4, 8])
        if name == "make-field":
            sp.add_argument("--gen", default="gaussian", choices=sorted(fields.GENERATORS))
    b = sub.add_parser("batch")
    b.add_argument("manifest")
    b.add_argument("--out")
    b.add_argument("--csv")
    return p


@dataclass
class RunRecord:
    subcommand: str
    config_hash: str
    seed: int | None
    wall_time: float
    outcome: str
    payload: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)

    def line(self, timing=False):
        head = dict(subcommand=self.subcommand, config_hash=self.config_hash, seed=self.seed,
                    outcome=self.outcome)
        if timing:
            head["wall"] = round(self.wall_time, 6)
        return format_record({**head, **self.payload})

    @property
    def exit_code(self):
        return OUTCOME_EXIT[self.outcome]


def config_hash(args):
    skip = {"out", "csv", "timing", "dump"}
    items = sorted((k, repr(v)) for k, v in vars(args).items() if k not in skip)
    h = hashlib.sha256(repr(items).encode())
    if getattr(args, "config", None):
        with open(args.config, "rb") as fh:
            h.update(fh.read())
    if args.field and not args.field.startswith("gen:") and os.path.exists(args.field):
        with open(args.field, "rb") as fh:
            h.update(fh.read())
    return h.hexdigest()[:12]


# -- helpers ------------------------------------------------------------------

def _need(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise PreconditionError(f"--{n} required", f"--{n} is required for {args.subcommand}")


def _sections(args):
    return cfgmod.load_config(args.config) if args.config else {}


def _field(args, default_gen=None, sections=None):
    if args.field and not args.field.startswith("gen:"):
        u = read_field(args.field)
        if args.grid is not None and args.grid != u.grid:
            raise PreconditionError("grid match", "--grid disagrees with the field file header")
        return u
    name = args.field[4:] if args.field else default_gen
    if name is None:
        raise PreconditionError("--field required", "a field file or gen:NAME is required")
    grid = args.grid or (cfgmod.grid_from(sections) if sections else None)
    if grid is None:
        raise PreconditionError("--grid required", "generated fields need --grid")
    return fields.generate(name, grid, seed=args.seed or 0)


def _cert(rep, rows=True):
    return ("certified" if rep.satisfied else "violated"), rep.as_record(), [rep.as_record()] if rows else []


# -- subcommands ----------------------------------------------------------------

def _verify_ps(args):
    _need(args, "s")
    u = _field(args, default_gen="random")
    return _cert(ineq.polya_szego_certify(u, args.s, tol=1e-3 if args.tol is None else args.tol))


def _verify_gn(args):
    _need(args, "s", "q")
    u = _field(args, default_gen="gaussian")
    n = u.grid.n
    p = 2.0 if args.p is None else args.p
    r = 2.0 if args.r is None else args.r
    idx = ineq.gn_indices_solve(n, args.s, p, r, args.q, args.q)
    rep = ineq.gn_certify(u, idx, tol=1e-3 if args.tol is None else args.tol, constant=args.const)
    return _cert(rep)


def _sobolev_const(args):
    _need(args, "s")
    n = args.n or (args.grid.n if args.grid else None)
    if n is None:
        raise PreconditionError("--grid or --n required", "dimension needed for the sharp constant")
    value = ineq.sharp_sobolev_constant(n, args.s)
    payload = dict(kind="sobolev-constant", n=n, s=args.s, value=value)
    if args.field:
        u = _field(args)
        rep = ineq.sobolev_certify(u, n, args.s, 2.0 if args.p is None else args.p,
                                   tol=1e-3 if args.tol is None else args.tol)
        outcome, rec, rows = _cert(rep)
        payload.update({k: v for k, v in rec.items() if k not in ("kind", "n", "s")})
        return outcome, payload, rows
    return "certified", payload, [payload]


def _series_check(args):
    _need(args, "s")
    res = ineq.multiplier_series_check(args.xi2, args.s, args.terms)
    errs = [abs(t.partial - res.limit) for t in res.terms]
    positive = all(t.coefficient > 0 for t in res.terms)
    monotone = all(b <= a + 4 * np.finfo(float).eps for a, b in zip(errs, errs[1:]))
    tol = 1e-5 if args.tol is None else args.tol
    ok = positive and monotone and errs[-1] <= tol
    payload = dict(kind="series", xi2=args.xi2, s=args.s, K=args.terms, partial=res.partial,
                   limit=res.limit, error=errs[-1], positive=positive, monotone=monotone)
    rows = [dict(k=t.k, coefficient=t.coefficient, partial=t.partial, error=e) for t, e in zip(res.terms, errs)]
    return ("certified" if ok else "violated"), payload, rows


def _pairing_check(args):
    u = _field(args, default_gen="random")
    rep = ineq.bessel_pairing_check(u, args.k, tol=1e-10 if args.tol is None else args.tol)
    return _cert(rep)


def _compactness(args):
    _need(args, "s")
    n = args.grid.n if args.grid else 1
    vals = ineq.compactness_diagnostic(args.s, args.levels, n=n, grid=args.grid)
    decreasing = all(b < a for a, b in zip(vals, vals[1:]))
    payload = dict(kind="compactness", n=n, s=args.s, levels=",".join(f"{l:g}" for l in args.levels),
                   first=vals[0], last=vals[-1], last_over_first=vals[-1] / vals[0], decreasing=decreasing)
    rows = [dict(ell=l, l1=v) for l, v in zip(args.levels, vals)]
    return ("certified" if decreasing else "violated"), payload, rows


def _spec(args, sections, s=None, n=None):
    return cfgmod.nonlinearity_from(sections, s=s, n=n, l=args.l)


def _check_F(args):
    sections = _sections(args)
    grid = args.grid or (cfgmod.grid_from(sections) if "grid" in sections else None)
    s = args.s if args.s is not None else float(sections.get("solver", {}).get("s", 0.5))
    spec = _spec(args, sections, s=s, n=grid.n if grid else None)
    cfg = nl.SamplerConfig(seed=args.seed or 0)
    rep = nl.check_assumptions(spec, cfg)
    payload = dict(kind="assumptions", **{"family": spec.family, "l": spec.l, "a": spec.profile},
                   criticality=nl.criticality(spec).value)
    rows = []
    for name, res in rep.results.items():
        payload[name] = res.holds
        row = dict(assumption=name, holds=res.holds, note=res.note.replace(" ", "_") or None)
        if res.witness and name != "F3":
            row.update(res.witness)
        rows.append(row)
    payload["orientation"] = "displayed"
    return ("certified" if rep.all_hold else "violated"), payload, rows


def _solver_setup(args):
    sections = _sections(args)
    grid = cfgmod.grid_from(sections, args.grid)
    solver = cfgmod.solver_from(sections, grid, c=args.c, s=args.s, seed=args.seed)
    spec = _spec(args, sections, s=solver.s, n=grid.n)
    return sections, grid, solver, spec


def _minimize(args):
    _, grid, solver, spec = _solver_setup(args)
    u0 = read_field(args.field) if args.field else None
    rep = mz.minimize(solver, spec, u0)
    if args.dump:
        write_field(rep.u_final, args.dump)
    payload = dict(kind="minimize", n=grid.n, s=solver.s, c=solver.c, l=spec.l, grid=grid.spec(),
                   **rep.as_record())
    rows = [dict(iter=i, energy=e, norm=nrm) for i, (e, nrm) in enumerate(zip(rep.energy_trace, rep.norm_trace))]
    return ("converged" if rep.converged else "flagged"), payload, rows


def _probe_mass(args):
    sections, grid, solver, spec = _solver_setup(args)
    probe = sections.get("probe", {})
    blowup = float(probe.get("blowup", args.blowup))
    iters = int(probe.get("iters", args.iters))
    cs = _floats(probe["cs"]) if "cs" in probe else args.cs
    rows = mz.mass_threshold_probe(spec, cs, solver, blowup=blowup, iters=iters)
    flags = [r.bounded for r in rows]
    first_unbounded = next((i for i, b in enumerate(flags) if not b), len(flags))
    single = all(flags[:first_unbounded]) and not any(flags[first_unbounded:])
    transition = rows[first_unbounded].c if first_unbounded < len(rows) else None
    ok = single and 0 < first_unbounded < len(rows)
    payload = dict(kind="mass-probe", n=grid.n, s=solver.s, l=spec.l, levels=len(rows),
                   single_transition=single, transition_c=transition)
    return ("certified" if ok else "flagged"), payload, [vars(r) for r in rows]


def _probe_super(args):
    sections, grid, solver, spec = _solver_setup(args)
    if args.field and not args.field.startswith("gen:"):
        u = read_field(args.field)
    else:
        u = mz.project_sphere(fields.gaussian(grid, width=grid.L / 16), solver.c)
    energies = mz.supercritical_probe(spec, u, args.deltas, s=solver.s)
    decreasing = all(b < a for a, b in zip(energies, energies[1:]))
    ok = decreasing and energies[-1] < 0
    payload = dict(kind="super-probe", n=grid.n, s=solver.s, l=spec.l, decreasing=decreasing,
                   last_energy=energies[-1])
    rows = [dict(delta=d, energy=e) for d, e in zip(args.deltas, energies)]
    return ("certified" if ok else "violated"), payload, rows


def _make_field(args):
    _need(args, "grid", "out")
    u = fields.generate(args.gen, args.grid, seed=args.seed or 0)
    write_field(u, args.out)
    args.out = None  # the record goes to stdout, the field to --out
    return "certified", dict(kind="field", gen=args.gen, grid=args.grid.spec()), []


HANDLERS = {
    "verify-ps": _verify_ps, "verify-gn": _verify_gn, "sobolev-const": _sobolev_const,
    "series-check": _series_check, "pairing-check": _pairing_check, "compactness": _compactness,
    "check-F": _check_F, "minimize": _minimize, "probe-mass": _probe_mass,
    "probe-super": _probe_super, "make-field": _make_field,
}


def execute(args) -> RunRecord:
    t0 = time.perf_counter()
    try:
        chash = config_hash(args)
    except OSError as exc:
        return RunRecord(args.subcommand, "-", args.seed, 0.0, "error",
                         dict(constraint="readable-input", message=type(exc).__name__))
    try:
        outcome, payload, rows = HANDLERS[args.subcommand](args)
    except PreconditionError as exc:
        log.error("%s: %s", args.subcommand, exc)
        outcome, payload, rows = "error", dict(constraint=exc.constraint.replace(" ", "_")), []
    except (OSError, ValueError) as exc:
        log.error("%s: %s", args.subcommand, exc)
        outcome, payload, rows = "error", dict(constraint="valid-input", message=type(exc).__name__), []
    return RunRecord(args.subcommand, chash, args.seed, time.perf_counter() - t0, outcome, payload, rows)


def _write(path, text):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _run_line(argv):
    args = build_parser().parse_args(argv)
    rec = execute(args)
    return rec.line(), rec.outcome, rec.rows


def batch(manifest, out=None, csv_path=None) -> int:
    parser = build_parser()
    runs = []
    with open(manifest) as fh:
        lines = fh.read().splitlines()
    for lineno, line in enumerate(lines, 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            argv = shlex.split(line)
            args = parser.parse_args(argv)
        except (UsageError, ValueError) as exc:
            print(f"fraclab: manifest line {lineno} malformed: {exc}", file=sys.stderr)
            return 2
        if args.subcommand == "batch":
            print(f"fraclab: manifest line {lineno}: nested batch not allowed", file=sys.stderr)
            return 2
        runs.append(argv)
    workers = int(os.environ.get("FRACLAB_THREADS", os.cpu_count() or 1))
    if workers > 1 and len(runs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_line, runs))  # map preserves manifest order
    else:
        results = [_run_line(a) for a in runs]
    counts = {o: 0 for o in OUTCOMES}
    for _, outcome, _ in results:
        counts[outcome] += 1
    summary = format_record(dict(summary="batch", total=len(results), **counts))
    _write(out, "".join(line + "\n" for line, _, _ in results) + summary + "\n")
    if csv_path:
        rows = [dict(run=i, **row) for i, (_, _, rs) in enumerate(results) for row in rs]
        with open(csv_path, "w") as fh:
            fh.write(to_csv(rows))
    bad = counts["violated"] + counts["flagged"] + counts["error"]
    return 2 if counts["error"] else (1 if bad else 0)


def run(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="fraclab: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    if args.subcommand == "batch":
        try:
            return batch(args.manifest, args.out, args.csv)
        except OSError as exc:
            print(f"fraclab: cannot read manifest: {exc}", file=sys.stderr)
            return 2
    rec = execute(args)
    _write(args.out, rec.line(timing=args.timing) + "\n")
    if args.csv and rec.rows:
        with open(args.csv, "w") as fh:
            fh.write(to_csv(rec.rows))
    return rec.exit_code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
