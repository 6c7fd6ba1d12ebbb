"""msts command line: solve, gen, validate, render, bench.

Exit codes: 0 success, 2 parse/validation error, 3 infeasible or guard
exceeded, 4 internal assertion (repair invariant broken).  Set MSTS_LOG to
a logging level name (DEBUG, INFO, ...) for diagnostics on stderr.
"""

import argparse
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass
from typing import Optional

from . import exact, reduction, separability, steiner_approx
from .instance import (InstanceError, atomic_write, parse_instance,
                       parse_solution, random_instance, serialize_instance,
                       serialize_solution, validate)

log = logging.getLogger("msts")

AUTO_EXACT_MAX = 16
ALGOS = ("exact", "steiner", "pick", "auto")


class CliError(Exception):
    def __init__(self, code, msg):
        super().__init__(msg)
        self.code = code


@dataclass
class RunReport:
    algorithm: str
    instance: str
    cost: float
    guarantee: Optional[float]
    wall_time: float
    gap: Optional[float] = None     # cost / oracle - 1, only when an oracle ran

    def to_json(self):
        d = asdict(self)
        if d["gap"] is None:
            del d["gap"]
        if d["guarantee"] is not None and math.isinf(d["guarantee"]):
            d["guarantee"] = "inf"
        return json.dumps(d, sort_keys=True)

    def to_text(self):
        g = "-" if self.guarantee is None else "%.4g" % self.guarantee
        gap = "" if self.gap is None else "  gap %.6g" % self.gap
        return "%-8s %-28s cost %.12g  guarantee %s  time %.3fs%s" % (
            self.algorithm, self.instance, self.cost, g, self.wall_time, gap)


def _read(path):
    try:
        with open(path, "rb") as f:
            return f.read()
    except OSError as e:
        raise CliError(2, "cannot read %s: %s" % (path, e.strerror))


def _load_instance(path):
    try:
        inst = parse_instance(_read(path))
    except InstanceError as e:
        raise CliError(2, str(e))
    if not inst.name:
        inst = type(inst)(inst.segments, os.path.splitext(os.path.basename(path))[0])
    return inst


def _gap(cost, opt):
    if opt == 0.0:
        return 0.0 if cost == 0.0 else math.inf
    return cost / opt - 1.0


def run_algorithm(inst, algo, seed=0, policy="always-a", budget=0, strict=True):
    """Dispatch one solver; returns (resolved algorithm name, ChoiceSolution)."""
    if algo == "auto":
        algo = "exact" if inst.n <= AUTO_EXACT_MAX else "steiner"
    if algo == "exact":
        sol = exact.brute_force_msts(inst, exact.BnBConfig(node_budget=budget))
        return algo, type(sol)(sol.choices, sol.tree, sol.cost, 1.0)
    if algo == "steiner":
        return algo, steiner_approx.solve_approx(inst, strict=strict)
    if algo == "pick":
        return algo, separability.solve_pick_endpoint(inst, policy, seed)
    raise CliError(2, "unknown algorithm %r" % algo)


def _guarded(fn):
    """Map library exceptions to exit codes."""
    try:
        return fn()
    except steiner_approx.RepairError as e:
        raise CliError(4, str(e))
    except (exact.GuardError, exact.BudgetExceeded, exact.NoSteinerTree) as e:
        raise CliError(3, str(e))


def cmd_solve(args):
    inst = _load_instance(args.inp)
    t0 = time.perf_counter()
    algo, sol = _guarded(lambda: run_algorithm(inst, args.algo, args.seed, args.policy,
                                               args.budget, not args.lenient_repair))
    wall = time.perf_counter() - t0
    gap = None
    if args.oracle:
        opt = _guarded(lambda: exact.brute_force_msts(inst).cost)
        gap = _gap(sol.cost, opt)
    if args.out:
        atomic_write(args.out, serialize_solution(sol))
    rep = RunReport(algo, inst.name, sol.cost, sol.guarantee, wall, gap)
    print(rep.to_json() if args.format == "json" else rep.to_text())
    return 0


def cmd_gen(args):
    if args.kind == "random":
        try:
            inst = random_instance(args.n, args.seed, args.separation, args.length)
        except ValueError as e:
            code = 3 if str(e).startswith("could not place") else 2
            raise CliError(code, str(e))
        atomic_write(args.out, serialize_instance(inst))
        return 0
    try:
        formula = reduction.parse_cnf2(_read(args.cnf))
        lay = reduction.build_gadgets(formula, args.variant, args.epsilon, args.wiring)
    except ValueError as e:
        raise CliError(2, str(e))
    atomic_write(args.out, serialize_instance(lay.instance))
    atomic_write(args.out + ".prov", reduction.write_provenance(lay))
    log.info("baseline_cost %.17g eps %.17g", lay.baseline_cost, lay.eps)
    return 0


def cmd_validate(args):
    inst_data = _read(args.inp)
    try:
        inst = parse_instance(inst_data, strict=False)
    except InstanceError as e:
        raise CliError(2, str(e))
    rep = validate(inst)
    if not rep.ok:
        i, j = rep.violations[0]
        raise CliError(2, "segments %d,%d not disjoint" % (i, j))
    msg = "instance ok: %d segments" % inst.n
    if args.sol:
        try:
            _, _, claimed = parse_solution(_read(args.sol))
            sol = parse_solution(_read(args.sol), inst)
        except InstanceError as e:
            raise CliError(2, str(e))
        if not math.isclose(sol.cost, claimed, rel_tol=1e-9, abs_tol=1e-12):
            raise CliError(2, "cost mismatch: file says %r, tree costs %r" % (claimed, sol.cost))
        msg += "; solution ok: cost %.17g" % sol.cost
    print(msg)
    return 0


# -- SVG --------------------------------------------------------------------

SVG_SIZE = 800.0
SVG_MARGIN = 20.0


def render_svg(inst, sol=None, roles=None):
    """Deterministic SVG text: segments as thin lines (clause segments in
    their own class), chosen endpoints as dots, tree edges as bold lines."""
    pts = inst.endpoints()
    xs = [p.x for p in pts]
    ys = [p.y for p in pts]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    span = max(x1 - x0, y1 - y0, 1e-9)
    s = (SVG_SIZE - 2 * SVG_MARGIN) / span
    w = (x1 - x0) * s + 2 * SVG_MARGIN
    h = (y1 - y0) * s + 2 * SVG_MARGIN

    def tx(p):
        return "%.3f" % ((p.x - x0) * s + SVG_MARGIN), "%.3f" % ((y1 - p.y) * s + SVG_MARGIN)

    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
           'width="%.3f" height="%.3f" viewBox="0 0 %.3f %.3f">' % (w, h, w, h),
           '<style>.segment{stroke:#555;stroke-width:1.5}'
           '.clause{stroke:#c33;stroke-width:1.5;stroke-dasharray:4 2}'
           '.tree{stroke:#000;stroke-width:3.5}.chosen{fill:#06c}</style>']
    for k, seg in enumerate(inst.segments):
        cls = "clause" if roles and k < len(roles) and roles[k].kind == "clause" else "segment"
        (ax, ay), (bx, by) = tx(seg.a), tx(seg.b)
        out.append('<line class="%s" x1="%s" y1="%s" x2="%s" y2="%s"/>' % (cls, ax, ay, bx, by))
    if sol is not None:
        nodes = sol.tree.nodes
        for i, j in sol.tree.edges:
            (ax, ay), (bx, by) = tx(nodes[i]), tx(nodes[j])
            out.append('<line class="tree" x1="%s" y1="%s" x2="%s" y2="%s"/>' % (ax, ay, bx, by))
        for p in nodes:
            cx, cy = tx(p)
            out.append('<circle class="chosen" cx="%s" cy="%s" r="3"/>' % (cx, cy))
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def cmd_render(args):
    inst = _load_instance(args.inp)
    sol = None
    if args.sol:
        try:
            sol = parse_solution(_read(args.sol), inst)
        except InstanceError as e:
            raise CliError(2, str(e))
    roles = None
    prov = args.roles or (args.inp + ".prov" if os.path.exists(args.inp + ".prov") else None)
    if prov:
        try:
            roles = reduction.parse_provenance(_read(prov))
        except ValueError as e:
            raise CliError(2, str(e))
        if len(roles) != inst.n:
            raise CliError(2, "role file has %d entries for %d segments" % (len(roles), inst.n))
    atomic_write(args.out, render_svg(inst, sol, roles))
    return 0


# -- bench ------------------------------------------------------------------

def cmd_bench(args):
    algos = [a for a in (args.algos or "").split(",") if a]
    if not algos:
        raise CliError(2, "empty algorithm list")
    for a in algos:
        if a not in ALGOS:
            raise CliError(2, "unknown algorithm %r" % a)
    if not os.path.isdir(args.suite):
        raise CliError(2, "missing suite directory %s" % args.suite)
    files = sorted(f for f in os.listdir(args.suite) if f.endswith(".msts"))
    if not files:
        raise CliError(2, "no .msts instances in %s" % args.suite)
    insts = sorted((_load_instance(os.path.join(args.suite, f)) for f in files),
                   key=lambda i: i.name)
    reports = []
    for inst in insts:
        opt = None
        if args.oracle and inst.n <= AUTO_EXACT_MAX:
            opt = _guarded(lambda: exact.brute_force_msts(inst).cost)
        for algo in algos:
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                name, sol = _guarded(lambda: run_algorithm(inst, algo, args.seed, args.policy))
                wall = time.perf_counter() - t0
                gap = None if opt is None else _gap(sol.cost, opt)
                reports.append(RunReport(name, inst.name, sol.cost, sol.guarantee, wall, gap))
    if args.report:
        atomic_write(args.report, ("\n".join(r.to_json() for r in reports) + "\n").encode())
    for r in reports:
        print(r.to_text())
    print()
    print("%-8s %6s %12s %12s" % ("algo", "runs", "mean ratio", "max ratio"))
    for algo in dict.fromkeys(r.algorithm for r in reports):
        gaps = [r.gap for r in reports if r.algorithm == algo and r.gap is not None]
        if gaps:
            ratios = [1.0 + g for g in gaps]
            print("%-8s %6d %12.6f %12.6f" % (algo, len(ratios),
                                              math.fsum(ratios) / len(ratios), max(ratios)))
        else:
            print("%-8s %6d %12s %12s" % (algo, 0, "-", "-"))
    return 0


# -- entry point ------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="msts", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("solve", help="solve one instance")
    s.add_argument("--algo", choices=ALGOS, default="auto")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out")
    s.add_argument("--oracle", action="store_true", help="also run the exact solver and report the gap")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--policy", choices=separability.POLICIES, default="always-a")
    s.add_argument("--budget", type=int, default=0, help="exact solver node budget (0 = none)")
    s.add_argument("--format", choices=("json", "text"), default="json")
    s.add_argument("--lenient-repair", action="store_true",
                   help="do not fail when the repaired tree exceeds twice the Steiner cost")
    s.set_defaults(fn=cmd_solve)

    g = sub.add_parser("gen", help="generate an instance")
    gs = g.add_subparsers(dest="kind", required=True)
    r = gs.add_parser("random")
    r.add_argument("--n", type=int, required=True)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--separation", type=float, default=0.0)
    r.add_argument("--length", type=float, default=1.0)
    r.add_argument("--out", required=True)
    r.set_defaults(fn=cmd_gen)
    c = gs.add_parser("from-cnf")
    c.add_argument("--cnf", required=True)
    c.add_argument("--variant", choices=("msts", "min-msts"), default="msts")
    c.add_argument("--epsilon", type=float, default=None)
    c.add_argument("--wiring", choices=("cycle", "fan"), default="cycle")
    c.add_argument("--out", required=True)
    c.set_defaults(fn=cmd_gen)

    v = sub.add_parser("validate", help="check an instance (and optionally a solution)")
    v.add_argument("--in", dest="inp", required=True)
    v.add_argument("--sol")
    v.set_defaults(fn=cmd_validate)

    d = sub.add_parser("render", help="draw an instance/solution as SVG")
    d.add_argument("--in", dest="inp", required=True)
    d.add_argument("--sol")
    d.add_argument("--roles", help="provenance sidecar (default: <in>.prov if present)")
    d.add_argument("--out", required=True)
    d.set_defaults(fn=cmd_render)

    b = sub.add_parser("bench", help="run algorithms over a directory of instances")
    b.add_argument("--suite", required=True)
    b.add_argument("--algos", default="exact,steiner,pick")
    b.add_argument("--repeat", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--policy", choices=separability.POLICIES, default="always-a")
    b.add_argument("--oracle", action=argparse.BooleanOptionalAction, default=True)
    b.add_argument("--report", help="write JSON-lines reports here")
    b.set_defaults(fn=cmd_bench)
    return p


def main(argv=None):
    level = os.environ.get("MSTS_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        return args.fn(args)
    except CliError as e:
        print("error: %s" % e, file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
