"""Max-2-SAT -> MSTS instance compiler, canonical trees and the decoder.

Geometry (all vertical tops on y = 0, verticals of length LAMBDA hanging
down, neighbouring tops one unit apart):

* variable gadget i: tops at x = (i-1)*P + 1 .. +4, plus one horizontal at
  height eps from the 2nd to the 4th column;
* literal gadget j (j-th literal of the formula): tops at x = -j*P .. -j*P+3,
  plus two horizontals;
* clause c: one horizontal at height eps whose right end sits over column 2
  (positive) or 4 (negative) of literal 2c-1 and whose left end sits over the
  matching column of literal 2c.

Literal horizontals are wired in one of two ways.  "fan": horizontal 5 runs
from column 2 of the literal gadget at height 2j*eps to column 2 of its
variable gadget, horizontal 6 from column 4 at (2j+1)*eps to column 4.
"cycle" (default): single-occurrence variables use the fan wiring, while the
2r horizontals of a variable with r >= 2 occurrences form one even cycle over
columns of its literal gadgets, alternating heavy and light edges.  The fan
wiring lets several literal gadgets of one variable share the variable
columns, which breaks the cost identity; the cycle has exactly two cheapest
orientations (all true / all false) and every mixed orientation leaves at
least one light edge unabsorbed.
"""

import math
import re
from dataclasses import dataclass, field
from typing import NamedTuple

from .geometry import Point, Segment
from .instance import (Instance, InstanceError, chosen_points,
                       solution_from_choices, validate)

UNIT = 1.0
LAMBDA = 4.0
PITCH = 5.0
EXTENSION = 0.5          # MIN-MSTS: added at both ends of every horizontal


class FormulaError(ValueError):
    pass


@dataclass(frozen=True)
class Cnf2Formula:
    n: int
    clauses: tuple          # ((var, positive), (var, positive)), var 1-based

    def __post_init__(self):
        cl = tuple(tuple((int(v), bool(p)) for v, p in c) for c in self.clauses)
        object.__setattr__(self, "clauses", cl)
        if self.n < 1 or not cl:
            raise FormulaError("need n >= 1 and at least one clause")
        for c in cl:
            if len(c) != 2:
                raise FormulaError("clause size must be 2")
            for v, _ in c:
                if not 1 <= v <= self.n:
                    raise FormulaError("variable %d out of range" % v)

    @property
    def m(self):
        return len(self.clauses)

    def literals(self):
        return [lit for c in self.clauses for lit in c]

    def satisfied(self, assignment):
        return sum(any(assignment[v - 1] == p for v, p in c) for c in self.clauses)


def parse_cnf2(data):
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    header = None
    nums = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            tok = line.split()
            if header is not None or len(tok) != 4 or tok[1] != "cnf":
                raise FormulaError("parse error: bad header at line %d" % no)
            try:
                header = (int(tok[2]), int(tok[3]))
            except ValueError:
                raise FormulaError("parse error: bad header at line %d" % no)
            continue
        if header is None:
            raise FormulaError("parse error: missing header")
        for t in line.split():
            if not re.fullmatch(r"-?\d+", t):
                raise FormulaError("parse error at line %d" % no)
            nums.append(int(t))
    if header is None:
        raise FormulaError("parse error: missing header")
    n, m = header
    clauses, cur = [], []
    for x in nums:
        if x == 0:
            if len(cur) != 2:
                raise FormulaError("clause size must be 2")
            clauses.append(tuple(cur))
            cur = []
        else:
            if abs(x) > n:
                raise FormulaError("parse error: variable %d out of range" % abs(x))
            cur.append((abs(x), x > 0))
    if cur:
        raise FormulaError("clause size must be 2" if len(cur) != 2 else
                           "parse error: missing clause terminator")
    if len(clauses) != m:
        raise FormulaError("parse error: header says %d clauses, found %d" % (m, len(clauses)))
    return Cnf2Formula(n, tuple(clauses))


class Role(NamedTuple):
    kind: str               # "variable" | "literal" | "clause"
    params: tuple           # (i, l) | (i, j, k, l) | (c,)

    def text(self):
        return "%s %s" % (self.kind, " ".join(str(p) for p in self.params))


@dataclass(frozen=True)
class ReductionLayout:
    instance: Instance
    roles: tuple
    formula: Cnf2Formula
    eps: float
    variant: str            # "msts" | "min-msts"
    wiring: str             # "cycle" | "fan"
    baseline_cost: float
    true_side: dict = field(repr=False)   # horizontal index -> side picked when its variable is true
    cycles: dict = field(repr=False)      # variable -> ordered list of its cycle horizontals
    lam: float = LAMBDA
    pitch: float = PITCH
    unit: float = UNIT

    def core_indices(self):
        """Indices of the gadget segments, i.e. everything but the clauses (the set S)."""
        return [k for k, r in enumerate(self.roles) if r.kind != "clause"]

    def index_of(self, role):
        return self.roles.index(role)

    def core_instance(self):
        segs = self.instance.segments
        return Instance(tuple(segs[k] for k in self.core_indices()),
                        self.instance.name + "-core")


def default_eps(m):
    return min(0.01, 1.0 / (16 * (m + 1)))


def var_column(i, l):
    return (i - 1) * PITCH + l


def lit_column(j, l):
    return -j * PITCH + (l - 1)


def _cycle_plan(js, last_positive):
    """Column sequence of the cycle for a variable occurring at literal
    positions js (ascending).  Returns (nodes, t_parity): nodes are
    (j, column number) pairs; nodes at positions of parity t_parity are the
    ones occupied when the variable is true."""
    g1 = js[0]
    if last_positive:
        seq = [(g1, 1), (g1, 2), (g1, 4)]           # F, T, F
        odd, even = 2, 4
    else:
        seq = [(g1, 2), (g1, 4), (g1, 3)]           # T, F, T
        odd, even = 4, 2
    for j in js[1:-1]:
        seq += [(j, odd), (j, even)]
    seq.append((js[-1], 2 if last_positive else 4))
    return seq, (1 if last_positive else 0)


def build_gadgets(formula, variant="msts", eps=None, wiring="cycle"):
    if variant not in ("msts", "min-msts"):
        raise ValueError("variant must be msts or min-msts")
    if wiring not in ("cycle", "fan"):
        raise ValueError("wiring must be cycle or fan")
    n, m = formula.n, formula.m
    if eps is None:
        eps = default_eps(m)
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    if (4 * m + 1) * eps >= 0.25 * UNIT:
        raise ValueError("epsilon too large")
    ext = EXTENSION if variant == "min-msts" else 0.0

    lits = formula.literals()
    occ = {i: [] for i in range(1, n + 1)}
    for j, (v, _) in enumerate(lits, 1):
        occ[v].append(j)
    kth = {}
    for i, js in occ.items():
        for k, j in enumerate(js, 1):
            kth[j] = k

    segs, roles = [], []
    true_side, cycles = {}, {}

    def vertical(x, role):
        segs.append(Segment(Point(x, 0.0), Point(x, -LAMBDA)))
        roles.append(role)

    def horizontal(x1, x2, y, role, t_at_x=None):
        lo, hi = min(x1, x2), max(x1, x2)
        segs.append(Segment(Point(lo - ext, y), Point(hi + ext, y)))
        roles.append(role)
        if t_at_x is not None:
            true_side[len(segs) - 1] = 0 if t_at_x == lo else 1
        return len(segs) - 1

    for i in range(1, n + 1):
        for l in range(1, 5):
            vertical(var_column(i, l), Role("variable", (i, l)))
    for j, (v, _) in enumerate(lits, 1):
        for l in range(1, 5):
            vertical(lit_column(j, l), Role("literal", (v, j, kth[j], l)))
    for i in range(1, n + 1):
        horizontal(var_column(i, 2), var_column(i, 4), eps, Role("variable", (i, 5)),
                   t_at_x=var_column(i, 4))

    # literal horizontals, listed per literal gadget (5 then 6)
    lit_h = {}
    for i in range(1, n + 1):
        js = occ[i]
        if not js:
            continue
        if wiring == "fan" or len(js) == 1:
            for j in js:
                lit_h[(j, 5)] = (lit_column(j, 2), var_column(i, 2), 2 * j * eps,
                                 lit_column(j, 2))
                lit_h[(j, 6)] = (lit_column(j, 4), var_column(i, 4), (2 * j + 1) * eps,
                                 var_column(i, 4))
            continue
        r = len(js)
        seq, tpar = _cycle_plan(js, lits[js[-1] - 1][1])
        # height levels (in units of eps) of this variable's literals; every
        # light edge sits below every heavy one
        pool = sorted([2 * j for j in js] + [2 * j + 1 for j in js])
        light, heavy = pool[:r], pool[r:]
        for t in range(2 * r):
            u, w = seq[t], seq[(t + 1) % (2 * r)]
            tnode = u if t % 2 == tpar else w
            q = heavy[t // 2] if t % 2 == 0 else light[t // 2]
            # the horizontal at level 2j (2j+1) is literal j's s5 (s6)
            lit_h[(q // 2, 5 + q % 2)] = (lit_column(*u), lit_column(*w), q * eps,
                                          lit_column(*tnode))
    cyc_idx = {}
    for j, (v, _) in enumerate(lits, 1):
        for l in (5, 6):
            x1, x2, y, tx = lit_h[(j, l)]
            idx = horizontal(x1, x2, y, Role("literal", (v, j, kth[j], l)), t_at_x=tx)
            if wiring == "cycle" and len(occ[v]) > 1:
                cyc_idx.setdefault(v, []).append(idx)
    cycles = {v: sorted(ix) for v, ix in cyc_idx.items()}

    for c, ((v1, p1), (v2, p2)) in enumerate(formula.clauses, 1):
        j1, j2 = 2 * c - 1, 2 * c
        xr = lit_column(j1, 2 if p1 else 4)
        xl = lit_column(j2, 2 if p2 else 4)
        horizontal(xl, xr, eps, Role("clause", (c,)))

    # horizontals first: the branch-and-bound then settles the orientations
    # near the root and prunes bottom-picking verticals immediately
    order = [k for k, sg in enumerate(segs) if sg.a.x != sg.b.x]
    order += [k for k, sg in enumerate(segs) if sg.a.x == sg.b.x]
    new_of = {k: t for t, k in enumerate(order)}
    segs = [segs[k] for k in order]
    roles = [roles[k] for k in order]
    true_side = {new_of[k]: v for k, v in true_side.items()}
    cycles = {v: sorted(new_of[k] for k in ix) for v, ix in cycles.items()}

    name = "reduction-n%d-m%d-%s" % (n, m, variant)
    inst = Instance(tuple(segs), name)
    rep = validate(inst)
    if not rep.ok:
        raise InstanceError("segments %d,%d not disjoint" % rep.violations[0])
    lay = ReductionLayout(inst, tuple(roles), formula, eps, variant, wiring, 0.0,
                          true_side, cycles)
    base = canonical_tree(lay, [False] * n, core_only=True).cost
    return ReductionLayout(inst, tuple(roles), formula, eps, variant, wiring, base,
                           true_side, cycles)


def _var_of(role):
    return role.params[0] if role.kind in ("variable", "literal") else None


def canonical_choices(layout, assignment):
    f = layout.formula
    if len(assignment) != f.n:
        raise ValueError("assignment length must equal the variable count")
    lits = f.literals()
    choices = []
    for idx, role in enumerate(layout.roles):
        if idx in layout.true_side:
            val = assignment[_var_of(role) - 1]
            ts = layout.true_side[idx]
            choices.append(ts if val else 1 - ts)
        elif role.kind == "clause":
            c = role.params[0]
            (v1, p1), (v2, p2) = lits[2 * c - 2], lits[2 * c - 1]
            if assignment[v1 - 1] == p1:
                choices.append(1)          # right end sits over literal 2c-1
            elif assignment[v2 - 1] == p2:
                choices.append(0)
            else:
                choices.append(0)
        else:
            choices.append(0)              # vertical: top
    return choices


def canonical_tree(layout, assignment, core_only=False):
    """Assignment-indexed feasible solution: every vertical top, horizontals
    on their true/false side, clause segments on a satisfied literal when
    there is one.  The tree is the MST of those picks."""
    choices = canonical_choices(layout, assignment)
    if core_only:
        return solution_from_choices(layout.core_instance(),
                                     [choices[k] for k in layout.core_indices()])
    return solution_from_choices(layout.instance, choices)


def decode_assignment(layout, sol):
    f = layout.formula
    inst = layout.instance
    if len(sol.choices) != inst.n:
        raise ValueError("undecodable solution")
    pts = chosen_points(inst, sol.choices)
    nbr = {}
    for a, b in sol.tree.edges:
        nbr.setdefault(a, set()).add(b)
        nbr.setdefault(b, set()).add(a)
    out = []
    for i in range(1, f.n + 1):
        h = layout.index_of(Role("variable", (i, 5)))
        if i in layout.cycles:
            # normalise the cost-neutral variable horizontal to the cycle state
            ix = layout.cycles[i]
            votes = sum(1 if sol.choices[k] == layout.true_side[k] else -1 for k in ix)
            if votes == 0:
                votes = 1 if sol.choices[ix[0]] == layout.true_side[ix[0]] else -1
            out.append(votes > 0)
            continue
        v2 = layout.index_of(Role("variable", (i, 2)))
        v4 = layout.index_of(Role("variable", (i, 4)))
        joined2 = v2 in nbr.get(h, ()) and sol.choices[v2] == 0
        joined4 = v4 in nbr.get(h, ()) and sol.choices[v4] == 0
        if joined2 != joined4:
            out.append(joined4)
            continue
        # degenerate shape: move the horizontal's link onto the top below it
        x = pts[h].x
        if abs(x - var_column(i, 2)) <= EXTENSION + 1e-9 and x < var_column(i, 3):
            out.append(False)
        elif abs(x - var_column(i, 4)) <= EXTENSION + 1e-9:
            out.append(True)
        else:
            raise ValueError("undecodable solution")
    return out


def check_properties(layout, sol):
    """Structural checks on a tree over the core segments (no clauses).

    (i) every vertical contributes its top; (ii) no tree edge joins two
    literal horizontals (cycle wiring: allowed when both belong to the same
    variable and the edge is vertical); (iii) no tree edge joins horizontals
    of two variable gadgets; (iv) every literal horizontal is attached by a
    vertical edge over a column of a gadget of its own variable.
    sol may cover the core instance or the full one.  Returns the list of
    failed property labels."""
    if len(sol.choices) == layout.instance.n:
        idx = list(range(layout.instance.n))
    elif len(sol.choices) == len(layout.core_indices()):
        idx = layout.core_indices()
    else:
        raise ValueError("solution does not match the layout")
    roles = [layout.roles[k] for k in idx]
    cyc_vars = set(layout.cycles)
    pts = [layout.instance.segments[k][c] for k, c in zip(idx, sol.choices)]
    n = len(sol.choices)
    horiz = {k for k in range(n) if roles[k].params[-1] in (5, 6) and roles[k].kind != "clause"}
    failed = []
    if any(sol.choices[k] != 0 for k in range(n) if k not in horiz and roles[k].kind != "clause"):
        failed.append("i")
    edges = sol.tree.edges

    def vert(a, b):
        return abs(pts[a].x - pts[b].x) <= 1e-12

    def is_lit_h(k):
        return k in horiz and roles[k].kind == "literal"

    def is_var_h(k):
        return k in horiz and roles[k].kind == "variable"

    for a, b in edges:
        if is_lit_h(a) and is_lit_h(b):
            same = (layout.wiring == "cycle" and roles[a].params[0] == roles[b].params[0]
                    and roles[a].params[0] in cyc_vars and vert(a, b))
            if not same:
                failed.append("ii")
                break
    for a, b in edges:
        if is_var_h(a) and is_var_h(b):
            failed.append("iii")
            break
    lits = layout.formula.literals()
    for k in range(n):
        if not is_lit_h(k):
            continue
        v = roles[k].params[0]
        if v in cyc_vars:
            cols = {lit_column(j, l) for j, (w, _) in enumerate(lits, 1) if w == v
                    for l in range(1, 5)}
        else:
            j = roles[k].params[1]
            cols = {lit_column(j, l) for l in range(1, 5)}
        cols |= {var_column(v, l) for l in range(1, 5)}
        ok = any(abs(pts[k].x - c) <= 1e-12 for c in cols) and any(
            vert(a, b) for a, b in edges if k in (a, b))
        if not ok:
            failed.append("iv")
            break
    return failed


def write_provenance(layout):
    lines = ["%d %s" % (k, r.text()) for k, r in enumerate(layout.roles)]
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_provenance(data):
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    roles = []
    for no, raw in enumerate(text.splitlines(), 1):
        tok = raw.split()
        if not tok:
            continue
        try:
            k = int(tok[0])
            params = tuple(int(t) for t in tok[2:])
        except (ValueError, IndexError):
            raise FormulaError("parse error at line %d" % no)
        if k != len(roles) or len(tok) < 2:
            raise FormulaError("parse error at line %d" % no)
        roles.append(Role(tok[1], params))
    return roles


def segment_count(formula):
    return 5 * formula.n + 13 * formula.m
