"""Instances, solutions, the MSTS text formats and the random generator."""

import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import (Point, PointTree, Segment, as_point, euclidean_mst,
                       is_spanning_tree, segment_distance, tree_cost)


class InstanceError(ValueError):
    """Malformed or invalid instance / solution text."""


@dataclass(frozen=True)
class Instance:
    segments: tuple
    name: str = ""

    def __post_init__(self):
        segs = tuple(Segment(as_point(s[0]), as_point(s[1])) for s in self.segments)
        object.__setattr__(self, "segments", segs)

    @property
    def n(self):
        return len(self.segments)

    def endpoints(self):
        """Flat list [a0, b0, a1, b1, ...]."""
        return [p for s in self.segments for p in s]


@dataclass(frozen=True)
class ChoiceSolution:
    choices: tuple
    tree: PointTree
    cost: float
    guarantee: Optional[float] = None   # claimed approximation factor, if any

    def check(self, inst):
        """Structural feasibility: one selector per segment, tree over the picks."""
        if len(self.choices) != inst.n or any(c not in (0, 1) for c in self.choices):
            raise ValueError("need exactly one 0/1 selector per segment")
        pts = chosen_points(inst, self.choices)
        if tuple(self.tree.nodes) != tuple(pts):
            raise ValueError("tree nodes are not the chosen endpoints")
        self.tree.check()


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations


def chosen_points(inst, choices):
    return [s[c] for s, c in zip(inst.segments, choices)]


def solution_from_choices(inst, choices, guarantee=None):
    """ChoiceSolution whose tree is the Euclidean MST of the chosen endpoints."""
    choices = tuple(int(c) for c in choices)
    tree = euclidean_mst(chosen_points(inst, choices))
    return ChoiceSolution(choices, tree, tree.cost, guarantee)


def solution_from_edges(inst, choices, edges, guarantee=None):
    choices = tuple(int(c) for c in choices)
    pts = tuple(chosen_points(inst, choices))
    edges = tuple(sorted((min(i, j), max(i, j)) for i, j in edges))
    if not is_spanning_tree(len(pts), edges):
        raise ValueError("edges do not span the chosen endpoints")
    tree = PointTree(pts, edges, tree_cost(pts, edges))
    return ChoiceSolution(choices, tree, tree.cost, guarantee)


def validate(inst):
    rep = ValidationReport()
    segs = inst.segments
    for i in range(len(segs)):
        for j in range(i + 1, len(segs)):
            if segment_distance(segs[i], segs[j]) <= 0.0:
                rep.violations.append((i, j))
    return rep


# -- text formats -----------------------------------------------------------


def fmt17(v):
    return "%.17g" % v


def _text(data):
    return data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data


def _content_lines(text):
    """Yield (lineno, stripped line) skipping blanks and # comments."""
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield no, line


def parse_instance(data, strict=True):
    text = _text(data)
    name = ""
    for raw in text.splitlines():
        if raw.startswith("# name:"):
            name = raw[len("# name:"):].strip()
            break
    lines = list(_content_lines(text))
    if not lines:
        raise InstanceError("bad magic/count")
    head = lines[0][1].split()
    if len(head) != 2 or head[0] != "MSTS":
        raise InstanceError("bad magic/count")
    try:
        n = int(head[1])
    except ValueError:
        raise InstanceError("bad magic/count")
    if n < 1:
        raise InstanceError("bad magic/count")
    segs = []
    for no, line in lines[1:]:
        tok = line.split()
        try:
            vals = [float(t) for t in tok]
        except ValueError:
            raise InstanceError("parse error at line %d" % no)
        if len(vals) != 4 or not all(math.isfinite(v) for v in vals):
            raise InstanceError("parse error at line %d" % no)
        segs.append(Segment(Point(vals[0], vals[1]), Point(vals[2], vals[3])))
    if len(segs) != n:
        raise InstanceError("expected %d segments" % n)
    inst = Instance(tuple(segs), name)
    if strict:
        rep = validate(inst)
        if not rep.ok:
            i, j = rep.violations[0]
            raise InstanceError("segments %d,%d not disjoint" % (i, j))
    return inst


def serialize_instance(inst):
    out = []
    if inst.name:
        out.append("# name: %s" % inst.name)
    out.append("MSTS %d" % inst.n)
    for s in inst.segments:
        out.append(" ".join(fmt17(v) for v in (s.a.x, s.a.y, s.b.x, s.b.y)))
    return ("\n".join(out) + "\n").encode("utf-8")


def serialize_solution(sol):
    n = len(sol.choices)
    out = ["MSTS-SOL %d %s" % (n, fmt17(sol.cost)),
           " ".join(str(c) for c in sol.choices)]
    out += ["%d %d" % e for e in sol.tree.edges]
    return ("\n".join(out) + "\n").encode("utf-8")


def parse_solution(data, inst=None):
    """Parse MSTS-SOL text.  With inst given, rebuild and re-cost the tree."""
    lines = list(_content_lines(_text(data)))
    if not lines:
        raise InstanceError("bad magic/count")
    head = lines[0][1].split()
    if len(head) != 3 or head[0] != "MSTS-SOL":
        raise InstanceError("bad magic/count")
    try:
        n, cost = int(head[1]), float(head[2])
    except ValueError:
        raise InstanceError("bad magic/count")
    if len(lines) < 2:
        raise InstanceError("expected %d segments" % n)
    no, sel = lines[1]
    try:
        choices = tuple(int(t) for t in sel.split())
    except ValueError:
        raise InstanceError("parse error at line %d" % no)
    if len(choices) != n or any(c not in (0, 1) for c in choices):
        raise InstanceError("expected %d segments" % n)
    edges = []
    for no, line in lines[2:]:
        tok = line.split()
        try:
            i, j = (int(t) for t in tok)
        except ValueError:
            raise InstanceError("parse error at line %d" % no)
        edges.append((i, j))
    if len(edges) != n - 1:
        raise InstanceError("parse error at line %d" % lines[-1][0])
    if inst is None:
        return choices, edges, cost
    if inst.n != n:
        raise InstanceError("expected %d segments" % inst.n)
    try:
        return solution_from_edges(inst, choices, edges)
    except ValueError as e:
        raise InstanceError(str(e))


def atomic_write(path, data):
    """Write bytes via a temp file in the same directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- random generation ------------------------------------------------------

def make_rng(seed):
    """The one PRNG used everywhere: numpy PCG64 seeded with a 64-bit integer."""
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))


def random_instance(n, seed, min_separation=0.0, max_length=1.0,
                    max_tries=200, max_grow=12):
    """n pairwise-disjoint segments by rejection sampling.

    Midpoints are uniform in a square box whose side scales with sqrt(n),
    directions uniform on [0, pi), lengths uniform on [0, max_length].  A
    candidate is kept when its distance to every accepted segment is
    >= min_separation and > 0.  After max_tries*n rejections the box grows
    by 1.5x; after max_grow growths we give up.
    """
    if n < 1 or min_separation < 0 or not max_length > 0:
        raise ValueError("need n >= 1, min_separation >= 0, max_length > 0")
    rng = make_rng(seed)
    side = (max_length + min_separation) * (1.0 + math.sqrt(n)) * 1.5
    segs = []
    for _ in range(max_grow + 1):
        fails = 0
        while len(segs) < n and fails < max_tries * n:
            cx, cy = rng.uniform(0.0, side, size=2)
            th = rng.uniform(0.0, math.pi)
            half = 0.5 * rng.uniform(0.0, max_length)
            dx, dy = half * math.cos(th), half * math.sin(th)
            s = Segment(Point(float(cx - dx), float(cy - dy)),
                        Point(float(cx + dx), float(cy + dy)))
            if s.length() > max_length:      # rounding guard
                fails += 1
                continue
            if all(_far_enough(s, t, min_separation) for t in segs):
                segs.append(s)
            else:
                fails += 1
        if len(segs) == n:
            return Instance(tuple(segs), "random-n%d-s%d" % (n, seed))
        side *= 1.5
    raise InstanceError("could not place %d segments" % n)


def _far_enough(s, t, sep):
    d = segment_distance(s, t)
    return d > 0.0 and d >= sep
