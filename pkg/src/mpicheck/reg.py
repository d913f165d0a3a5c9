"""Ratio equation groups: systems p_i : p_j = a : b over positive unknowns.

Solved per connected component with a weighted union-find holding exact
reduced fractions, so downstream LCM-based slicing gets exact integers.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm


@dataclass(frozen=True)
class RatioEquation:
    i: object
    j: object
    a: int
    b: int
    origin: object = None  # symbol that produced the equation, if any

    def __str__(self):
        tag = f"  [{self.origin}]" if self.origin is not None else ""
        return f"p{self.i} : p{self.j} = {self.a} : {self.b}{tag}"


def oriented(i, j, a, b, origin=None) -> RatioEquation:
    """Equation with the smaller variable on the left, the conventional way
    to write a proportion between two nodes."""
    if str(j) < str(i):
        i, j, a, b = j, i, b, a
    return RatioEquation(i, j, a, b, origin)


@dataclass(frozen=True)
class RatioEquationGroup:
    variables: tuple
    equations: tuple

    def __post_init__(self):
        vs = set(self.variables)
        for eq in self.equations:
            if eq.i not in vs or eq.j not in vs:
                raise ValueError(f"equation {eq} uses an unknown variable")


@dataclass
class RatioSolution:
    components: tuple  # tuple of sorted variable tuples
    values: dict       # variable -> positive int, per-component gcd 1

    def component_of(self, var):
        for comp in self.components:
            if var in comp:
                return comp
        raise KeyError(var)


@dataclass
class Inconsistent:
    """Conflict witness: a chain of accepted equations joining the two
    variables, plus the equation whose ratio disagrees around the cycle."""

    equations: tuple
    detail: str


def _frac(n, d):
    g = gcd(n, d)
    return n // g, d // g


class _UnionFind:
    """Ratios are kept as reduced positive (numerator, denominator) pairs;
    exact Fraction objects are only built for error messages."""

    def __init__(self, variables):
        self.parent = {v: v for v in variables}
        # value(v) / value(parent(v))
        self.ratio = {v: (1, 1) for v in variables}
        self.size = {v: 1 for v in variables}

    def find(self, v):
        path = []
        while self.parent[v] != v:
            path.append(v)
            v = self.parent[v]
        root = v
        num, den = 1, 1
        for u in reversed(path):
            un, ud = self.ratio[u]
            num, den = _frac(num * un, den * ud)
            self.parent[u] = root
            self.ratio[u] = (num, den)
        return root

    def ratio_to_root(self, v):
        self.find(v)
        return self.ratio[v] if self.parent[v] != v else (1, 1)


def components(group: RatioEquationGroup) -> tuple:
    uf = {v: v for v in group.variables}

    def find(v):
        while uf[v] != v:
            uf[v] = uf[uf[v]]
            v = uf[v]
        return v

    for eq in group.equations:
        ri, rj = find(eq.i), find(eq.j)
        if ri != rj:
            uf[ri] = rj
    comps = {}
    for v in group.variables:
        comps.setdefault(find(v), []).append(v)
    return tuple(tuple(sorted(c, key=str)) for c in
                 sorted(comps.values(), key=lambda c: str(min(c, key=str))))


def solve(group: RatioEquationGroup):
    """Solution or an Inconsistent witness; a conflicting group is a first
    class result, not an error."""
    uf = _UnionFind(group.variables)
    tree = {v: [] for v in group.variables}  # accepted spanning edges
    for eq in group.equations:
        ri = uf.find(eq.i)
        rj = uf.find(eq.j)
        fin, fid = uf.ratio_to_root(eq.i)
        fjn, fjd = uf.ratio_to_root(eq.j)
        # demanded: value(i) / value(j) = a / b
        if ri == rj:
            if fin * fjd * eq.b != fid * fjn * eq.a:
                chain = _chain(tree, eq.i, eq.j)
                have = Fraction(fin * fjd, fid * fjn)
                return Inconsistent(
                    tuple(chain) + (eq,),
                    f"ratio around the cycle through p{eq.i} and p{eq.j} "
                    f"is {have}, equation demands {Fraction(eq.a, eq.b)}")
            continue
        # attach the smaller tree below the larger
        if uf.size[ri] < uf.size[rj]:
            # value(ri)/value(rj) = (value(ri)/value(i)) * (a/b) * (value(j)/value(rj))
            uf.parent[ri] = rj
            uf.ratio[ri] = _frac(eq.a * fjn * fid, eq.b * fjd * fin)
            uf.size[rj] += uf.size[ri]
        else:
            uf.parent[rj] = ri
            uf.ratio[rj] = _frac(eq.b * fin * fjd, eq.a * fid * fjn)
            uf.size[ri] += uf.size[rj]
        tree[eq.i].append((eq.j, eq))
        tree[eq.j].append((eq.i, eq))

    groups = {}
    for v in group.variables:
        root = uf.find(v)
        groups.setdefault(root, []).append(v)
    comps = []
    values = {}
    for members in groups.values():
        ratios = {v: uf.ratio_to_root(v) for v in members}
        denom_lcm = lcm(*(d for _, d in ratios.values()))
        ints = {v: n * (denom_lcm // d) for v, (n, d) in ratios.items()}
        g = gcd(*ints.values())
        values.update({v: n // g for v, n in ints.items()})
        comps.append(tuple(sorted(members, key=str)))
    comps.sort(key=lambda c: str(min(c, key=str)))
    return RatioSolution(tuple(comps), values)


def _chain(tree, src, dst):
    """Path of accepted equations between two variables of one component."""
    prev = {src: None}
    q = deque([src])
    while q:
        v = q.popleft()
        if v == dst:
            break
        for u, eq in tree[v]:
            if u not in prev:
                prev[u] = (v, eq)
                q.append(u)
    out = []
    v = dst
    while prev.get(v) is not None:
        v, eq = prev[v]
        out.append(eq)
    out.reverse()
    return out
