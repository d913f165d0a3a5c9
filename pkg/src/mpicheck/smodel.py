"""Deadlock detection for loop-free programs.

Two independent methods: the linear multi-queue matching algorithm (the
workhorse) and the contracted message-dependence-graph cycle test (used for
witnesses and cross-checking).  Matching is FIFO: the k-th send instance of a
symbol pairs with its k-th receive instance.
"""
from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass

import networkx as nx

from .verdicts import (DEADLOCK_FREE, Deadlock, MdgCycle, StuckQueues,
                       UnmatchedTotals, Verdict)


class InternalDisagreement(Exception):
    """The queue algorithm and the MDG cycle test disagreed — a bug."""


def check_by_queues(queues: dict, rng=None) -> Verdict:
    """Repeatedly remove matching front pairs until done or stuck.

    Each event is touched a constant number of times: a node re-enters the
    worklist only when its front advances, so total work is linear in the
    event count.  `rng` randomizes the processing order (verdict must not
    depend on it).
    """
    qs = {n: q for n, q in queues.items()}
    idx = {n: 0 for n in queues}
    pending = deque(queues.keys()) if rng is None else list(queues.keys())
    while pending:
        if rng is None:
            n = pending.popleft()
        else:
            n = pending.pop(rng.randrange(len(pending)))
        q = qs[n]
        if idx[n] >= len(q):
            continue
        s = q[idx[n]]
        other = s.dst if n == s.src else s.src
        if other == n or other not in qs:
            continue
        oq = qs[other]
        if idx[other] < len(oq) and oq[idx[other]] == s:
            idx[n] += 1
            idx[other] += 1
            pending.append(n)
            pending.append(other)
    if all(idx[n] >= len(qs[n]) for n in qs):
        return DEADLOCK_FREE
    remaining = tuple(
        (n, tuple(qs[n][idx[n]:])) for n in qs if idx[n] < len(qs[n]))
    return Deadlock(StuckQueues(remaining))


@dataclass(frozen=True)
class Mdg:
    """Contracted pair graph: one node per matched send/recv pair, a directed
    edge between consecutive pairs in each process's program order."""

    pairs: tuple           # ((symbol, k), ...)
    edges: tuple           # (((symbol, k), (symbol, k)), ...)
    unpaired: tuple        # ((node, symbol, role, k), ...)


def _totals(queues: dict):
    sends = Counter()
    recvs = Counter()
    for n, q in queues.items():
        for s in q:
            if n == s.src:
                sends[s] += 1
            else:
                recvs[s] += 1
    return sends, recvs


def build_mdg(queues: dict) -> Mdg:
    sends, recvs = _totals(queues)
    paired_n = {s: min(sends[s], recvs[s]) for s in set(sends) | set(recvs)}
    pairs = []
    for s, k in paired_n.items():
        pairs.extend((s, i) for i in range(k))
    edges = set()
    unpaired = []
    for n, q in queues.items():
        seen = Counter()
        prev = None
        for s in q:
            role = "send" if n == s.src else "recv"
            k = seen[(s, role)]
            seen[(s, role)] += 1
            if k >= paired_n.get(s, 0):
                unpaired.append((n, s, role, k))
                continue
            cur = (s, k)
            if prev is not None and prev != cur:
                edges.add((prev, cur))
            prev = cur
    return Mdg(tuple(pairs), tuple(sorted(
        edges, key=lambda e: (str(e[0][0]), e[0][1], str(e[1][0]), e[1][1]))),
        tuple(unpaired))


def find_deadlock_cycle(mdg: Mdg):
    """A directed cycle in the contracted graph, or None.

    A contracted cycle corresponds exactly to a raw-MDG circle of length
    greater than 2, since matched-pair 2-circles are contracted away.
    """
    g = nx.DiGraph()
    g.add_nodes_from(mdg.pairs)
    g.add_edges_from(mdg.edges)
    try:
        cyc = nx.find_cycle(g)
    except nx.NetworkXNoCycle:
        return None
    return tuple(u for u, _ in cyc)


def mdg_says_deadlock(mdg: Mdg) -> bool:
    return bool(mdg.unpaired) or find_deadlock_cycle(mdg) is not None


def check_smodel(queues: dict, cross_check: bool = True) -> Verdict:
    """Queue verdict, cross-checked against the MDG test; the witness prefers
    a pair cycle, then unmatched totals, then the stuck-queue snapshot."""
    verdict = check_by_queues(queues)
    if not cross_check and isinstance(verdict, Deadlock):
        return _with_best_witness(queues, verdict)
    if cross_check:
        mdg = build_mdg(queues)
        if mdg_says_deadlock(mdg) != isinstance(verdict, Deadlock):
            raise InternalDisagreement(
                "queue matching and MDG cycle test disagree on this model")
        if isinstance(verdict, Deadlock):
            return _with_best_witness(queues, verdict, mdg)
    return verdict


def _with_best_witness(queues, verdict, mdg=None) -> Verdict:
    if mdg is None:
        mdg = build_mdg(queues)
    cyc = find_deadlock_cycle(mdg)
    if cyc is not None:
        return Deadlock(MdgCycle(cyc))
    if mdg.unpaired:
        _, s, _, _ = mdg.unpaired[0]
        sends, recvs = _totals(queues)
        return Deadlock(UnmatchedTotals(s, sends.get(s, 0), recvs.get(s, 0)))
    return verdict


def mdg_to_dot(mdg: Mdg, program=None) -> str:
    """DOT rendering; edges on a deadlock cycle are highlighted."""
    cyc = find_deadlock_cycle(mdg)
    cyc_edges = set()
    if cyc:
        ring = list(cyc) + [cyc[0]]
        cyc_edges = {(ring[i], ring[i + 1]) for i in range(len(cyc))}

    def nid(pair):
        s, k = pair
        return f"\"{s.name}_{s.src}_{s.dst}_{k}\""

    lines = ["digraph mdg {"]
    for s, k in mdg.pairs:
        lines.append(
            f"  {nid((s, k))} [label=\"{s.name}: {s.src}->{s.dst}#{k}\"];")
    for u, v in mdg.edges:
        attr = " [color=red, penwidth=2]" if (u, v) in cyc_edges else ""
        lines.append(f"  {nid(u)} -> {nid(v)}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"
