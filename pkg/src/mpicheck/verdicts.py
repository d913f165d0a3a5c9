"""Verdicts and deadlock witnesses shared by all checking engines."""
from __future__ import annotations

from dataclasses import dataclass


class Verdict:
    pass


@dataclass(frozen=True)
class DeadlockFree(Verdict):
    def __bool__(self):
        return True


@dataclass(frozen=True)
class Deadlock(Verdict):
    witness: object

    def __bool__(self):
        return False


DEADLOCK_FREE = DeadlockFree()


@dataclass(frozen=True)
class StuckQueues:
    """Snapshot of the event queues at the point where no match was possible."""

    remaining: tuple  # ((node, (symbol, ...)), ...)

    def to_dict(self):
        return {
            "type": "stuck-queues",
            "remaining": {str(n): [str(s) for s in q] for n, q in self.remaining},
        }


@dataclass(frozen=True)
class MdgCycle:
    """Directed cycle in the contracted message-pair graph."""

    pairs: tuple  # ((symbol, k), ...)

    def to_dict(self):
        return {
            "type": "mdg-cycle",
            "pairs": [f"{s}#{k}" for s, k in self.pairs],
        }


@dataclass(frozen=True)
class UnmatchedTotals:
    symbol: object
    sends: int
    recvs: int

    def to_dict(self):
        return {
            "type": "unmatched-totals",
            "symbol": str(self.symbol),
            "sends": self.sends,
            "recvs": self.recvs,
        }


@dataclass(frozen=True)
class RatioInconsistency:
    detail: str
    equations: tuple = ()

    def to_dict(self):
        return {
            "type": "ratio-inconsistency",
            "detail": self.detail,
            "equations": [str(e) for e in self.equations],
        }


@dataclass(frozen=True)
class FppStuck:
    """First-power pool with no reducible or expansible related set left."""

    pool: tuple  # ((node, rendered power), ...)

    def to_dict(self):
        return {
            "type": "fpp-stuck",
            "pool": {str(n): p for n, p in self.pool},
        }


def witness_dict(verdict: Verdict):
    if isinstance(verdict, Deadlock) and verdict.witness is not None:
        return verdict.witness.to_dict()
    return None
