"""Single-loop pipeline: view extraction, equations, consistency, slicing."""
import pytest

from mpicheck.model import (INFINITE, For, Recv, Send, Symbol, make_program,
                            unroll)
from mpicheck.l0 import (as_l0_view, build_l0_reg, check_l0, ratio_consistent,
                         slice_view)
from mpicheck.reg import solve
from mpicheck.trace import Trace
from mpicheck.verdicts import (Deadlock, RatioInconsistency, UnmatchedTotals)

A = Symbol("a", 0, 1)
B = Symbol("b", 1, 0)


def loop_prog(c0, body0, c1, body1):
    return make_program({0: [For(c0, tuple(body0))],
                         1: [For(c1, tuple(body1))]})


def test_view_requires_single_top_level_loop():
    assert as_l0_view(make_program({0: [Send(A)], 1: [Recv(A)]})) is None
    nested = make_program({0: [For(2, (For(2, (Send(A),)),))],
                           1: [For(4, (Recv(A),))]})
    assert as_l0_view(nested) is None
    view = as_l0_view(loop_prog(2, [Send(A)], 2, [Recv(A)]))
    assert view.loops[0] == (2, (Send(A),))


def test_empty_node_joins_view_with_unit_loop():
    prog = make_program({0: [For(2, (Send(A),))], 1: [For(2, (Recv(A),))],
                         2: []})
    view = as_l0_view(prog)
    assert view.loops[2] == (1, ())


def test_build_reg_counts_both_endpoints():
    view = as_l0_view(loop_prog(3, [Send(A), Send(A)], 2, [Recv(A), Recv(A),
                                                           Recv(A)]))
    group, unmatched = build_l0_reg(view)
    assert unmatched == []
    (eq,) = group.equations
    assert (eq.i, eq.j, eq.a, eq.b) == (0, 1, 2, 3)
    assert eq.origin == A


def test_build_reg_reports_one_sided_symbols():
    view = as_l0_view(loop_prog(2, [Send(A)], 2, [Recv(B)]))
    _, unmatched = build_l0_reg(view)
    assert {s for s, _, _ in unmatched} == {A, B}


def test_ratio_consistent_infinite_means_zero():
    view = as_l0_view(loop_prog(2, [Send(A)], 1, [Recv(A), Recv(A)]))
    group, _ = build_l0_reg(view)
    sol = solve(group)
    assert ratio_consistent(sol, {0: INFINITE, 1: INFINITE}) is None
    assert ratio_consistent(sol, {0: 2, 1: 1}) is None
    assert ratio_consistent(sol, {0: 2, 1: 2}) is not None
    assert ratio_consistent(sol, {0: INFINITE, 1: 2}) is not None


def test_slice_replaces_counts_by_lcm_over_value():
    view = as_l0_view(loop_prog(INFINITE, [Send(A)], INFINITE,
                                [Recv(A), Recv(A)]))
    group, _ = build_l0_reg(view)
    sliced = slice_view(view, solve(group))
    assert sliced.body(0)[0].count == 2
    assert sliced.body(1)[0].count == 1
    queues = unroll(sliced)
    assert queues[0] == (A, A) and queues[1] == (A, A)


def test_check_l0_free_and_traced():
    trace = Trace()
    verdict = check_l0(loop_prog(INFINITE, [Send(A), Recv(B)], INFINITE,
                                 [Recv(A), Send(B)]), trace)
    assert bool(verdict)
    (rec,) = trace.reg_records
    assert rec.loop_times == {0: 1, 1: 1}


def test_check_l0_unmatched_symbol_deadlocks():
    verdict = check_l0(loop_prog(2, [Send(A)], 2, [Recv(B)]))
    assert isinstance(verdict, Deadlock)
    assert isinstance(verdict.witness, UnmatchedTotals)


def test_check_l0_ratio_conflict_deadlocks():
    # finite loop totals disagree with the per-iteration ratio
    verdict = check_l0(loop_prog(2, [Send(A)], 3, [Recv(A)]))
    assert isinstance(verdict, Deadlock)
    assert isinstance(verdict.witness, RatioInconsistency)


def test_check_l0_mixed_infinite_and_finite_deadlocks():
    verdict = check_l0(loop_prog(INFINITE, [Send(A)], 2, [Recv(A)]))
    assert isinstance(verdict, Deadlock)


def test_check_l0_rejects_other_shapes():
    with pytest.raises(ValueError):
        check_l0(make_program({0: [Send(A)], 1: [Recv(A)]}))
