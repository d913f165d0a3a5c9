"""Ratio equation groups: solving, components, conflict witnesses."""
import random
from fractions import Fraction
from math import gcd

from hypothesis import given, settings
from hypothesis import strategies as st

from mpicheck.reg import (Inconsistent, RatioEquation, RatioEquationGroup,
                          RatioSolution, components, oriented, solve)


def test_single_equation():
    group = RatioEquationGroup((0, 1), (RatioEquation(0, 1, 1, 2),))
    sol = solve(group)
    assert isinstance(sol, RatioSolution)
    assert sol.values == {0: 1, 1: 2}
    assert sol.components == ((0, 1),)


def test_ratios_are_reduced_per_component():
    group = RatioEquationGroup((0, 1), (RatioEquation(0, 1, 4, 6),))
    sol = solve(group)
    assert sol.values == {0: 2, 1: 3}


def test_isolated_variable_gets_own_component():
    group = RatioEquationGroup((0, 1, 2), (RatioEquation(0, 1, 1, 1),))
    sol = solve(group)
    assert sol.components == ((0, 1), (2,))
    assert sol.values[2] == 1
    assert sol.component_of(2) == (2,)
    assert components(group) == ((0, 1), (2,))


def test_transitive_chain():
    group = RatioEquationGroup((0, 1, 2), (
        RatioEquation(0, 1, 1, 2),
        RatioEquation(1, 2, 3, 1),
    ))
    sol = solve(group)
    # p0:p1 = 1:2 and p1:p2 = 3:1 => p0:p1:p2 = 3:6:2
    assert sol.values == {0: 3, 1: 6, 2: 2}


def test_consistent_duplicate_is_fine():
    group = RatioEquationGroup((0, 1), (
        RatioEquation(0, 1, 1, 2),
        RatioEquation(0, 1, 2, 4),
    ))
    assert isinstance(solve(group), RatioSolution)


def test_inconsistent_yields_witness_chain():
    eqs = (
        RatioEquation(0, 1, 1, 2),
        RatioEquation(1, 2, 1, 1),
        RatioEquation(0, 2, 1, 1),   # conflicts: implies p0:p2 = 1:2
    )
    out = solve(RatioEquationGroup((0, 1, 2), eqs))
    assert isinstance(out, Inconsistent)
    assert out.equations[-1] == eqs[2]
    # the chain joins the conflicting equation's endpoints
    chain_vars = {v for eq in out.equations for v in (eq.i, eq.j)}
    assert {0, 2} <= chain_vars


def test_oriented_puts_smaller_variable_first():
    eq = oriented(2, 1, 3, 5)
    assert (eq.i, eq.j, eq.a, eq.b) == (1, 2, 5, 3)
    assert oriented(0, 1, 3, 5) == RatioEquation(0, 1, 3, 5)


def _derived_group(rng, n_vars, n_eqs, perturb=False):
    """Equations derived from hidden positive values, optionally with one
    equation knocked off so the group becomes inconsistent."""
    values = [rng.randint(1, 12) for _ in range(n_vars)]
    eqs = []
    for _ in range(n_eqs):
        i, j = rng.sample(range(n_vars), 2)
        k = rng.randint(1, 4)
        eqs.append(RatioEquation(i, j, values[i] * k, values[j] * k))
    if perturb and eqs:
        t = rng.randrange(len(eqs))
        e = eqs[t]
        eqs[t] = RatioEquation(e.i, e.j, e.a * 2 + 1, e.b)
    return RatioEquationGroup(tuple(range(n_vars)), tuple(eqs)), values


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_solution_matches_hidden_values(seed):
    rng = random.Random(seed)
    group, values = _derived_group(rng, rng.randint(2, 8), rng.randint(1, 12))
    sol = solve(group)
    assert isinstance(sol, RatioSolution)
    for comp in sol.components:
        # solved values proportional to the hidden ones within the component
        ratios = {Fraction(sol.values[v], values[v]) for v in comp}
        assert len(ratios) == 1
        assert gcd(*(sol.values[v] for v in comp)) == 1


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_perturbed_cycle_detected(seed):
    rng = random.Random(seed)
    n = rng.randint(3, 6)
    # a closed cycle of consistent equations plus one perturbed edge
    values = [rng.randint(1, 9) for _ in range(n)]
    eqs = [RatioEquation(i, (i + 1) % n, values[i], values[(i + 1) % n])
           for i in range(n)]
    t = rng.randrange(n)
    e = eqs[t]
    eqs[t] = RatioEquation(e.i, e.j, e.a * 3, e.b * 2)
    out = solve(RatioEquationGroup(tuple(range(n)), tuple(eqs)))
    assert isinstance(out, Inconsistent)


def test_unknown_variable_rejected():
    try:
        RatioEquationGroup((0,), (RatioEquation(0, 1, 1, 1),))
    except ValueError:
        return
    raise AssertionError("expected a ValueError")
