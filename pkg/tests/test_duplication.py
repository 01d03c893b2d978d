import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xbarmap import DuplicationInfeasible, DuplicationProblem, lp_relaxation_bound, solve_duplication
from xbarmap.duplication import DuplicationPlan

from duplication_oracle import brute_force


def full_enumeration_bottleneck(cycles, areas, capacity, keep_bottleneck=True):
    """Smallest achievable max_i C_i / x_i over every copy vector that fits.

    With ``keep_bottleneck`` only vectors in which the slowest layer stays
    the slowest after duplication count.
    """
    t = int(np.argmax(cycles))
    ranges = [range(1, capacity // a + 1) for a in areas]
    best = None
    for xs in itertools.product(*ranges):
        if sum(x * a for x, a in zip(xs, areas)) > capacity:
            continue
        terms = [Fraction(c, x) for c, x in zip(cycles, xs)]
        if keep_bottleneck and max(terms) != terms[t]:
            continue
        best = max(terms) if best is None else min(best, max(terms))
    return best


def test_worked_examples():
    assert solve_duplication(DuplicationProblem((100,), (10,), 35)).copies == (3,)
    plan = solve_duplication(DuplicationProblem((100, 50, 25), (4, 2, 1), 20))
    assert plan.copies == (3, 2, 1) and plan.x_t == 3
    assert solve_duplication(DuplicationProblem((10, 10), (5, 5), 10)).copies == (1, 1)


def test_x_t4_needs_21_cells():
    p = DuplicationProblem((100, 50, 25), (4, 2, 1), 20)
    assert p.area_of(p.copies_for(4)) == 21


def test_exhaustive_example():
    # every x vector with x_i <= 8
    cycles, areas, cap = (100, 50, 25), (4, 2, 1), 20
    best = max(
        (xs for xs in itertools.product(range(1, 9), repeat=3)
         if sum(x * a for x, a in zip(xs, areas)) <= cap and all(x * 100 >= xs[0] * c for x, c in zip(xs, cycles))),
        key=lambda xs: (xs[0], [-x for x in xs]),
    )
    assert best == (3, 2, 1)


def test_lp_bound_examples():
    assert lp_relaxation_bound(DuplicationProblem((100,), (10,), 35)) == pytest.approx(3.5)
    assert lp_relaxation_bound(DuplicationProblem((100, 50, 25), (4, 2, 1), 20)) == pytest.approx(20 / 5.25)
    assert lp_relaxation_bound(DuplicationProblem((7, 7), (3, 3), 6)) == pytest.approx(1.0)


def test_infeasible_carries_deficit():
    with pytest.raises(DuplicationInfeasible) as err:
        solve_duplication(DuplicationProblem((5, 5), (10, 8), 15))
    assert err.value.deficit == 3


def test_bottleneck_tie_goes_to_earliest():
    assert DuplicationProblem((5, 9, 9), (1, 1, 1), 10).bottleneck == 1


def test_plan_round_trip():
    plan = solve_duplication(DuplicationProblem((100, 50, 25), (4, 2, 1), 20))
    assert DuplicationPlan.from_dict(plan.to_dict()) == plan
    assert plan.throughput == Fraction(3, 100)


instances = st.integers(1, 4).flatmap(lambda n: st.tuples(
    st.lists(st.integers(1, 64), min_size=n, max_size=n),
    st.lists(st.integers(1, 16), min_size=n, max_size=n),
    st.integers(1, 128),
))


@settings(max_examples=300)
@given(instances)
def test_matches_brute_force(inst):
    cycles, areas, cap = inst
    p = DuplicationProblem(tuple(cycles), tuple(areas), cap)
    if sum(areas) > cap:
        with pytest.raises(DuplicationInfeasible):
            solve_duplication(p)
        return
    plan = solve_duplication(p)
    assert (plan.x_t, plan.copies) == brute_force(cycles, areas, cap)
    assert plan.x_t <= lp_relaxation_bound(p) + 1e-9
    assert p.area_of(plan.copies) <= cap


@settings(max_examples=60)
@given(st.integers(1, 3).flatmap(lambda n: st.tuples(
    st.lists(st.integers(1, 20), min_size=n, max_size=n),
    st.lists(st.integers(1, 6), min_size=n, max_size=n),
    st.integers(1, 24),
)))
def test_minimizes_bottleneck(inst):
    cycles, areas, cap = inst
    if sum(areas) > cap:
        return
    plan = solve_duplication(DuplicationProblem(tuple(cycles), tuple(areas), cap))
    achieved = max(Fraction(c, x) for c, x in zip(cycles, plan.copies))
    assert achieved == Fraction(max(cycles), plan.x_t)
    assert achieved == full_enumeration_bottleneck(cycles, areas, cap)
    assert achieved >= full_enumeration_bottleneck(cycles, areas, cap, keep_bottleneck=False)


def test_unconstrained_bottleneck_can_beat_the_fixed_target():
    # Fixing the target layer forgoes vectors where another layer becomes
    # the bottleneck: (2, 3, 5) fits in 23 cells with max C/x = 2/3.
    cycles, areas, cap = (1, 2, 3), (1, 2, 3), 23
    plan = solve_duplication(DuplicationProblem(cycles, areas, cap))
    assert plan.copies == (2, 3, 4)
    assert max(Fraction(c, x) for c, x in zip(cycles, plan.copies)) == Fraction(3, 4)
    assert full_enumeration_bottleneck(cycles, areas, cap, keep_bottleneck=False) == Fraction(2, 3)


@given(instances, st.integers(0, 64))
def test_more_capacity_never_hurts(inst, extra):
    cycles, areas, cap = inst
    if sum(areas) > cap:
        return
    a = solve_duplication(DuplicationProblem(tuple(cycles), tuple(areas), cap))
    b = solve_duplication(DuplicationProblem(tuple(cycles), tuple(areas), cap + extra))
    assert b.x_t >= a.x_t
