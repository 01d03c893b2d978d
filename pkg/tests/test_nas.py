import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xbarmap import HWConfig
from xbarmap.nas import (
    Candidate, DecodeError, Evaluator, Genome, ParamSurrogate, SearchInfeasible, SearchSpace, SurrogateError,
    TableSurrogate, choose, crowding_distance, decode_genome, evolve, fast_nondominated_sort, front_csv,
    gene_names, hypervolume_2d, pareto_front, search,
)
from xbarmap.nas.nsga2 import select_survivors

SPACE = SearchSpace()


def pairwise_front(points):
    pts = [tuple(p) for p in points]
    return {i for i, p in enumerate(pts)
            if not any(all(a <= b for a, b in zip(q, p)) and q != p for q in pts)}


def grid_hypervolume(points, ref, step):
    xs = np.arange(0, ref[0], step) + step / 2
    ys = np.arange(0, ref[1], step) + step / 2
    X, Y = np.meshgrid(xs, ys)
    covered = np.zeros_like(X, dtype=bool)
    for px, py in points:
        covered |= (X >= px) & (Y >= py)
    return covered.sum() * step * step


# --- sorting, crowding, hypervolume ---

def test_sort_example():
    pts = [(-0.9, 100), (-0.8, 50), (-0.7, 200)]
    assert list(fast_nondominated_sort(pts)) == [0, 0, 1]
    assert list(fast_nondominated_sort([(1.0, 1.0)])) == [0]


@settings(max_examples=200)
@given(st.lists(st.tuples(st.integers(0, 20), st.integers(0, 20)), min_size=1, max_size=40))
def test_front_zero_matches_pairwise(points):
    ranks = fast_nondominated_sort(points)
    assert set(np.flatnonzero(ranks == 0)) == pairwise_front(points)
    # peeling fronts reproduces every rank
    remaining = dict(enumerate(points))
    r = 0
    while remaining:
        ids = list(remaining)
        front = {ids[j] for j in pairwise_front([remaining[i] for i in ids])}
        assert {i for i in ids if ranks[i] == r} == front
        for i in front:
            del remaining[i]
        r += 1


def test_constrained_domination():
    pts = [(0.0, 1.0), (-1.0, 0.0), (-1.0, 0.0), (5.0, 5.0)]
    ranks = fast_nondominated_sort(pts, [0, 3, 1, 0])
    assert ranks[0] == ranks[3] - 1 == 0
    assert ranks[2] < ranks[1] and ranks[2] > ranks[3]


def test_crowding_examples():
    assert list(crowding_distance([(0, 1), (1, 0)])) == [np.inf, np.inf]
    d = crowding_distance([(0, 2), (1, 1), (2, 0)])
    assert np.isinf(d[0]) and np.isinf(d[2]) and d[1] == pytest.approx(2.0)
    dup = crowding_distance([(0, 2), (1, 1), (1, 1), (2, 0)])
    assert np.isfinite(dup[1]) and np.isfinite(dup[2])


@settings(max_examples=100)
@given(st.lists(st.tuples(st.integers(0, 50), st.integers(0, 50)), min_size=3, max_size=12, unique=True))
def test_crowding_direct_formula(points):
    F = np.array(points, dtype=float)
    got = crowding_distance(F)
    want = np.zeros(len(F))
    for m in range(2):
        order = sorted(range(len(F)), key=lambda i: F[i, m])
        lo, hi = F[order[0], m], F[order[-1], m]
        want[order[0]] = want[order[-1]] = np.inf
        for a, i, b in zip(order, order[1:], order[2:]):
            if hi > lo:
                want[i] += (F[b, m] - F[a, m]) / (hi - lo)
    np.testing.assert_allclose(got, want)


@settings(max_examples=50)
@given(st.lists(st.tuples(st.integers(0, 19), st.integers(0, 19)), min_size=1, max_size=10))
def test_hypervolume_matches_grid(points):
    assert hypervolume_2d(points, (20, 20)) == pytest.approx(grid_hypervolume(points, (20, 20), 1.0))


# --- space, decoding, surrogate ---

def independent_params(genome):
    total = 3 * 3 * 3 * 16 + 3 * 3 * 16 + 16 * 16
    c = 16
    for g, (c_out, _) in enumerate(SPACE.groups):
        for s in range(genome.genes[g]):
            k, e = genome.genes[4 + 2 * (4 * g + s)], genome.genes[5 + 2 * (4 * g + s)]
            mid = e * c
            total += c * mid + k * k * mid + mid * c_out
            c = c_out
    return total + 96 * 576 + 576 * 1024 + 1024 * 10


def test_decode_boundaries():
    small = decode_genome(SPACE.min_genome(), SPACE)
    big = decode_genome(SPACE.max_genome(), SPACE)
    assert len(small.layers) == 3 + 4 * 2 * 3 + 3
    assert big.params > small.params
    assert len(gene_names()) == 36


@settings(max_examples=40)
@given(st.integers(0, 2 ** 32 - 1))
def test_param_count_oracle(seed):
    g = SPACE.random_genome(np.random.default_rng(seed))
    assert decode_genome(g, SPACE).params == independent_params(g)


def test_decode_rejects_bad_genes():
    with pytest.raises(DecodeError):
        decode_genome(SPACE.min_genome().replace_gene(0, 5), SPACE)
    with pytest.raises(DecodeError):
        Genome((2,) * 35)


def test_surrogate_anchors_and_monotone():
    sur = ParamSurrogate(SPACE)
    acc = lambda g: sur(g, decode_genome(g, SPACE))
    assert acc(SPACE.min_genome()) == pytest.approx(0.5)
    assert acc(SPACE.max_genome()) == pytest.approx(0.95)
    rng = np.random.default_rng(3)
    for _ in range(20):
        g = SPACE.random_genome(rng)
        for idx in range(5, 36, 2):
            if g.genes[idx] < 6:
                up = g.replace_gene(idx, {3: 4, 4: 6}[g.genes[idx]])
                active = (idx - 4) // 2 % 4 < g.genes[(idx - 4) // 8]
                assert (acc(up) > acc(g)) if active else (acc(up) == acc(g))


def test_table_surrogate():
    g = SPACE.min_genome()
    table = TableSurrogate({g.digest(): 0.7})
    assert table(g, None) == 0.7
    with pytest.raises(SurrogateError):
        table(SPACE.max_genome(), None)


# --- evolution and search ---

def test_identical_population_is_a_fixed_point():
    ev = Evaluator(SPACE, HWConfig())
    pop = [ev(SPACE.min_genome())] * 6
    nxt = evolve(pop, SPACE, ev, np.random.default_rng(0), mutation_prob=0.0)
    assert [c.genome for c in nxt] == [c.genome for c in pop]


def test_survivors_prefer_rank_then_crowding():
    F = np.array([[0, 3], [1, 2], [2, 1], [3, 0], [4, 4]], dtype=float)
    assert select_survivors(F, np.zeros(5), 4) == [0, 3, 1, 2]


def test_evaluation_is_pure():
    g = SPACE.random_genome(np.random.default_rng(1))
    hw = HWConfig(num_xbars=400)
    assert Evaluator(SPACE, hw)(g) == Evaluator(SPACE, hw)(g)


def test_front_extremes_under_large_budget():
    ev = Evaluator(SPACE, HWConfig())
    rng = np.random.default_rng(0)
    cands = [ev(SPACE.max_genome()), ev(SPACE.min_genome())] + [ev(SPACE.random_genome(rng)) for _ in range(10)]
    front = pareto_front(cands)
    assert all(c.feasible for c in cands)
    assert front[-1].genome == SPACE.max_genome()
    assert front[0].total_cycles < front[-1].total_cycles
    pts = [c.minimization() for c in cands]
    keep = pairwise_front(pts)
    assert {c.genome for c in front} == {cands[i].genome for i in keep}


def test_tiny_budget_is_infeasible():
    with pytest.raises(SearchInfeasible, match="num_xbars"):
        search(SPACE, HWConfig(num_xbars=5), pop_size=4, generations=1)


def test_infeasible_candidates_stay_out_of_the_front():
    good = Candidate(SPACE.min_genome(), 0.5, 100, 3, 0.5, True)
    bad = Candidate(SPACE.max_genome(), violation=10)
    assert pareto_front([good, bad]) == [good]
    assert bad.objectives is None


def test_small_search_is_deterministic():
    hw = HWConfig(num_xbars=300)
    a = search(SPACE, hw, seed=7, pop_size=8, generations=3)
    b = search(SPACE, hw, seed=7, pop_size=8, generations=3)
    assert front_csv(a.front) == front_csv(b.front)
    assert all(x <= y for x, y in zip(a.hypervolumes, a.hypervolumes[1:]))
    speed, acc = choose(a.front, "speed"), choose(a.front, "acc")
    assert speed.total_cycles == min(c.total_cycles for c in a.front) <= acc.total_cycles
    assert acc.accuracy == max(c.accuracy for c in a.front)
    rows = list(csv.reader(io.StringIO(front_csv(a.front))))
    assert rows[0][-5:] == ["surrogate_accuracy", "total_cycles", "containers_used", "utilization", "feasible"]
    assert len(rows) == len(a.front) + 1
    # the front is exactly the undominated part of everything the run evaluated
    feasible = [c for c in a.archive if c.feasible]
    keep = pairwise_front([c.minimization() for c in feasible])
    assert {c.genome for c in a.front} == {feasible[i].genome for i in keep}


def test_shared_evaluator_must_match():
    with pytest.raises(ValueError):
        search(SPACE, HWConfig(num_xbars=300), pop_size=2, generations=1,
               evaluator=Evaluator(SPACE, HWConfig(num_xbars=200)))
