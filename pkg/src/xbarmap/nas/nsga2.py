"""NSGA-II building blocks on minimization objective arrays.

Constrained domination: a feasible point dominates any infeasible one, and
among infeasible points the smaller violation dominates.
"""

from __future__ import annotations

from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def fast_nondominated_sort(points, violations=None) -> np.ndarray:
    """Front index per point (0 = non-dominated), Deb's O(M N^2) procedure."""
    F = np.asarray(points, dtype=float).reshape(len(points), -1) if len(points) else np.zeros((0, 2))
    n = len(F)
    viol = np.zeros(n) if violations is None else np.asarray(violations, dtype=float)
    feasible = viol <= 0
    ranks = np.full(n, -1, dtype=int)

    idx = np.flatnonzero(feasible)
    sub = F[idx]
    # dom[i, j]: i dominates j
    le = np.all(sub[:, None, :] <= sub[None, :, :], axis=2)
    lt = np.any(sub[:, None, :] < sub[None, :, :], axis=2)
    dom = le & lt
    counts = dom.sum(axis=0)
    front = np.flatnonzero(counts == 0)
    r = 0
    while front.size:
        ranks[idx[front]] = r
        counts = counts - dom[front].sum(axis=0)
        counts[front] = -1
        front = np.flatnonzero(counts == 0)
        r += 1

    infeasible = np.flatnonzero(~feasible)
    if infeasible.size:
        levels = np.unique(viol[infeasible])
        ranks[infeasible] = r + np.searchsorted(levels, viol[infeasible])
    return ranks


def fronts_from_ranks(ranks: Sequence[int]) -> list[list[int]]:
    ranks = np.asarray(ranks)
    return [list(np.flatnonzero(ranks == r)) for r in range(int(ranks.max()) + 1)] if len(ranks) else []


def crowding_distance(front) -> np.ndarray:
    F = np.asarray(front, dtype=float)
    n = len(F)
    if n <= 2:
        return np.full(n, np.inf)
    dist = np.zeros(n)
    for m in range(F.shape[1]):
        order = np.argsort(F[:, m], kind="stable")
        vals = F[order, m]
        span = vals[-1] - vals[0]
        dist[order[0]] = dist[order[-1]] = np.inf
        if span > 0:
            dist[order[1:-1]] += (vals[2:] - vals[:-2]) / span
    return dist


def hypervolume_2d(points, ref: Sequence[float]) -> float:
    """Area dominated by ``points`` (minimization) and bounded by ``ref``."""
    P = np.asarray(points, dtype=float).reshape(-1, 2)
    P = P[(P[:, 0] < ref[0]) & (P[:, 1] < ref[1])]
    if not len(P):
        return 0.0
    P = P[np.lexsort((P[:, 1], P[:, 0]))]
    area, best_y = 0.0, ref[1]
    for x, y in P:
        if y < best_y:
            area += (ref[0] - x) * (best_y - y)
            best_y = y
    return float(area)


def rank_and_crowd(F: np.ndarray, violations: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ranks = fast_nondominated_sort(F, violations)
    crowd = np.zeros(len(F))
    for members in fronts_from_ranks(ranks):
        if members and violations[members[0]] <= 0:
            crowd[members] = crowding_distance(F[members])
    return ranks, crowd


def select_survivors(F: np.ndarray, violations: np.ndarray, n: int) -> list[int]:
    """Indices of the ``n`` best by (rank asc, crowding desc), stable on ties."""
    ranks, crowd = rank_and_crowd(F, violations)
    order = sorted(range(len(F)), key=lambda i: (ranks[i], -crowd[i], i))
    return order[:n]


def binary_tournament(ranks: np.ndarray, crowd: np.ndarray, rng: np.random.Generator) -> int:
    a, b = (int(v) for v in rng.integers(0, len(ranks), size=2))
    if (ranks[a], -crowd[a]) <= (ranks[b], -crowd[b]):
        return a
    return b


def uniform_crossover(p1: Sequence[int], p2: Sequence[int], rng: np.random.Generator) -> tuple[tuple[int, ...], tuple[int, ...]]:
    mask = rng.random(len(p1)) < 0.5
    c1 = tuple(int(a if m else b) for a, b, m in zip(p1, p2, mask))
    c2 = tuple(int(b if m else a) for a, b, m in zip(p1, p2, mask))
    return c1, c2


def mutate_one(genes: Sequence[int], options: Callable[[int], Sequence[int]], rng: np.random.Generator) -> tuple[int, ...]:
    idx = int(rng.integers(len(genes)))
    out = list(genes)
    out[idx] = int(rng.choice(options(idx)))
    return tuple(out)
