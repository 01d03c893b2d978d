"""Layer duplication under a crossbar-area budget.

The target is the layer with the most cycles (earliest on ties). Once the
target has ``n`` copies, every other layer needs enough copies that its
per-copy cycles do not exceed the target's, and the cheapest such count
is ``ceil(n * cycles / target_cycles)``. Total area only grows with ``n``,
so the largest ``n`` that fits is found by binary search.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


class DuplicationInfeasible(ValueError):
    def __init__(self, deficit: int):
        self.deficit = deficit
        super().__init__(f"single-copy area exceeds capacity by {deficit} cells")


@dataclass(frozen=True)
class DuplicationProblem:
    cycles: tuple[int, ...]
    areas: tuple[int, ...]
    capacity: int

    def __post_init__(self):
        if len(self.cycles) != len(self.areas) or not self.cycles:
            raise ValueError("cycles and areas must be non-empty and equally long")
        if min(self.cycles) < 1 or min(self.areas) < 1:
            raise ValueError("cycles and areas must be >= 1")

    @property
    def bottleneck(self) -> int:
        return max(range(len(self.cycles)), key=lambda i: (self.cycles[i], -i))

    def copies_for(self, x_t: int) -> tuple[int, ...]:
        c_t = self.cycles[self.bottleneck]
        return tuple(-(-x_t * c // c_t) for c in self.cycles)

    def area_of(self, copies: Sequence[int]) -> int:
        return sum(x * a for x, a in zip(copies, self.areas))


@dataclass(frozen=True)
class DuplicationPlan:
    copies: tuple[int, ...]
    bottleneck: int
    x_t: int
    throughput: Fraction  # x_t / C_t, samples per cycle of the bottleneck layer

    @property
    def bottleneck_cycles(self) -> Fraction:
        return 1 / self.throughput

    @classmethod
    def identity(cls, n_layers: int, cycles: Sequence[int] | None = None) -> "DuplicationPlan":
        cycles = list(cycles) if cycles is not None else [1] * n_layers
        t = max(range(n_layers), key=lambda i: (cycles[i], -i))
        return cls(copies=(1,) * n_layers, bottleneck=t, x_t=1, throughput=Fraction(1, cycles[t]))

    def to_dict(self) -> dict:
        return {
            "copies": list(self.copies),
            "bottleneck": self.bottleneck,
            "x_t": self.x_t,
            "throughput": str(self.throughput),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DuplicationPlan":
        return cls(
            copies=tuple(d["copies"]),
            bottleneck=int(d["bottleneck"]),
            x_t=int(d["x_t"]),
            throughput=Fraction(d["throughput"]),
        )


def plan_for(p: DuplicationProblem, x_t: int) -> DuplicationPlan:
    t = p.bottleneck
    return DuplicationPlan(copies=p.copies_for(x_t), bottleneck=t, x_t=x_t,
                           throughput=Fraction(x_t, p.cycles[t]))


def solve_duplication(p: DuplicationProblem) -> DuplicationPlan:
    """Largest bottleneck copy count whose induced copy vector fits the capacity."""
    base = sum(p.areas)
    if base > p.capacity:
        raise DuplicationInfeasible(base - p.capacity)
    lo, hi = 1, p.capacity // p.areas[p.bottleneck]
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if p.area_of(p.copies_for(mid)) <= p.capacity:
            lo = mid
        else:
            hi = mid - 1
    return plan_for(p, lo)


def lp_relaxation_bound(p: DuplicationProblem) -> float:
    """Continuous optimum of x_t; an upper bound on the integer solution."""
    base = sum(p.areas)
    if base > p.capacity:
        raise DuplicationInfeasible(base - p.capacity)
    c_t = p.cycles[p.bottleneck]
    return p.capacity / sum(c / c_t * a for c, a in zip(p.cycles, p.areas))
