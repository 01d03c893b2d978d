"""End-to-end compilation: partition, optional duplication, packing."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .duplication import DuplicationPlan, DuplicationProblem, plan_for, solve_duplication
from .netir import HWConfig, Network, infer_shapes
from .packing import PackingInfeasible, PackingPlan, pack
from .partition import (
    LayerBox,
    duplicate_boxes,
    layer_areas_from_boxes,
    layer_cycles_from_boxes,
    partition_network,
)


@dataclass
class CompileResult:
    plan: PackingPlan
    boxes: list[LayerBox]
    problem: DuplicationProblem | None = None
    solver_plan: DuplicationPlan | None = None

    @property
    def backed_off(self) -> bool:
        return self.solver_plan is not None and self.solver_plan.x_t != self.plan.duplication.x_t


def duplication_problem(net: Network, boxes: list[LayerBox], hw: HWConfig) -> DuplicationProblem:
    if not hw.bounded:
        raise ValueError("duplication needs a crossbar budget (num_xbars > 0)")
    n = len(net.layers)
    return DuplicationProblem(
        cycles=tuple(layer_cycles_from_boxes(boxes, n)),
        areas=tuple(layer_areas_from_boxes(boxes, n)),
        capacity=hw.capacity,
    )


def compile_network(net: Network, hw: HWConfig, duplicate: bool = False, s_dw: int | None = None) -> CompileResult:
    """Compile ``net`` onto ``hw``.

    With ``duplicate``, the area-optimal copy counts are tried first. Raw box
    area ignores packing losses, so if those copies do not pack into the
    budget the bottleneck copy count is binary-searched downward to the
    largest value that packs. Raises :class:`PackingInfeasible` if even the
    single-copy network does not fit.
    """
    if not net.shaped:
        net = infer_shapes(net)
    if s_dw is not None:
        hw = replace(hw, s_dw=s_dw)
    digest = net.digest()
    boxes = partition_network(net, hw)
    n = len(net.layers)
    cycles = layer_cycles_from_boxes(boxes, n)

    if not duplicate:
        plan = pack(boxes, hw, DuplicationPlan.identity(n, cycles), digest)
        return CompileResult(plan=plan, boxes=boxes)

    problem = duplication_problem(net, boxes, hw)
    best = solve_duplication(problem)

    def attempt(x_t: int) -> PackingPlan | None:
        dup = plan_for(problem, x_t)
        try:
            return pack(duplicate_boxes(boxes, dup.copies), hw, dup, digest, fail_fast=True)
        except PackingInfeasible:
            return None

    plan = attempt(best.x_t)
    if plan is None:
        lo, hi = 1, best.x_t - 1
        found = None
        while lo <= hi:
            mid = (lo + hi) // 2
            p = attempt(mid)
            if p is not None:
                found, lo = p, mid + 1
            else:
                hi = mid - 1
        if found is None:
            dup = plan_for(problem, 1)
            pack(duplicate_boxes(boxes, dup.copies), hw, dup, digest)  # raises with the unplaced list
        plan = found
    return CompileResult(plan=plan, boxes=boxes, problem=problem, solver_plan=best)
