"""ISAAC-like reference mapping: every layer box gets its own crossbar."""

from __future__ import annotations

from dataclasses import replace

from .duplication import DuplicationPlan
from .netir import HWConfig, Network, infer_shapes
from .packing import PackingInfeasible, PackingPlan, Placement
from .partition import layer_cycles_from_boxes, partition_network


def isaac_map(net: Network, hw: HWConfig, s_dw: int = 1) -> PackingPlan:
    """One box per crossbar, no sharing, no duplication.

    The reference scheme uses no depthwise split; passing ``s_dw`` keeps the
    exclusive placement but splits depthwise layers first, which isolates
    the effect of packing. Raises :class:`PackingInfeasible` when the box
    count exceeds a set budget.
    """
    if not net.shaped:
        net = infer_shapes(net)
    hw1 = replace(hw, s_dw=s_dw)
    mapping = "isaac" if s_dw == 1 else "exclusive"
    boxes = partition_network(net, hw1)
    placements = [Placement(box, i, 0, 0) for i, box in enumerate(boxes)]
    dup = DuplicationPlan.identity(len(net.layers), layer_cycles_from_boxes(boxes, len(net.layers)))
    if hw.bounded and len(boxes) > hw.num_xbars:
        kept = placements[: hw.num_xbars]
        plan = PackingPlan(kept, len(kept), hw1, dup, net.digest(), mapping=mapping)
        raise PackingInfeasible(boxes[hw.num_xbars:], plan)
    return PackingPlan(placements, len(placements), hw1, dup, net.digest(), mapping=mapping)
