"""Crossbar packing with empty maximal spaces (EMS).

Boxes are placed without rotation. For each box, every EMS of every open
container is a candidate provided the box fits and the container hosts no
box of the same layer or of an adjacent layer. The winning space minimizes
the squared distance between the box's top-right corner (box anchored at
the space's lower-left corner) and the container's top-right corner; ties go
to the lowest ``(container, x, y)``. A new container is opened only when no
candidate exists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .duplication import DuplicationPlan
from .netir import HWConfig
from .partition import LayerBox

Rect = tuple[int, int, int, int]  # x, y, w, h


@dataclass(frozen=True)
class EmptySpace:
    container_idx: int
    x: int
    y: int
    w: int
    h: int

    @property
    def rect(self) -> Rect:
        return (self.x, self.y, self.w, self.h)


@dataclass(frozen=True)
class Placement:
    box: LayerBox
    container_idx: int
    x: int
    y: int

    @property
    def rect(self) -> Rect:
        return (self.x, self.y, self.box.width, self.box.height)

    def to_dict(self) -> dict:
        b = self.box
        return {
            "layer": b.layer_idx,
            "copy": b.copy_idx,
            "part": [b.part_row, b.part_col],
            "container": self.container_idx,
            "x": self.x,
            "y": self.y,
            "w": b.width,
            "h": b.height,
            "cycles": b.cycles,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Placement":
        box = LayerBox(
            layer_idx=int(d["layer"]), copy_idx=int(d["copy"]),
            part_row=int(d["part"][0]), part_col=int(d["part"][1]),
            height=int(d["h"]), width=int(d["w"]), cycles=int(d["cycles"]),
        )
        return cls(box=box, container_idx=int(d["container"]), x=int(d["x"]), y=int(d["y"]))


@dataclass
class PackingPlan:
    placements: list[Placement]
    containers_used: int
    hw: HWConfig
    duplication: DuplicationPlan | None = None
    network_digest: str | None = None
    mapping: str = "packed"

    @property
    def placed_area(self) -> int:
        return sum(p.box.area for p in self.placements)

    def containers_of_layer(self, layer_idx: int) -> set[int]:
        return {p.container_idx for p in self.placements if p.box.layer_idx == layer_idx}

    def layers(self) -> list[int]:
        return sorted({p.box.layer_idx for p in self.placements})

    def to_dict(self) -> dict:
        return {
            "mapping": self.mapping,
            "network": self.network_digest,
            "hw": self.hw.to_dict(),
            "duplication": self.duplication.to_dict() if self.duplication else None,
            "containers_used": self.containers_used,
            "utilization": round(utilization(self), 6),
            "placements": [p.to_dict() for p in self.placements],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PackingPlan":
        return cls(
            placements=[Placement.from_dict(p) for p in d["placements"]],
            containers_used=int(d["containers_used"]),
            hw=HWConfig(**d["hw"]),
            duplication=DuplicationPlan.from_dict(d["duplication"]) if d.get("duplication") else None,
            network_digest=d.get("network"),
            mapping=d.get("mapping", "packed"),
        )


class PackingInfeasible(RuntimeError):
    """Budget exhausted with boxes left over."""

    def __init__(self, unplaced: Sequence[LayerBox], plan: PackingPlan):
        self.unplaced = list(unplaced)
        self.plan = plan
        area = sum(b.area for b in self.unplaced)
        super().__init__(
            f"{len(self.unplaced)} boxes ({area} cells) do not fit in {plan.hw.num_xbars} crossbars: "
            + ", ".join(f"L{b.layer_idx}c{b.copy_idx}p{b.part_row}.{b.part_col}" for b in self.unplaced[:8])
            + (" ..." if len(self.unplaced) > 8 else "")
        )

    @property
    def deficit(self) -> int:
        return sum(b.area for b in self.unplaced)


def _intersects(a: Rect, b: Rect) -> bool:
    return a[0] < b[0] + b[2] and b[0] < a[0] + a[2] and a[1] < b[1] + b[3] and b[1] < a[1] + a[3]


def _contains(outer: Rect, inner: Rect) -> bool:
    return (outer[0] <= inner[0] and outer[1] <= inner[1]
            and inner[0] + inner[2] <= outer[0] + outer[2]
            and inner[1] + inner[3] <= outer[1] + outer[3])


def _difference(space: Rect, placed: Rect) -> list[Rect]:
    sx, sy, sw, sh = space
    px, py, pw, ph = placed
    if not _intersects(space, placed):
        return [space]
    out = []
    if px > sx:
        out.append((sx, sy, px - sx, sh))
    if px + pw < sx + sw:
        out.append((px + pw, sy, sx + sw - px - pw, sh))
    if py > sy:
        out.append((sx, sy, sw, py - sy))
    if py + ph < sy + sh:
        out.append((sx, py + ph, sw, sy + sh - py - ph))
    return out


def _prune_inscribed(spaces: list[Rect]) -> list[Rect]:
    unique = list(dict.fromkeys(spaces))
    if len(unique) < 2:
        return unique
    kept = []
    for s in unique:
        sx, sy, sw, sh = s
        for o in unique:
            if o is not s and o[0] <= sx and o[1] <= sy and sx + sw <= o[0] + o[2] and sy + sh <= o[1] + o[3]:
                break
        else:
            kept.append(s)
    return kept


def ems_difference(space: EmptySpace, placed: Placement) -> list[EmptySpace]:
    """Maximal free rectangles left in ``space`` after ``placed`` is carved out."""
    if placed.container_idx != space.container_idx:
        return [space]
    return [EmptySpace(space.container_idx, *r) for r in _difference(space.rect, placed.rect)]


def collides(hosted: Iterable[int], layer_idx: int) -> bool:
    hosted = set(hosted)
    return bool(hosted & {layer_idx - 1, layer_idx, layer_idx + 1})


def processing_order(boxes: Iterable[LayerBox]) -> list[LayerBox]:
    return sorted(boxes, key=lambda b: (-b.area, b.layer_idx, b.copy_idx, b.part_row, b.part_col))


@dataclass
class _Container:
    spaces: list[Rect]
    layers: set[int] = field(default_factory=set)
    max_w: int = 0  # widest and tallest free space, for quick rejection
    max_h: int = 0


class Packer:
    """Incremental EMS packer; :func:`pack` drives it over a sorted box list.

    Copies of one layer tile arrive back to back with the same size and
    layer. Once such a box lands in a container, the collision rule bars
    that container for the rest of the run, and no other container changes.
    So one scan per run, sorted by placement key, answers every box of it.
    """

    def __init__(self, hw: HWConfig):
        self.hw = hw
        self.W = hw.xbar_cols
        self.H = hw.xbar_rows
        self.containers: list[_Container] = []
        self.placements: list[Placement] = []
        self._open: list[int] = []  # containers with free space, ascending
        self._run_key: tuple[int, int, int] | None = None
        self._run: list[tuple[int, int, int, int]] = []
        self._run_pos = 0

    @property
    def spaces(self) -> list[EmptySpace]:
        return [EmptySpace(ci, *r) for ci, c in enumerate(self.containers) for r in c.spaces]

    def _candidates(self, bw: int, bh: int, lid: int) -> list[tuple[int, int, int, int]]:
        """Best (distance, container, x, y) of every admissible container, sorted."""
        W, H = self.W, self.H
        out = []
        for ci in self._open:
            cont = self.containers[ci]
            if cont.max_w < bw or cont.max_h < bh:
                continue
            hosted = cont.layers
            if lid in hosted or lid - 1 in hosted or lid + 1 in hosted:
                continue
            best = None
            for x, y, w, h in cont.spaces:
                if w < bw or h < bh:
                    continue
                dx, dy = W - x - bw, H - y - bh
                key = (dx * dx + dy * dy, ci, x, y)
                if best is None or key < best:
                    best = key
            if best is not None:
                out.append(best)
        out.sort()
        return out

    def _commit(self, box: LayerBox, ci: int, x: int, y: int) -> Placement:
        cont = self.containers[ci]
        rect = (x, y, box.width, box.height)
        pieces: list[Rect] = []
        for s in cont.spaces:
            if _intersects(s, rect):
                pieces.extend(_difference(s, rect))
            else:
                pieces.append(s)
        cont.spaces = spaces = _prune_inscribed(pieces)
        if spaces:
            cont.max_w = max(r[2] for r in spaces)
            cont.max_h = max(r[3] for r in spaces)
        else:
            cont.max_w = cont.max_h = 0
            self._open.remove(ci)
        cont.layers.add(box.layer_idx)
        placement = Placement(box, ci, x, y)
        self.placements.append(placement)
        return placement

    def place(self, box: LayerBox) -> Placement | None:
        if box.width > self.W or box.height > self.H:
            raise ValueError(f"box {box.key} ({box.height}x{box.width}) exceeds the crossbar")
        key = (box.width, box.height, box.layer_idx)
        if key != self._run_key:
            self._run_key, self._run, self._run_pos = key, self._candidates(*key), 0
        if self._run_pos < len(self._run):
            _, ci, x, y = self._run[self._run_pos]
            self._run_pos += 1
            return self._commit(box, ci, x, y)
        if self.hw.bounded and len(self.containers) >= self.hw.num_xbars:
            return None
        self.containers.append(_Container(spaces=[(0, 0, self.W, self.H)], max_w=self.W, max_h=self.H))
        self._open.append(len(self.containers) - 1)
        return self._commit(box, len(self.containers) - 1, 0, 0)

    def plan(self, duplication: DuplicationPlan | None = None, network_digest: str | None = None) -> PackingPlan:
        return PackingPlan(
            placements=list(self.placements),
            containers_used=len(self.containers),
            hw=self.hw,
            duplication=duplication,
            network_digest=network_digest,
        )


def pack(
    boxes: Iterable[LayerBox],
    hw: HWConfig,
    duplication: DuplicationPlan | None = None,
    network_digest: str | None = None,
    fail_fast: bool = False,
) -> PackingPlan:
    """Place ``boxes`` in processing order.

    On failure the raised error lists every box that did not fit, unless
    ``fail_fast`` is set, in which case packing stops at the first one.
    """
    packer = Packer(hw)
    unplaced = []
    for box in processing_order(boxes):
        if packer.place(box) is None:
            unplaced.append(box)
            if fail_fast:
                break
    plan = packer.plan(duplication, network_digest)
    if unplaced:
        raise PackingInfeasible(unplaced, plan)
    return plan


def utilization(plan: PackingPlan) -> float:
    if not plan.containers_used:
        return 0.0
    return plan.placed_area / (plan.containers_used * plan.hw.xbar_area)
