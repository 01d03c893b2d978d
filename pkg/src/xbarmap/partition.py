"""Layer partitioning into crossbar-sized weight boxes."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .netir import HWConfig, Layer, Network, ShapeError, layer_matrix_dims


@dataclass(frozen=True)
class LayerBox:
    layer_idx: int
    copy_idx: int
    part_row: int
    part_col: int
    height: int
    width: int
    cycles: int

    @property
    def area(self) -> int:
        return self.height * self.width

    @property
    def key(self) -> tuple[int, int, int, int]:
        return (self.layer_idx, self.copy_idx, self.part_row, self.part_col)


def _grid(rows: int, cols: int, hw: HWConfig) -> list[tuple[int, int, int, int]]:
    """Row-major tiling of a rows x cols matrix: (tile_row, tile_col, h, w)."""
    tiles = []
    for r in range(math.ceil(rows / hw.xbar_rows)):
        h = min(hw.xbar_rows, rows - r * hw.xbar_rows)
        for c in range(math.ceil(cols / hw.xbar_cols)):
            w = min(hw.xbar_cols, cols - c * hw.xbar_cols)
            tiles.append((r, c, h, w))
    return tiles


def dw_slices(channels: int, s_dw: int) -> list[int]:
    """Channel counts of the width-wise depthwise slices (last one may be short)."""
    width = math.ceil(channels / s_dw)
    full, rem = divmod(channels, width)
    return [width] * full + ([rem] if rem else [])


def partition_layer(layer: Layer, hw: HWConfig, layer_idx: int = 0, s_dw: int | None = None) -> list[LayerBox]:
    if not layer.has_shape:
        raise ShapeError(f"{layer.name}: shapes not inferred")
    rows, cols = layer_matrix_dims(layer)
    if layer.kind != "dwconv":
        cycles = 1 if layer.kind == "fc" else layer.h_out * layer.w_out
        return [
            LayerBox(layer_idx, 0, r, c, h, w, cycles)
            for r, c, h, w in _grid(rows, cols, hw)
        ]

    s_dw = hw.s_dw if s_dw is None else s_dw
    if s_dw > layer.c_in:
        raise ValueError(f"{layer.name}: s_dw={s_dw} exceeds c_in={layer.c_in}")
    boxes = []
    col_offset = 0
    for channels in dw_slices(layer.c_in, s_dw):
        cycles = layer.h_out * layer.w_out * channels
        tiles = _grid(rows, channels, hw)
        for r, c, h, w in tiles:
            boxes.append(LayerBox(layer_idx, 0, r, col_offset + c, h, w, cycles))
        col_offset += max(c for _, c, _, _ in tiles) + 1
    return boxes


def partition_network(net: Network, hw: HWConfig, s_dw: int | None = None) -> list[LayerBox]:
    """Partition every layer in chain order.

    The depth split factor is clamped to each depthwise layer's channel
    count, so one network-wide ``s_dw`` can exceed the narrowest layer.
    """
    s_dw = hw.s_dw if s_dw is None else s_dw
    boxes: list[LayerBox] = []
    for i, layer in enumerate(net.layers):
        eff = min(s_dw, layer.c_in) if layer.kind == "dwconv" else 1
        boxes.extend(partition_layer(layer, hw, layer_idx=i, s_dw=eff))
    return boxes


def duplicate_boxes(boxes: list[LayerBox], copies: list[int] | tuple[int, ...]) -> list[LayerBox]:
    """Instantiate ``copies[layer_idx]`` copies of each layer's box set."""
    out = [
        LayerBox(b.layer_idx, c, b.part_row, b.part_col, b.height, b.width, b.cycles)
        for b in boxes
        for c in range(copies[b.layer_idx])
    ]
    out.sort(key=lambda b: (b.layer_idx, b.copy_idx, b.part_row, b.part_col))
    return out


def layer_cycles_from_boxes(boxes: list[LayerBox], n_layers: int) -> list[int]:
    """Per-layer cycle count: the slowest box of each layer."""
    cycles = [0] * n_layers
    for box in boxes:
        cycles[box.layer_idx] = max(cycles[box.layer_idx], box.cycles)
    return cycles


def layer_areas_from_boxes(boxes: list[LayerBox], n_layers: int, copy_idx: int = 0) -> list[int]:
    areas = [0] * n_layers
    for box in boxes:
        if box.copy_idx == copy_idx:
            areas[box.layer_idx] += box.area
    return areas
