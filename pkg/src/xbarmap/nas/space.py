"""MobilenetV3-style elastic search space and genome decoding."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from ..netir import Network, ParseError, infer_shapes, load_document, parse_network

N_GROUPS = 4
MAX_DEPTH = 4
N_GENES = N_GROUPS + N_GROUPS * MAX_DEPTH * 2


class DecodeError(ValueError):
    pass


def _default_stem() -> list[dict[str, Any]]:
    return [
        {"name": "stem", "kind": "conv", "k": 3, "c_in": 3, "c_out": 16, "stride": 2, "padding": 1},
        {"name": "b1.dw", "kind": "dwconv", "k": 3, "c_in": 16, "stride": 2, "padding": 1},
        {"name": "b1.project", "kind": "conv", "k": 1, "c_in": 16, "c_out": 16, "stride": 1, "padding": 0},
    ]


def _default_head(num_classes: int = 10) -> list[dict[str, Any]]:
    return [
        {"name": "head.conv", "kind": "conv", "k": 1, "c_in": 96, "c_out": 576, "stride": 1, "padding": 0},
        {"name": "head.fc1", "kind": "fc", "c_in": 576, "c_out": 1024, "pool": "global"},
        {"name": "head.fc2", "kind": "fc", "c_in": 1024, "c_out": num_classes},
    ]


@dataclass(frozen=True)
class SearchSpace:
    """Four block groups of inverted bottlenecks between a fixed stem and head.

    ``groups`` holds the base model's (out channels, first-block stride) per
    group; every slot in a group chooses its kernel and expand ratio, and the
    group depth decides how many leading slots are active.
    """

    groups: tuple[tuple[int, int], ...] = ((24, 2), (40, 2), (48, 1), (96, 2))
    kernel_options: tuple[int, ...] = (3, 5, 7)
    expand_options: tuple[int, ...] = (3, 4, 6)
    depth_options: tuple[int, ...] = (2, 3, 4)
    input_shape: tuple[int, int, int] = (3, 64, 64)
    stem: tuple[Mapping[str, Any], ...] = field(default_factory=lambda: tuple(_default_stem()))
    head: tuple[Mapping[str, Any], ...] = field(default_factory=lambda: tuple(_default_head()))

    def __post_init__(self):
        if len(self.groups) != N_GROUPS:
            raise ValueError(f"expected {N_GROUPS} groups, got {len(self.groups)}")
        if max(self.depth_options) > MAX_DEPTH or min(self.depth_options) < 1:
            raise ValueError(f"depth options must lie in [1, {MAX_DEPTH}]")

    def gene_options(self, idx: int) -> tuple[int, ...]:
        if idx < N_GROUPS:
            return self.depth_options
        return self.kernel_options if (idx - N_GROUPS) % 2 == 0 else self.expand_options

    def random_genome(self, rng: np.random.Generator) -> "Genome":
        genes = [int(rng.choice(self.gene_options(i))) for i in range(N_GENES)]
        return Genome(tuple(genes))

    def uniform_genome(self, depth: int, kernel: int, expand: int) -> "Genome":
        return Genome((depth,) * N_GROUPS + (kernel, expand) * (N_GROUPS * MAX_DEPTH))

    def min_genome(self) -> "Genome":
        return self.uniform_genome(min(self.depth_options), min(self.kernel_options), min(self.expand_options))

    def max_genome(self) -> "Genome":
        return self.uniform_genome(max(self.depth_options), max(self.kernel_options), max(self.expand_options))

    @property
    def stem_channels(self) -> int:
        return int(self.stem[-1]["c_out"] if "c_out" in self.stem[-1] else self.stem[-1]["c_in"])

    def to_dict(self) -> dict[str, Any]:
        return {
            "input_shape": list(self.input_shape),
            "kernel_options": list(self.kernel_options),
            "expand_options": list(self.expand_options),
            "depth_options": list(self.depth_options),
            "groups": [{"channels": c, "stride": s} for c, s in self.groups],
            "stem": [dict(d) for d in self.stem],
            "head": [dict(d) for d in self.head],
        }


def parse_space(source: str | Path | Mapping[str, Any]) -> SearchSpace:
    doc = load_document(source)
    if not isinstance(doc, Mapping):
        raise ParseError("search-space document must be a mapping")
    kw: dict[str, Any] = {}
    for key in ("kernel_options", "expand_options", "depth_options", "input_shape"):
        if key in doc:
            kw[key] = tuple(int(v) for v in doc[key])
    if "groups" in doc:
        try:
            kw["groups"] = tuple((int(g["channels"]), int(g["stride"])) for g in doc["groups"])
        except (KeyError, TypeError) as exc:
            raise ParseError(f"each group needs channels and stride ({exc})", "groups") from None
    if "stem" in doc:
        kw["stem"] = tuple(doc["stem"])
    if "head" in doc:
        kw["head"] = tuple(doc["head"])
    elif "num_classes" in doc:
        kw["head"] = tuple(_default_head(int(doc["num_classes"])))
    try:
        return SearchSpace(**kw)
    except ValueError as exc:
        raise ParseError(str(exc), "space") from None


@dataclass(frozen=True)
class Genome:
    """36 integer genes: 4 group depths, then (kernel, expand) per group slot."""

    genes: tuple[int, ...]

    def __post_init__(self):
        if len(self.genes) != N_GENES:
            raise DecodeError(f"genome needs {N_GENES} genes, got {len(self.genes)}")

    @property
    def depths(self) -> tuple[int, ...]:
        return self.genes[:N_GROUPS]

    def slot(self, group: int, slot: int) -> tuple[int, int]:
        base = N_GROUPS + 2 * (group * MAX_DEPTH + slot)
        return self.genes[base], self.genes[base + 1]

    def digest(self) -> str:
        return hashlib.sha256(",".join(map(str, self.genes)).encode()).hexdigest()[:16]

    def replace_gene(self, idx: int, value: int) -> "Genome":
        genes = list(self.genes)
        genes[idx] = value
        return Genome(tuple(genes))


def gene_names() -> list[str]:
    names = [f"d{g}" for g in range(N_GROUPS)]
    for g in range(N_GROUPS):
        for s in range(MAX_DEPTH):
            names += [f"k{g}{s}", f"e{g}{s}"]
    return names


def validate(genome: Genome, space: SearchSpace) -> None:
    for i, v in enumerate(genome.genes):
        if v not in space.gene_options(i):
            raise DecodeError(f"gene {gene_names()[i]}={v} not in {space.gene_options(i)}")


def decode_genome(genome: Genome, space: SearchSpace, input_shape: Sequence[int] | None = None) -> Network:
    """Build the shaped network a genome selects; inert slots emit nothing."""
    validate(genome, space)
    layers: list[dict[str, Any]] = [dict(d) for d in space.stem]
    c = space.stem_channels
    for g, (c_out, stride) in enumerate(space.groups):
        for s in range(genome.depths[g]):
            k, e = genome.slot(g, s)
            p = f"g{g}.s{s}"
            mid = e * c
            layers += [
                {"name": f"{p}.expand", "kind": "conv", "k": 1, "c_in": c, "c_out": mid, "stride": 1, "padding": 0},
                {"name": f"{p}.dw", "kind": "dwconv", "k": k, "c_in": mid, "stride": stride if s == 0 else 1,
                 "padding": k // 2},
                {"name": f"{p}.project", "kind": "conv", "k": 1, "c_in": mid, "c_out": c_out, "stride": 1, "padding": 0},
            ]
            c = c_out
    layers += [dict(d) for d in space.head]
    shape = tuple(input_shape) if input_shape is not None else space.input_shape
    doc = {"name": f"nas-{genome.digest()}", "input_shape": list(shape), "layers": layers}
    return infer_shapes(parse_network(doc))
