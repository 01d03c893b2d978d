"""Accuracy surrogates standing in for supernet evaluation.

Nothing here is a claim about real accuracy. The default maps the
parameter count of the searchable body (stem and head excluded, since they
are identical in every candidate) through
``min(1, alpha * log(1 + params / p0))`` with ``alpha`` and ``p0`` solved so
that the smallest and largest networks of the space score 0.5 and 0.95. Users with a trained supernet can supply measured accuracies
through :class:`TableSurrogate`.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Mapping

from scipy.optimize import brentq

from ..netir import Network
from .space import Genome, SearchSpace, decode_genome

LOW_ANCHOR = 0.5
HIGH_ANCHOR = 0.95


class SurrogateError(KeyError):
    pass


def body_params(net: Network, space: SearchSpace) -> int:
    """Parameters outside the fixed stem and head."""
    fixed = {d["name"] for d in space.stem} | {d["name"] for d in space.head}
    return sum(layer.params for layer in net.layers if layer.name not in fixed)


class ParamSurrogate:
    def __init__(self, space: SearchSpace, low: float = LOW_ANCHOR, high: float = HIGH_ANCHOR):
        self.space = space
        p_min = body_params(decode_genome(space.min_genome(), space), space)
        p_max = body_params(decode_genome(space.max_genome(), space), space)
        ratio = high / low
        if p_max / p_min <= ratio:
            raise ValueError("search space too narrow to calibrate the surrogate")
        # log(1 + p_max/p0) / log(1 + p_min/p0) decreases from p_max/p_min to 1 as p0 shrinks
        def gap(log_p0: float) -> float:
            p0 = math.exp(log_p0)
            return math.log1p(p_max / p0) - ratio * math.log1p(p_min / p0)

        log_p0 = brentq(gap, math.log(p_min) - 40, math.log(p_max) + 40, xtol=1e-12)
        self.p0 = math.exp(log_p0)
        self.alpha = low / math.log1p(p_min / self.p0)
        self.p_min, self.p_max = p_min, p_max

    def score_params(self, params: int) -> float:
        return min(1.0, self.alpha * math.log1p(params / self.p0))

    def __call__(self, genome: Genome | None, net: Network) -> float:
        return self.score_params(body_params(net, self.space))


class TableSurrogate:
    """Lookup of measured accuracies keyed by genome digest."""

    def __init__(self, table: Mapping[str, float]):
        self.table = {str(k): float(v) for k, v in table.items()}

    @classmethod
    def from_file(cls, path: str | Path) -> "TableSurrogate":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    def __call__(self, genome: Genome | None, net: Network) -> float:
        if genome is None:
            raise SurrogateError("table surrogate needs a genome")
        key = genome.digest()
        if key not in self.table:
            raise SurrogateError(f"no accuracy recorded for genome {key}")
        return self.table[key]


def surrogate_accuracy(net: Network, space: SearchSpace, genome: Genome | None = None, table=None) -> float:
    """Score ``net`` with the default surrogate, or with ``table`` when given."""
    if table is not None:
        return TableSurrogate(table)(genome, net)
    return ParamSurrogate(space)(genome, net)
