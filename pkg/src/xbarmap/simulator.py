"""Cycle-granular discrete-event execution of a packing plan.

Each (sample, layer) pair is one stage. A stage becomes eligible when the
same sample finishes the previous layer, then waits until every crossbar
hosting any box of its layer is free and holds them all for
``ceil(C_layer / copies)`` cycles. Eligible stages are served in
``(eligible_time, sample, layer)`` order; a lower-priority stage may start
while a higher-priority one waits on a busy crossbar. A new sample is
injected (layer 0 becomes eligible) whenever layer 0's crossbars are free
and the previous sample has started. Since all stages of one layer use
the same crossbars and become eligible in sample order, only the head of
each layer's queue can ever start, which keeps the event loop at
O(stages * layers).
"""

from __future__ import annotations

import csv
import heapq
import io
from dataclasses import dataclass, field
from typing import Sequence

from .netir import Network
from .packing import PackingPlan


class SimulationConfigError(ValueError):
    pass


@dataclass(frozen=True)
class StageInstance:
    sample_idx: int
    layer_idx: int
    duration: int
    required_crossbars: frozenset[int]


@dataclass
class SimReport:
    total_cycles: int
    per_sample_latency: list[int]
    busy_cycles: dict[int, int]
    structural_stall_cycles: int
    data_stall_cycles: int
    utilization_time: float
    n_samples: int
    stage_durations: list[int]
    plan_digest: str | None = None
    trace: list[tuple[int, str, int, int, int]] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "total_cycles": self.total_cycles,
            "per_sample_latency": list(self.per_sample_latency),
            "busy_cycles": {str(k): v for k, v in sorted(self.busy_cycles.items())},
            "stall_cycles": {"structural": self.structural_stall_cycles, "data": self.data_stall_cycles},
            "utilization_time": round(self.utilization_time, 6),
            "stage_durations": list(self.stage_durations),
            "config_digest": self.plan_digest,
        }

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "event", "sample", "layer", "container"])
        w.writerows(self.trace)
        return buf.getvalue()


def layer_stages(plan: PackingPlan, n_layers: int) -> tuple[list[int], list[frozenset[int]]]:
    """Per-layer stage duration and crossbar set derived from the plan."""
    cycles = [0] * n_layers
    xbars: list[set[int]] = [set() for _ in range(n_layers)]
    for p in plan.placements:
        i = p.box.layer_idx
        if i >= n_layers:
            raise SimulationConfigError(f"plan references layer {i} but the network has {n_layers} layers")
        cycles[i] = max(cycles[i], p.box.cycles)
        xbars[i].add(p.container_idx)
    missing = [i for i in range(n_layers) if not xbars[i]]
    if missing:
        raise SimulationConfigError(f"plan has no boxes for layers {missing}")
    copies = plan.duplication.copies if plan.duplication else (1,) * n_layers
    if len(copies) != n_layers:
        raise SimulationConfigError(f"duplication covers {len(copies)} layers, network has {n_layers}")
    durations = [max(1, -(-c // x)) for c, x in zip(cycles, copies)]
    return durations, [frozenset(s) for s in xbars]


def run_schedule(
    durations: Sequence[int],
    resources: Sequence[frozenset[int]],
    n_samples: int,
    trace: bool = False,
) -> SimReport:
    """Event loop over an abstract layer chain; :func:`simulate` feeds it from a plan."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    L = len(durations)
    res = [tuple(sorted(r)) for r in resources]
    free_at: dict[int, int] = {c: 0 for r in res for c in r}
    busy = {c: 0 for c in free_at}

    # per-layer FIFO of eligible samples: next sample index and its eligible time
    queue: list[list[tuple[int, int]]] = [[] for _ in range(L)]
    head = [0] * L
    queue[0] = [(0, 0)]
    start0 = [0] * n_samples
    finish_last = [0] * n_samples
    events: list[int] = [0]
    structural = data = 0
    log: list[tuple[int, str, int, int, int]] = []
    completions: list[tuple[int, int, int]] = []  # (time, sample, layer)
    done = 0
    total = n_samples * L
    now = 0

    while done < total:
        now = heapq.heappop(events)
        while events and events[0] == now:
            heapq.heappop(events)
        while completions and completions[0][0] <= now:
            t, s, i = heapq.heappop(completions)
            done += 1
            if trace:
                log.extend((t, "finish", s, i, c) for c in res[i])
            if i + 1 < L:
                queue[i + 1].append((t, s))
            else:
                finish_last[s] = t
        # inject the next sample once layer 0's crossbars are free
        if head[0] == len(queue[0]) < n_samples and max(free_at[c] for c in res[0]) <= now:
            queue[0].append((now, len(queue[0])))
        heads = [(queue[i][head[i]][0], queue[i][head[i]][1], i) for i in range(L) if head[i] < len(queue[i])]
        heads.sort()
        for elig, s, i in heads:
            if elig > now:
                continue
            r = res[i]
            ready = max(free_at[c] for c in r)
            if ready > now:
                continue
            d = durations[i]
            end = now + d
            for c in r:
                free_at[c] = end
                busy[c] += d
            head[i] += 1
            # an injected sample waiting on layer 0 lost its crossbars to a later layer
            structural += now - elig
            if i == 0:
                start0[s] = now
            else:
                data += max(0, elig - ready)
            heapq.heappush(completions, (end, s, i))
            heapq.heappush(events, end)
            if trace:
                log.extend((now, "start", s, i, c) for c in r)

    total_cycles = max(finish_last)
    latency = [f - s for f, s in zip(finish_last, start0)]
    n_xbars = len(free_at)
    util = sum(busy.values()) / (n_xbars * total_cycles) if total_cycles else 0.0
    log.sort(key=lambda e: (e[0], e[1] != "finish", e[2], e[3], e[4]))
    return SimReport(
        total_cycles=total_cycles, per_sample_latency=latency, busy_cycles=busy,
        structural_stall_cycles=structural, data_stall_cycles=data,
        utilization_time=util, n_samples=n_samples, stage_durations=list(durations), trace=log,
    )


def simulate(plan: PackingPlan, net: Network | int, n_samples: int = 1, trace: bool = False) -> SimReport:
    n_layers = net if isinstance(net, int) else len(net.layers)
    if not isinstance(net, int) and plan.network_digest and plan.network_digest != net.digest():
        raise SimulationConfigError("plan was compiled for a different network")
    durations, resources = layer_stages(plan, n_layers)
    report = run_schedule(durations, resources, n_samples, trace=trace)
    report.plan_digest = plan.network_digest
    return report


def speedup(report: SimReport, baseline: SimReport) -> float:
    if report.n_samples != baseline.n_samples:
        raise ValueError("reports cover different sample counts")
    return baseline.total_cycles / report.total_cycles


def sample_ladder(max_samples: int = 1024) -> list[int]:
    out, n = [], 1
    while n <= max_samples:
        out.append(n)
        n *= 2
    return out
