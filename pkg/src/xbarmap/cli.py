"""``xbarmap`` command line: compile, simulate, search and zoo.

Exit codes: 0 success, 2 parse or configuration error, 3 infeasible
packing, 4 infeasible search, 5 I/O error. Every command writes its files
only after all work has succeeded, so a failing run leaves nothing behind.
Output goes to ``--out``, else ``$XBARMAP_OUT``, else ``./xbarmap-out``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

import yaml

from . import __version__
from .baseline import isaac_map
from .compiler import compile_network
from .duplication import DuplicationInfeasible
from .netir import (
    HWConfig,
    Network,
    NetworkError,
    ParseError,
    document_digest,
    infer_shapes,
    parse_hw,
    parse_network,
)
from .packing import PackingInfeasible, PackingPlan, utilization
from .simulator import SimReport, SimulationConfigError, sample_ladder, simulate, speedup
from .zoo import MODELS

log = logging.getLogger("xbarmap")

EXIT_OK, EXIT_PARSE, EXIT_PACKING, EXIT_SEARCH, EXIT_IO = 0, 2, 3, 4, 5
OUT_ENV = "XBARMAP_OUT"


class CLIError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass
class RunManifest:
    """Enough to rerun a command: its arguments, input digests and seed.

    Timestamps are informational and enter no computed value.
    """

    command: str
    arguments: dict[str, Any]
    digests: dict[str, str]
    seed: int | None = None
    tool_version: str = __version__
    started_at: str = ""
    finished_at: str = ""
    outputs: list[str] = field(default_factory=list)

    @property
    def config_digest(self) -> str:
        return document_digest({"command": self.command, "arguments": self.arguments,
                                "digests": self.digests, "seed": self.seed})

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["config_digest"] = self.config_digest
        return d


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# ---- input helpers -------------------------------------------------------

def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from None


def _parsed(path: str, parse):
    """Run ``parse`` on the file's text, tagging failures with the file name."""
    text = _read(path)
    try:
        return parse(text)
    except (NetworkError, ValueError) as exc:
        raise CLIError(f"{path}: {exc}", EXIT_PARSE) from None


def load_network(source: str) -> Network:
    """A network file, or ``zoo:<name>`` for a built-in transcription."""
    if source.startswith("zoo:"):
        name = source[4:]
        if name not in MODELS:
            raise CLIError(f"unknown zoo model {name!r}; choose from {sorted(MODELS)}", EXIT_PARSE)
        return infer_shapes(parse_network(MODELS[name]()))
    return _parsed(source, lambda text: infer_shapes(parse_network(text)))


def load_hw(path: str, xbars: int | None = None, s_dw: int | None = None) -> HWConfig:
    hw = _parsed(path, parse_hw)
    try:
        if xbars is not None:
            hw = replace(hw, num_xbars=xbars)
        if s_dw is not None:
            hw = replace(hw, s_dw=s_dw)
    except ValueError as exc:
        raise CLIError(str(exc), EXIT_PARSE) from None
    return hw


def load_plan(path: str) -> PackingPlan:
    doc = _parsed(path, yaml.safe_load)
    try:
        return PackingPlan.from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise CLIError(f"{path}: not a plan document ({exc})", EXIT_PARSE) from None


def _json(doc: Any) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def out_dir(arg: str | None) -> Path:
    return Path(arg or os.environ.get(OUT_ENV) or "xbarmap-out")


def write_outputs(directory: Path, files: dict[str, str]) -> list[str]:
    """Write every file or none: stage in a temp dir, then move into place."""
    try:
        directory.mkdir(parents=True, exist_ok=True)
        with tempfile.TemporaryDirectory(dir=directory, prefix=".staging-") as tmp:
            for name, text in files.items():
                (Path(tmp) / name).write_text(text, encoding="utf-8")
            for name in files:
                os.replace(Path(tmp) / name, directory / name)
    except OSError as exc:
        raise CLIError(f"cannot write outputs to {directory}: {exc.strerror or exc}", EXIT_IO) from None
    return [str(directory / name) for name in files]


# ---- commands ------------------------------------------------------------

def plan_summary(plan: PackingPlan, net: Network, solver_x_t: int | None = None) -> dict[str, Any]:
    per_layer = [0] * len(net.layers)
    for p in plan.placements:
        per_layer[p.box.layer_idx] += 1
    summary = {
        "network": net.name,
        "mapping": plan.mapping,
        "containers_used": plan.containers_used,
        "utilization": round(utilization(plan), 6),
        "boxes": len(plan.placements),
        "boxes_per_layer": {layer.name: n for layer, n in zip(net.layers, per_layer)},
        "s_dw": plan.hw.s_dw,
        "num_xbars": plan.hw.num_xbars,
    }
    if plan.duplication is not None:
        summary["copies"] = list(plan.duplication.copies)
        summary["x_t"] = plan.duplication.x_t
    if solver_x_t is not None:
        summary["solver_x_t"] = solver_x_t
    return summary


def cmd_compile(args) -> dict[str, str]:
    net = load_network(args.network)
    hw = load_hw(args.hw, args.xbars, args.sdw)
    if (args.isaac or args.no_pack) and args.duplicate:
        raise CLIError("--duplicate needs packing; drop --isaac/--no-pack", EXIT_PARSE)
    if args.duplicate and not hw.bounded:
        raise CLIError("--duplicate needs a crossbar budget (num_xbars or --xbars)", EXIT_PARSE)
    solver_x_t = None
    if args.isaac:
        plan = isaac_map(net, hw)
    elif args.no_pack:
        plan = isaac_map(net, hw, s_dw=min(hw.s_dw, _max_dw(net)))
    else:
        result = compile_network(net, hw, duplicate=args.duplicate)
        plan = result.plan
        solver_x_t = result.solver_plan.x_t if result.solver_plan else None
    summary = plan_summary(plan, net, solver_x_t)
    return {"plan.json": _json(plan.to_dict()), "summary.json": _json(summary)}


def _max_dw(net: Network) -> int:
    return max((l.c_in for l in net.layers if l.kind == "dwconv"), default=1)


def _sim_row(report: SimReport, base: SimReport | None) -> list[Any]:
    mean = sum(report.per_sample_latency) / report.n_samples
    row = [report.n_samples, report.total_cycles, f"{mean:.3f}",
           report.structural_stall_cycles, report.data_stall_cycles, f"{report.utilization_time:.6f}"]
    if base is not None:
        row += [base.total_cycles, f"{speedup(report, base):.6f}"]
    return row


SWEEP_HEADER = ["n_samples", "total_cycles", "mean_latency", "structural_stalls", "data_stalls", "utilization_time"]


def cmd_simulate(args) -> dict[str, str]:
    net = load_network(args.network)
    plan = load_plan(args.plan)
    base = load_plan(args.baseline) if args.baseline else None
    sizes = sample_ladder(args.max_samples) if args.sweep else [args.samples]
    try:
        reports = [simulate(plan, net, n, trace=args.trace and not args.sweep) for n in sizes]
        bases = [simulate(base, net, n) for n in sizes] if base else [None] * len(sizes)
    except SimulationConfigError as exc:
        raise CLIError(f"configuration error: {exc}", EXIT_PARSE) from None
    header = SWEEP_HEADER + (["baseline_cycles", "speedup"] if base else [])
    files = {"sweep.csv" if args.sweep else "simulation.csv": _csv(header, [_sim_row(r, b) for r, b in zip(reports, bases)])}
    if not args.sweep:
        doc = reports[0].to_dict()
        if bases[0] is not None:
            doc["baseline_total_cycles"] = bases[0].total_cycles
            doc["speedup"] = round(speedup(reports[0], bases[0]), 6)
        files["report.json"] = _json(doc)
        if args.trace:
            files["trace.csv"] = reports[0].trace_csv()
    return files


def cmd_search(args) -> dict[str, str]:
    from .nas import SearchInfeasible, SurrogateError, TableSurrogate, decode_genome, front_csv, parse_space, search
    from .nas.space import SearchSpace, gene_names

    space = SearchSpace() if args.space == "default" else _parsed(args.space, parse_space)
    hw = load_hw(args.hw, args.xbars, args.sdw)
    if not hw.bounded:
        raise CLIError("search needs a crossbar budget (num_xbars or --xbars)", EXIT_PARSE)
    surrogate = None
    if args.surrogate_table:
        surrogate = TableSurrogate(_parsed(args.surrogate_table, yaml.safe_load))
    try:
        result = search(space, hw, preference=args.prefer, seed=args.seed, pop_size=args.pop,
                        generations=args.gens, mutation_prob=args.mut, n_samples=args.samples,
                        surrogate=surrogate)
    except SearchInfeasible as exc:
        raise CLIError(f"search infeasible: {exc}", EXIT_SEARCH) from None
    except SurrogateError as exc:
        raise CLIError(f"surrogate table: {exc}", EXIT_PARSE) from None
    chosen = result.chosen
    net = decode_genome(chosen.genome, space)
    compiled = compile_network(net, hw, duplicate=True)
    chosen_doc = {
        "preference": args.prefer,
        "genome": list(chosen.genome.genes),
        "genes": dict(zip(gene_names(), chosen.genome.genes)),
        "genome_digest": chosen.genome.digest(),
        "surrogate_accuracy": round(chosen.accuracy, 6),
        "total_cycles": chosen.total_cycles,
        "compile": plan_summary(compiled.plan, net, compiled.solver_plan.x_t),
        "network": net.to_dict(),
    }
    hv = _csv(["generation", "hypervolume"], [[g, f"{v:.6f}"] for g, v in enumerate(result.hypervolumes)])
    return {
        "pareto.csv": front_csv(result.front),
        "chosen.json": _json(chosen_doc),
        "chosen_plan.json": _json(compiled.plan.to_dict()),
        "hypervolume.csv": hv,
    }


def cmd_zoo(args) -> dict[str, str]:
    if args.name == "space":
        from .nas.space import SearchSpace
        return {"space.json": _json(SearchSpace().to_dict())}
    kw = {"num_classes": args.classes}
    if args.size:
        kw["input_size"] = args.size
    doc = MODELS[args.name](**kw)
    return {f"{args.name}.json": _json(doc)}


def _digests(args) -> dict[str, str]:
    out = {}
    for key in ("network", "hw", "plan", "baseline", "space"):
        value = getattr(args, key, None)
        if not value:
            continue
        if key == "network" and value.startswith("zoo:"):
            out[key] = load_network(value).digest()
        elif key == "space" and value == "default":
            from .nas.space import SearchSpace
            out[key] = document_digest(SearchSpace().to_dict())
        else:
            out[key] = document_digest(_parsed(value, yaml.safe_load))
    return out


COMMANDS = {"compile": cmd_compile, "simulate": cmd_simulate, "search": cmd_search, "zoo": cmd_zoo}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="xbarmap", description="Map CNNs onto RRAM crossbars and estimate latency.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, hw=True):
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./xbarmap-out)")
        if hw:
            p.add_argument("--xbars", type=int, help="override num_xbars from the hardware file")
            p.add_argument("--sdw", type=int, help="depthwise split factor")

    p = sub.add_parser("compile", help="partition, duplicate and pack a network")
    p.add_argument("network", help="network file, or zoo:<name>")
    p.add_argument("hw", help="hardware file")
    p.add_argument("--duplicate", action="store_true", help="duplicate layers to fill the budget")
    p.add_argument("--isaac", action="store_true", help="reference mapping: one box per crossbar, no split")
    p.add_argument("--no-pack", action="store_true", help="one box per crossbar, keeping --sdw")
    common(p)

    p = sub.add_parser("simulate", help="run a compiled plan through the cycle simulator")
    p.add_argument("plan", help="plan.json from compile")
    p.add_argument("network", help="network file, or zoo:<name>")
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--sweep", action="store_true", help="run 1, 2, 4, ... up to --max-samples")
    p.add_argument("--max-samples", type=int, default=1024)
    p.add_argument("--trace", action="store_true", help="write a per-event trace.csv")
    p.add_argument("--baseline", help="second plan to report speedup against")
    common(p, hw=False)

    p = sub.add_parser("search", help="hardware-aware NSGA-II architecture search")
    p.add_argument("space", help="search-space file, or 'default'")
    p.add_argument("hw", help="hardware file with a crossbar budget")
    p.add_argument("--pop", type=int, default=50)
    p.add_argument("--gens", type=int, default=100)
    p.add_argument("--mut", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--prefer", choices=("acc", "speed"), default="acc")
    p.add_argument("--samples", type=int, default=1, help="sample count for the latency objective")
    p.add_argument("--surrogate-table", help="JSON map of genome digest to measured accuracy")
    common(p)

    p = sub.add_parser("zoo", help="write a built-in network or the default search space")
    p.add_argument("name", choices=sorted(MODELS) + ["space"])
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--size", type=int, help="input resolution")
    common(p, hw=False)
    return ap


def _validate(args) -> None:
    for name in ("samples", "max_samples", "pop", "gens", "xbars", "sdw", "classes", "size"):
        value = getattr(args, name, None)
        if value is not None and value < (0 if name == "xbars" else 1):
            raise CLIError(f"--{name.replace('_', '-')} must be positive", EXIT_PARSE)
    mut = getattr(args, "mut", None)
    if mut is not None and not 0.0 <= mut <= 1.0:
        raise CLIError("--mut must lie in [0, 1]", EXIT_PARSE)
    if getattr(args, "pop", None) is not None and args.pop < 2:
        raise CLIError("--pop must be at least 2", EXIT_PARSE)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    started = _now()
    try:
        _validate(args)
        files = COMMANDS[args.command](args)
        arguments = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "verbose", "command")}
        manifest = RunManifest(
            command=args.command, arguments=arguments, digests=_digests(args),
            seed=getattr(args, "seed", None), started_at=started, finished_at=_now(),
            outputs=sorted(files),
        )
        files["manifest.json"] = _json(manifest.to_dict())
        written = write_outputs(out_dir(args.out), files)
    except CLIError as exc:
        print(f"xbarmap: error: {exc}", file=sys.stderr)
        return exc.code
    except (PackingInfeasible, DuplicationInfeasible) as exc:
        print(f"xbarmap: infeasible: {exc}; raise num_xbars", file=sys.stderr)
        return EXIT_PACKING
    except (ParseError, NetworkError) as exc:
        print(f"xbarmap: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
