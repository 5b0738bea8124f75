"""Command-line interface: partitioning, evolutionary runs, natural-cut
preprocessing, restart benchmarks and convergence analysis."""

from __future__ import annotations

import argparse
import csv
import math
import re
import sys
import threading
import time
from pathlib import Path
from random import Random

from . import analysis
from .engine import EngineConfig, run as engine_run
from .evolution import OperatorRatios
from .graph import (Graph, is_feasible, load_metis, save_metis,
                    write_partition)
from .multilevel import PartitionerConfig, partition
from .natural_cuts import discover_natural_cuts, preprocess_contract


def _load_graph(path: str) -> Graph:
    with open(path) as f:
        return load_metis(f)


def _partitioner_config(args, seed: int | None = None) -> PartitionerConfig:
    return PartitionerConfig(k=args.k, eps=args.eps,
                             strength=getattr(args, "strength", "strong"),
                             seed=args.seed if seed is None else seed)


def cmd_partition(args) -> int:
    graph = _load_graph(args.graph)
    cfg = _partitioner_config(args)
    t0 = time.perf_counter()
    part = partition(graph, cfg)
    elapsed = time.perf_counter() - t0
    out = args.output or f"{args.graph}.part.{args.k}"
    with open(out, "w") as f:
        write_partition(part, f)
    feasible = "true" if is_feasible(graph, part) else "false"
    print(f"cut={part.cut} feasible={feasible}")
    print(f"time={elapsed:.3f}s partition={out}")
    return 0


def cmd_evolve(args) -> int:
    graph = _load_graph(args.graph)
    cfg = _partitioner_config(args)
    engine = EngineConfig(partitioner=cfg, workers=args.workers,
                          t_total=args.time, fraction=args.fraction,
                          ratios=OperatorRatios(coin=args.coin),
                          comm_period=args.comm_period, seed=args.seed)
    best, events = engine_run(graph, engine)
    out = args.output or f"{args.graph}.part.{args.k}"
    with open(out, "w") as f:
        write_partition(best.partition, f)
    csv_path = args.convergence or f"{args.graph}.convergence.csv"
    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["worker_id", "t_seconds", "cut"])
        for e in events:
            writer.writerow([e.worker, repr(e.t), e.cut])
    feasible = "true" if is_feasible(graph, best.partition) else "false"
    print(f"cut={best.cut} feasible={feasible}")
    print(f"partition={out} convergence={csv_path} events={len(events)}")
    return 0


def cmd_natural_cuts(args) -> int:
    graph = _load_graph(args.graph)
    rng = Random(args.seed)
    union: set[tuple[int, int]] = set()
    total = 0
    for _ in range(args.reps):
        encs, cuts = discover_natural_cuts(graph, args.U, args.alpha,
                                           args.f, rng)
        union |= cuts
        total += len(encs)
    coarse, _ = preprocess_contract(graph, union)
    cuts_path = args.cuts_out or f"{args.graph}.cuts"
    with open(cuts_path, "w") as f:
        for u, v in sorted(union):
            f.write(f"{u} {v}\n")
    graph_path = args.graph_out or f"{args.graph}.contracted"
    with open(graph_path, "w") as f:
        save_metis(coarse, f)
    print(f"encs={total} cut_edges={len(union)} "
          f"contracted_nodes={coarse.n} contracted_edges={coarse.m}")
    print(f"cuts={cuts_path} contracted={graph_path}")
    return 0


def _restart_baseline(graph: Graph, cfg: PartitionerConfig, workers: int,
                      budget: float, seed: int) -> int:
    """Best cut of repeated independent partitioner runs under the same
    thread model and wall-clock budget as the engine."""
    results: list[int] = []
    lock = threading.Lock()
    start = time.perf_counter()

    def body(wid: int) -> None:
        rng = Random((seed, wid).__hash__())
        while time.perf_counter() - start < budget:
            part = partition(graph, cfg.reseeded(rng.getrandbits(62)))
            with lock:
                results.append(part.cut)

    threads = [threading.Thread(target=body, args=(i,)) for i in range(workers)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    return min(results) if results else -1


def cmd_bench(args) -> int:
    if args.mode != "restarts-vs-evolve":
        print(f"unknown bench mode {args.mode!r}", file=sys.stderr)
        return 2
    graph = _load_graph(args.graph)
    cfg = _partitioner_config(args)
    wins = ties = losses = 0
    print("trial\tevolve_cut\trestart_cut\toutcome")
    for trial in range(args.trials):
        engine = EngineConfig(partitioner=cfg, workers=args.workers,
                              t_total=args.time, seed=args.seed + trial)
        best, _ = engine_run(graph, engine)
        restart = _restart_baseline(graph, cfg, args.workers, args.time,
                                    args.seed + trial + 10_000)
        if best.cut < restart:
            outcome = "evolve"
            wins += 1
        elif best.cut == restart:
            outcome = "tie"
            ties += 1
        else:
            outcome = "restarts"
            losses += 1
        print(f"{trial}\t{best.cut}\t{restart}\t{outcome}")
    print(f"summary\twins={wins}\tties={ties}\tlosses={losses}")
    return 0


def _read_convergence(path: Path) -> list[tuple[float, float]]:
    events = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if [h.strip() for h in header[:3]] != ["worker_id", "t_seconds", "cut"]:
            raise ValueError(f"{path}: expected header worker_id,t_seconds,cut")
        for row in reader:
            events.append((float(row[1]), float(row[2])))
    return events


def _instance_label(path: Path) -> str:
    """File stem with a trailing .repN repetition marker stripped."""
    return re.sub(r"\.rep\d+$", "", path.stem)


def _merge_repetitions(runs: list[list[tuple[float, float]]]) -> list[tuple[float, float]]:
    """Average the r-th event across repetitions when event counts match,
    otherwise merge all events into one timeline."""
    if len(runs) == 1:
        return runs[0]
    counts = {len(r) for r in runs}
    if len(counts) == 1:
        ordered = [sorted(r) for r in runs]
        merged = []
        for i in range(counts.pop()):
            t = sum(r[i][0] for r in ordered) / len(ordered)
            cut = sum(r[i][1] for r in ordered) / len(ordered)
            merged.append((t, cut))
        return merged
    return [e for r in runs for e in r]


def _write_points(path: Path, points, columns) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for t, value in points:
            writer.writerow([repr(t), repr(value)])


def cmd_analyze(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def build_curves(paths) -> list[analysis.NormalizedSequence]:
        by_label: dict[str, list[list[tuple[float, float]]]] = {}
        for p in map(Path, paths):
            by_label.setdefault(_instance_label(p), []).append(_read_convergence(p))
        curves = []
        for label, runs in sorted(by_label.items()):
            events = _merge_repetitions(runs)
            tmin = analysis.min_prefix(events)
            _write_points(out_dir / f"tmin_{label}.csv", tmin,
                          ["t_seconds", "min_cut"])
            nmin = analysis.normalize(tmin, args.t_base)
            _write_points(out_dir / f"nmin_{label}.csv", nmin,
                          ["t_normalized", "min_cut"])
            curves.append(analysis.NormalizedSequence(label, nmin))
        return curves

    curves = build_curves(args.csv)
    sg = analysis.event_geomean(curves)
    _write_points(out_dir / "sg.csv", sg, ["t_normalized", "geomean_cut"])
    written = ["sg.csv"]
    if args.baseline:
        base_curves = build_curves(args.baseline)
        base_sg = analysis.event_geomean(base_curves)
        _write_points(out_dir / "sg_baseline.csv", base_sg,
                      ["t_normalized", "geomean_cut"])
        speedup = analysis.pseudo_speedup(base_sg, sg)
        _write_points(out_dir / "pseudo_speedup.csv", speedup,
                      ["t_normalized", "speedup"])
        written += ["sg_baseline.csv", "pseudo_speedup.csv"]
    print(f"wrote {', '.join(written)} to {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evopart",
        description="Multilevel graph partitioning with a distributed "
                    "steady-state evolutionary layer.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", help="one multilevel partitioner run")
    p.add_argument("graph")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.03)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strength", choices=["strong", "eco"], default="strong")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("evolve", help="parallel evolutionary search")
    p.add_argument("graph")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.03)
    p.add_argument("--time", type=float, required=True,
                   help="wall-clock budget in seconds")
    p.add_argument("--workers", type=int, required=True)
    p.add_argument("--fraction", type=float, default=10.0,
                   help="population build cost fraction f")
    p.add_argument("--coin", type=int, default=1,
                   help="mutation weight out of 10")
    p.add_argument("--comm-period", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strength", choices=["strong", "eco"], default="strong")
    p.add_argument("--output", default=None)
    p.add_argument("--convergence", default=None)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("natural-cuts",
                       help="natural-cut preprocessing contraction")
    p.add_argument("graph")
    p.add_argument("--U", type=float, required=True,
                   help="tree weight budget (road preset: (1+eps)n/2k)")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--f", type=float, default=10.0)
    p.add_argument("--reps", type=int, default=2,
                   help="discovery passes whose cuts are merged")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cuts-out", default=None)
    p.add_argument("--graph-out", default=None)
    p.set_defaults(func=cmd_natural_cuts)

    p = sub.add_parser("bench", help="head-to-head comparison harness")
    p.add_argument("mode", choices=["restarts-vs-evolve"])
    p.add_argument("graph")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.03)
    p.add_argument("--time", type=float, required=True)
    p.add_argument("--workers", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strength", choices=["strong", "eco"], default="strong")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser(
        "analyze",
        help="convergence CSVs to T_min/N_min/S_g/speedup tables",
        epilog="Files whose stem only differs by a trailing .repN suffix "
               "are treated as repetitions of one instance: their r-th "
               "events are averaged when all repetitions report the same "
               "number of events, otherwise all events are merged into "
               "one timeline.")
    p.add_argument("csv", nargs="+")
    p.add_argument("--t-base", type=float, required=True,
                   help="reference seconds per plain partitioner run")
    p.add_argument("--baseline", nargs="*", default=None,
                   help="convergence CSVs of the single-worker baseline")
    p.add_argument("--out-dir", default="analysis")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
