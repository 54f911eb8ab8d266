"""Command-line entry points.

Subcommands: ``generate`` (synthetic streams), ``batch`` (one batch solve),
``online`` (stream one or more online solvers, or run a JSON experiment
config), ``grid`` (hyperparameter searches) and ``report`` (summaries and
plots from record CSVs).  The output directory can be forced globally with
the ``GRAPHTRACK_OUTDIR`` environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import experiment, fileio
from .dissimilarity import ForgettingSchedule
from .experiment import (
    ExperimentConfig,
    grid_search_regularizers,
    grid_search_solver,
    reference_solution,
    run_experiment,
)
from .graphcore import EdgeIndexing
from .solvers import Hyperparams, batch_solve
from .synth import GraphModelSpec, StreamSpec, generate_stream


def out_dir(requested: str) -> str:
    path = os.environ.get("GRAPHTRACK_OUTDIR", requested)
    os.makedirs(path, exist_ok=True)
    return path


def parse_grid(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok]


def add_hyperparam_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=1.0)
    parser.add_argument("--beta", type=float, default=1.0)
    parser.add_argument("--rho", type=float, default=1.0)
    parser.add_argument("--tau1", type=float, default=None,
                        help="default: 0.9 of the admissible bound")
    parser.add_argument("--tau2", type=float, default=None,
                        help="default: 0.9/rho")


def resolve_hp(args, n: int) -> Hyperparams:
    base = Hyperparams.default(n, alpha=args.alpha, beta=args.beta, rho=args.rho)
    return Hyperparams(
        args.alpha, args.beta, args.rho,
        base.tau1 if args.tau1 is None else args.tau1,
        base.tau2 if args.tau2 is None else args.tau2,
    )


def cmd_generate(args) -> int:
    changes = []
    for spec in args.change or []:
        step, frac = spec.split(":")
        changes.append((int(step), float(frac)))
    graph_spec = GraphModelSpec(
        model=args.model, n=args.n, threshold=args.threshold, scale=args.scale,
        edge_prob=args.edge_prob, pa_seed_nodes=args.pa_seed_nodes,
        pa_edges_per_node=args.pa_edges_per_node, seed=args.seed,
    )
    stream_spec = StreamSpec(length=args.signals, noise_variance=args.noise_var,
                             change_points=tuple(changes))
    stream = generate_stream(graph_spec, stream_spec)
    dest = out_dir(args.out)
    indexing = EdgeIndexing(stream.n)
    fileio.write_signal_csv(os.path.join(dest, "signals.csv"), stream.signals)
    truth_files = []
    for idx, (start, w) in enumerate(stream.segments):
        name = f"truth_seg{idx}.csv"
        fileio.write_edge_csv(os.path.join(dest, name), indexing, w)
        truth_files.append({"file": name, "start_step": start})
    fileio.write_manifest(os.path.join(dest, "manifest.json"), {
        "graph": graph_spec.to_dict(),
        "stream": stream_spec.to_dict(),
        "signals_file": "signals.csv",
        "truth_segments": truth_files,
    })
    print(f"wrote {stream.length} signals on {stream.n} nodes to {dest}")
    return 0


def cmd_batch(args) -> int:
    signals = fileio.read_signal_csv(args.signals)
    indexing = EdgeIndexing(signals.shape[1])
    hp = resolve_hp(args, indexing.n)
    z = experiment.mean_dissimilarity(signals, indexing)
    result = batch_solve(z, indexing, hp, tol=args.tol, max_iter=args.max_iter)
    dest = out_dir(args.out)
    fileio.write_edge_csv(os.path.join(dest, "edges.csv"), indexing, result.weights)
    with open(os.path.join(dest, "trace.csv"), "w") as fh:
        fh.write("iter,w_change,primal_residual,objective\n")
        for row in result.trace:
            fh.write(f"{row.iteration},{fileio.fmt(row.w_change)},"
                     f"{fileio.fmt(row.primal_residual)},{fileio.fmt(row.objective)}\n")
    deg = indexing.degrees(result.weights)
    status = "converged" if result.converged else "NOT converged"
    print(f"{status} in {result.iterations} iterations; "
          f"degrees in [{deg.min():.6g}, {deg.max():.6g}] "
          f"(threshold weak nodes before downstream use if the minimum is tiny)")
    return 0 if result.converged else 1


def cmd_online(args) -> int:
    if args.config:
        config = ExperimentConfig.from_json(args.config)
        if args.seed is not None:
            config = replace(config, graph_spec=replace(config.graph_spec,
                                                        seed=args.seed))
        result = run_experiment(config)
        dest = out_dir(args.out)
        paths = experiment.emit_report(result.records, dest, stem=args.stem)
        for name, message in result.errors.items():
            print(f"solver {name} failed: {message}", file=sys.stderr)
        print(json.dumps({"outputs": paths,
                          "summary": experiment.summarize(result.records)},
                         indent=2, sort_keys=True))
        return 0 if not result.errors else 1

    if not args.signals:
        print("online: need --signals or --config", file=sys.stderr)
        return 2
    signals = fileio.read_signal_csv(args.signals)
    indexing = EdgeIndexing(signals.shape[1])
    hp = resolve_hp(args, indexing.n)
    schedule = ForgettingSchedule.parse(args.gamma)
    if args.reference_edges:
        reference, _ = fileio.read_edge_csv(args.reference_edges, n=indexing.n)
    else:
        reference = reference_solution(signals, indexing, hp)

    learner = experiment.LEARNERS[args.algo](indexing, hp, schedule)
    cumulative = 0.0
    z_sum = np.zeros(indexing.r)
    records = []
    for step, x in enumerate(signals):
        learner.step(x)
        k = step + 1
        cost = learner.cost()
        cumulative += cost
        z_sum += learner.state.dissim.z_run
        regret = None
        if args.regret_stride and k % args.regret_stride == 0:
            from .online import comparator_from_mean
            regret = cumulative - comparator_from_mean(z_sum / k, k, indexing, hp)
        records.append(experiment.ExperimentRecord(
            k=k,
            suboptimality=float(np.linalg.norm(learner.current_estimate() - reference)),
            objective=cost,
            regret_partial=regret,
        ))
    dest = out_dir(args.out)
    path = os.path.join(dest, f"{args.algo}_records.csv")
    experiment.write_records_csv(path, records)
    print(f"wrote {len(records)} records to {path}; "
          f"final tracking error {records[-1].suboptimality:.6g}")
    return 0


def cmd_grid(args) -> int:
    signals = fileio.read_signal_csv(args.signals)
    indexing = EdgeIndexing(signals.shape[1])
    if args.target == "regularizers":
        if not args.truth:
            print("grid regularizers: need --truth", file=sys.stderr)
            return 2
        truth, _ = fileio.read_edge_csv(args.truth, n=indexing.n)
        alpha, beta = grid_search_regularizers(
            signals, indexing, parse_grid(args.alpha_grid),
            parse_grid(args.beta_grid), truth)
        outcome = {"alpha": alpha, "beta": beta}
    else:
        hp_ref = Hyperparams.default(indexing.n, alpha=args.alpha, beta=args.beta)
        if args.reference_edges:
            reference, _ = fileio.read_edge_csv(args.reference_edges, n=indexing.n)
        else:
            reference = reference_solution(signals, indexing, hp_ref)
        best, table = grid_search_solver(
            signals, indexing, reference, parse_grid(args.rho_grid),
            parse_grid(args.tau1_grid), parse_grid(args.tau2_grid),
            alpha=args.alpha, beta=args.beta, gamma=args.gamma, full=True)
        outcome = {
            "rho": best.rho, "tau1": best.tau1, "tau2": best.tau2,
            "cells": table,
        }
    print(json.dumps(outcome, indent=2, sort_keys=True))
    if args.out:
        dest = out_dir(args.out)
        with open(os.path.join(dest, "grid.json"), "w") as fh:
            json.dump(outcome, fh, indent=2, sort_keys=True)
    return 0


def cmd_report(args) -> int:
    records_by_name = {}
    for path in args.records:
        name = os.path.splitext(os.path.basename(path))[0]
        records_by_name[name] = experiment.read_records_csv(path)
    dest = out_dir(args.out)
    summary = experiment.summarize(records_by_name)
    with open(os.path.join(dest, f"{args.stem}_summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(dest, f"{args.stem}_suboptimality.svg"), "w") as fh:
        fh.write(experiment.render_suboptimality_svg(records_by_name))
        fh.write("\n")
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphtrack",
        description="Learn and track graph topology from streaming smooth signals.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="synthesize a signal stream")
    gen.add_argument("--model", choices=["gaussian", "er", "pa"], required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--signals", type=int, default=1000)
    gen.add_argument("--noise-var", type=float, default=0.01)
    gen.add_argument("--threshold", type=float, default=0.8)
    gen.add_argument("--scale", type=float, default=0.2)
    gen.add_argument("--edge-prob", type=float, default=0.1)
    gen.add_argument("--pa-seed-nodes", type=int, default=2)
    gen.add_argument("--pa-edges-per-node", type=int, default=1)
    gen.add_argument("--change", action="append", metavar="STEP:FRACTION",
                     help="resample a fraction of edges at a step (repeatable)")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", default="out")
    gen.set_defaults(func=cmd_generate)

    bat = sub.add_parser("batch", help="batch solve on a signal CSV")
    bat.add_argument("--signals", required=True)
    add_hyperparam_flags(bat)
    bat.add_argument("--tol", type=float, default=1e-8)
    bat.add_argument("--max-iter", type=int, default=100_000)
    bat.add_argument("--out", default="out")
    bat.set_defaults(func=cmd_batch)

    onl = sub.add_parser("online", help="run online solvers over a stream")
    onl.add_argument("--config", help="JSON experiment config (overrides flags)")
    onl.add_argument("--signals")
    onl.add_argument("--algo", choices=sorted(experiment.LEARNERS), default="opadmm")
    onl.add_argument("--gamma", default="stationary",
                     help="'stationary' or 'fixed:<value>'")
    add_hyperparam_flags(onl)
    onl.add_argument("--regret-stride", type=int, default=0)
    onl.add_argument("--reference-edges", help="edge CSV for the tracking reference")
    onl.add_argument("--seed", type=int, default=None,
                     help="override the config's graph seed")
    onl.add_argument("--stem", default="experiment")
    onl.add_argument("--out", default="out")
    onl.set_defaults(func=cmd_online)

    grd = sub.add_parser("grid", help="hyperparameter grid searches")
    grd.add_argument("--target", choices=["regularizers", "solver"], required=True)
    grd.add_argument("--signals", required=True)
    grd.add_argument("--truth", help="ground-truth edge CSV (regularizers)")
    grd.add_argument("--alpha-grid", default="0.1,1,10")
    grd.add_argument("--beta-grid", default="0.1,1,10")
    grd.add_argument("--rho-grid", default="0.5,1,2")
    grd.add_argument("--tau1-grid", default="0.001,0.01")
    grd.add_argument("--tau2-grid", default="0.5,0.9")
    grd.add_argument("--alpha", type=float, default=1.0)
    grd.add_argument("--beta", type=float, default=1.0)
    grd.add_argument("--gamma", default="stationary")
    grd.add_argument("--reference-edges")
    grd.add_argument("--out")
    grd.set_defaults(func=cmd_grid)

    rep = sub.add_parser("report", help="summaries and plots from record CSVs")
    rep.add_argument("--records", nargs="+", required=True)
    rep.add_argument("--stem", default="report")
    rep.add_argument("--out", default="out")
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
