"""Experiment harness: tracking-error traces, grid searches and reports.

A run streams generated signals through one or more online learners and logs
per-step records of the tracking error against the batch reference of the
active ground-truth segment, the instantaneous online cost, and (optionally,
on a stride) the partial static regret.  Reports are emitted as per-run CSV
files, a combined JSON summary and an SVG plot.
"""

from __future__ import annotations

import json
import os
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import fileio
from .dissimilarity import ForgettingSchedule
from .graphcore import EdgeIndexing
from .online import (
    BaselineLearner,
    OnlinePGLearner,
    OpadmmLearner,
    comparator_from_mean,
)
from .solvers import Hyperparams, batch_solve
from .synth import GraphModelSpec, Stream, StreamSpec, generate_stream

LEARNERS: dict[str, type[BaselineLearner]] = {
    "opadmm": OpadmmLearner,
    "pg": OnlinePGLearner,
}


def register_learner(name: str, cls: type[BaselineLearner]) -> None:
    """Expose an external online method to configs under the given name."""
    LEARNERS[name] = cls


def mean_dissimilarity(signals, indexing: EdgeIndexing) -> np.ndarray:
    """Mean of the per-signal dissimilarity vectors of a batch of signals."""
    signals = np.atleast_2d(np.asarray(signals, dtype=float))
    if signals.shape[1] != indexing.n:
        raise ValueError(f"signals have {signals.shape[1]} columns, expected {indexing.n}")
    diffs = signals[:, indexing.rows] - signals[:, indexing.cols]
    return np.mean(diffs * diffs, axis=0)


def reference_solution(signals, indexing: EdgeIndexing, hp: Hyperparams,
                       tol: float = 1e-9, max_iter: int = 200_000) -> np.ndarray:
    """Batch solution on the mean dissimilarity of the given signals.

    Using the mean (not the sum) keeps the same (alpha, beta) meaningful for
    batch and online runs, since the online running average converges to the
    mean under the stationary schedule.
    """
    z = mean_dissimilarity(signals, indexing)
    result = batch_solve(z, indexing, hp, tol=tol, max_iter=max_iter, keep_trace=False)
    if not result.converged:
        warnings.warn(f"reference solve stopped at max_iter={max_iter} without "
                      f"meeting tol={tol}")
    return result.weights


@dataclass(frozen=True)
class SolverConfig:
    """One online run: algorithm, hyperparameters and forgetting schedule."""

    name: str
    algo: str = "opadmm"
    alpha: float = 1.0
    beta: float = 1.0
    rho: float = 1.0
    tau1: float | None = None     # None: 0.9 of the admissible bound
    tau2: float | None = None
    gamma: str = "stationary"     # "stationary" or "fixed:<value>"

    def hyperparams(self, n: int) -> Hyperparams:
        base = Hyperparams.default(n, alpha=self.alpha, beta=self.beta, rho=self.rho)
        tau1 = base.tau1 if self.tau1 is None else self.tau1
        tau2 = base.tau2 if self.tau2 is None else self.tau2
        return Hyperparams(self.alpha, self.beta, self.rho, tau1, tau2)

    def schedule(self) -> ForgettingSchedule:
        return ForgettingSchedule.parse(self.gamma)

    def to_dict(self) -> dict:
        return {
            "name": self.name, "algo": self.algo, "alpha": self.alpha,
            "beta": self.beta, "rho": self.rho, "tau1": self.tau1,
            "tau2": self.tau2, "gamma": self.gamma,
        }


@dataclass(frozen=True)
class ExperimentConfig:
    graph_spec: GraphModelSpec
    stream_spec: StreamSpec
    solvers: tuple[SolverConfig, ...]
    regret_stride: int = 0        # 0 disables regret evaluation
    measure_time: bool = False    # keep wall_time_us at 0 for reproducible CSVs
    reference_tol: float = 1e-9

    def __post_init__(self):
        if not self.solvers:
            raise ValueError("experiment needs at least one solver config")
        names = [cfg.name for cfg in self.solvers]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate solver names: {names}")
        for cfg in self.solvers:
            if cfg.algo not in LEARNERS:
                raise ValueError(f"unknown algorithm {cfg.algo!r}; "
                                 f"registered: {sorted(LEARNERS)}")
        if self.regret_stride < 0:
            raise ValueError("regret_stride must be >= 0")

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        graph = GraphModelSpec(**payload["graph"])
        stream = payload["stream"].copy()
        stream["change_points"] = tuple(
            (int(s), float(f)) for s, f in stream.get("change_points", ())
        )
        return cls(
            graph_spec=graph,
            stream_spec=StreamSpec(**stream),
            solvers=tuple(SolverConfig(**s) for s in payload["solvers"]),
            regret_stride=int(payload.get("regret_stride", 0)),
            measure_time=bool(payload.get("measure_time", False)),
            reference_tol=float(payload.get("reference_tol", 1e-9)),
        )

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "graph": self.graph_spec.to_dict(),
            "stream": self.stream_spec.to_dict(),
            "solvers": [cfg.to_dict() for cfg in self.solvers],
            "regret_stride": self.regret_stride,
            "measure_time": self.measure_time,
            "reference_tol": self.reference_tol,
        }


@dataclass
class ExperimentRecord:
    """One logged step of one online run."""

    k: int
    suboptimality: float
    objective: float
    regret_partial: float | None = None
    wall_time_us: float = 0.0


@dataclass
class ExperimentResult:
    records: dict[str, list[ExperimentRecord]]
    references: dict[str, list[tuple[int, np.ndarray]]] = field(repr=False,
                                                                default_factory=dict)
    errors: dict[str, str] = field(default_factory=dict)
    stream: Stream | None = field(repr=False, default=None)


def segment_references(stream: Stream, indexing: EdgeIndexing, hp: Hyperparams,
                       tol: float = 1e-9) -> list[tuple[int, np.ndarray]]:
    """Batch reference per stationary segment, solved on its own signals."""
    refs = []
    for (start, end) in stream.segment_bounds():
        refs.append((start, reference_solution(stream.signals[start:end], indexing,
                                               hp, tol=tol)))
    return refs


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Stream the configured signals through every configured solver."""
    stream = generate_stream(config.graph_spec, config.stream_spec)
    indexing = EdgeIndexing(stream.n)
    result = ExperimentResult(records={}, stream=stream)

    ref_cache: dict[tuple[float, float], list[tuple[int, np.ndarray]]] = {}
    for cfg in config.solvers:
        key = (cfg.alpha, cfg.beta)
        if key not in ref_cache:
            ref_hp = Hyperparams.default(stream.n, alpha=cfg.alpha, beta=cfg.beta)
            ref_cache[key] = segment_references(stream, indexing, ref_hp,
                                                tol=config.reference_tol)
        result.references[cfg.name] = ref_cache[key]
        try:
            result.records[cfg.name] = _run_single(cfg, stream, indexing,
                                                   ref_cache[key], config)
        except Exception as exc:  # keep sibling runs alive
            result.errors[cfg.name] = f"{type(exc).__name__}: {exc}"
            result.records[cfg.name] = []
    return result


def _run_single(cfg: SolverConfig, stream: Stream, indexing: EdgeIndexing,
                references, config: ExperimentConfig) -> list[ExperimentRecord]:
    hp = cfg.hyperparams(stream.n)
    learner = LEARNERS[cfg.algo](indexing, hp, cfg.schedule())
    ref_starts = [start for start, _ in references]
    ref_weights = [w for _, w in references]
    seg = 0

    cumulative_cost = 0.0
    z_sum = np.zeros(indexing.r)
    records: list[ExperimentRecord] = []
    for step, x in enumerate(stream.signals):
        while seg + 1 < len(ref_starts) and ref_starts[seg + 1] <= step:
            seg += 1
        t0 = time.perf_counter() if config.measure_time else 0.0
        learner.step(x)
        elapsed_us = (time.perf_counter() - t0) * 1e6 if config.measure_time else 0.0

        k = step + 1
        cost = learner.cost()
        cumulative_cost += cost
        z_sum += learner.state.dissim.z_run
        regret = None
        if config.regret_stride and k % config.regret_stride == 0:
            comparator = comparator_from_mean(z_sum / k, k, indexing, hp)
            regret = cumulative_cost - comparator
        records.append(ExperimentRecord(
            k=k,
            suboptimality=float(np.linalg.norm(learner.current_estimate()
                                               - ref_weights[seg])),
            objective=cost,
            regret_partial=regret,
            wall_time_us=elapsed_us,
        ))
    return records


def support_f_score(w_est, w_true, rel_threshold: float = 1e-4) -> float:
    """F-measure of edge-support recovery.

    An estimated edge counts as present when its weight exceeds
    rel_threshold times the largest estimated weight.
    """
    w_est = np.asarray(w_est, dtype=float)
    w_true = np.asarray(w_true, dtype=float)
    if w_est.shape != w_true.shape:
        raise ValueError("edge vectors must share a layout")
    est = w_est > rel_threshold * w_est.max(initial=0.0)
    true = w_true > 0
    tp = int(np.sum(est & true))
    if tp == 0:
        return 0.0
    precision = tp / int(est.sum())
    recall = tp / int(true.sum())
    return 2.0 * precision * recall / (precision + recall)


def grid_search_regularizers(signals, indexing: EdgeIndexing, alpha_grid,
                             beta_grid, truth, rel_threshold: float = 1e-4,
                             tol: float = 1e-8) -> tuple[float, float]:
    """Pick (alpha, beta) maximizing support F-score against the truth.

    Ties are broken toward larger alpha, then larger beta.
    """
    alpha_grid = list(alpha_grid)
    beta_grid = list(beta_grid)
    if not alpha_grid or not beta_grid:
        raise ValueError("grids must be nonempty")
    z = mean_dissimilarity(signals, indexing)
    best = None
    any_support = False
    for alpha in alpha_grid:
        for beta in beta_grid:
            hp = Hyperparams.default(indexing.n, alpha=alpha, beta=beta)
            w = batch_solve(z, indexing, hp, tol=tol, keep_trace=False).weights
            any_support = any_support or bool(np.any(w > 0))
            key = (support_f_score(w, truth, rel_threshold), alpha, beta)
            if best is None or key > best:
                best = key
    if not any_support:
        warnings.warn("every grid cell produced an all-zero solution")
    return best[1], best[2]


def grid_search_solver(signals, indexing: EdgeIndexing, reference, rho_grid,
                       tau1_grid, tau2_grid, alpha: float = 1.0,
                       beta: float = 1.0, gamma: str = "stationary",
                       tail_fraction: float = 0.1, full: bool = False):
    """Pick (rho, tau1, tau2) minimizing the tail mean tracking error.

    Cells violating the admissible step ranges are skipped and reported in
    the full table; raises if no cell is feasible.
    """
    signals = np.atleast_2d(np.asarray(signals, dtype=float))
    schedule = ForgettingSchedule.parse(gamma)
    tail = max(1, int(round(tail_fraction * signals.shape[0])))
    table: list[dict] = []
    best_hp, best_score = None, np.inf
    for rho in rho_grid:
        for tau1 in tau1_grid:
            for tau2 in tau2_grid:
                try:
                    hp = Hyperparams(alpha, beta, rho, tau1, tau2)
                    hp.validate_for(indexing.n)
                except ValueError as exc:
                    table.append({"rho": rho, "tau1": tau1, "tau2": tau2,
                                  "skipped": str(exc)})
                    continue
                learner = OpadmmLearner(indexing, hp, schedule)
                errs = []
                for x in signals:
                    learner.step(x)
                    errs.append(np.linalg.norm(learner.current_estimate() - reference))
                score = float(np.mean(errs[-tail:]))
                table.append({"rho": rho, "tau1": tau1, "tau2": tau2, "score": score})
                if score < best_score:
                    best_hp, best_score = hp, score
    if best_hp is None:
        raise ValueError("all grid cells violate the admissible step ranges")
    return (best_hp, table) if full else best_hp


def fit_power_law(x, y) -> tuple[float, float]:
    """Least-squares exponent and R^2 of y ~ x^c on log-log axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0)
    if keep.sum() < 2:
        return float("nan"), float("nan")
    return _linfit(np.log(x[keep]), np.log(y[keep]))


def fit_log_linear(k, err) -> tuple[float, float]:
    """Least-squares slope and R^2 of log(err) against the iteration index."""
    k = np.asarray(k, dtype=float)
    err = np.asarray(err, dtype=float)
    keep = err > 0
    if keep.sum() < 2:
        return float("nan"), float("nan")
    return _linfit(k[keep], np.log(err[keep]))


def _linfit(x, y) -> tuple[float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


RECORD_COLUMNS = ("k", "suboptimality", "objective", "regret_partial", "wall_time_us")


def write_records_csv(path, records: list[ExperimentRecord]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(RECORD_COLUMNS) + "\n")
        for rec in records:
            regret = "" if rec.regret_partial is None else fileio.fmt(rec.regret_partial)
            fh.write(",".join([
                str(rec.k),
                fileio.fmt(rec.suboptimality),
                fileio.fmt(rec.objective),
                regret,
                fileio.fmt(rec.wall_time_us),
            ]) + "\n")


def read_records_csv(path) -> list[ExperimentRecord]:
    records = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != RECORD_COLUMNS:
            raise ValueError(f"unexpected record columns {header} in {path}")
        for line in fh:
            k, subopt, obj, regret, wall = line.rstrip("\n").split(",")
            records.append(ExperimentRecord(
                k=int(k),
                suboptimality=float(subopt),
                objective=float(obj),
                regret_partial=None if regret == "" else float(regret),
                wall_time_us=float(wall),
            ))
    return records


def summarize(records_by_name: dict[str, list[ExperimentRecord]]) -> dict:
    """Final error, fitted convergence rate and regret exponent per run."""
    summary = {}
    for name, records in records_by_name.items():
        if not records:
            summary[name] = {"error": "no records"}
            continue
        ks = np.array([rec.k for rec in records], dtype=float)
        subopt = np.array([rec.suboptimality for rec in records])
        tail = len(records) // 2
        rate, rate_r2 = fit_log_linear(ks[tail:], subopt[tail:])
        regret_pts = [(rec.k, rec.regret_partial) for rec in records
                      if rec.regret_partial is not None and rec.regret_partial > 0]
        if len(regret_pts) >= 2:
            exp_c, exp_r2 = fit_power_law([p[0] for p in regret_pts],
                                          [p[1] for p in regret_pts])
        else:
            exp_c, exp_r2 = None, None
        summary[name] = {
            "steps": int(records[-1].k),
            "final_suboptimality": float(subopt[-1]),
            "convergence_rate_log_slope": None if np.isnan(rate) else rate,
            "convergence_rate_r2": None if np.isnan(rate_r2) else rate_r2,
            "regret_exponent": exp_c,
            "regret_exponent_r2": exp_r2,
        }
    return summary


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def render_suboptimality_svg(records_by_name: dict[str, list[ExperimentRecord]],
                             width: int = 720, height: int = 440,
                             floor: float = 1e-16) -> str:
    """Log-y line plot of tracking error vs step, one polyline per run."""
    margin = 50
    plot_w, plot_h = width - 2 * margin, height - 2 * margin
    series = {name: [(rec.k, max(rec.suboptimality, floor)) for rec in recs]
              for name, recs in records_by_name.items() if recs}
    if not series:
        raise ValueError("nothing to plot")
    all_k = [k for pts in series.values() for k, _ in pts]
    all_y = [y for pts in series.values() for _, y in pts]
    k_lo, k_hi = min(all_k), max(all_k)
    y_lo, y_hi = np.log10(min(all_y)), np.log10(max(all_y))
    if k_hi == k_lo:
        k_hi = k_lo + 1
    if y_hi == y_lo:
        y_hi = y_lo + 1

    def sx(k):
        return margin + plot_w * (k - k_lo) / (k_hi - k_lo)

    def sy(y):
        return margin + plot_h * (1 - (np.log10(y) - y_lo) / (y_hi - y_lo))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
        f'stroke="black"/>',
        f'<text x="{width // 2}" y="{height - 12}" text-anchor="middle" '
        f'font-size="13">step k</text>',
        f'<text x="14" y="{height // 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 14 {height // 2})">tracking error (log scale)</text>',
    ]
    for exp in range(int(np.floor(y_lo)), int(np.ceil(y_hi)) + 1):
        if y_lo <= exp <= y_hi:
            ypix = sy(10.0 ** exp)
            parts.append(f'<line x1="{margin - 4:.1f}" y1="{ypix:.1f}" '
                         f'x2="{margin:.1f}" y2="{ypix:.1f}" stroke="black"/>')
            parts.append(f'<text x="{margin - 8:.1f}" y="{ypix + 4:.1f}" '
                         f'text-anchor="end" font-size="11">1e{exp}</text>')
    for idx, (name, pts) in enumerate(series.items()):
        color = _PALETTE[idx % len(_PALETTE)]
        coords = " ".join(f"{sx(k):.2f},{sy(y):.2f}" for k, y in pts)
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                     f'points="{coords}"/>')
        parts.append(f'<text x="{width - margin - 6}" y="{margin + 16 * (idx + 1)}" '
                     f'text-anchor="end" font-size="12" fill="{color}">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


def emit_report(records_by_name: dict[str, list[ExperimentRecord]], out_dir,
                stem: str = "experiment") -> dict[str, str]:
    """Write per-run CSVs, a JSON summary and the SVG plot; returns the paths."""
    if not any(records_by_name.values()):
        raise ValueError("no records to report")
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    for name, records in records_by_name.items():
        csv_path = os.path.join(out_dir, f"{name}.csv")
        write_records_csv(csv_path, records)
        paths[f"csv:{name}"] = csv_path

    summary_path = os.path.join(out_dir, f"{stem}_summary.json")
    with open(summary_path, "w") as fh:
        json.dump(summarize(records_by_name), fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths["summary"] = summary_path

    svg_path = os.path.join(out_dir, f"{stem}_suboptimality.svg")
    with open(svg_path, "w") as fh:
        fh.write(render_suboptimality_svg(
            {n: r for n, r in records_by_name.items() if r}))
        fh.write("\n")
    paths["plot"] = svg_path
    return paths
