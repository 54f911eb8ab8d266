"""Synthetic graphs, smooth signals and piecewise-stationary streams.

Three random graph families are supported: random geometric with a Gaussian
kernel (nodes uniform in the unit square, kernel weights below a threshold
zeroed), Erdos-Renyi with unit weights, and preferential attachment grown
from a small connected seed.  Signals are drawn smooth on a given graph by
coloring white noise with the square root of the Laplacian pseudoinverse,
then optionally corrupted with white Gaussian noise.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .graphcore import EdgeIndexing

GRAPH_MODELS = ("gaussian", "er", "pa")


@dataclass(frozen=True)
class GraphModelSpec:
    """Parameters of one random-graph draw; the seed fixes it completely."""

    model: str
    n: int
    threshold: float = 0.8        # gaussian: kernel values below this are cut
    scale: float = 0.2            # gaussian: kernel bandwidth
    edge_prob: float = 0.1        # er: independent edge probability
    pa_seed_nodes: int = 2        # pa: initial connected clique size
    pa_edges_per_node: int = 1    # pa: attachments per arriving node
    seed: int = 0

    def __post_init__(self):
        if self.model not in GRAPH_MODELS:
            raise ValueError(f"unknown graph model {self.model!r}")
        if self.n < 2:
            raise ValueError(f"need at least 2 nodes, got {self.n}")
        if self.model == "gaussian":
            if not 0.0 < self.threshold < 1.0:
                raise ValueError(f"threshold must be in (0, 1), got {self.threshold}")
            if self.scale <= 0:
                raise ValueError(f"scale must be positive, got {self.scale}")
        if self.model == "er" and not 0.0 <= self.edge_prob <= 1.0:
            raise ValueError(f"edge_prob must be in [0, 1], got {self.edge_prob}")
        if self.model == "pa":
            if not 2 <= self.pa_seed_nodes <= self.n:
                raise ValueError("pa needs 2 <= pa_seed_nodes <= n")
            if self.pa_edges_per_node < 1:
                raise ValueError("pa_edges_per_node must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class StreamSpec:
    """Length, noise level and change points of a signal stream."""

    length: int
    noise_variance: float = 0.01
    change_points: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        if self.length < 1:
            raise ValueError(f"stream length must be >= 1, got {self.length}")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be >= 0")
        prev = 0
        for step, fraction in self.change_points:
            if not prev < step < self.length:
                raise ValueError(f"change step {step} not strictly inside (0, {self.length})")
            if not 0.0 <= fraction <= 1.0:
                raise ValueError(f"resample fraction {fraction} not in [0, 1]")
            prev = step

    def to_dict(self) -> dict:
        return {
            "length": self.length,
            "noise_variance": self.noise_variance,
            "change_points": [list(cp) for cp in self.change_points],
        }


def generate_graph(spec: GraphModelSpec, rng=None) -> np.ndarray:
    """Draw an edge-weight vector from the requested random-graph model."""
    rng = np.random.default_rng(spec.seed if rng is None else rng)
    indexing = EdgeIndexing(spec.n)
    if spec.model == "gaussian":
        pos = rng.uniform(size=(spec.n, 2))
        dist_sq = np.sum((pos[indexing.rows] - pos[indexing.cols]) ** 2, axis=1)
        w = np.exp(-dist_sq / (2.0 * spec.scale**2))
        w[w < spec.threshold] = 0.0
        return w
    if spec.model == "er":
        return (rng.uniform(size=indexing.r) < spec.edge_prob).astype(float)
    return _preferential_attachment(spec, rng, indexing)


def _preferential_attachment(spec: GraphModelSpec, rng, indexing: EdgeIndexing) -> np.ndarray:
    w = np.zeros(indexing.r)
    seed_nodes = list(range(spec.pa_seed_nodes))
    # each entry of the urn is one endpoint of an existing edge, so sampling
    # it uniformly is degree-proportional selection
    urn: list[int] = []
    for a in seed_nodes:
        for b in seed_nodes:
            if a < b:
                w[indexing.slot_of(a, b)] = 1.0
                urn.extend((a, b))
    for new in range(spec.pa_seed_nodes, spec.n):
        n_attach = min(spec.pa_edges_per_node, new)
        targets: set[int] = set()
        while len(targets) < n_attach:
            targets.add(urn[rng.integers(len(urn))])
        for t in targets:
            w[indexing.slot_of(min(t, new), max(t, new))] = 1.0
            urn.extend((t, new))
    return w


def generate_smooth_signals(w, indexing: EdgeIndexing, count: int,
                            noise_variance: float, seed) -> np.ndarray:
    """Draw ``count`` signals with covariance pinv(L), plus white noise.

    Eigenvalues of the Laplacian below 1e-10 are treated as exactly zero
    (one per connected component), so the smooth part has no energy along
    the component indicators.
    """
    w = indexing.check_edge_vector(w)
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if noise_variance < 0:
        raise ValueError("noise_variance must be >= 0")
    if not np.any(w > 0):
        raise ValueError("graph has no edges; smooth signals are undefined")
    rng = np.random.default_rng(seed)
    lam, vecs = np.linalg.eigh(indexing.laplacian(w))
    keep = lam > 1e-10
    factor = vecs[:, keep] / np.sqrt(lam[keep])
    signals = rng.standard_normal((count, int(keep.sum()))) @ factor.T
    if noise_variance > 0:
        signals = signals + rng.normal(scale=math.sqrt(noise_variance),
                                       size=signals.shape)
    return signals


def resample_edges(w, fraction: float, spec: GraphModelSpec, seed) -> np.ndarray:
    """Move a fraction of the existing edges to uniformly chosen empty slots.

    ceil(fraction * nnz) edges are removed uniformly at random and the same
    number of new edges is placed on slots empty after the removal, carrying
    the removed weights (a permutation of them), which preserves both the
    edge count and the weight distribution of the source model.
    """
    indexing = EdgeIndexing(spec.n)
    w = indexing.check_edge_vector(w).copy()
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction {fraction} not in [0, 1]")
    nonzero = np.nonzero(w)[0]
    n_move = math.ceil(fraction * len(nonzero))
    if n_move == 0:
        return w
    rng = np.random.default_rng(seed)
    removed = rng.choice(nonzero, size=n_move, replace=False)
    moved_weights = w[removed].copy()
    w[removed] = 0.0
    empty = np.nonzero(w == 0)[0]
    destinations = rng.choice(empty, size=n_move, replace=False)
    w[destinations] = rng.permutation(moved_weights)
    return w


@dataclass
class Stream:
    """Generated signals plus the piecewise-constant ground truth."""

    signals: np.ndarray                       # shape (length, n)
    segments: list[tuple[int, np.ndarray]]    # (start step, edge weights)
    graph_spec: GraphModelSpec
    stream_spec: StreamSpec

    @property
    def length(self) -> int:
        return self.signals.shape[0]

    @property
    def n(self) -> int:
        return self.signals.shape[1]

    def truth_at(self, k: int) -> np.ndarray:
        """Ground-truth edge weights active at (0-based) step k."""
        if not 0 <= k < self.length:
            raise ValueError(f"step {k} outside stream of length {self.length}")
        active = self.segments[0][1]
        for start, weights in self.segments:
            if start <= k:
                active = weights
        return active

    def segment_bounds(self) -> list[tuple[int, int]]:
        starts = [start for start, _ in self.segments] + [self.length]
        return list(zip(starts[:-1], starts[1:]))


def generate_stream(graph_spec: GraphModelSpec, stream_spec: StreamSpec) -> Stream:
    """Emit signals smooth on a graph that is resampled at each change point."""
    indexing = EdgeIndexing(graph_spec.n)
    boundaries = [0] + [step for step, _ in stream_spec.change_points]
    fractions = [None] + [frac for _, frac in stream_spec.change_points]
    ends = boundaries[1:] + [stream_spec.length]

    # one child seed per per-segment draw keeps the whole stream a pure
    # function of (graph seed, specs)
    children = iter(np.random.SeedSequence(graph_spec.seed).spawn(2 * len(boundaries)))

    w = generate_graph(graph_spec)
    segments: list[tuple[int, np.ndarray]] = []
    blocks: list[np.ndarray] = []
    for start, end, fraction in zip(boundaries, ends, fractions):
        resample_seed, signal_seed = next(children), next(children)
        if fraction is not None:
            w = resample_edges(w, fraction, graph_spec, resample_seed)
        segments.append((start, w))
        blocks.append(generate_smooth_signals(w, indexing, end - start,
                                              stream_spec.noise_variance, signal_seed))
    return Stream(
        signals=np.vstack(blocks),
        segments=segments,
        graph_spec=graph_spec,
        stream_spec=stream_spec,
    )
