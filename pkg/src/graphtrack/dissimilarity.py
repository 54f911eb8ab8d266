"""Streaming pairwise dissimilarities with a forgetting-factor average.

Each incoming signal contributes the vector of squared nodal differences
(x_i - x_j)^2 over the edge slots.  The running state blends it in as a
convex combination ``z <- (1 - gamma_k) z + gamma_k z_new``.  With the
stationary schedule gamma_k = 1/k this is an exact running sample mean; with
a fixed gamma in (0, 1) it is an exponentially weighted moving average able
to track topology changes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .graphcore import EdgeIndexing


def pairwise_dissimilarity(x, indexing: EdgeIndexing) -> np.ndarray:
    """Squared difference (x_i - x_j)^2 for every edge slot (i, j)."""
    x = indexing.check_node_vector(x)
    return _kernels.square_diff(x, indexing.rows, indexing.cols)


@dataclass(frozen=True)
class ForgettingSchedule:
    """Forgetting-factor schedule: 1/k (stationary) or a fixed constant."""

    mode: str = "stationary"
    fixed_gamma: float | None = None

    def __post_init__(self):
        if self.mode not in ("stationary", "dynamic"):
            raise ValueError(f"unknown schedule mode {self.mode!r}")
        if self.mode == "dynamic":
            if self.fixed_gamma is None or not 0.0 < self.fixed_gamma < 1.0:
                raise ValueError("dynamic mode needs fixed_gamma in (0, 1)")
        elif self.fixed_gamma is not None:
            raise ValueError("stationary mode takes no fixed_gamma")

    def gamma(self, k: int) -> float:
        """Blend weight for the k-th sample (k >= 1)."""
        if k < 1:
            raise ValueError(f"step index must be >= 1, got {k}")
        if self.mode == "stationary":
            return 1.0 / k
        return self.fixed_gamma

    @classmethod
    def parse(cls, text: str) -> "ForgettingSchedule":
        """Parse a CLI-style spec: ``stationary`` or ``fixed:<gamma>``."""
        if text == "stationary":
            return cls("stationary")
        if text.startswith("fixed:"):
            return cls("dynamic", float(text.split(":", 1)[1]))
        raise ValueError(f"cannot parse schedule {text!r}")

    def describe(self) -> str:
        if self.mode == "stationary":
            return "stationary"
        return f"fixed:{self.fixed_gamma:g}"


@dataclass(frozen=True)
class DissimilarityState:
    """Running dissimilarity average after k samples.

    The pre-stream value is the zero vector; the first sample seeds the
    average exactly (gamma_1 = 1 under the stationary schedule, and the
    dynamic schedule is special-cased the same way to avoid a cold-start
    bias at small fixed gammas).
    """

    indexing: EdgeIndexing
    schedule: ForgettingSchedule
    z_run: np.ndarray
    k: int = 0

    @classmethod
    def fresh(cls, indexing: EdgeIndexing, schedule: ForgettingSchedule):
        return cls(indexing, schedule, np.zeros(indexing.r), 0)

    def update(self, z_new) -> "DissimilarityState":
        """Blend one new dissimilarity vector into the running average."""
        z_new = self.indexing.check_edge_vector(z_new)
        if np.any(z_new < 0):
            raise ValueError("dissimilarities must be nonnegative")
        if self.k == 0:
            blended = z_new.copy()
        else:
            blended = _kernels.blend(self.z_run, z_new,
                                     self.schedule.gamma(self.k + 1))
        return replace(self, z_run=blended, k=self.k + 1)

    def observe(self, x) -> "DissimilarityState":
        """Shorthand for updating with the dissimilarities of a raw signal."""
        return self.update(pairwise_dissimilarity(x, self.indexing))
