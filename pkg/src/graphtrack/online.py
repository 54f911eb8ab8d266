"""Online topology tracking: one proximal-ADMM iteration per sample.

Each incoming signal first refreshes the running dissimilarity average and
then drives a single solver iteration against it, so the per-sample cost and
the memory footprint are O(r + n) regardless of how long the stream runs.
A projected-gradient tracker over the same running average is included as an
illustrative baseline, and a small learner interface lets external online
methods plug into the experiment harness.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dissimilarity import DissimilarityState, ForgettingSchedule
from .graphcore import EdgeIndexing
from .solvers import Hyperparams, PadmmState, batch_solve, objective, split_cost


@dataclass(frozen=True)
class OnlineSolverState:
    """Solver iterate, dissimilarity state and step counter of one stream."""

    padmm: PadmmState
    dissim: DissimilarityState
    hp: Hyperparams
    step_count: int = 0

    @property
    def indexing(self) -> EdgeIndexing:
        return self.dissim.indexing

    @property
    def weights(self) -> np.ndarray:
        return self.padmm.w


def init_online_state(indexing: EdgeIndexing, hp: Hyperparams,
                      schedule: ForgettingSchedule) -> OnlineSolverState:
    hp.validate_for(indexing.n)
    return OnlineSolverState(
        padmm=PadmmState.cold_start(indexing),
        dissim=DissimilarityState.fresh(indexing, schedule),
        hp=hp,
    )


def opadmm_step(state: OnlineSolverState, x) -> OnlineSolverState:
    """Absorb one signal: dissimilarity update, then one padmm_step.

    Computes exactly ``dissim.observe(x)`` followed by ``padmm_step`` on the
    refreshed running average, through a single fused kernel dispatch.
    """
    dissim = state.dissim
    indexing = dissim.indexing
    x = indexing.check_node_vector(x)
    hp = state.hp
    first = dissim.k == 0
    gamma = 0.0 if first else dissim.schedule.gamma(dissim.k + 1)
    w, v, lam, z = _kernels.online_step(
        state.padmm.w, state.padmm.v, state.padmm.lam, dissim.z_run,
        first, gamma, x, indexing.rows, indexing.cols,
        hp.rho, hp.tau1, hp.tau2, hp.alpha, hp.beta,
    )
    return OnlineSolverState(
        padmm=PadmmState(w=w, v=v, lam=lam),
        dissim=DissimilarityState(indexing, dissim.schedule, z, dissim.k + 1),
        hp=hp,
        step_count=state.step_count + 1,
    )


def online_pg_step(state: OnlineSolverState, x, step_size: float | None = None,
                   degree_floor: float = 1e-9) -> OnlineSolverState:
    """Projected-gradient baseline step over the same running dissimilarity.

    Performs w <- max(0, w - eta * (2 z + 2 beta w - alpha S'(1/(S w)))) on
    the smoothed composite cost, with the degrees floored at ``degree_floor``
    to keep the barrier gradient finite at cold start.  The state's v slot is
    kept at S w so the logged online cost prices the same composite
    objective; the dual variable is unused.
    """
    eta = state.hp.tau1 if step_size is None else step_size
    if eta <= 0:
        raise ValueError(f"step size must be positive, got {eta}")
    indexing = state.indexing
    dissim = state.dissim.observe(x)
    hp = state.hp
    w = state.padmm.w
    deg = indexing.degrees(w)
    grad = (
        2.0 * dissim.z_run
        + 2.0 * hp.beta * w
        - hp.alpha * indexing.degree_adjoint(1.0 / (deg + degree_floor))
    )
    w_new = np.maximum(w - eta * grad, 0.0)
    padmm = PadmmState(w=w_new, v=indexing.degrees(w_new), lam=state.padmm.lam)
    return OnlineSolverState(padmm, dissim, hp, state.step_count + 1)


def online_cost(state: OnlineSolverState) -> float:
    """Instantaneous online cost f_k(w_k) + g(v_k) at the current state.

    f_k uses the running dissimilarity average z_{1:k}; g prices the degree
    proxy v the iteration actually produced (not S w).
    """
    return split_cost(state.padmm.w, state.padmm.v, state.dissim.z_run,
                      state.indexing, state.hp)


@dataclass
class RegretLedger:
    """Accumulates the online costs; optionally keeps the per-step trace."""

    cumulative_cost: float = 0.0
    steps: int = 0
    per_step_costs: list[float] | None = None

    @classmethod
    def with_trace(cls) -> "RegretLedger":
        return cls(per_step_costs=[])

    def add(self, cost: float) -> None:
        self.cumulative_cost += cost
        self.steps += 1
        if self.per_step_costs is not None:
            self.per_step_costs.append(cost)


def accumulate_regret(ledger: RegretLedger, state: OnlineSolverState) -> RegretLedger:
    """Add the current state's online cost to the ledger."""
    ledger.add(online_cost(state))
    return ledger


def comparator_from_mean(z_mean, steps: int, indexing: EdgeIndexing,
                         hp: Hyperparams, tol: float = 1e-10,
                         max_iter: int = 200_000) -> float:
    """Best fixed cumulative cost given the mean of the visited z vectors.

    The summed costs of a fixed feasible pair reduce to ``steps`` times the
    batch objective at the mean dissimilarity, so the comparator is solved
    as a single batch problem.
    """
    if steps < 1:
        raise ValueError("comparator needs at least one step")
    result = batch_solve(z_mean, indexing, hp, tol=tol, max_iter=max_iter,
                         keep_trace=False)
    return steps * objective(result.weights, z_mean, indexing, hp)


def static_comparator(z_history, indexing: EdgeIndexing, hp: Hyperparams,
                      tol: float = 1e-10) -> float:
    """Comparator from the explicit sequence of running dissimilarities."""
    z_history = np.atleast_2d(np.asarray(z_history, dtype=float))
    if z_history.size == 0:
        raise ValueError("empty dissimilarity history")
    return comparator_from_mean(z_history.mean(axis=0), len(z_history),
                                indexing, hp, tol=tol)


class BaselineLearner(abc.ABC):
    """Minimal interface the experiment harness drives.

    Implementations are constructed from (indexing, hp, schedule), consume
    one signal per ``step`` call and expose the current edge-weight estimate.
    External online methods can be plugged into the harness by subclassing.
    """

    def __init__(self, indexing: EdgeIndexing, hp: Hyperparams,
                 schedule: ForgettingSchedule):
        self.state = init_online_state(indexing, hp, schedule)

    @abc.abstractmethod
    def step(self, x) -> None:
        """Consume one signal."""

    def current_estimate(self) -> np.ndarray:
        return self.state.weights

    def cost(self) -> float:
        return online_cost(self.state)


class OpadmmLearner(BaselineLearner):
    """Online proximal-ADMM tracker."""

    def step(self, x) -> None:
        self.state = opadmm_step(self.state, x)


class OnlinePGLearner(BaselineLearner):
    """Illustrative projected-gradient tracker (stand-in comparator only)."""

    def __init__(self, indexing, hp, schedule, step_size: float | None = None,
                 degree_floor: float = 1e-9):
        super().__init__(indexing, hp, schedule)
        self.step_size = step_size
        self.degree_floor = degree_floor

    def step(self, x) -> None:
        self.state = online_pg_step(self.state, x, self.step_size, self.degree_floor)
