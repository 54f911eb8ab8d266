"""Proximal ADMM for the degree-barrier graph learning problem.

The batch problem over edge weights w and the running dissimilarity z is

    minimize_{w >= 0}  2 z'w + beta ||w||^2 - alpha * sum_i log((S w)_i),

where S maps edge weights to nodal degrees.  Splitting v = S w separates the
cost into f(w) = 2 z'w + beta ||w||^2 + indicator(w >= 0) and the barrier
g(v) = -alpha * sum_i log(v_i).  Each iteration applies the two closed-form
proximal maps below to linearized points and then a dual ascent step:

    w~ <- w - tau1 * rho * S'(S w - v + lam / rho)
    w  <- max((w~ - 2 tau1 z) / (2 tau1 beta + 1), 0)
    v~ <- (1 - rho tau2) v + rho tau2 S w + tau2 lam
    v  <- (v~ + sqrt(v~^2 + 4 tau2 alpha)) / 2
    lam <- lam + rho (S w - v)

The v~ point is the exact minimizer of the v-subproblem with proximity
weight (1/tau2 - rho) I; at tau2 = 1/rho it reduces to the classic ADMM
update v~ = S w + lam / rho.  The proximal step sizes must satisfy
tau1 < 1 / (rho * 2(n-1)) and tau2 <= 1 / rho (equality turns off the
quadratic proximity weight on v, the regime used for the regret analysis);
2(n-1) is the squared operator norm of S.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .graphcore import EdgeIndexing, degree_map_norm_sq


@dataclass(frozen=True)
class Hyperparams:
    """Regularization and step-size parameters of the solver.

    alpha weights the log barrier on degrees, beta the squared-norm penalty
    on edge weights, rho the augmented-Lagrangian term, tau1/tau2 the primal
    proximal steps.
    """

    alpha: float = 1.0
    beta: float = 1.0
    rho: float = 1.0
    tau1: float = 0.1
    tau2: float = 0.9

    def __post_init__(self):
        for name in ("alpha", "beta", "rho", "tau1", "tau2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    def validate_for(self, n: int) -> None:
        """Check the step-size ranges that guarantee convergence for n nodes."""
        tau1_max = 1.0 / (self.rho * degree_map_norm_sq(n))
        if not self.tau1 < tau1_max:
            raise ValueError(
                f"tau1={self.tau1} must be < 1/(rho*2(n-1)) = {tau1_max} for n={n}"
            )
        if self.tau2 > 1.0 / self.rho:
            raise ValueError(f"tau2={self.tau2} must be <= 1/rho = {1.0 / self.rho}")

    @classmethod
    def default(cls, n: int, alpha: float = 1.0, beta: float = 1.0,
                rho: float = 1.0, margin: float = 0.9) -> "Hyperparams":
        """Steps at the given fraction of their admissible upper bounds."""
        return cls(
            alpha=alpha,
            beta=beta,
            rho=rho,
            tau1=margin / (rho * degree_map_norm_sq(n)),
            tau2=margin / rho,
        )


@dataclass
class PadmmState:
    """Primal/dual triple carried between iterations.

    w holds nonnegative edge weights, v the strictly positive degree proxy,
    lam the dual variable of the coupling v = S w.
    """

    w: np.ndarray
    v: np.ndarray
    lam: np.ndarray

    @classmethod
    def cold_start(cls, indexing: EdgeIndexing) -> "PadmmState":
        """w = 0, v = 1, lam = 0; v = 1 keeps the barrier prox tame at step one."""
        return cls(
            w=np.zeros(indexing.r),
            v=np.ones(indexing.n),
            lam=np.zeros(indexing.n),
        )

    def copy(self) -> "PadmmState":
        return PadmmState(self.w.copy(), self.v.copy(), self.lam.copy())


def prox_edge_cost(w_in, z, tau, beta) -> np.ndarray:
    """Proximal map of tau * (2 z'u + beta ||u||^2 + indicator(u >= 0)).

    Minimizes (1/2tau)||u - w_in||^2 + 2 z'u + beta ||u||^2 over u >= 0,
    entrywise: max((w_in - 2 tau z) / (2 tau beta + 1), 0).
    """
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    w_in = np.asarray(w_in, dtype=float)
    return np.maximum((w_in - 2.0 * tau * z) / (2.0 * tau * beta + 1.0), 0.0)


def prox_degree_barrier(v_in, tau, alpha) -> np.ndarray:
    """Proximal map of -tau * alpha * sum_i log(u_i).

    Minimizes (1/2tau)||u - v_in||^2 - alpha sum_i log(u_i); the entrywise
    stationarity condition u^2 - v_in u - tau alpha = 0 has the positive root
    (v_in + sqrt(v_in^2 + 4 tau alpha)) / 2, so the output is always > 0.
    """
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    v_in = np.asarray(v_in, dtype=float)
    return 0.5 * (v_in + np.sqrt(v_in * v_in + 4.0 * tau * alpha))


def padmm_step(state: PadmmState, z, indexing: EdgeIndexing,
               hp: Hyperparams) -> PadmmState:
    """One proximal-ADMM iteration against the dissimilarity vector z."""
    z = indexing.check_edge_vector(z)
    w, v, lam = _kernels.padmm(state.w, state.v, state.lam, z,
                               indexing.rows, indexing.cols,
                               hp.rho, hp.tau1, hp.tau2, hp.alpha, hp.beta)
    return PadmmState(w=w, v=v, lam=lam)


def objective(w, z, indexing: EdgeIndexing, hp: Hyperparams) -> float:
    """Batch cost 2 z'w + beta ||w||^2 - alpha sum log(degrees).

    Returns +inf outside the domain (any negative weight or nonpositive
    degree).
    """
    w = indexing.check_edge_vector(w)
    z = indexing.check_edge_vector(z)
    if np.any(w < 0):
        return float("inf")
    deg = indexing.degrees(w)
    if np.any(deg <= 0):
        return float("inf")
    return float(2.0 * (z @ w) + hp.beta * (w @ w) - hp.alpha * np.sum(np.log(deg)))


def split_cost(w, v, z, indexing: EdgeIndexing, hp: Hyperparams) -> float:
    """f(w) + g(v) of the split problem, evaluated at a (w, v) pair.

    Unlike :func:`objective` this does not force v = S w, so it prices the
    primal pair an online iteration actually visits.
    """
    w = indexing.check_edge_vector(w)
    v = indexing.check_node_vector(v)
    if np.any(w < 0) or np.any(v <= 0):
        return float("inf")
    return float(2.0 * (z @ w) + hp.beta * (w @ w) - hp.alpha * np.sum(np.log(v)))


def kkt_residual(state: PadmmState, z, indexing: EdgeIndexing,
                 hp: Hyperparams) -> float:
    """Max-norm violation of the optimality system at (w, v, lam).

    Checks the coupling S w = v, the barrier stationarity lam = -alpha / v,
    and the edge stationarity 0 in 2z + 2 beta w + S'lam + normal cone of
    the nonnegativity constraint.
    """
    w, v, lam = state.w, state.v, state.lam
    primal = np.abs(indexing.degrees(w) - v).max(initial=0.0)
    dual_v = np.abs(lam + hp.alpha / v).max(initial=0.0)
    s = 2.0 * np.asarray(z, dtype=float) + 2.0 * hp.beta * w + indexing.degree_adjoint(lam)
    # active slots need s = 0, slots at the bound only need s >= 0
    viol = np.where(w > 0, np.abs(s), np.maximum(-s, 0.0))
    dual_w = viol.max(initial=0.0)
    return float(max(primal, dual_v, dual_w))


@dataclass
class TraceRow:
    iteration: int
    w_change: float
    primal_residual: float
    objective: float


@dataclass
class BatchResult:
    """Final iterate of a batch solve plus its convergence trace."""

    weights: np.ndarray
    state: PadmmState
    trace: list[TraceRow] = field(repr=False)
    converged: bool = False
    iterations: int = 0


def batch_solve(z, indexing: EdgeIndexing, hp: Hyperparams,
                tol: float = 1e-8, max_iter: int = 100_000,
                init: PadmmState | None = None,
                keep_trace: bool = True) -> BatchResult:
    """Iterate padmm_step until the joint stopping rule or max_iter.

    Terminates when the relative change of w and the coupling residual
    ||S w - v|| both drop below tol.  Non-convergence is reported through
    ``converged``, not raised.
    """
    z = indexing.check_edge_vector(z)
    if np.any(z < 0):
        raise ValueError("dissimilarities must be nonnegative")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    hp.validate_for(indexing.n)

    state = init.copy() if init is not None else PadmmState.cold_start(indexing)
    trace: list[TraceRow] = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        prev_w = state.w
        state = padmm_step(state, z, indexing, hp)
        w_change = float(np.linalg.norm(state.w - prev_w))
        rel_change = w_change / max(1.0, float(np.linalg.norm(prev_w)))
        primal = float(np.linalg.norm(indexing.degrees(state.w) - state.v))
        if keep_trace:
            trace.append(TraceRow(it, w_change, primal, objective(state.w, z, indexing, hp)))
        if rel_change < tol and primal < tol:
            converged = True
            break
    return BatchResult(
        weights=state.w,
        state=state,
        trace=trace,
        converged=converged,
        iterations=it,
    )
