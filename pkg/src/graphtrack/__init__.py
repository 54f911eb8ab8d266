"""Learn and track weighted graph topology from streaming smooth signals."""

from .dissimilarity import DissimilarityState, ForgettingSchedule, pairwise_dissimilarity
from .experiment import (
    ExperimentConfig,
    ExperimentRecord,
    SolverConfig,
    emit_report,
    grid_search_regularizers,
    grid_search_solver,
    mean_dissimilarity,
    reference_solution,
    register_learner,
    run_experiment,
    support_f_score,
)
from .graphcore import EdgeIndexing, degree_map_norm_sq, edge_count
from .online import (
    BaselineLearner,
    OnlinePGLearner,
    OnlineSolverState,
    OpadmmLearner,
    RegretLedger,
    accumulate_regret,
    init_online_state,
    online_cost,
    online_pg_step,
    opadmm_step,
    static_comparator,
)
from .solvers import (
    BatchResult,
    Hyperparams,
    PadmmState,
    batch_solve,
    kkt_residual,
    objective,
    padmm_step,
    prox_degree_barrier,
    prox_edge_cost,
)
from .synth import (
    GraphModelSpec,
    Stream,
    StreamSpec,
    generate_graph,
    generate_smooth_signals,
    generate_stream,
    resample_edges,
)

__version__ = "0.1.0"

__all__ = [
    "BaselineLearner",
    "BatchResult",
    "DissimilarityState",
    "EdgeIndexing",
    "ExperimentConfig",
    "ExperimentRecord",
    "ForgettingSchedule",
    "GraphModelSpec",
    "Hyperparams",
    "OnlinePGLearner",
    "OnlineSolverState",
    "OpadmmLearner",
    "PadmmState",
    "RegretLedger",
    "SolverConfig",
    "Stream",
    "StreamSpec",
    "accumulate_regret",
    "batch_solve",
    "degree_map_norm_sq",
    "edge_count",
    "emit_report",
    "generate_graph",
    "generate_smooth_signals",
    "generate_stream",
    "grid_search_regularizers",
    "grid_search_solver",
    "init_online_state",
    "kkt_residual",
    "mean_dissimilarity",
    "objective",
    "online_cost",
    "online_pg_step",
    "opadmm_step",
    "padmm_step",
    "pairwise_dissimilarity",
    "prox_degree_barrier",
    "prox_edge_cost",
    "reference_solution",
    "register_learner",
    "resample_edges",
    "run_experiment",
    "static_comparator",
    "support_f_score",
]
