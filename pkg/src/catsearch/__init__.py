"""Adaptive difficulty search for computerized adaptive testing.

Five search strategies (sequential, binary, doubling, and the galloping
fun/frustrating pair) run as resumable state machines over difficulty levels
1..n, a two-dimensional frustration measure with its partial order, an
exhaustive verification harness, and an HTTP service for live sessions
driven by a human experimenter.
"""

from .analysis import (
    FrustrationMeasure,
    FunRelation,
    OptimalityRatio,
    PredictedCurve,
    dominates,
    instance_lower_bound,
    measure,
    optimality_ratio,
    paper_relation,
    pareto_front,
    popcount,
    predicted,
    zeroes_below_msb,
)
from .harness import (
    MonteCarloResult,
    SweepRow,
    VerifyReport,
    block_pass_probability,
    emit_csv,
    emit_dominance,
    exact_found_distribution,
    monte_carlo,
    parse_csv,
    sweep,
    sweep_measures,
    verify,
)
from .strategies import (
    SearchResult,
    SearchSession,
    SessionStatus,
    StateError,
    StrategyKind,
    run_to_completion,
    start,
)
from .subject import (
    AbilityProfile,
    Outcome,
    ProbeRecord,
    ProbeStream,
    ProfileKind,
    answer_deterministic,
    block_probe,
    insertion_rank,
)

__version__ = "0.1.0"

__all__ = [
    "AbilityProfile",
    "FrustrationMeasure",
    "FunRelation",
    "MonteCarloResult",
    "OptimalityRatio",
    "Outcome",
    "PredictedCurve",
    "ProbeRecord",
    "ProbeStream",
    "ProfileKind",
    "SearchResult",
    "SearchSession",
    "SessionStatus",
    "StateError",
    "StrategyKind",
    "SweepRow",
    "VerifyReport",
    "answer_deterministic",
    "block_pass_probability",
    "block_probe",
    "dominates",
    "emit_csv",
    "emit_dominance",
    "exact_found_distribution",
    "insertion_rank",
    "instance_lower_bound",
    "measure",
    "monte_carlo",
    "optimality_ratio",
    "paper_relation",
    "pareto_front",
    "parse_csv",
    "popcount",
    "predicted",
    "run_to_completion",
    "start",
    "sweep",
    "sweep_measures",
    "verify",
]
