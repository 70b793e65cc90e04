"""Frustration accounting and the partial order it induces on strategies.

A run's frustration is the pair (negatives, total): how many probes the
subject failed, out of how many it was shown.  Two orders are provided on
such pairs: the literal more/less-fun relation, kept exactly as defined even
though it is not symmetric (MoreFun(a, b) does not imply LessFun(b, a)), and
standard Pareto dominance, which is a lawful strict partial order and is what
front computation and the optimality ratios use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .strategies import StrategyKind
from .subject import Outcome, ProbeRecord

__all__ = [
    "FrustrationMeasure",
    "FunRelation",
    "PredictedCurve",
    "OptimalityRatio",
    "measure",
    "paper_relation",
    "dominates",
    "pareto_front",
    "predicted",
    "popcount",
    "zeroes_below_msb",
    "instance_lower_bound",
    "optimality_ratio",
]


class FrustrationMeasure(tuple):
    """(negatives, total) for one run; negatives never exceeds total."""

    __slots__ = ()

    def __new__(cls, negatives: int, total: int):
        if negatives < 0 or total < 0:
            raise ValueError("counts must be non-negative")
        if negatives > total:
            raise ValueError(f"negatives ({negatives}) exceeds total ({total})")
        return tuple.__new__(cls, (negatives, total))

    @property
    def negatives(self) -> int:
        return self[0]

    @property
    def total(self) -> int:
        return self[1]

    def __repr__(self) -> str:
        return f"FrustrationMeasure(negatives={self[0]}, total={self[1]})"


class FunRelation(Enum):
    MORE_FUN = "more_fun"
    LESS_FUN = "less_fun"
    NON_COMPARABLE = "non_comparable"


@dataclass(frozen=True)
class PredictedCurve:
    """Reference frustration curve for a strategy, as stated, not rounded."""

    strategy: StrategyKind
    negatives_pred: float
    total_pred: float


@dataclass(frozen=True)
class OptimalityRatio:
    negatives_ratio: float
    negatives_argmax_p: int
    total_ratio: float
    total_argmax_p: int


def measure(trace: Iterable[ProbeRecord]) -> FrustrationMeasure:
    """Count (fails, all probes) over a run trace."""
    negatives = 0
    total = 0
    for record in trace:
        total += 1
        if record.outcome is Outcome.FAIL:
            negatives += 1
    return FrustrationMeasure(negatives, total)


def paper_relation(a: FrustrationMeasure, b: FrustrationMeasure) -> FunRelation:
    """The literal more/less-fun relation between two frustration pairs.

    MoreFun needs strict improvement in both coordinates; LessFun needs a
    strictly worse coordinate with the other held equal; everything else is
    NonComparable.  The asymmetry (a strictly-worse-in-both pair is merely
    NonComparable) is intentional and preserved; use :func:`dominates` when a
    lawful order is needed.
    """
    if a.negatives < b.negatives and a.total < b.total:
        return FunRelation.MORE_FUN
    if (a.negatives > b.negatives and a.total == b.total) or (
        a.total > b.total and a.negatives == b.negatives
    ):
        return FunRelation.LESS_FUN
    return FunRelation.NON_COMPARABLE


def dominates(a: FrustrationMeasure, b: FrustrationMeasure) -> bool:
    """Pareto dominance: componentwise <= with at least one strict <."""
    return (
        a.negatives <= b.negatives
        and a.total <= b.total
        and (a.negatives < b.negatives or a.total < b.total)
    )


def pareto_front(
    points: Sequence[tuple[StrategyKind, FrustrationMeasure]]
) -> list[tuple[StrategyKind, FrustrationMeasure]]:
    """The non-dominated subset, in strategy enumeration order."""
    order = {kind: i for i, kind in enumerate(StrategyKind)}
    kept = [
        (kind, m)
        for kind, m in points
        if not any(dominates(other, m) for _, other in points)
    ]
    kept.sort(key=lambda item: order[item[0]])
    return kept


def popcount(p: int) -> int:
    """Number of ones in the binary form of p; 0 for p = 0."""
    if p < 0:
        raise ValueError("p must be non-negative")
    return p.bit_count()


def zeroes_below_msb(p: int) -> int:
    """Zero bits strictly below the most significant set bit; 0 for p = 0."""
    if p < 0:
        raise ValueError("p must be non-negative")
    if p == 0:
        return 0
    return p.bit_length() - p.bit_count()


def _log2_or_zero(x: float) -> float:
    return math.log2(x) if x >= 1 else 0.0


def predicted(strategy: StrategyKind, n: int, p: int) -> PredictedCurve:
    """The stated reference curve for a strategy at instance (n, p).

    These are emitted alongside empirical counts for the discrepancy report;
    some are known not to match the implemented semantics (sequential's total
    and the gallop strategies' totals in particular).  log2 terms clamp to 0
    at argument 0 and sequential's total clamps to 0 at p = 0 so the curves
    stay non-negative.
    """
    if n < 1:
        raise ValueError(f"domain size must be >= 1, got {n}")
    if not 0 <= p <= n:
        raise ValueError(f"p must lie in [0..{n}], got {p}")
    log_n = _log2_or_zero(n)
    log_p = _log2_or_zero(p)
    if strategy is StrategyKind.SEQUENTIAL:
        return PredictedCurve(strategy, 1.0, float(max(p - 1, 0)))
    if strategy is StrategyKind.BINARY:
        return PredictedCurve(strategy, log_n, 1.0 + log_n)
    if strategy is StrategyKind.DOUBLING:
        return PredictedCurve(strategy, 1.0 + log_p, 1.0 + 2.0 * log_p)
    if strategy is StrategyKind.FUN:
        return PredictedCurve(strategy, float(popcount(p)), 1.0 + 2.0 * log_p)
    if strategy is StrategyKind.FRUSTRATING:
        return PredictedCurve(strategy, float(zeroes_below_msb(p)), 1.0 + 2.0 * log_p)
    raise ValueError(f"unknown strategy: {strategy!r}")  # pragma: no cover


def instance_lower_bound(n: int, p: int) -> FrustrationMeasure:
    """Certification floor for any correct algorithm on instance (n, p).

    Finding p needs a pass witness at p (when p >= 1) and a fail witness at
    p + 1 (when p < n); nothing cheaper can distinguish neighbours.
    """
    if not 0 <= p <= n:
        raise ValueError(f"p must lie in [0..{n}], got {p}")
    negatives_min = 1 if p < n else 0
    total_min = (1 if p >= 1 else 0) + (1 if p < n else 0)
    return FrustrationMeasure(negatives_min, total_min)


def optimality_ratio(
    strategy: StrategyKind,
    n: int,
    measures_by_strategy: dict[StrategyKind, list[FrustrationMeasure]] | None = None,
) -> OptimalityRatio:
    """Worst-case ratio of a strategy's counts to the per-instance best.

    The best competitor at each p is the minimum across all five implemented
    strategies, floored by the certification bound; denominators are clamped
    at 1.  ``measures_by_strategy`` (one list per strategy, indexed by p)
    lets a caller reuse sweep results; it is computed on demand otherwise.
    """
    if n < 2:
        raise ValueError(f"need n >= 2 for a meaningful ratio, got {n}")
    if measures_by_strategy is None:
        from .harness import sweep_measures

        measures_by_strategy = {
            kind: sweep_measures(kind, n) for kind in StrategyKind
        }
    own = measures_by_strategy[strategy]
    neg_ratio, neg_arg = -1.0, 0
    tot_ratio, tot_arg = -1.0, 0
    for p in range(n + 1):
        floor = instance_lower_bound(n, p)
        best_neg = max(
            min(measures_by_strategy[k][p].negatives for k in StrategyKind),
            floor.negatives,
        )
        best_tot = max(
            min(measures_by_strategy[k][p].total for k in StrategyKind),
            floor.total,
        )
        r_neg = own[p].negatives / max(1, best_neg)
        r_tot = own[p].total / max(1, best_tot)
        if r_neg > neg_ratio:
            neg_ratio, neg_arg = r_neg, p
        if r_tot > tot_ratio:
            tot_ratio, tot_arg = r_tot, p
    return OptimalityRatio(neg_ratio, neg_arg, tot_ratio, tot_arg)
