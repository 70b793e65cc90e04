"""Exhaustive sweeps, property verification, Monte Carlo runs, and CSV output.

Sweeps evaluate one strategy against every deterministic subject p in
[0..n] and are embarrassingly parallel across p; rows merge by sorting, so
serial and parallel execution produce identical output.  verify() runs the
full property battery (correctness, counting laws, separation families,
order axioms) and reports one pass/fail entry per property, with the full
counterexample trace on failure.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .analysis import (
    FrustrationMeasure,
    FunRelation,
    dominates,
    instance_lower_bound,
    measure,
    paper_relation,
    pareto_front,
    popcount,
    predicted,
)
from .strategies import (
    SearchSession,
    SessionStatus,
    StrategyKind,
    run_to_completion,
    start,
)
from .subject import AbilityProfile, Outcome, ProbeStream, ProfileKind

__all__ = [
    "CSV_HEADER",
    "DOMINANCE_HEADER",
    "SweepRow",
    "PropertyResult",
    "VerifyReport",
    "MonteCarloResult",
    "sweep",
    "sweep_measures",
    "emit_csv",
    "parse_csv",
    "emit_dominance",
    "verify",
    "monte_carlo",
    "block_pass_probability",
    "exact_found_distribution",
]

CSV_HEADER = (
    "n,p,strategy,negatives,total,"
    "predicted_negatives,predicted_total,lb_negatives,lb_total"
)
DOMINANCE_HEADER = "n,p,strategy,on_front"

SessionFactory = Callable[[StrategyKind, int], SearchSession]


@dataclass(frozen=True)
class SweepRow:
    n: int
    p: int
    strategy: StrategyKind
    negatives: int
    total: int
    predicted_negatives: float
    predicted_total: float
    lb_negatives: int
    lb_total: int


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    counterexample: str | None = None


@dataclass(frozen=True)
class VerifyReport:
    results: tuple[PropertyResult, ...]

    @property
    def overall_pass(self) -> bool:
        return all(r.passed for r in self.results)


@dataclass(frozen=True)
class MonteCarloResult:
    distribution: dict[int, int]
    mean_negatives: float
    mean_total: float

    @property
    def modal_found_p(self) -> int:
        return max(self.distribution, key=lambda p: (self.distribution[p], -p))


def _row_for(strategy: StrategyKind, n: int, p: int) -> SweepRow:
    result = run_to_completion(strategy, n, AbilityProfile.deterministic(p, n))
    if result.found_p != p:
        raise AssertionError(
            f"{strategy.value} returned {result.found_p} for n={n}, p={p}"
        )
    m = measure(result.trace)
    curve = predicted(strategy, n, p)
    lb = instance_lower_bound(n, p)
    return SweepRow(
        n=n,
        p=p,
        strategy=strategy,
        negatives=m.negatives,
        total=m.total,
        predicted_negatives=curve.negatives_pred,
        predicted_total=curve.total_pred,
        lb_negatives=lb.negatives,
        lb_total=lb.total,
    )


def sweep(strategy: StrategyKind, n: int, workers: int = 1) -> list[SweepRow]:
    """Rows for every p in [0..n] under the deterministic oracle.

    With workers > 1, cells run on a thread pool and merge by sorting on
    (strategy, p), so output is identical to a serial sweep.
    """
    if n < 1:
        raise ValueError(f"domain size must be >= 1, got {n}")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda p: _row_for(strategy, n, p), range(n + 1)))
        rows.sort(key=lambda r: (r.strategy.value, r.p))
        return rows
    return [_row_for(strategy, n, p) for p in range(n + 1)]


def sweep_measures(strategy: StrategyKind, n: int) -> list[FrustrationMeasure]:
    """Just the (negatives, total) pairs for p = 0..n; cheaper than sweep()."""
    out = []
    for p in range(n + 1):
        result = run_to_completion(strategy, n, AbilityProfile.deterministic(p, n))
        out.append(measure(result.trace))
    return out


def emit_csv(rows: Iterable[SweepRow], path: str) -> None:
    """Write sweep rows as UTF-8, LF-terminated CSV with the fixed header."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(CSV_HEADER + "\n")
            for r in rows:
                handle.write(
                    f"{r.n},{r.p},{r.strategy.value},{r.negatives},{r.total},"
                    f"{r.predicted_negatives!r},{r.predicted_total!r},"
                    f"{r.lb_negatives},{r.lb_total}\n"
                )
    except OSError as exc:
        raise OSError(f"cannot write sweep CSV to {path}: {exc}") from exc


def parse_csv(path: str) -> list[SweepRow]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        raise OSError(f"cannot read sweep CSV from {path}: {exc}") from exc
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"unexpected CSV header in {path}")
    rows = []
    for line in lines[1:]:
        n, p, strategy, neg, tot, pneg, ptot, lbn, lbt = line.split(",")
        rows.append(
            SweepRow(
                n=int(n),
                p=int(p),
                strategy=StrategyKind(strategy),
                negatives=int(neg),
                total=int(tot),
                predicted_negatives=float(pneg),
                predicted_total=float(ptot),
                lb_negatives=int(lbn),
                lb_total=int(lbt),
            )
        )
    return rows


def emit_dominance(n: int, path: str, workers: int = 1) -> None:
    """Per-p Pareto front membership of all five strategies, as CSV."""
    measures = {kind: sweep_measures(kind, n) for kind in StrategyKind}
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(DOMINANCE_HEADER + "\n")
            for p in range(n + 1):
                points = [(kind, measures[kind][p]) for kind in StrategyKind]
                front = {kind for kind, _ in pareto_front(points)}
                for kind in StrategyKind:
                    flag = "true" if kind in front else "false"
                    handle.write(f"{n},{p},{kind.value},{flag}\n")
    except OSError as exc:
        raise OSError(f"cannot write dominance CSV to {path}: {exc}") from exc


# -- Monte Carlo and its closed-form twin ---------------------------------


def _derive_run_seed(master_seed: int, run_index: int) -> int:
    import hashlib

    digest = hashlib.sha256(f"{master_seed}\x1f{run_index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def monte_carlo(
    strategy: StrategyKind,
    profile: AbilityProfile,
    runs: int,
    master_seed: int,
) -> MonteCarloResult:
    """Seeded runs of one strategy against a stochastic subject.

    Deterministic given master_seed: each run draws from its own stream
    keyed by hashing (master_seed, run index).
    """
    if profile.kind is not ProfileKind.STOCHASTIC:
        raise ValueError("monte_carlo needs a stochastic profile")
    if runs < 1:
        raise ValueError(f"need at least one run, got {runs}")
    distribution: dict[int, int] = {}
    sum_neg = 0
    sum_tot = 0
    for i in range(runs):
        stream = ProbeStream(_derive_run_seed(master_seed, i))
        result = run_to_completion(strategy, profile.n, profile, stream)
        distribution[result.found_p] = distribution.get(result.found_p, 0) + 1
        m = measure(result.trace)
        sum_neg += m.negatives
        sum_tot += m.total
    return MonteCarloResult(
        distribution=dict(sorted(distribution.items())),
        mean_negatives=sum_neg / runs,
        mean_total=sum_tot / runs,
    )


def block_pass_probability(q: float, t: float, k: int) -> float:
    """Closed-form probability that a k-trial block at success rate q passes.

    Uses the same float comparison as the sampling path (successes/k >= t),
    so the two routes agree about tie handling exactly.
    """
    if k < 1:
        raise ValueError("block size must be >= 1")
    threshold = 0
    while threshold <= k and threshold / k < t:
        threshold += 1
    if threshold > k:
        return 0.0
    if threshold == 0:
        return 1.0
    tail = math.fsum(
        math.comb(k, s) * q**s * (1.0 - q) ** (k - s) for s in range(threshold, k + 1)
    )
    return min(max(tail, 0.0), 1.0)


def exact_found_distribution(
    strategy: StrategyKind, n: int, pass_probs: Sequence[float]
) -> dict[int, float]:
    """Exact distribution of found_p when probe outcomes are independent.

    Enumerates the strategy's decision tree with per-level pass
    probabilities; branches of probability zero are pruned exactly.  This is
    the closed-form twin of monte_carlo for small n.
    """
    if len(pass_probs) != n:
        raise ValueError(f"need one pass probability per level, got {len(pass_probs)}")
    dist: dict[int, float] = {}

    def expand(session: SearchSession, prob: float) -> None:
        if session.status is SessionStatus.DONE:
            dist[session.result] = dist.get(session.result, 0.0) + prob
            return
        clone = SearchSession.from_state_dict(session.to_state_dict())
        level = session.next_probe()
        q = pass_probs[level - 1]
        if q > 0.0:
            session.observe(Outcome.PASS)
            expand(session, prob * q)
        if q < 1.0:
            clone.next_probe()
            clone.observe(Outcome.FAIL)
            expand(clone, prob * (1.0 - q))

    expand(start(strategy, n), 1.0)
    return dict(sorted(dist.items()))


# -- property verification -------------------------------------------------


def _fmt_trace(session_or_trace) -> str:
    trace = getattr(session_or_trace, "trace", session_or_trace)
    return " ".join(
        f"{rec.level}{'P' if rec.outcome is Outcome.PASS else 'F'}" for rec in trace
    )


def _probe_cap(kind: StrategyKind, n: int) -> int:
    if kind is StrategyKind.SEQUENTIAL:
        return n + 1
    return 4 * (int(math.log2(n)) + 2) ** 2


def _check_correctness(
    n_cap: int, factory: SessionFactory
) -> PropertyResult:
    """found_p == p for every strategy, n in [1..n_cap], p in [0..n].

    Also enforces the probe-count termination cap and the sequential
    negatives law on the way through, since the runs are already paid for.
    """
    passed_fail, failed_zero = Outcome.PASS, Outcome.FAIL
    done = SessionStatus.DONE
    for kind in StrategyKind:
        for n in range(1, n_cap + 1):
            cap = _probe_cap(kind, n)
            for p in range(n + 1):
                session = factory(kind, n)
                next_probe = session.next_probe
                observe = session.observe
                while session.status is not done:
                    observe(passed_fail if next_probe() <= p else failed_zero)
                    if len(session.trace) > cap:
                        return PropertyResult(
                            "exhaustive_correctness",
                            False,
                            f"termination cap: {kind.value} n={n} p={p} "
                            f"exceeded {cap} probes: {_fmt_trace(session)}",
                        )
                if session.result != p:
                    return PropertyResult(
                        "exhaustive_correctness",
                        False,
                        f"{kind.value} n={n} p={p} returned {session.result}; "
                        f"trace {_fmt_trace(session)}",
                    )
                if kind is StrategyKind.SEQUENTIAL:
                    expected_neg = 1 if p < n else 0
                    if session.negatives != expected_neg or len(
                        session.trace
                    ) != min(p + 1, n):
                        return PropertyResult(
                            "exhaustive_correctness",
                            False,
                            f"sequential counts: n={n} p={p} gave "
                            f"({session.negatives}, {len(session.trace)}); "
                            f"trace {_fmt_trace(session)}",
                        )
    return PropertyResult("exhaustive_correctness", True)


def _check_narrowing(n_cap: int, factory: SessionFactory) -> PropertyResult:
    """lo never falls, hi never rises, and the interval strictly shrinks
    between consecutive phase boundaries (every step, for the phaseless
    strategies)."""
    for kind in StrategyKind:
        phaseless = kind in (StrategyKind.SEQUENTIAL, StrategyKind.BINARY)
        for n in range(1, n_cap + 1):
            for p in range(n + 1):
                session = factory(kind, n)
                prev_lo, prev_hi = session.lo, session.hi
                last_phase = session.phases_started
                phase_width = session.hi - session.lo
                while session.status is not SessionStatus.DONE:
                    level = session.next_probe()
                    session.observe(
                        Outcome.PASS if level <= p else Outcome.FAIL
                    )
                    width = session.hi - session.lo
                    if session.lo < prev_lo or session.hi > prev_hi:
                        return PropertyResult(
                            "interval_narrowing",
                            False,
                            f"{kind.value} n={n} p={p}: bounds moved outward "
                            f"at probe {len(session.trace)}; "
                            f"trace {_fmt_trace(session)}",
                        )
                    if phaseless and width >= prev_hi - prev_lo:
                        return PropertyResult(
                            "interval_narrowing",
                            False,
                            f"{kind.value} n={n} p={p}: interval did not "
                            f"shrink; trace {_fmt_trace(session)}",
                        )
                    if session.phases_started != last_phase:
                        if width >= phase_width:
                            return PropertyResult(
                                "interval_narrowing",
                                False,
                                f"{kind.value} n={n} p={p}: interval did not "
                                f"shrink across phase boundary; "
                                f"trace {_fmt_trace(session)}",
                            )
                        phase_width = width
                        last_phase = session.phases_started
                    prev_lo, prev_hi = session.lo, session.hi
                m = measure(session.trace)
                if m.negatives != session.negatives or m.total != len(session.trace):
                    return PropertyResult(
                        "interval_narrowing",
                        False,
                        f"trace accounting: {kind.value} n={n} p={p}",
                    )
                lb = instance_lower_bound(n, p)
                if m.negatives < lb.negatives or m.total < lb.total:
                    return PropertyResult(
                        "interval_narrowing",
                        False,
                        f"below certification floor: {kind.value} n={n} p={p}: "
                        f"{m} below {lb}",
                    )
    return PropertyResult("interval_narrowing", True)


def _check_fun_law(n_max: int, factory: SessionFactory) -> PropertyResult:
    exponent = 1
    while 2**exponent <= min(n_max, 4096):
        n = 2**exponent
        for p in range(n):
            result = run_to_completion(
                StrategyKind.FUN,
                n,
                AbilityProfile.deterministic(p, n),
                session_factory=factory,
            )
            m = measure(result.trace)
            want = popcount(p) + (1 if p % 2 == 0 else 0)
            if m.negatives != want:
                return PropertyResult(
                    "fun_negatives_law",
                    False,
                    f"n={n} p={p}: {m.negatives} negatives, expected {want}; "
                    f"trace {_fmt_trace(result.trace)}",
                )
        exponent += 1
    return PropertyResult("fun_negatives_law", True)


def _check_separation(factory: SessionFactory) -> PropertyResult:
    for k in range(2, 12):
        # Family A: at p = 2^k - 1 the up-galloper pays k fails, the
        # down-galloper exactly one.
        n, p = 2 ** (k + 1), 2**k - 1
        fun = measure(
            run_to_completion(
                StrategyKind.FUN, n, AbilityProfile.deterministic(p, n),
                session_factory=factory,
            ).trace
        )
        fru = measure(
            run_to_completion(
                StrategyKind.FRUSTRATING, n, AbilityProfile.deterministic(p, n),
                session_factory=factory,
            ).trace
        )
        if fun.negatives != k or fru.negatives != 1:
            return PropertyResult(
                "separation_families",
                False,
                f"family A k={k}: fun={fun.negatives} (want {k}), "
                f"frustrating={fru.negatives} (want 1)",
            )
        # Family B: at p = 2^k the roles flip.
        n, p = 2 ** (k + 2), 2**k
        fun = measure(
            run_to_completion(
                StrategyKind.FUN, n, AbilityProfile.deterministic(p, n),
                session_factory=factory,
            ).trace
        )
        fru = measure(
            run_to_completion(
                StrategyKind.FRUSTRATING, n, AbilityProfile.deterministic(p, n),
                session_factory=factory,
            ).trace
        )
        if fun.negatives != 2 or fru.negatives < k:
            return PropertyResult(
                "separation_families",
                False,
                f"family B k={k}: fun={fun.negatives} (want 2), "
                f"frustrating={fru.negatives} (want >= {k})",
            )
    return PropertyResult("separation_families", True)


def _random_measure(rng: random.Random) -> FrustrationMeasure:
    total = rng.randrange(0, 40)
    return FrustrationMeasure(rng.randrange(0, total + 1), total)


def _check_order_axioms(seed: int, triples: int = 10_000) -> PropertyResult:
    rng = random.Random(seed)
    for _ in range(triples):
        a, b, c = (_random_measure(rng) for _ in range(3))
        if dominates(a, a):
            return PropertyResult("dominates_axioms", False, f"reflexive at {a}")
        if dominates(a, b) and dominates(b, a):
            return PropertyResult(
                "dominates_axioms", False, f"symmetric at {a}, {b}"
            )
        if dominates(a, b) and dominates(b, c) and not dominates(a, c):
            return PropertyResult(
                "dominates_axioms", False, f"not transitive at {a}, {b}, {c}"
            )
        if paper_relation(a, b) is FunRelation.MORE_FUN and not dominates(a, b):
            return PropertyResult(
                "dominates_axioms", False, f"MoreFun without dominance at {a}, {b}"
            )
    return PropertyResult("dominates_axioms", True)


def _check_predicted_and_binary(
    n_max: int, factory: SessionFactory
) -> PropertyResult:
    n = min(n_max, 4096)
    cap = math.ceil(math.log2(n + 1))
    for p in range(n + 1):
        result = run_to_completion(
            StrategyKind.BINARY, n, AbilityProfile.deterministic(p, n),
            session_factory=factory,
        )
        m = measure(result.trace)
        if m.total > cap or m.negatives > m.total:
            return PropertyResult(
                "binary_bound",
                False,
                f"n={n} p={p}: {m} exceeds total cap {cap}",
            )
    n_seq = min(n_max, 1024)
    for p in range(1, n_seq):
        seq = run_to_completion(
            StrategyKind.SEQUENTIAL, n_seq, AbilityProfile.deterministic(p, n_seq),
            session_factory=factory,
        )
        if measure(seq.trace).negatives != int(
            predicted(StrategyKind.SEQUENTIAL, n_seq, p).negatives_pred
        ):
            return PropertyResult(
                "binary_bound",
                False,
                f"sequential predicted negatives off at n={n_seq} p={p}",
            )
    return PropertyResult("binary_bound", True)


def verify(
    n_max: int,
    seed: int = 0,
    session_factory: SessionFactory = start,
) -> VerifyReport:
    """Run the full property battery; n_max scales the exhaustive families.

    The separation families stay fixed (they pin the non-instance-optimality
    separation and cost a few dozen runs).  A custom session_factory lets a
    caller verify a mutated machine; a factory that breaks any strategy's
    schedule fails the correctness property with a counterexample.
    """
    if n_max < 16:
        raise ValueError(f"n_max must be >= 16, got {n_max}")
    checks = (
        _check_correctness(min(n_max, 512), session_factory),
        _check_narrowing(min(n_max, 64), session_factory),
        _check_fun_law(n_max, session_factory),
        _check_separation(session_factory),
        _check_order_axioms(seed),
        _check_predicted_and_binary(n_max, session_factory),
    )
    return VerifyReport(results=checks)


def format_report(report: VerifyReport) -> str:
    lines = []
    for result in report.results:
        mark = "PASS" if result.passed else "FAIL"
        line = f"{mark} {result.name}"
        if result.counterexample:
            line += f": {result.counterexample}"
        lines.append(line)
    lines.append("OVERALL " + ("PASS" if report.overall_pass else "FAIL"))
    return "\n".join(lines)
