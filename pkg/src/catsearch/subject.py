"""Subjects and probes: the difficulty axis and the oracles that answer it.

Difficulty levels are integers ``1..n`` (1 easiest, n hardest).  Level 0 is a
virtual always-pass sentinel and level ``n+1`` a virtual always-fail sentinel;
neither is ever presented as a probe.  A subject's ability ``p`` is the number
of levels it passes, so ``p`` ranges over ``0..n`` and equals the insertion
rank of the target success rate in the subject's per-level success profile.

Every probe is a fresh test, even at a level probed before: a live subject
gets a new random question each time, so outcomes are never memoized.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

__all__ = [
    "Outcome",
    "ProbeRecord",
    "ProfileKind",
    "AbilityProfile",
    "ProbeStream",
    "answer_deterministic",
    "block_probe",
    "insertion_rank",
]


class Outcome(str, Enum):
    """Binary answer to one probe; FAIL is the frustration-sensitive count."""

    PASS = "pass"
    FAIL = "fail"


class ProbeRecord(NamedTuple):
    """One (level, outcome) entry of a run trace; sequence numbers are 1-based."""

    sequence_no: int
    level: int
    outcome: Outcome


class ProfileKind(str, Enum):
    DETERMINISTIC = "deterministic"
    STOCHASTIC = "stochastic"
    EXTERNAL = "external"


@dataclass(frozen=True)
class AbilityProfile:
    """The hidden subject.

    Deterministic subjects pass exactly levels ``1..threshold``.  Stochastic
    subjects answer each level ``i`` via a block of ``block_size`` Bernoulli
    trials with success probability ``success_probs[i-1]``, passing when the
    observed rate reaches ``target_rate``.  External subjects carry no hidden
    data; their answers arrive from outside (a live experimenter).
    """

    kind: ProfileKind
    n: int
    threshold: int = 0
    success_probs: tuple[float, ...] = field(default_factory=tuple)
    target_rate: float = 0.0
    block_size: int = 1

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"domain size must be >= 1, got {self.n}")
        if self.kind is ProfileKind.DETERMINISTIC:
            if not 0 <= self.threshold <= self.n:
                raise ValueError(
                    f"threshold must lie in [0..{self.n}], got {self.threshold}"
                )
        elif self.kind is ProfileKind.STOCHASTIC:
            if len(self.success_probs) != self.n:
                raise ValueError(
                    f"success_probs must have length {self.n}, "
                    f"got {len(self.success_probs)}"
                )
            if not all(0.0 <= q <= 1.0 for q in self.success_probs):
                raise ValueError("success probabilities must lie in [0, 1]")
            if not 0.0 <= self.target_rate <= 1.0:
                raise ValueError(f"target_rate must lie in [0, 1], got {self.target_rate}")
            if self.block_size < 1:
                raise ValueError(f"block_size must be >= 1, got {self.block_size}")

    @classmethod
    def deterministic(cls, p: int, n: int) -> "AbilityProfile":
        return cls(kind=ProfileKind.DETERMINISTIC, n=n, threshold=p)

    @classmethod
    def stochastic(
        cls, q: list[float] | tuple[float, ...], t: float, k: int
    ) -> "AbilityProfile":
        return cls(
            kind=ProfileKind.STOCHASTIC,
            n=len(q),
            success_probs=tuple(q),
            target_rate=t,
            block_size=k,
        )

    @classmethod
    def external(cls, n: int) -> "AbilityProfile":
        return cls(kind=ProfileKind.EXTERNAL, n=n)

    @classmethod
    def from_json(cls, doc: str | dict) -> "AbilityProfile":
        """Load a profile from a JSON document.

        Stochastic form: ``{"q": [...], "t": 0.8, "k": 200}``.
        Deterministic form: ``{"p": 5, "n": 16}``.
        """
        data = json.loads(doc) if isinstance(doc, str) else doc
        if "q" in data:
            return cls.stochastic(
                q=[float(x) for x in data["q"]],
                t=float(data["t"]),
                k=int(data["k"]),
            )
        if "p" in data:
            return cls.deterministic(p=int(data["p"]), n=int(data["n"]))
        raise ValueError("profile document must contain either 'q'/'t'/'k' or 'p'/'n'")

    def to_json_dict(self) -> dict:
        if self.kind is ProfileKind.STOCHASTIC:
            return {
                "q": list(self.success_probs),
                "t": self.target_rate,
                "k": self.block_size,
            }
        if self.kind is ProfileKind.DETERMINISTIC:
            return {"p": self.threshold, "n": self.n}
        return {"n": self.n}


def answer_deterministic(p: int, level: int, n: int) -> Outcome:
    """Answer a probe for a subject with knowledge threshold ``p``.

    Pass iff ``level <= p``; pure and total.
    """
    if not 1 <= level <= n:
        raise ValueError(f"level must lie in [1..{n}], got {level}")
    if not 0 <= p <= n:
        raise ValueError(f"threshold must lie in [0..{n}], got {p}")
    return Outcome.PASS if level <= p else Outcome.FAIL


class ProbeStream:
    """Deterministic per-probe randomness keyed by (seed, session id, sequence no).

    Each probe draws from its own stream, so outcomes are reproducible and
    independent of the order in which parallel workers reach them.
    """

    def __init__(self, seed: int, session_id: str = ""):
        self.seed = seed
        self.session_id = session_id

    def rng(self, sequence_no: int) -> random.Random:
        key = f"{self.seed}\x1f{self.session_id}\x1f{sequence_no}".encode()
        digest = hashlib.sha256(key).digest()
        return random.Random(int.from_bytes(digest[:16], "big"))


def block_probe(
    profile: AbilityProfile, level: int, stream: ProbeStream, sequence_no: int
) -> Outcome:
    """Answer one probe of a stochastic subject with a block of fresh trials.

    Draws ``block_size`` independent Bernoulli(q[level]) trials and passes when
    successes / block_size >= target_rate (ties count as Pass).
    """
    if profile.kind is not ProfileKind.STOCHASTIC:
        raise ValueError("block_probe requires a stochastic profile")
    if not 1 <= level <= profile.n:
        raise ValueError(f"level must lie in [1..{profile.n}], got {level}")
    if profile.block_size < 1:
        raise ValueError("block_size must be >= 1")
    q = profile.success_probs[level - 1]
    rng = stream.rng(sequence_no)
    k = profile.block_size
    successes = sum(1 for _ in range(k) if rng.random() < q)
    return Outcome.PASS if successes / k >= profile.target_rate else Outcome.FAIL


def insertion_rank(q: list[float] | tuple[float, ...], t: float) -> int:
    """Largest prefix length ``p`` with ``q[i] >= t`` for all ``i <= p``.

    The scan stops at the first level whose success probability drops below
    the target, even if later entries rebound: empirical profiles are not
    required to be monotone, and the rank means the hardest end of the
    contiguous comfortable zone.
    """
    if len(q) == 0:
        raise ValueError("success profile must be nonempty")
    rank = 0
    for value in q:
        if value < t:
            break
        rank += 1
    return rank
