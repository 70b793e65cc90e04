"""The five adaptive difficulty-search strategies as resumable state machines.

A session searches for the subject's threshold ``p`` over ``[0..n]`` while
maintaining an interval ``(lo, hi)``: ``lo`` is the largest level known or
assumed to pass (0 is the virtual always-pass sentinel) and ``hi`` the
smallest level known or assumed to fail (``n+1`` is the virtual always-fail
sentinel).  The invariant ``0 <= lo < hi <= n+1`` holds at all times; the
search is done when ``hi - lo == 1`` and the result is ``lo``.

Sessions are driven with ``next_probe()`` / ``observe()`` so a caller (a
sweep, a Monte Carlo run, or a live human experimenter behind an HTTP
service) owns the oracle.  Sessions serialize to a versioned JSON blob so a
service can persist and resume them.

Strategy semantics:

* ``sequential`` probes 1, 2, 3, ... and stops at the first fail or a pass
  at ``n``.
* ``binary`` probes the midpoint ``(lo + hi) // 2`` until the interval
  closes.
* ``doubling`` gallops over powers of two (1, 2, 4, ..., clamped at ``n``)
  and then bisects inside the bracketed interval.
* ``fun`` repeats gallop phases from the current ``lo``: a phase probes
  ``lo + 1, lo + 2, lo + 4, ...`` (clamped at ``n``) until its first fail.
  A gallop probe may land on the current ``hi``; it is asked again as a
  fresh test.  Its fail count tracks the ones in the binary form of ``p``.
* ``frustrating`` opens with one fun-style up-gallop, then repeats
  down-gallop phases from the current ``hi``: a phase probes
  ``hi - 1, hi - 2, hi - 4, ...`` clamped at ``lo`` (the current lower
  bound is re-asked as a fresh test) until its first pass; the smallest
  fail of the phase becomes the new ``hi``.  It is the adversarial twin of
  ``fun``: each is the other's worst case in failed probes.
"""

from __future__ import annotations

import json
from enum import Enum
from typing import Callable, NamedTuple

from .subject import (
    AbilityProfile,
    Outcome,
    ProbeRecord,
    ProbeStream,
    ProfileKind,
    block_probe,
)

__all__ = [
    "StrategyKind",
    "SessionStatus",
    "StateError",
    "SearchSession",
    "SearchResult",
    "start",
    "run_to_completion",
    "STATE_FORMAT_VERSION",
]

STATE_FORMAT_VERSION = 1


class StrategyKind(str, Enum):
    SEQUENTIAL = "sequential"
    BINARY = "binary"
    DOUBLING = "doubling"
    FUN = "fun"
    FRUSTRATING = "frustrating"


class SessionStatus(str, Enum):
    READY_TO_PROBE = "ready_to_probe"
    AWAITING_OUTCOME = "awaiting_outcome"
    DONE = "done"


class StateError(RuntimeError):
    """Raised when next_probe/observe is called in the wrong session state."""


# Internal phase tags for the gallop strategies.
_GALLOP = "gallop"
_BISECT = "bisect"
_UP = "up"
_DOWN = "down"
_NONE = ""


class SearchResult(NamedTuple):
    found_p: int
    trace: tuple[ProbeRecord, ...]


class SearchSession:
    """Resumable state machine for one strategy run.

    The next probe is always precomputed, so ``next_probe()`` only hands it
    out and flips the status; all narrowing happens in ``observe()``.
    Single-threaded: callers must serialize operations per session.
    """

    __slots__ = (
        "kind",
        "n",
        "lo",
        "hi",
        "status",
        "trace",
        "negatives",
        "phases_started",
        "_pending",
        "_phase",
        "_origin",
        "_exp",
        "_phase_fail",
    )

    def __init__(self, kind: StrategyKind, n: int):
        if n < 1:
            raise ValueError(f"domain size must be >= 1, got {n}")
        self.kind = kind
        self.n = n
        self.lo = 0
        self.hi = n + 1
        self.status = SessionStatus.READY_TO_PROBE
        self.trace: list[ProbeRecord] = []
        self.negatives = 0
        self.phases_started = 1
        self._origin = 0
        self._exp = 0
        self._phase_fail: int | None = None
        if kind is StrategyKind.SEQUENTIAL:
            self._phase = _NONE
            self._pending = 1
        elif kind is StrategyKind.BINARY:
            self._phase = _NONE
            self._pending = (n + 1) // 2
        elif kind is StrategyKind.DOUBLING:
            self._phase = _GALLOP
            self._pending = 1
        elif kind is StrategyKind.FUN:
            self._phase = _GALLOP
            self._pending = 1
        elif kind is StrategyKind.FRUSTRATING:
            self._phase = _UP
            self._pending = 1
        else:  # pragma: no cover - closed enumeration
            raise ValueError(f"unknown strategy kind: {kind!r}")

    @property
    def result(self) -> int:
        if self.status is not SessionStatus.DONE:
            raise StateError("session is not done; no result yet")
        return self.lo

    @property
    def pending_level(self) -> int | None:
        """The probe currently issued or about to be issued, None when done."""
        return self._pending

    def next_probe(self) -> int:
        if self.status is not SessionStatus.READY_TO_PROBE:
            raise StateError(f"next_probe called while {self.status.value}")
        self.status = SessionStatus.AWAITING_OUTCOME
        return self._pending

    def observe(self, outcome: Outcome) -> SessionStatus:
        """Record the subject's answer to the issued probe and advance."""
        if self.status is not SessionStatus.AWAITING_OUTCOME:
            raise StateError(f"observe called while {self.status.value}")
        level = self._pending
        passed = outcome is Outcome.PASS
        trace = self.trace
        trace.append(ProbeRecord(len(trace) + 1, level, outcome))
        if not passed:
            self.negatives += 1
        kind = self.kind

        if kind is StrategyKind.SEQUENTIAL:
            if passed:
                self.lo = level
            else:
                self.hi = level
            if self.hi - self.lo == 1:
                return self._finish()
            self._pending = self.lo + 1

        elif kind is StrategyKind.BINARY:
            if passed:
                self.lo = level
            else:
                self.hi = level
            if self.hi - self.lo == 1:
                return self._finish()
            self._pending = (self.lo + self.hi) // 2

        elif kind is StrategyKind.DOUBLING:
            if self._phase == _GALLOP:
                if passed:
                    self.lo = level
                    if level == self.n:
                        return self._finish()
                    self._exp += 1
                    self._pending = min(1 << self._exp, self.n)
                else:
                    self.hi = level
                    if self.hi - self.lo == 1:
                        return self._finish()
                    self._phase = _BISECT
                    self.phases_started += 1
                    self._pending = (self.lo + self.hi) // 2
            else:
                if passed:
                    self.lo = level
                else:
                    self.hi = level
                if self.hi - self.lo == 1:
                    return self._finish()
                self._pending = (self.lo + self.hi) // 2

        elif kind is StrategyKind.FUN:
            if passed:
                self.lo = level
                if self.lo >= self.hi:
                    # Fresh pass at the assumed-fail bound (noisy subjects
                    # only): the stale fail is contradicted, fall back to
                    # the always-fail sentinel.
                    self.hi = self.n + 1
                if level == self.n:
                    # A pass at the hardest level settles the search; any
                    # other pass keeps the phase galloping to its first
                    # fail -- the interval test runs between phases only.
                    return self._finish()
                self._exp += 1
                self._pending = min(self._origin + (1 << self._exp), self.n)
            else:
                self.hi = level
                if self.hi - self.lo == 1:
                    return self._finish()
                self._origin = self.lo
                self._exp = 0
                self.phases_started += 1
                self._pending = min(self._origin + 1, self.n)

        elif kind is StrategyKind.FRUSTRATING:
            if self._phase == _UP:
                if passed:
                    self.lo = level
                    if self.lo >= self.hi:
                        self.hi = self.n + 1
                    if level == self.n:
                        return self._finish()
                    self._exp += 1
                    self._pending = min(self._origin + (1 << self._exp), self.n)
                else:
                    self.hi = level
                    if self.hi - self.lo == 1:
                        return self._finish()
                    self._open_down_phase()
            else:  # _DOWN
                if passed:
                    if level > self.lo:
                        self.lo = level
                    fail = self._phase_fail
                    if fail is not None and fail < self.hi:
                        self.hi = fail
                    if self.hi - self.lo == 1:
                        return self._finish()
                    self._open_down_phase()
                else:
                    if level > self.lo:
                        # Probes within a phase decrease, so this is the
                        # smallest fail seen so far; a fail at lo itself
                        # (noisy subjects) cannot inform hi.
                        self._phase_fail = level
                    self._exp += 1
                    candidate = max(self._origin - (1 << self._exp), self.lo)
                    if candidate == level:
                        # The clamp would repeat the probe just asked: close
                        # the phase on its smallest fail instead.
                        self.hi = self._phase_fail  # type: ignore[assignment]
                        if self.hi - self.lo == 1:
                            return self._finish()
                        self._open_down_phase()
                    else:
                        self._pending = candidate

        self.status = SessionStatus.READY_TO_PROBE
        return self.status

    def _open_down_phase(self) -> None:
        self._phase = _DOWN
        self._origin = self.hi
        self._exp = 0
        self._phase_fail = None
        self.phases_started += 1
        self._pending = self.hi - 1  # hi - lo >= 2 here, so this exceeds lo

    def _finish(self) -> SessionStatus:
        self.status = SessionStatus.DONE
        self._pending = None  # type: ignore[assignment]
        return self.status

    # -- serialization ----------------------------------------------------

    def to_state_dict(self) -> dict:
        return {
            "v": STATE_FORMAT_VERSION,
            "kind": self.kind.value,
            "n": self.n,
            "lo": self.lo,
            "hi": self.hi,
            "status": self.status.value,
            "pending": self._pending,
            "phase": self._phase,
            "origin": self._origin,
            "exp": self._exp,
            "phase_fail": self._phase_fail,
            "negatives": self.negatives,
            "phases_started": self.phases_started,
            "trace": [[seq, lvl, out.value] for seq, lvl, out in self.trace],
        }

    def to_state_json(self) -> str:
        """Canonical (sorted-key, compact) JSON state blob."""
        return json.dumps(self.to_state_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_state_dict(cls, state: dict) -> "SearchSession":
        version = state.get("v")
        if version != STATE_FORMAT_VERSION:
            raise ValueError(f"unsupported session state version: {version!r}")
        session = cls(StrategyKind(state["kind"]), state["n"])
        session.lo = state["lo"]
        session.hi = state["hi"]
        session.status = SessionStatus(state["status"])
        session._pending = state["pending"]
        session._phase = state["phase"]
        session._origin = state["origin"]
        session._exp = state["exp"]
        session._phase_fail = state["phase_fail"]
        session.negatives = state["negatives"]
        session.phases_started = state["phases_started"]
        session.trace = [
            ProbeRecord(seq, lvl, Outcome(out)) for seq, lvl, out in state["trace"]
        ]
        return session

    @classmethod
    def from_state_json(cls, blob: str) -> "SearchSession":
        return cls.from_state_dict(json.loads(blob))


def start(kind: StrategyKind, n: int) -> SearchSession:
    """Open a session over levels 1..n with lo=0, hi=n+1, ready to probe."""
    return SearchSession(kind, n)


def run_to_completion(
    kind: StrategyKind,
    n: int,
    profile: AbilityProfile,
    stream: ProbeStream | None = None,
    session_factory: Callable[[StrategyKind, int], SearchSession] = start,
) -> SearchResult:
    """Drive a session against the profile's oracle until done.

    Deterministic profiles need no randomness; stochastic profiles need a
    ProbeStream so each probe draws its own reproducible trial block.
    """
    if profile.kind is ProfileKind.EXTERNAL:
        raise ValueError("external profiles answer from outside; drive the session directly")
    if profile.n != n:
        raise ValueError(f"profile is for n={profile.n}, session wants n={n}")
    session = session_factory(kind, n)
    next_probe = session.next_probe
    observe = session.observe
    done = SessionStatus.DONE
    if profile.kind is ProfileKind.DETERMINISTIC:
        p = profile.threshold
        passed, failed = Outcome.PASS, Outcome.FAIL
        while session.status is not done:
            observe(passed if next_probe() <= p else failed)
    else:
        if stream is None:
            raise ValueError("stochastic profiles need a ProbeStream")
        while session.status is not done:
            level = next_probe()
            observe(block_probe(profile, level, stream, len(session.trace) + 1))
    return SearchResult(found_p=session.result, trace=tuple(session.trace))
