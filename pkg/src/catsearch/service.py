"""Live adaptive-test sessions over HTTP, with append-only JSONL persistence.

A live session is driven by a human experimenter: the engine proposes a
difficulty level, the experimenter runs the real task and posts pass/fail,
and the engine narrows in on the subject's threshold.  Deterministic and
stochastic sessions answer themselves from a stored profile (one machine
step per ``next`` call), which makes protocol tests reproducible.

Every state change appends one JSON event line (created / probe_issued /
answer_recorded / finished) and flushes before the request is acknowledged,
so the full session history can be replayed from the log alone and must
reconstruct the exact serialized session state.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .strategies import (
    SearchSession,
    SessionStatus,
    StrategyKind,
    start,
)
from .subject import AbilityProfile, Outcome, ProbeStream, ProfileKind, block_probe

__all__ = [
    "SessionMode",
    "SessionRecord",
    "SessionStore",
    "ReplayError",
    "replay_log",
    "create_app",
]


class SessionMode(str, Enum):
    LIVE = "live"
    DETERMINISTIC = "deterministic"
    STOCHASTIC = "stochastic"


class ReplayError(ValueError):
    """A session log line could not be parsed or applied."""


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class SessionRecord:
    id: str
    strategy: StrategyKind
    n: int
    mode: SessionMode
    profile: AbilityProfile | None
    seed: int
    session: SearchSession
    created_at: str
    updated_at: str
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def state_json(self) -> str:
        return self.session.to_state_json()

    def frustration(self) -> dict:
        return {
            "negatives": self.session.negatives,
            "total": len(self.session.trace),
        }

    def view(self) -> dict:
        session = self.session
        done = session.status is SessionStatus.DONE
        return {
            "id": self.id,
            "strategy": self.strategy.value,
            "n": self.n,
            "mode": self.mode.value,
            "status": session.status.value,
            "done": done,
            "result": session.result if done else None,
            "pending_probe": (
                session.pending_level
                if session.status is SessionStatus.AWAITING_OUTCOME
                else None
            ),
            "trace": [
                {"sequence_no": seq, "level": lvl, "outcome": out.value}
                for seq, lvl, out in session.trace
            ],
            "frustration": self.frustration(),
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }


class SessionStore:
    """In-memory session registry backed by an append-only JSONL event log."""

    def __init__(self, log_path: str | Path):
        self.log_path = Path(log_path)
        self.log_path.parent.mkdir(parents=True, exist_ok=True)
        self._log = open(self.log_path, "a", encoding="utf-8")
        self._records: dict[str, SessionRecord] = {}
        self._registry_lock = threading.Lock()

    def close(self) -> None:
        self._log.close()

    def _append_event(self, session_id: str, event: str, payload: dict, ts: str) -> None:
        line = json.dumps(
            {"ts": ts, "session_id": session_id, "event": event, "payload": payload},
            sort_keys=True,
            separators=(",", ":"),
        )
        self._log.write(line + "\n")
        self._log.flush()

    def create_session(
        self,
        strategy: StrategyKind,
        n: int,
        mode: SessionMode,
        profile: AbilityProfile | None = None,
        seed: int = 0,
    ) -> SessionRecord:
        if n < 1:
            raise ValueError(f"domain size must be >= 1, got {n}")
        if mode is SessionMode.LIVE:
            profile = None
        else:
            if profile is None:
                raise ValueError(f"{mode.value} sessions need a profile")
            if profile.n != n:
                raise ValueError(
                    f"profile is for n={profile.n}, session wants n={n}"
                )
            wanted = (
                ProfileKind.DETERMINISTIC
                if mode is SessionMode.DETERMINISTIC
                else ProfileKind.STOCHASTIC
            )
            if profile.kind is not wanted:
                raise ValueError(f"{mode.value} sessions need a {wanted.value} profile")
        session_id = uuid.uuid4().hex
        ts = _now()
        record = SessionRecord(
            id=session_id,
            strategy=strategy,
            n=n,
            mode=mode,
            profile=profile,
            seed=seed,
            session=start(strategy, n),
            created_at=ts,
            updated_at=ts,
        )
        self._append_event(
            session_id,
            "created",
            {
                "strategy": strategy.value,
                "n": n,
                "mode": mode.value,
                "profile": profile.to_json_dict() if profile else None,
                "seed": seed,
            },
            ts,
        )
        with self._registry_lock:
            self._records[session_id] = record
        return record

    def get(self, session_id: str) -> SessionRecord:
        with self._registry_lock:
            record = self._records.get(session_id)
        if record is None:
            raise KeyError(session_id)
        return record

    def next(self, session_id: str) -> dict:
        """Issue (and for self-answering sessions, also resolve) one probe.

        Idempotent for live sessions while a probe is pending: retries get
        the same level back without a new event.
        """
        record = self.get(session_id)
        with record.lock:
            session = record.session
            if session.status is SessionStatus.DONE:
                return {
                    "done": True,
                    "result": session.result,
                    "frustration": record.frustration(),
                }
            if record.mode is SessionMode.LIVE:
                if session.status is SessionStatus.AWAITING_OUTCOME:
                    return {"probe": session.pending_level, "done": False}
                level = session.next_probe()
                ts = _now()
                self._append_event(
                    session_id,
                    "probe_issued",
                    {"sequence_no": len(session.trace) + 1, "level": level},
                    ts,
                )
                record.updated_at = ts
                return {"probe": level, "done": False}
            # Self-answering session: one probe per call, answered from the
            # stored profile, so the protocol stays observable step by step.
            level = session.next_probe()
            sequence_no = len(session.trace) + 1
            ts = _now()
            self._append_event(
                session_id,
                "probe_issued",
                {"sequence_no": sequence_no, "level": level},
                ts,
            )
            outcome = self._auto_answer(record, level, sequence_no)
            response: dict = {
                "probe": level,
                "outcome": outcome.value,
                "done": session.status is SessionStatus.DONE,
            }
            ts = self._record_answer(record, level, sequence_no, outcome)
            record.updated_at = ts
            if session.status is SessionStatus.DONE:
                response["done"] = True
                response["result"] = session.result
                response["frustration"] = record.frustration()
            return response

    def _auto_answer(
        self, record: SessionRecord, level: int, sequence_no: int
    ) -> Outcome:
        profile = record.profile
        assert profile is not None
        if profile.kind is ProfileKind.DETERMINISTIC:
            return Outcome.PASS if level <= profile.threshold else Outcome.FAIL
        stream = ProbeStream(record.seed, record.id)
        return block_probe(profile, level, stream, sequence_no)

    def _record_answer(
        self, record: SessionRecord, level: int, sequence_no: int, outcome: Outcome
    ) -> str:
        """Advance the machine and persist the answer (and any finish)."""
        session = record.session
        session.observe(outcome)
        ts = _now()
        self._append_event(
            record.id,
            "answer_recorded",
            {"sequence_no": sequence_no, "level": level, "outcome": outcome.value},
            ts,
        )
        if session.status is SessionStatus.DONE:
            ts = _now()
            self._append_event(
                record.id,
                "finished",
                {
                    "result": session.result,
                    "negatives": session.negatives,
                    "total": len(session.trace),
                },
                ts,
            )
        return ts

    def answer(self, session_id: str, outcome_text: str) -> dict:
        record = self.get(session_id)
        try:
            outcome = Outcome(outcome_text)
        except ValueError:
            raise ValueError(
                f"outcome must be 'pass' or 'fail', got {outcome_text!r}"
            ) from None
        with record.lock:
            session = record.session
            if session.status is not SessionStatus.AWAITING_OUTCOME:
                raise LookupError("no probe is pending")
            level = session.pending_level
            sequence_no = len(session.trace) + 1
            ts = self._record_answer(record, level, sequence_no, outcome)
            record.updated_at = ts
            done = session.status is SessionStatus.DONE
            response = {
                "status": session.status.value,
                "done": done,
                "frustration": record.frustration(),
            }
            if done:
                response["result"] = session.result
            return response


def replay_log(log_path: str | Path) -> dict[str, SessionRecord]:
    """Rebuild every session from its event history alone.

    Raises ReplayError naming the line number for a corrupt or inconsistent
    line, except that an unparseable final line is treated as a truncated
    write and the sessions are restored to the last consistent event.
    """
    path = Path(log_path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ReplayError(f"cannot read session log {path}: {exc}") from exc
    records: dict[str, SessionRecord] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            event = json.loads(line)
        except json.JSONDecodeError as exc:
            if lineno == len(lines):
                break  # torn final write: keep the consistent prefix
            raise ReplayError(f"corrupt event at line {lineno}: {exc}") from exc
        try:
            _apply_event(records, event)
        except (KeyError, ValueError, RuntimeError) as exc:
            raise ReplayError(f"inconsistent event at line {lineno}: {exc}") from exc
        record = records.get(event.get("session_id", ""))
        if record is not None:
            record.updated_at = event["ts"]
    return records


def _apply_event(records: dict[str, SessionRecord], event: dict) -> None:
    kind = event["event"]
    session_id = event["session_id"]
    payload = event["payload"]
    if kind == "created":
        profile = (
            AbilityProfile.from_json(payload["profile"])
            if payload.get("profile")
            else None
        )
        records[session_id] = SessionRecord(
            id=session_id,
            strategy=StrategyKind(payload["strategy"]),
            n=payload["n"],
            mode=SessionMode(payload["mode"]),
            profile=profile,
            seed=payload.get("seed", 0),
            session=start(StrategyKind(payload["strategy"]), payload["n"]),
            created_at=event["ts"],
            updated_at=event["ts"],
        )
        return
    record = records[session_id]
    session = record.session
    if kind == "probe_issued":
        level = session.next_probe()
        if level != payload["level"]:
            raise ValueError(
                f"log says probe {payload['level']}, engine issued {level}"
            )
    elif kind == "answer_recorded":
        session.observe(Outcome(payload["outcome"]))
    elif kind == "finished":
        if session.status is not SessionStatus.DONE or session.result != payload["result"]:
            raise ValueError("finish event does not match engine state")
    else:
        raise ValueError(f"unknown event type {kind!r}")


# -- HTTP surface -----------------------------------------------------------


def create_app(store: SessionStore, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="catsearch session service")

    @app.exception_handler(Exception)
    async def _on_error(request: Request, exc: Exception):  # pragma: no cover
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    @app.post("/sessions", status_code=201)
    def create_session(body: dict) -> dict:
        try:
            strategy = StrategyKind(str(body.get("strategy", "")).lower())
        except ValueError:
            raise HTTPException(400, f"unknown strategy: {body.get('strategy')!r}")
        try:
            mode = SessionMode(str(body.get("mode", "live")).lower())
        except ValueError:
            raise HTTPException(400, f"unknown mode: {body.get('mode')!r}")
        try:
            n = int(body.get("n"))
        except (TypeError, ValueError):
            raise HTTPException(400, "n must be an integer")
        profile = None
        if body.get("profile") is not None:
            try:
                profile = AbilityProfile.from_json(body["profile"])
            except (ValueError, TypeError, KeyError) as exc:
                raise HTTPException(400, f"bad profile: {exc}")
        try:
            record = store.create_session(
                strategy, n, mode, profile, seed=int(body.get("seed", 0))
            )
        except ValueError as exc:
            raise HTTPException(400, str(exc))
        except OSError as exc:
            raise HTTPException(500, f"storage failure: {exc}")
        return record.view()

    @app.get("/sessions/{session_id}/next")
    def next_probe(session_id: str) -> dict:
        try:
            return store.next(session_id)
        except KeyError:
            raise HTTPException(404, f"no such session: {session_id}")
        except OSError as exc:
            raise HTTPException(500, f"storage failure: {exc}")

    @app.post("/sessions/{session_id}/answer")
    def answer(session_id: str, body: dict) -> dict:
        outcome = body.get("outcome")
        if not isinstance(outcome, str) or outcome not in ("pass", "fail"):
            raise HTTPException(400, f"outcome must be 'pass' or 'fail', got {outcome!r}")
        try:
            return store.answer(session_id, outcome)
        except KeyError:
            raise HTTPException(404, f"no such session: {session_id}")
        except LookupError as exc:
            raise HTTPException(409, str(exc))
        except OSError as exc:
            raise HTTPException(500, f"storage failure: {exc}")

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        try:
            return store.get(session_id).view()
        except KeyError:
            raise HTTPException(404, f"no such session: {session_id}")

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app
