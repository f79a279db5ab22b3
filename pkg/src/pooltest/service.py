"""Live session API: the adaptive loop behind HTTP endpoints.

A session holds a selection posterior under assumed test parameters and
never sees ground truth, mirroring field deployment. Every mutation is
journaled to an append-only JSON-lines file per session so a campaign
survives a restart; the journal is replayed on startup.

Every endpoint is a thin shell: recommendations come straight from
select_group on the stored posterior, updates go straight through
Posterior.updated, so API behaviour is pinned by the library's tests.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response

from pooltest.design import (
    Selection,
    StoppingConfig,
    predictive_positive,
    select_group,
    stopping_met,
)
from pooltest.model import (
    MAX_POPULATION,
    InconsistentEvidenceError,
    Posterior,
    Prior,
    TestParams,
    TestRecord,
    group_from_members,
    group_members,
)


def _bad(field_path: str, message: str) -> HTTPException:
    return HTTPException(status_code=400, detail=f"field '{field_path}': {message}")


def _number(body: Dict[str, Any], key: str, path: str) -> float:
    if key not in body:
        raise _bad(path, "required but missing")
    v = body[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise _bad(path, f"expected number, got {type(v).__name__}")
    return float(v)


def _integer(body: Dict[str, Any], key: str, path: str) -> int:
    if key not in body:
        raise _bad(path, "required but missing")
    v = body[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise _bad(path, f"expected integer, got {type(v).__name__}")
    return v


def _parse_create(body: Dict[str, Any]) -> Dict[str, Any]:
    """Validate a session-creation body; returns the canonical config dict."""
    allowed = {"n", "prior", "assumed_params", "delta", "max_tests", "strategy"}
    unknown = set(body) - allowed
    if unknown:
        raise _bad(sorted(unknown)[0], "unknown field")

    n = _integer(body, "n", "n")
    if not 1 <= n <= MAX_POPULATION:
        raise _bad("n", f"must lie in [1, {MAX_POPULATION}], got {n}")

    prior_raw = body.get("prior")
    if not isinstance(prior_raw, dict):
        raise _bad("prior", "required object with 'q' or 'per_individual'")
    try:
        if set(prior_raw) == {"q"}:
            prior = Prior.uniform(n, _number(prior_raw, "q", "prior.q"))
        elif set(prior_raw) == {"per_individual"}:
            values = prior_raw["per_individual"]
            if not isinstance(values, list) or len(values) != n:
                raise _bad("prior.per_individual", f"must be a list of {n} probabilities")
            for i, v in enumerate(values):
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise _bad(f"prior.per_individual[{i}]", "expected number")
            prior = Prior([float(v) for v in values])
        else:
            raise _bad("prior", "must contain exactly one of 'q' or 'per_individual'")
    except ValueError as exc:
        raise _bad("prior", str(exc)) from exc

    params_raw = body.get("assumed_params")
    if not isinstance(params_raw, dict):
        raise _bad("assumed_params", "required object with 's' and 'sigma'")
    s = _number(params_raw, "s", "assumed_params.s")
    sigma = _number(params_raw, "sigma", "assumed_params.sigma")
    try:
        params = TestParams(s, sigma)
    except ValueError as exc:
        raise _bad("assumed_params", str(exc)) from exc

    delta = _number(body, "delta", "delta")
    if not 0.0 <= delta <= 1.0:
        raise _bad("delta", f"must lie in [0, 1], got {delta}")

    max_tests = _integer(body, "max_tests", "max_tests")
    if max_tests < 1:
        raise _bad("max_tests", f"must be >= 1, got {max_tests}")

    strategy = body.get("strategy", "exhaustive")
    if strategy not in ("exhaustive", "greedy"):
        raise _bad("strategy", f"must be 'exhaustive' or 'greedy', got {strategy!r}")

    return {
        "n": n,
        "prior": prior,
        "params": params,
        "delta": delta,
        "max_tests": max_tests,
        "strategy": strategy,
        "raw": {
            "n": n,
            "prior": prior_raw,
            "assumed_params": {"s": s, "sigma": sigma},
            "delta": delta,
            "max_tests": max_tests,
            "strategy": strategy,
        },
    }


@dataclass
class _Session:
    id: str
    prior: Prior
    params: TestParams
    delta: float
    max_tests: int
    strategy: str
    posterior: Posterior
    history: List[Dict[str, Any]] = field(default_factory=list)
    pending: Optional[Selection] = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def stopping(self) -> StoppingConfig:
        return StoppingConfig(self.delta, self.prior.entropy_bits(), self.max_tests)

    @property
    def stopped(self) -> bool:
        if len(self.history) >= self.max_tests:
            return True
        return stopping_met(self.posterior.entropy_bits(), self.stopping)

    @property
    def status(self) -> str:
        return "stopped" if self.stopped else "active"

    def apply_result(self, group: int, outcome: int, override: bool) -> None:
        record = TestRecord(group=group, outcome=outcome, params=self.params)
        self.posterior = self.posterior.updated(record)
        self.history.append({
            "group": group_members(group),
            "outcome": outcome,
            "override": override,
        })
        self.pending = None


class SessionStore:
    """In-memory registry backed by per-session append-only journals."""

    def __init__(self, state_dir: Path):
        self.state_dir = Path(state_dir)
        self.state_dir.mkdir(parents=True, exist_ok=True)
        self._sessions: Dict[str, _Session] = {}
        self._registry_lock = threading.Lock()
        self._replay()

    def _journal_path(self, session_id: str) -> Path:
        return self.state_dir / f"{session_id}.jsonl"

    def _append(self, session_id: str, event: Dict[str, Any]) -> None:
        with self._journal_path(session_id).open("a") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")

    def _replay(self) -> None:
        for path in sorted(self.state_dir.glob("*.jsonl")):
            session: Optional[_Session] = None
            deleted = False
            for line in path.read_text().splitlines():
                if not line.strip():
                    continue
                event = json.loads(line)
                kind = event.get("event")
                if kind == "created":
                    cfg = _parse_create(event["config"])
                    session = _build_session(event["session_id"], cfg)
                elif kind == "result" and session is not None:
                    session.apply_result(
                        group_from_members(event["group"], session.prior.n),
                        event["outcome"],
                        event.get("override", False),
                    )
                elif kind == "deleted":
                    deleted = True
            if session is not None and not deleted:
                self._sessions[session.id] = session

    def create(self, cfg: Dict[str, Any]) -> _Session:
        session = _build_session(uuid.uuid4().hex, cfg)
        with self._registry_lock:
            self._sessions[session.id] = session
        self._append(session.id, {
            "event": "created", "session_id": session.id, "config": cfg["raw"],
        })
        return session

    def get(self, session_id: str) -> _Session:
        with self._registry_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session id '{session_id}'")
        return session

    def record_result(self, session: _Session, group: int, outcome: int, override: bool) -> None:
        session.apply_result(group, outcome, override)
        self._append(session.id, {
            "event": "result",
            "group": group_members(group),
            "outcome": outcome,
            "override": override,
        })

    def delete(self, session_id: str) -> None:
        with self._registry_lock:
            if session_id not in self._sessions:
                raise HTTPException(status_code=404, detail=f"unknown session id '{session_id}'")
            del self._sessions[session_id]
        self._append(session_id, {"event": "deleted"})


def _build_session(session_id: str, cfg: Dict[str, Any]) -> _Session:
    return _Session(
        id=session_id,
        prior=cfg["prior"],
        params=cfg["params"],
        delta=cfg["delta"],
        max_tests=cfg["max_tests"],
        strategy=cfg["strategy"],
        posterior=Posterior.from_prior(cfg["prior"]),
    )


async def _json_body(request: Request) -> Dict[str, Any]:
    try:
        body = await request.json()
    except Exception as exc:
        raise HTTPException(status_code=400, detail="body: invalid JSON") from exc
    if not isinstance(body, dict):
        raise HTTPException(status_code=400, detail="body: must be a JSON object")
    return body


def create_app(state_dir: Path) -> FastAPI:
    app = FastAPI(title="pooltest session API", version="1")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(state_dir)
    app.state.store = store

    @app.post("/v1/sessions", status_code=201)
    async def create_session(request: Request):
        cfg = _parse_create(await _json_body(request))
        session = store.create(cfg)
        return {"session_id": session.id}

    @app.get("/v1/sessions/{session_id}/recommendation")
    def recommendation(session_id: str):
        session = store.get(session_id)
        with session.lock:
            if session.stopped:
                raise HTTPException(status_code=409, detail="session is stopped")
            if session.pending is None:
                session.pending = select_group(
                    session.posterior, session.params, strategy=session.strategy
                )
            sel = session.pending
        return {
            "group": group_members(sel.group),
            "f": sel.f,
            "utility_bits": sel.utility_bits,
            "predicted_positive_prob": predictive_positive(sel.f, session.params),
        }

    @app.post("/v1/sessions/{session_id}/results")
    async def post_result(session_id: str, request: Request):
        body = await _json_body(request)
        session = store.get(session_id)

        members = body.get("group")
        if not isinstance(members, list) or not members:
            raise _bad("group", "required non-empty list of individual indices")
        if any(isinstance(i, bool) or not isinstance(i, int) for i in members):
            raise _bad("group", "indices must be integers")
        if len(set(members)) != len(members):
            raise _bad("group", "duplicate indices")
        if any(not 0 <= i < session.prior.n for i in members):
            raise _bad("group", f"indices must lie in [0, {session.prior.n - 1}]")

        outcome = _integer(body, "outcome", "outcome")
        if outcome not in (0, 1):
            raise _bad("outcome", f"must be 0 or 1, got {outcome}")

        override = body.get("override", False)
        if not isinstance(override, bool):
            raise _bad("override", "must be a boolean")

        group = group_from_members(members, session.prior.n)
        with session.lock:
            if session.stopped:
                raise HTTPException(status_code=409, detail="session is stopped")
            if session.pending is not None and group != session.pending.group and not override:
                raise _bad(
                    "group",
                    "does not match the last recommendation; set \"override\": true "
                    "to record a different pool",
                )
            try:
                store.record_result(session, group, outcome, override)
            except InconsistentEvidenceError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            return {
                "entropy_bits": session.posterior.entropy_bits(),
                "delta_threshold_bits": session.stopping.threshold_bits,
                "stopped": session.stopped,
            }

    @app.get("/v1/sessions/{session_id}/state")
    def state(session_id: str):
        session = store.get(session_id)
        with session.lock:
            return {
                "marginals": [float(m) for m in session.posterior.marginals()],
                "entropy_bits": session.posterior.entropy_bits(),
                "delta_threshold_bits": session.stopping.threshold_bits,
                "history": list(session.history),
                "status": session.status,
            }

    @app.delete("/v1/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str):
        store.delete(session_id)
        return Response(status_code=204)

    return app
