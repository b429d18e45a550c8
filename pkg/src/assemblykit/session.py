"""Event-sourced facilitation sessions.

A session is an append-only event log; live state is a pure fold over
the log, so replaying a persisted log reconstructs the exact same state
and final report. Mutations to one session are serialized behind a
single writer lock; reads see the last consistent state; distinct
sessions are fully independent.

Protocol: explore budget scenarios, commit a budget ratio (freezing the
algorithmic winner set), then veto or trim frozen projects - freed money
moves to the deliberation track, the frozen allocation is never re-run.
Pre/post opinion votes accumulate alongside and feed the shift report.
"""

from __future__ import annotations

import json
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from threading import Lock

from ._rational import rat_str
from .errors import (
    BudgetOutOfRange,
    IncreaseNotAllowed,
    NotInFrozenSet,
    UnknownSession,
    WrongState,
)
from .ingest import election_from_dict, election_to_dict, outcome_to_dict
from .mes import mes_complete
from .metrics import LikertRecord, pair_records, shift_report
from .model import Election, approval_counts, validate_election

# state machine; transitions only move forward
EXPLORING = "exploring"
RATIO_COMMITTED = "ratio_committed"
VETO_ROUND = "veto_round"
ADJUSTED = "adjusted"
FINALIZED = "finalized"
_ORDER = [EXPLORING, RATIO_COMMITTED, VETO_ROUND, ADJUSTED, FINALIZED]

SCENARIO_VIEWED = "ScenarioViewed"
RATIO_COMMITTED_EV = "RatioCommitted"
PROJECT_VETOED = "ProjectVetoed"
BUDGET_ADJUSTED = "BudgetAdjusted"
RTR_VOTE = "RTRVote"
FINALIZED_EV = "Finalized"


@dataclass(frozen=True)
class SessionEvent:
    seq: int
    timestamp: float
    kind: str
    payload: dict


@dataclass
class FrozenProject:
    project_id: str
    name: str
    original_cost: int
    cost: int  # current (after any reduction)
    price_q: str  # exact fraction string
    payments: dict[str, str]


@dataclass
class SessionState:
    id: str
    election: Election
    created_at: float
    state: str = EXPLORING
    committed_mes_budget: int | None = None
    committed_outcome: dict | None = None  # outcome_to_dict at commit time
    frozen: dict[str, FrozenProject] = field(default_factory=dict)
    vetoed: list[dict] = field(default_factory=list)
    freed_total: int = 0
    rtr_records: list[LikertRecord] = field(default_factory=list)
    events: list[SessionEvent] = field(default_factory=list)
    final_report: dict | None = None

    @property
    def initial_remainder(self) -> int | None:
        if self.committed_mes_budget is None:
            return None
        return self.election.total_budget - self.committed_mes_budget

    def ledger(self) -> dict:
        committed = self.committed_mes_budget or 0
        initial = self.election.total_budget - committed
        return {
            "total_budget": self.election.total_budget,
            "committed_mes_budget": committed,
            "initial_remainder": initial,
            "freed_total": self.freed_total,
            "deliberation_remainder": initial + self.freed_total,
        }

    def check_conservation(self):
        led = self.ledger()
        assert led["committed_mes_budget"] + led["initial_remainder"] == led["total_budget"]
        assert led["deliberation_remainder"] == led["initial_remainder"] + led["freed_total"]


def _at_least(state: str, floor: str) -> bool:
    return _ORDER.index(state) >= _ORDER.index(floor)


def scenario_rows(e: Election, outcome_dict: dict) -> list[dict]:
    """Per-project display rows (votes, cost, funded) sorted by votes
    descending then id - the slider view's bar list."""
    funded = {r["project"] for r in outcome_dict["rounds"]}
    counts = approval_counts(e)
    rows = [
        {"project_id": p.id, "name": p.name, "votes": counts[p.id],
         "cost": p.cost, "funded": p.id in funded}
        for p in e.projects
    ]
    rows.sort(key=lambda r: (-r["votes"], r["project_id"]))
    return rows


def _apply(state: SessionState, ev: SessionEvent) -> None:
    """Pure state transition; every legality check lives here so that
    replaying a log exercises exactly the live-path logic."""
    kind, p = ev.kind, ev.payload

    if state.state == FINALIZED:
        raise WrongState("session is finalized; log is immutable")

    if kind == SCENARIO_VIEWED:
        budget = int(p["mes_budget"])
        if not (0 <= budget <= state.election.total_budget):
            raise BudgetOutOfRange(f"budget {budget} outside [0, {state.election.total_budget}]")

    elif kind == RATIO_COMMITTED_EV:
        if state.state != EXPLORING:
            raise WrongState(f"commit requires {EXPLORING}, session is {state.state}")
        budget = int(p["mes_budget"])
        if not (0 <= budget <= state.election.total_budget):
            raise BudgetOutOfRange(f"budget {budget} outside [0, {state.election.total_budget}]")
        scoped = Election(state.election.projects, state.election.voters,
                          state.election.ballots, budget)
        outcome = mes_complete(scoped)
        state.committed_mes_budget = budget
        state.committed_outcome = outcome_to_dict(outcome)
        names = {pr.id: pr.name for pr in state.election.projects}
        costs = {pr.id: pr.cost for pr in state.election.projects}
        for r in outcome.winners:
            state.frozen[r.project_id] = FrozenProject(
                project_id=r.project_id,
                name=names[r.project_id],
                original_cost=costs[r.project_id],
                cost=costs[r.project_id],
                price_q=rat_str(r.price_q),
                payments={v: rat_str(x) for v, x in sorted(r.payments.items())},
            )
        state.state = RATIO_COMMITTED

    elif kind == PROJECT_VETOED:
        if state.state not in (RATIO_COMMITTED, VETO_ROUND):
            raise WrongState(f"veto requires {RATIO_COMMITTED} or {VETO_ROUND}, session is {state.state}")
        pid = p["project_id"]
        if pid not in state.frozen:
            raise NotInFrozenSet(f"project {pid!r} is not in the frozen set")
        fp = state.frozen.pop(pid)
        state.freed_total += fp.cost
        state.vetoed.append({"project_id": pid, "cost": fp.cost,
                             "decided_by": p.get("decided_by", "")})
        state.state = VETO_ROUND

    elif kind == BUDGET_ADJUSTED:
        if not _at_least(state.state, RATIO_COMMITTED):
            raise WrongState(f"adjust requires a committed session, session is {state.state}")
        pid = p["project_id"]
        if pid not in state.frozen:
            raise NotInFrozenSet(f"project {pid!r} is not in the frozen set")
        new_cost = int(p["new_cost"])
        fp = state.frozen[pid]
        if new_cost <= 0 or new_cost > fp.cost:
            raise IncreaseNotAllowed(
                f"new cost must be in (0, {fp.cost}] (reductions only; use veto to drop)")
        state.freed_total += fp.cost - new_cost
        fp.cost = new_cost
        state.state = ADJUSTED

    elif kind == RTR_VOTE:
        state.rtr_records.append(LikertRecord(
            str(p["participant_id"]), str(p["statement_id"]),
            str(p["phase"]).lower(), int(p["score"])))

    elif kind == FINALIZED_EV:
        if not _at_least(state.state, RATIO_COMMITTED):
            raise WrongState("finalize requires a committed session")
        state.state = FINALIZED
        state.final_report = _build_report(state, ev)

    else:
        raise ValueError(f"unknown event kind {kind!r}")

    state.events.append(ev)
    state.check_conservation()


def _shift_rows(records) -> list[dict]:
    # statements with no paired participant yet are skipped (a live room
    # mid-way through pre-voting must not crash the report)
    by_stmt: dict[str, list[LikertRecord]] = {}
    for r in records:
        by_stmt.setdefault(r.statement_id, []).append(r)
    usable = []
    for sid in sorted(by_stmt):
        paired, _ = pair_records(by_stmt[sid])
        if paired:
            usable.extend(by_stmt[sid])
    if not usable:
        return []
    rows = []
    for s in shift_report(usable):
        rows.append({
            "statement_id": s.statement_id,
            "n_paired": s.n_paired,
            "n_unpaired": s.n_unpaired,
            "percent_changed": s.percent_changed,
            "polarisation_normalized_pre": s.polarisation_normalized_pre,
            "polarisation_normalized_post": s.polarisation_normalized_post,
            "polarisation_ratio": (None if s.polarisation_ratio == float("inf")
                                   else s.polarisation_ratio),
            "polarisation_ratio_undefined": s.polarisation_ratio == float("inf"),
            "consensus_majority_pre": s.consensus_majority_pre,
            "consensus_majority_post": s.consensus_majority_post,
            "consensus_inverse_std_pre": s.consensus_inverse_std_pre,
            "consensus_inverse_std_post": s.consensus_inverse_std_post,
            "mean_pre": s.mean_pre,
            "mean_post": s.mean_post,
            "mean_change": s.mean_change,
        })
    return rows


def _build_report(state: SessionState, final_ev: SessionEvent) -> dict:
    return {
        "session_id": state.id,
        "finalized_at": final_ev.timestamp,
        "event_count": final_ev.seq,
        "ledger": state.ledger(),
        "mes_track": [
            {
                "project_id": fp.project_id,
                "name": fp.name,
                "cost": fp.cost,
                "original_cost": fp.original_cost,
                "price_q": fp.price_q,
                "payments": fp.payments,
            }
            for fp in state.frozen.values()
        ],
        "vetoed": state.vetoed,
        "deliberation_track": list(final_ev.payload.get("deliberation_selections", [])),
        "shift_report": _shift_rows(state.rtr_records),
    }


def report_bytes(report: dict) -> bytes:
    """Canonical serialization used for persistence and replay equality."""
    return json.dumps(report, sort_keys=True, separators=(",", ":")).encode("utf-8")


class Session:
    """Single-writer wrapper: appends events, folds them, persists."""

    def __init__(self, session_id: str, election: Election, created_at: float,
                 log_path: Path | None = None):
        self.lock = Lock()
        self.log_path = log_path
        self.state = SessionState(id=session_id, election=election, created_at=created_at)
        self._scenario_cache: dict[int, dict] = {}

    # -- persistence ---------------------------------------------------

    def _persist_header(self):
        if self.log_path is None:
            return
        header = {"session_id": self.state.id, "created_at": self.state.created_at,
                  "election": election_to_dict(self.state.election)}
        with open(self.log_path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(header, sort_keys=True) + "\n")

    def _persist_event(self, ev: SessionEvent):
        if self.log_path is None:
            return
        with open(self.log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps({"seq": ev.seq, "timestamp": ev.timestamp,
                                 "kind": ev.kind, "payload": ev.payload},
                                sort_keys=True) + "\n")
            fh.flush()

    # -- event append --------------------------------------------------

    def _append(self, kind: str, payload: dict, timestamp: float | None = None) -> SessionEvent:
        ev = SessionEvent(
            seq=len(self.state.events) + 1,
            timestamp=time.time() if timestamp is None else timestamp,
            kind=kind,
            payload=payload,
        )
        _apply(self.state, ev)  # raises before anything is persisted
        self._persist_event(ev)
        return ev

    # -- operations ----------------------------------------------------

    def get_scenario(self, mes_budget: int) -> dict:
        """Allocation preview at a budget level. Pure except for the view
        event; cached per (session, budget). Finalized sessions still
        serve reads but no longer log view events (the log is immutable).
        """
        with self.lock:
            budget = int(mes_budget)
            if not (0 <= budget <= self.state.election.total_budget):
                raise BudgetOutOfRange(
                    f"budget {budget} outside [0, {self.state.election.total_budget}]")
            if budget not in self._scenario_cache:
                scoped = Election(self.state.election.projects, self.state.election.voters,
                                  self.state.election.ballots, budget)
                out = outcome_to_dict(mes_complete(scoped))
                self._scenario_cache[budget] = {
                    "mes_budget": budget,
                    "outcome": out,
                    "rows": scenario_rows(self.state.election, out),
                }
            if self.state.state != FINALIZED:
                self._append(SCENARIO_VIEWED, {"mes_budget": budget})
            return self._scenario_cache[budget]

    def commit_ratio(self, mes_budget: int) -> dict:
        with self.lock:
            self._append(RATIO_COMMITTED_EV, {"mes_budget": int(mes_budget)})
            return self.snapshot()

    def veto_project(self, project_id: str, decided_by: str = "") -> dict:
        with self.lock:
            self._append(PROJECT_VETOED, {"project_id": project_id, "decided_by": decided_by})
            return self.snapshot()

    def adjust_project_budget(self, project_id: str, new_cost: int) -> dict:
        with self.lock:
            self._append(BUDGET_ADJUSTED, {"project_id": project_id, "new_cost": int(new_cost)})
            return self.snapshot()

    def rtr_vote(self, statement_id: str, participant_id: str, phase: str, score: int):
        with self.lock:
            self._append(RTR_VOTE, {"statement_id": statement_id,
                                    "participant_id": participant_id,
                                    "phase": phase, "score": int(score)})

    def rtr_report(self) -> list[dict]:
        return _shift_rows(self.state.rtr_records)

    def finalize(self, deliberation_selections=None) -> dict:
        with self.lock:
            self._append(FINALIZED_EV, {
                "deliberation_selections": list(deliberation_selections or [])})
            return self.state.final_report

    def snapshot(self) -> dict:
        s = self.state
        return {
            "session_id": s.id,
            "state": s.state,
            "total_budget": s.election.total_budget,
            "committed_mes_budget": s.committed_mes_budget,
            "ledger": s.ledger(),
            "frozen": [
                {"project_id": fp.project_id, "name": fp.name, "cost": fp.cost,
                 "original_cost": fp.original_cost, "price_q": fp.price_q}
                for fp in s.frozen.values()
            ],
            "vetoed": s.vetoed,
            "event_count": len(s.events),
        }

    def events_page(self, offset: int = 0, limit: int = 100) -> dict:
        evs = self.state.events[offset:offset + limit]
        return {
            "total": len(self.state.events),
            "offset": offset,
            "events": [{"seq": e.seq, "timestamp": e.timestamp,
                        "kind": e.kind, "payload": e.payload} for e in evs],
        }


def replay(header: dict, event_dicts: list[dict]) -> Session:
    """Rebuild a session from a persisted header + event list. The result
    is byte-for-byte equivalent to the live session (report_bytes equal)."""
    election = election_from_dict(header["election"])
    sess = Session(header["session_id"], election, header["created_at"], log_path=None)
    for d in event_dicts:
        ev = SessionEvent(int(d["seq"]), float(d["timestamp"]), d["kind"], d["payload"])
        _apply(sess.state, ev)
    return sess


class SessionStore:
    """All sessions under one data directory, one log file per session."""

    def __init__(self, data_dir: str | Path | None = None):
        self.data_dir = Path(data_dir) if data_dir is not None else None
        if self.data_dir is not None:
            self.data_dir.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, Session] = {}
        self._lock = Lock()
        if self.data_dir is not None:
            for log in sorted(self.data_dir.glob("*.jsonl")):
                sess = self._load_log(log)
                self._sessions[sess.state.id] = sess

    def _load_log(self, log: Path) -> Session:
        with open(log, encoding="utf-8") as fh:
            lines = [json.loads(line) for line in fh if line.strip()]
        sess = replay(lines[0], lines[1:])
        sess.log_path = log
        return sess

    def create(self, election_dict: dict) -> Session:
        election = validate_election(election_dict)
        session_id = uuid.uuid4().hex
        log_path = self.data_dir / f"{session_id}.jsonl" if self.data_dir else None
        sess = Session(session_id, election, created_at=time.time(), log_path=log_path)
        sess._persist_header()
        with self._lock:
            self._sessions[session_id] = sess
        return sess

    def get(self, session_id: str) -> Session:
        with self._lock:
            if session_id not in self._sessions:
                raise UnknownSession(session_id)
            return self._sessions[session_id]
