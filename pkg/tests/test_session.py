import json

import numpy as np
import pytest

from assemblykit.errors import (
    BudgetOutOfRange,
    IncreaseNotAllowed,
    NotInFrozenSet,
    UnknownSession,
    WrongState,
)
from assemblykit.session import (
    ADJUSTED,
    EXPLORING,
    FINALIZED,
    RATIO_COMMITTED,
    VETO_ROUND,
    Session,
    SessionStore,
    replay,
    report_bytes,
)

from helpers import random_election

ELECTION = {
    "projects": [
        {"id": "P1", "name": "Skate ramp", "cost": 18000},
        {"id": "P2", "name": "Tree planting", "cost": 9000},
        {"id": "P3", "name": "Open stage", "cost": 30000},
    ],
    "voters": [{"id": f"v{i}"} for i in range(1, 6)],
    "ballots": [
        {"voter_id": "v1", "approved": ["P1", "P2"]},
        {"voter_id": "v2", "approved": ["P1", "P2"]},
        {"voter_id": "v3", "approved": ["P1"]},
        {"voter_id": "v4", "approved": ["P2", "P3"]},
        {"voter_id": "v5", "approved": ["P3"]},
    ],
    "total_budget": 40000,
}


@pytest.fixture
def store(tmp_path):
    return SessionStore(tmp_path)


@pytest.fixture
def sess(store):
    return store.create(ELECTION)


class TestProtocol:
    def test_starts_exploring(self, sess):
        assert sess.state.state == EXPLORING

    def test_scenario_preview_logs_event(self, sess):
        view = sess.get_scenario(20000)
        assert view["mes_budget"] == 20000
        assert {r["project_id"] for r in view["rows"]} == {"P1", "P2", "P3"}
        assert sess.state.events[-1].kind == "ScenarioViewed"

    def test_scenario_rows_sorted_by_votes(self, sess):
        rows = sess.get_scenario(0)["rows"]
        assert [r["project_id"] for r in rows] == ["P1", "P2", "P3"]

    def test_scenario_out_of_range(self, sess):
        with pytest.raises(BudgetOutOfRange):
            sess.get_scenario(40001)
        with pytest.raises(BudgetOutOfRange):
            sess.get_scenario(-1)

    def test_commit_freezes_winners(self, sess):
        snap = sess.commit_ratio(30000)
        assert snap["state"] == RATIO_COMMITTED
        assert snap["ledger"]["committed_mes_budget"] == 30000
        assert snap["ledger"]["initial_remainder"] == 10000
        assert {fp["project_id"] for fp in snap["frozen"]}

    def test_commit_twice_rejected(self, sess):
        sess.commit_ratio(30000)
        with pytest.raises(WrongState):
            sess.commit_ratio(20000)

    def test_veto_requires_commit(self, sess):
        with pytest.raises(WrongState):
            sess.veto_project("P1")

    def test_veto_moves_cost_to_deliberation(self, sess):
        sess.commit_ratio(30000)
        frozen = {fp.project_id: fp for fp in sess.state.frozen.values()}
        pid, fp = next(iter(frozen.items()))
        snap = sess.veto_project(pid, decided_by="assembly")
        assert snap["state"] == VETO_ROUND
        assert snap["ledger"]["freed_total"] == fp.cost
        assert snap["ledger"]["deliberation_remainder"] == 10000 + fp.cost
        assert pid not in {f["project_id"] for f in snap["frozen"]}

    def test_veto_unknown_project(self, sess):
        sess.commit_ratio(30000)
        with pytest.raises(NotInFrozenSet):
            sess.veto_project("P99")

    def test_adjust_reduction_frees_difference(self, sess):
        sess.commit_ratio(30000)
        pid = next(iter(sess.state.frozen))
        cost = sess.state.frozen[pid].cost
        snap = sess.adjust_project_budget(pid, cost // 2)
        assert snap["state"] == ADJUSTED
        assert snap["ledger"]["freed_total"] == cost - cost // 2
        row = next(f for f in snap["frozen"] if f["project_id"] == pid)
        assert row["cost"] == cost // 2 and row["original_cost"] == cost

    def test_adjust_increase_rejected(self, sess):
        sess.commit_ratio(30000)
        pid = next(iter(sess.state.frozen))
        cost = sess.state.frozen[pid].cost
        with pytest.raises(IncreaseNotAllowed):
            sess.adjust_project_budget(pid, cost + 1)
        with pytest.raises(IncreaseNotAllowed):
            sess.adjust_project_budget(pid, 0)

    def test_rtr_votes_any_time_before_finalize(self, sess):
        sess.rtr_vote("s1", "p1", "pre", -1)
        sess.commit_ratio(30000)
        sess.rtr_vote("s1", "p1", "post", 2)
        rows = sess.rtr_report()
        assert rows[0]["n_paired"] == 1
        assert rows[0]["percent_changed"] == 100.0

    def test_rtr_report_skips_unpaired_statements(self, sess):
        sess.rtr_vote("s1", "p1", "pre", 0)
        assert sess.rtr_report() == []

    def test_finalize_requires_commit(self, sess):
        with pytest.raises(WrongState):
            sess.finalize()

    def test_finalize_builds_report_and_locks_log(self, sess):
        sess.commit_ratio(30000)
        report = sess.finalize(deliberation_selections=["street party"])
        assert report["ledger"]["committed_mes_budget"] == 30000
        assert report["deliberation_track"] == ["street party"]
        with pytest.raises(WrongState):
            sess.commit_ratio(10000)
        with pytest.raises(WrongState):
            sess.rtr_vote("s1", "p1", "pre", 0)

    def test_finalized_session_still_serves_scenarios(self, sess):
        sess.commit_ratio(30000)
        sess.finalize()
        before = len(sess.state.events)
        view = sess.get_scenario(15000)
        assert view["mes_budget"] == 15000
        assert len(sess.state.events) == before  # read-only, not logged

    def test_ledger_conservation_through_full_run(self, sess):
        sess.commit_ratio(30000)
        pid = next(iter(sess.state.frozen))
        sess.adjust_project_budget(pid, 1)
        led = sess.state.ledger()
        assert led["committed_mes_budget"] + led["initial_remainder"] == led["total_budget"]
        assert led["deliberation_remainder"] == led["initial_remainder"] + led["freed_total"]


class TestReplay:
    def run_script(self, store, rng):
        """Drive a randomized but valid session to finalization."""
        sess = store.create(ELECTION)
        for _ in range(int(rng.integers(0, 4))):
            sess.get_scenario(int(rng.integers(0, 40001)))
        for _ in range(int(rng.integers(0, 6))):
            sess.rtr_vote(f"s{int(rng.integers(1, 3))}", f"p{int(rng.integers(1, 4))}",
                          rng.choice(["pre", "post"]), int(rng.integers(-2, 3)))
        sess.commit_ratio(int(rng.integers(0, 40001)))
        # vetoes come before adjustments: adjusting ends the veto round
        frozen = list(sess.state.frozen)
        rng.shuffle(frozen)
        fates = {pid: rng.random() for pid in frozen}
        for pid in frozen:
            if fates[pid] < 0.3:
                sess.veto_project(pid)
        for pid in frozen:
            if 0.3 <= fates[pid] < 0.6:
                sess.adjust_project_budget(pid, max(1, sess.state.frozen[pid].cost // 3))
        sess.finalize(deliberation_selections=["idea-a", "idea-b"])
        return sess

    def test_replay_reproduces_report_bytes(self, tmp_path):
        rng = np.random.default_rng(77)
        store = SessionStore(tmp_path)
        for _ in range(20):
            sess = self.run_script(store, rng)
            lines = [json.loads(l) for l in open(sess.log_path, encoding="utf-8")]
            twin = replay(lines[0], lines[1:])
            assert report_bytes(twin.state.final_report) == report_bytes(sess.state.final_report)

    def test_store_reload_from_disk(self, tmp_path):
        store = SessionStore(tmp_path)
        sess = store.create(ELECTION)
        sess.commit_ratio(30000)
        report = sess.finalize()
        fresh = SessionStore(tmp_path)
        twin = fresh.get(sess.state.id)
        assert twin.state.state == FINALIZED
        assert report_bytes(twin.state.final_report) == report_bytes(report)

    def test_reload_midway_session_continues(self, tmp_path):
        store = SessionStore(tmp_path)
        sess = store.create(ELECTION)
        sess.commit_ratio(30000)
        fresh = SessionStore(tmp_path)
        twin = fresh.get(sess.state.id)
        assert twin.state.state == RATIO_COMMITTED
        pid = next(iter(twin.state.frozen))
        twin.veto_project(pid)
        assert twin.state.state == VETO_ROUND

    def test_illegal_event_not_persisted(self, tmp_path):
        store = SessionStore(tmp_path)
        sess = store.create(ELECTION)
        with pytest.raises(WrongState):
            sess.veto_project("P1")
        lines = open(sess.log_path, encoding="utf-8").readlines()
        assert len(lines) == 1  # header only


class TestStore:
    def test_unknown_session(self, store):
        with pytest.raises(UnknownSession):
            store.get("missing")

    def test_sessions_are_independent(self, store):
        a = store.create(ELECTION)
        b = store.create(ELECTION)
        a.commit_ratio(30000)
        assert b.state.state == EXPLORING

    def test_memory_only_store(self):
        store = SessionStore(None)
        sess = store.create(ELECTION)
        sess.commit_ratio(30000)
        assert sess.log_path is None
