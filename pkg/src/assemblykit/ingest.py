"""On-disk formats: delimited text with a header row for tabular data,
JSON for structured records (outcomes, sessions, manifests).

Money is parsed as integers in minor units; a manifest's currency_unit
field declares the scale. Parsing is locale independent: decimal point
and comma separator are fixed.
"""

from __future__ import annotations

import csv
import json
import os
import threading
import warnings
from dataclasses import dataclass
from pathlib import Path

from ._rational import rat, rat_str
from .aggregation import RankingSheet
from .clustering import GroupAssignment, OpinionPoint
from .errors import OutOfScaleScore, ParseError
from .mes import GREEDY, MES, AllocationOutcome, SelectionRound
from .metrics import LIKERT_MAX, LIKERT_MIN, POST, PRE, LikertRecord
from .model import ApprovalBallot, Election, Project, Voter, validate_election

SCHEMA_VERSION = "1"

_write_locks: dict[str, threading.Lock] = {}
_registry_lock = threading.Lock()


def _file_lock(path) -> threading.Lock:
    key = str(Path(path).resolve())
    with _registry_lock:
        return _write_locks.setdefault(key, threading.Lock())


def atomic_write(path, text: str):
    """Exclusive per-file write: lock, write to a sibling temp file, rename."""
    path = Path(path)
    with _file_lock(path):
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)


def _read_rows(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as exc:
        raise ParseError(str(exc), path=path)
    if not rows:
        raise ParseError("empty file", path=path, line=1)
    return rows


def _int_field(value: str, what: str, path, line: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ParseError(f"{what} must be an integer, got {value!r}", path=path, line=line)


def load_projects(path) -> list[Project]:
    rows = _read_rows(path)
    header = [h.strip() for h in rows[0]]
    for col in ("id", "name", "cost"):
        if col not in header:
            raise ParseError(f"projects file missing column {col!r}", path=path, line=1)
    idx = {c: header.index(c) for c in ("id", "name", "cost")}
    projects = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        projects.append(Project(
            id=row[idx["id"]].strip(),
            name=row[idx["name"]].strip(),
            cost=_int_field(row[idx["cost"]].strip(), "cost", path, lineno),
        ))
    return projects


def load_ballots(path):
    """Read ballots in either supported shape, auto-detected.

    Long format: columns voter_id, project_id (one approval per row);
    extra columns become voter attributes. Wide format: voter_id first,
    then one 0/1 column per project id.

    Returns (voters, ballots).
    """
    rows = _read_rows(path)
    header = [h.strip() for h in rows[0]]
    if header[:1] != ["voter_id"]:
        raise ParseError("ballots file must start with a voter_id column", path=path, line=1)

    if "project_id" in header:
        pid_col = header.index("project_id")
        attr_cols = [(i, c) for i, c in enumerate(header) if c not in ("voter_id", "project_id")]
        approved: dict[str, set[str]] = {}
        attrs: dict[str, dict[str, str]] = {}
        order: list[str] = []
        for lineno, row in enumerate(rows[1:], start=2):
            if not row or all(not c.strip() for c in row):
                continue
            vid = row[0].strip()
            if vid not in approved:
                approved[vid] = set()
                attrs[vid] = {}
                order.append(vid)
            approved[vid].add(row[pid_col].strip())
            for i, col in attr_cols:
                if i < len(row) and row[i].strip():
                    attrs[vid][col] = row[i].strip()
        voters = [Voter(v, tuple(sorted(attrs[v].items()))) for v in order]
        ballots = [ApprovalBallot(v, frozenset(approved[v])) for v in order]
        return voters, ballots

    # wide 0/1 matrix
    project_ids = header[1:]
    voters, ballots = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        vid = row[0].strip()
        marks = set()
        for pid, cell in zip(project_ids, row[1:]):
            v = cell.strip()
            if v not in ("0", "1", ""):
                raise ParseError(f"wide ballot cell must be 0/1, got {v!r}", path=path, line=lineno)
            if v == "1":
                marks.add(pid)
        voters.append(Voter(vid))
        ballots.append(ApprovalBallot(vid, frozenset(marks)))
    return voters, ballots


def load_election(projects_file, ballots_file, total_budget: int) -> Election:
    """Load and validate an election from a projects file and a ballots
    file; the total budget comes from the caller (flag or manifest)."""
    projects = load_projects(projects_file)
    voters, ballots = load_ballots(ballots_file)
    return validate_election(Election(tuple(projects), tuple(voters), tuple(ballots), int(total_budget)))


def load_likert(path) -> list[LikertRecord]:
    """Read participant_id, statement_id, phase, score rows. Duplicate
    (participant, statement, phase) rows keep the last value and warn."""
    rows = _read_rows(path)
    header = [h.strip() for h in rows[0]]
    expected = ["participant_id", "statement_id", "phase", "score"]
    for col in expected:
        if col not in header:
            raise ParseError(f"likert file missing column {col!r}", path=path, line=1)
    idx = {c: header.index(c) for c in expected}
    seen: dict[tuple, LikertRecord] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        phase = row[idx["phase"]].strip().lower()
        if phase not in (PRE, POST):
            raise ParseError(f"phase must be pre/post, got {phase!r}", path=path, line=lineno)
        score = _int_field(row[idx["score"]].strip(), "score", path, lineno)
        if not (LIKERT_MIN <= score <= LIKERT_MAX):
            raise OutOfScaleScore(f"{path}:{lineno}: score {score} outside scale")
        rec = LikertRecord(row[idx["participant_id"]].strip(), row[idx["statement_id"]].strip(), phase, score)
        key = (rec.participant_id, rec.statement_id, rec.phase)
        if key in seen:
            warnings.warn(f"duplicate likert row for {key}, keeping the last", stacklevel=2)
        seen[key] = rec
    return list(seen.values())


def save_likert(path, records):
    lines = ["participant_id,statement_id,phase,score"]
    for r in records:
        lines.append(f"{r.participant_id},{r.statement_id},{r.phase},{r.score}")
    atomic_write(path, "\n".join(lines) + "\n")


def load_rankings(path) -> list[RankingSheet]:
    """Read round, group, rank, project_id rows into per-group sheets."""
    rows = _read_rows(path)
    header = [h.strip() for h in rows[0]]
    expected = ["round", "group", "rank", "project_id"]
    for col in expected:
        if col not in header:
            raise ParseError(f"rankings file missing column {col!r}", path=path, line=1)
    idx = {c: header.index(c) for c in expected}
    sheets: dict[tuple[str, str], list[tuple[int, str]]] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        rnd = row[idx["round"]].strip().lower()
        group = row[idx["group"]].strip()
        rank = _int_field(row[idx["rank"]].strip(), "rank", path, lineno)
        sheets.setdefault((rnd, group), []).append((rank, row[idx["project_id"]].strip()))
    out = []
    for (rnd, group), entries in sheets.items():
        entries.sort()
        out.append(RankingSheet(rnd, group, tuple(pid for _, pid in entries)))
    return out


def save_rankings(path, sheets):
    lines = ["round,group,rank,project_id"]
    for sheet in sheets:
        for rank, pid in enumerate(sheet.ranked_projects, start=1):
            lines.append(f"{sheet.round},{sheet.group_label},{rank},{pid}")
    atomic_write(path, "\n".join(lines) + "\n")


def load_polis_matrix(path):
    """Read a voters x statements matrix of -1/0/+1 votes. Blank cells are
    missing and imputed to 0 (abstain) before any projection.

    Returns (matrix as list of lists, voter_ids, statement_ids,
    imputed_count).
    """
    rows = _read_rows(path)
    header = [h.strip() for h in rows[0]]
    statements = header[1:]
    voter_ids, matrix = [], []
    imputed = 0
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        voter_ids.append(row[0].strip())
        values = []
        for cell in row[1:]:
            v = cell.strip()
            if v == "":
                imputed += 1
                values.append(0)
            elif v in ("-1", "0", "1", "+1"):
                values.append(int(v))
            else:
                raise ParseError(f"polis cell must be -1/0/+1 or blank, got {v!r}", path=path, line=lineno)
        if len(values) != len(statements):
            raise ParseError("row length does not match header", path=path, line=lineno)
        matrix.append(values)
    return matrix, voter_ids, statements, imputed


# --- structured records (JSON) ---------------------------------------------

def election_to_dict(e: Election) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "projects": [{"id": p.id, "name": p.name, "cost": p.cost} for p in e.projects],
        "voters": [{"id": v.id, "attributes": v.attribute_map()} for v in e.voters],
        "ballots": [{"voter_id": b.voter_id, "approved": sorted(b.approved)} for b in e.ballots],
        "total_budget": e.total_budget,
    }


def election_from_dict(d: dict) -> Election:
    return validate_election(d)


def outcome_to_dict(o: AllocationOutcome) -> dict:
    d = {
        "schema_version": SCHEMA_VERSION,
        "method": o.method,
        "total_spent": o.total_spent,
        "rounds": [
            {
                "project": r.project_id,
                "q": rat_str(r.price_q) if r.price_q is not None else None,
                "payments": {v: rat_str(x) for v, x in sorted(r.payments.items())},
            }
            for r in o.winners
        ],
    }
    if o.method == MES:
        d["start_budget_per_voter"] = rat_str(o.start_budget_per_voter)
        d["leftover_budgets"] = {v: rat_str(x) for v, x in sorted(o.leftover_budgets.items())}
    return d


def outcome_from_dict(d: dict) -> AllocationOutcome:
    rounds = tuple(
        SelectionRound(
            r["project"],
            rat(r["q"]) if r.get("q") is not None else None,
            {v: rat(x) for v, x in r.get("payments", {}).items()},
        )
        for r in d["rounds"]
    )
    is_mes = d["method"] == MES
    return AllocationOutcome(
        method=d["method"],
        winners=rounds,
        start_budget_per_voter=rat(d["start_budget_per_voter"]) if is_mes else None,
        total_spent=int(d["total_spent"]),
        leftover_budgets={v: rat(x) for v, x in d["leftover_budgets"].items()} if is_mes else None,
    )


def save_outcome(path, o: AllocationOutcome):
    atomic_write(path, json.dumps(outcome_to_dict(o), indent=2, sort_keys=True) + "\n")


def load_outcome(path) -> AllocationOutcome:
    try:
        with open(path, encoding="utf-8") as fh:
            return outcome_from_dict(json.load(fh))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(str(exc), path=path)


def save_points(path, points):
    lines = ["voter_id,pc1,pc2,theta_deg,at_centroid"]
    for p in points:
        lines.append(f"{p.voter_id},{p.pc1!r},{p.pc2!r},{p.theta_deg!r},{int(p.at_centroid)}")
    atomic_write(path, "\n".join(lines) + "\n")


def load_points(path) -> list[OpinionPoint]:
    rows = _read_rows(path)
    out = []
    for row in rows[1:]:
        if not row or all(not c.strip() for c in row):
            continue
        out.append(OpinionPoint(row[0], float(row[1]), float(row[2]), float(row[3]), bool(int(row[4]))))
    return out


def save_assignment(path, assignment: GroupAssignment):
    lines = ["round,group,position,voter_id"]
    for label, members in assignment.groups.items():
        for pos, vid in enumerate(members):
            lines.append(f"{assignment.round},{label},{pos},{vid}")
    atomic_write(path, "\n".join(lines) + "\n")


def load_assignment(path) -> GroupAssignment:
    rows = _read_rows(path)
    rnd = None
    groups: dict[str, list[tuple[int, str]]] = {}
    for row in rows[1:]:
        if not row or all(not c.strip() for c in row):
            continue
        rnd = row[0]
        groups.setdefault(row[1], []).append((int(row[2]), row[3]))
    fixed = {g: tuple(v for _, v in sorted(members)) for g, members in groups.items()}
    return GroupAssignment(rnd, fixed, None)


@dataclass(frozen=True)
class FileManifest:
    """Paths and formats of an input bundle."""
    schema_version: str
    currency_unit: str
    files: dict[str, str]  # role -> path (relative to the manifest)
    total_budget: int | None = None


def load_manifest(path) -> FileManifest:
    base = Path(path).parent
    try:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(str(exc), path=path)
    version = str(d.get("schema_version", ""))
    if version != SCHEMA_VERSION:
        raise ParseError(f"unrecognized schema_version {version!r}", path=path)
    files = {role: str(base / rel) for role, rel in d.get("files", {}).items()}
    for role, p in files.items():
        if not Path(p).exists():
            raise ParseError(f"manifest references missing file {p!r} ({role})", path=path)
    budget = d.get("total_budget")
    return FileManifest(version, str(d.get("currency_unit", "minor")), files,
                        int(budget) if budget is not None else None)
