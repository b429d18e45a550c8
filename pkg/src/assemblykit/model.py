"""Core domain types: projects, voters, approval ballots, elections.

All money amounts are integers in minor currency units (e.g. centimes).
Values are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationError


@dataclass(frozen=True)
class Project:
    id: str
    name: str
    cost: int  # minor units, > 0


@dataclass(frozen=True)
class Voter:
    id: str
    # Free-form tags (age band, gender, ...) used for post-hoc segmentation
    # only; they never influence any allocation operation.
    attributes: tuple[tuple[str, str], ...] = ()

    def attribute_map(self) -> dict[str, str]:
        return dict(self.attributes)


@dataclass(frozen=True)
class ApprovalBallot:
    voter_id: str
    approved: frozenset[str]


@dataclass(frozen=True)
class Election:
    projects: tuple[Project, ...]
    voters: tuple[Voter, ...]
    ballots: tuple[ApprovalBallot, ...]
    total_budget: int

    def project_map(self) -> dict[str, Project]:
        return {p.id: p for p in self.projects}

    def ballot_map(self) -> dict[str, frozenset[str]]:
        return {b.voter_id: b.approved for b in self.ballots}

    def approvers(self) -> dict[str, list[str]]:
        """project_id -> voter ids approving it, in voter order."""
        out: dict[str, list[str]] = {p.id: [] for p in self.projects}
        by_voter = self.ballot_map()
        for v in self.voters:
            for pid in by_voter.get(v.id, frozenset()):
                out[pid].append(v.id)
        return out


def _as_election(raw) -> Election:
    if isinstance(raw, Election):
        return raw
    projects = tuple(
        p if isinstance(p, Project) else Project(str(p["id"]), str(p.get("name", p["id"])), int(p["cost"]))
        for p in raw["projects"]
    )
    voters = tuple(
        v if isinstance(v, Voter) else Voter(str(v["id"]), tuple(sorted((str(k), str(x)) for k, x in v.get("attributes", {}).items())))
        for v in raw["voters"]
    )
    ballots = tuple(
        b if isinstance(b, ApprovalBallot) else ApprovalBallot(str(b["voter_id"]), frozenset(str(x) for x in b["approved"]))
        for b in raw["ballots"]
    )
    return Election(projects, voters, ballots, int(raw["total_budget"]))


def validate_election(raw) -> Election:
    """Validate an election (or election-like mapping) and return it.

    Validation is total: every violation is collected and reported in a
    single ValidationError rather than stopping at the first problem.
    Idempotent: validating an already valid Election returns an equal value.
    """
    e = _as_election(raw)
    violations: list[str] = []

    seen_p: set[str] = set()
    for p in e.projects:
        if p.id in seen_p:
            violations.append(f"DuplicateId: project {p.id!r}")
        seen_p.add(p.id)
        if p.cost <= 0:
            violations.append(f"NonPositiveCost: project {p.id!r} has cost {p.cost}")

    seen_v: set[str] = set()
    for v in e.voters:
        if v.id in seen_v:
            violations.append(f"DuplicateId: voter {v.id!r}")
        seen_v.add(v.id)

    seen_b: set[str] = set()
    for b in e.ballots:
        if b.voter_id in seen_b:
            violations.append(f"DuplicateId: second ballot for voter {b.voter_id!r}")
        seen_b.add(b.voter_id)
        if b.voter_id not in seen_v:
            violations.append(f"DanglingReference: ballot names unknown voter {b.voter_id!r}")
        for pid in sorted(b.approved):
            if pid not in seen_p:
                violations.append(f"DanglingReference: ballot of {b.voter_id!r} approves unknown project {pid!r}")

    if e.total_budget < 0:
        violations.append(f"NegativeBudget: total budget {e.total_budget}")

    if violations:
        raise ValidationError(violations)
    return e


def approval_counts(e: Election) -> dict[str, int]:
    """Number of ballots approving each project; 0 for unapproved projects."""
    counts = {p.id: 0 for p in e.projects}
    for b in e.ballots:
        for pid in b.approved:
            counts[pid] += 1
    return counts
