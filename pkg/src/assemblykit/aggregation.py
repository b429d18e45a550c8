"""Rank-sheet aggregation: Borda points, budget-capped selection with
round-provenance tags, and voter/group alignment scores.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .clustering import HOMOGENEOUS
from .errors import DuplicateProjectInRanking
from .model import Election

HM = "HM"
HT = "HT"
HM_HT = "HM/HT"

DEFAULT_RANKS = 5


@dataclass(frozen=True)
class RankingSheet:
    round: str  # clustering.HOMOGENEOUS or HETEROGENEOUS
    group_label: str
    ranked_projects: tuple[str, ...]


@dataclass(frozen=True)
class TallyRow:
    project_id: str
    hm_points: int
    ht_points: int
    sheets: int  # how many sheets listed the project (tie-break input)
    selected: bool
    tag: str | None  # HM / HT / HM/HT, selected projects only

    @property
    def total(self) -> int:
        return self.hm_points + self.ht_points


@dataclass(frozen=True)
class AlignmentScore:
    voter_id: str
    round: str
    score: Fraction


def borda_points(sheet: RankingSheet) -> dict[str, int]:
    """Rank r (1-based) of R gets R - r + 1 points (1st: R, last: 1)."""
    ranked = sheet.ranked_projects
    if len(set(ranked)) != len(ranked):
        dupes = sorted({p for p in ranked if ranked.count(p) > 1})
        raise DuplicateProjectInRanking(f"{sheet.round}/{sheet.group_label}: {dupes}")
    r = len(ranked)
    return {pid: r - i for i, pid in enumerate(ranked)}


def select_by_points(e: Election, sheets: list[RankingSheet], budget: int):
    """Aggregate Borda points across all sheets and both rounds, then walk
    projects by total points descending (ties: more sheets listing it,
    lower cost, then id), selecting any project whose cost still fits
    (skip-and-continue). Returns (winner ids in selection order, tally).

    Selected projects are tagged by which round carried them: HM when the
    homogeneous points exceed the heterogeneous ones, HT for the reverse,
    HM/HT on equal points.
    """
    projects = e.project_map()
    hm: dict[str, int] = {}
    ht: dict[str, int] = {}
    listed: dict[str, int] = {}
    for sheet in sheets:
        side = hm if sheet.round == HOMOGENEOUS else ht
        for pid, pts in borda_points(sheet).items():
            if pid not in projects:
                raise KeyError(f"ranking names unknown project {pid!r}")
            side[pid] = side.get(pid, 0) + pts
            listed[pid] = listed.get(pid, 0) + 1

    order = sorted(
        listed,
        key=lambda pid: (-(hm.get(pid, 0) + ht.get(pid, 0)), -listed[pid], projects[pid].cost, pid),
    )
    remaining = budget
    winners: list[str] = []
    chosen: set[str] = set()
    for pid in order:
        if projects[pid].cost <= remaining:
            remaining -= projects[pid].cost
            winners.append(pid)
            chosen.add(pid)

    tally = []
    for pid in order:
        a, b = hm.get(pid, 0), ht.get(pid, 0)
        tag = None
        if pid in chosen:
            tag = HM if a > b else HT if b > a else HM_HT
        tally.append(TallyRow(pid, a, b, listed[pid], pid in chosen, tag))
    return winners, tally


def alignment(e: Election, group_winners: dict[str, dict[str, set[str]]],
              weights: dict[str, Fraction] | None = None):
    """Alignment score per voter per round.

    group_winners maps round -> voter_id -> set of projects selected by
    that voter's group. A voter's score is sum of weights of approved
    projects the group also selected, divided by the number of projects
    the voter approved. Default weight 1 per project (pure proportion);
    pass normalized Borda weights for the points-weighted mode.

    Voters with an empty approval set are excluded and returned separately
    rather than scored 0 (the quotient is undefined for them).

    Returns (scores, excluded_voter_ids).
    """
    ballots = e.ballot_map()
    scores: list[AlignmentScore] = []
    excluded: list[str] = []
    for rnd, per_voter in group_winners.items():
        for vid, selected in per_voter.items():
            approved = ballots.get(vid, frozenset())
            if not approved:
                if vid not in excluded:
                    excluded.append(vid)
                continue
            hits = approved & selected
            if weights is None:
                num = Fraction(len(hits))
            else:
                num = sum((Fraction(weights[p]) for p in hits), Fraction(0))
            scores.append(AlignmentScore(vid, rnd, num / len(approved)))
    return scores, excluded


def borda_weights(tally: list[TallyRow]) -> dict[str, Fraction]:
    """Normalized project weights for the points-weighted alignment mode:
    total points divided by the maximum total."""
    top = max((row.total for row in tally), default=0)
    if top == 0:
        return {row.project_id: Fraction(0) for row in tally}
    return {row.project_id: Fraction(row.total, top) for row in tally}
