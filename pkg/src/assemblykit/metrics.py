"""Deliberation outcome metrics: opinion-shift statistics over paired
pre/post Likert votes, allocation inequality (Gini), and the two
nonparametric significance tests used to compare distributions.

Dispersion uses the population standard deviation throughout: these
numbers describe the room that voted, not an estimator of a larger
population. Where two plausible definitions of a metric circulate
(polarisation, consensus), both variants are computed and labeled
side by side rather than silently picking one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import (
    AllZeroDifferences,
    EmptySample,
    NoPairedParticipants,
    OutOfScaleScore,
)

LIKERT_MIN, LIKERT_MAX = -2, 2
LIKERT_RANGE = LIKERT_MAX - LIKERT_MIN
PRE, POST = "pre", "post"

EXACT_LIMIT = 20  # max sample size for exact test enumeration


@dataclass(frozen=True)
class LikertRecord:
    participant_id: str
    statement_id: str
    phase: str  # PRE or POST
    score: int  # in [-2, 2]

    def __post_init__(self):
        if self.phase not in (PRE, POST):
            raise ValueError(f"phase must be pre/post, got {self.phase!r}")
        if not (LIKERT_MIN <= self.score <= LIKERT_MAX):
            raise OutOfScaleScore(f"score {self.score} outside [{LIKERT_MIN}, {LIKERT_MAX}]")


@dataclass(frozen=True)
class StatementShift:
    statement_id: str
    n_paired: int
    n_unpaired: int  # data-quality note: votes dropped for missing a phase
    percent_changed: float
    polarisation_normalized_pre: float
    polarisation_normalized_post: float
    polarisation_ratio: float  # inf when pre std is 0 (flagged undefined)
    consensus_majority_pre: float
    consensus_majority_post: float
    consensus_inverse_std_pre: float
    consensus_inverse_std_post: float
    mean_pre: float
    mean_post: float
    mean_change: float


def pair_records(records) -> tuple[dict[str, tuple[int, int]], int]:
    """Pair one statement's records by participant. Returns
    (participant -> (pre, post), unpaired vote count). Only participants
    voting in both phases count."""
    pre: dict[str, int] = {}
    post: dict[str, int] = {}
    for r in records:
        (pre if r.phase == PRE else post)[r.participant_id] = r.score
    paired = {p: (pre[p], post[p]) for p in pre if p in post}
    unpaired = (len(pre) - len(paired)) + (len(post) - len(paired))
    return paired, unpaired


def _pop_std(values) -> float:
    n = len(values)
    mean = sum(values) / n
    return math.sqrt(sum((v - mean) ** 2 for v in values) / n)


def percent_changed(paired: dict[str, tuple[int, int]]) -> float:
    """Share of paired participants whose post score differs from pre, in %."""
    if not paired:
        raise NoPairedParticipants("no participant voted in both phases")
    moved = sum(1 for a, b in paired.values() if a != b)
    return 100.0 * moved / len(paired)


def polarisation(scores, variant: str = "normalized", pre_scores=None) -> float:
    """Opinion dispersion.

    variant="normalized": population std of one phase divided by the scale
    range (4). variant="ratio": post std divided by pre std; pass the post
    phase as `scores` and the pre phase as `pre_scores`. A zero pre std
    makes the ratio undefined and is reported as inf.
    """
    if variant == "normalized":
        return _pop_std(list(scores)) / LIKERT_RANGE
    if variant == "ratio":
        pre_std = _pop_std(list(pre_scores))
        if pre_std == 0.0:
            return math.inf
        return _pop_std(list(scores)) / pre_std
    raise ValueError(f"unknown polarisation variant {variant!r}")


def consensus(scores, variant: str = "majority") -> float:
    """Group alignment for one phase.

    variant="majority": share of responses matching the modal score.
    variant="inverse_std": 1 / (1 + population std).
    """
    values = list(scores)
    if not values:
        raise NoPairedParticipants("no scores")
    if variant == "majority":
        top = max(values.count(v) for v in set(values))
        return top / len(values)
    if variant == "inverse_std":
        return 1.0 / (1.0 + _pop_std(values))
    raise ValueError(f"unknown consensus variant {variant!r}")


def mean_change(paired: dict[str, tuple[int, int]]) -> tuple[float, float, float]:
    """(mean pre, mean post, post - pre) over paired participants."""
    if not paired:
        raise NoPairedParticipants("no participant voted in both phases")
    pre = [a for a, _ in paired.values()]
    post = [b for _, b in paired.values()]
    m_pre = sum(pre) / len(pre)
    m_post = sum(post) / len(post)
    return m_pre, m_post, m_post - m_pre


def shift_report(records) -> list[StatementShift]:
    """Per-statement shift metrics over the paired participants, all
    variants labeled, sorted by statement id."""
    by_stmt: dict[str, list[LikertRecord]] = {}
    for r in records:
        by_stmt.setdefault(r.statement_id, []).append(r)

    out = []
    for sid in sorted(by_stmt):
        paired, unpaired = pair_records(by_stmt[sid])
        if not paired:
            raise NoPairedParticipants(f"statement {sid!r} has no paired votes")
        pre = [a for a, _ in paired.values()]
        post = [b for _, b in paired.values()]
        m_pre, m_post, delta = mean_change(paired)
        out.append(StatementShift(
            statement_id=sid,
            n_paired=len(paired),
            n_unpaired=unpaired,
            percent_changed=percent_changed(paired),
            polarisation_normalized_pre=polarisation(pre, "normalized"),
            polarisation_normalized_post=polarisation(post, "normalized"),
            polarisation_ratio=polarisation(post, "ratio", pre_scores=pre),
            consensus_majority_pre=consensus(pre, "majority"),
            consensus_majority_post=consensus(post, "majority"),
            consensus_inverse_std_pre=consensus(pre, "inverse_std"),
            consensus_inverse_std_post=consensus(post, "inverse_std"),
            mean_pre=m_pre,
            mean_post=m_post,
            mean_change=delta,
        ))
    return out


def gini(values) -> float:
    """Mean absolute pairwise difference over twice the mean; 0 for equal
    allocations, 0 by convention when everything is zero."""
    xs = sorted(values)
    n = len(xs)
    if n == 0:
        raise ValueError("gini of empty list")
    total = sum(xs)
    if total == 0:
        return 0.0
    # sum_i sum_j |xi - xj| = 2 * sum_i (2i - n + 1) * x_(i), xs ascending
    abs_sum = 2.0 * sum((2 * i - n + 1) * x for i, x in enumerate(xs))
    return abs_sum / (2.0 * n * total)


def _midranks(values) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for t in range(i, j + 1):
            ranks[order[t]] = avg
        i = j + 1
    return ranks


def _tie_sizes(values) -> list[int]:
    counts: dict = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    return [c for c in counts.values() if c > 1]


@lru_cache(maxsize=None)
def _u_count(n1: int, n2: int, u: int) -> int:
    """Number of rank arrangements of n1 vs n2 untied values with U statistic u."""
    if u < 0:
        return 0
    if n1 == 0 or n2 == 0:
        return 1 if u == 0 else 0
    return _u_count(n1 - 1, n2, u - n2) + _u_count(n1, n2 - 1, u)


def _norm_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def mann_whitney_u(a, b) -> tuple[float, float]:
    """Mann-Whitney U (first sample) and two-sided p.

    Exact enumeration when n_a + n_b <= 20 and there are no ties across
    the pooled sample; otherwise normal approximation with tie and
    continuity corrections.
    """
    a, b = list(a), list(b)
    if not a or not b:
        raise EmptySample("both samples must be non-empty")
    n1, n2 = len(a), len(b)
    ranks = _midranks(a + b)
    r1 = sum(ranks[:n1])
    u1 = r1 - n1 * (n1 + 1) / 2
    u2 = n1 * n2 - u1

    ties = _tie_sizes(a + b)
    if n1 + n2 <= EXACT_LIMIT and not ties:
        u_min = int(round(min(u1, u2)))
        total = math.comb(n1 + n2, n1)
        cdf = sum(_u_count(n1, n2, u) for u in range(u_min + 1))
        p = min(1.0, 2.0 * cdf / total)
        return u1, p

    n = n1 + n2
    tie_term = sum(t**3 - t for t in ties)
    sd = math.sqrt(n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1))))
    if sd == 0.0:
        return u1, 1.0
    mean = n1 * n2 / 2.0
    z = (max(u1, u2) - mean - 0.5) / sd  # continuity correction
    return u1, min(1.0, 2.0 * _norm_sf(z))


@lru_cache(maxsize=None)
def _w_counts(ranks: tuple[int, ...]) -> tuple[int, ...]:
    """Distribution of the positive-rank sum over all 2^n sign
    assignments. Ranks are doubled midranks, so they are integers even
    with ties."""
    total = sum(ranks)
    dist = [0] * (total + 1)
    dist[0] = 1
    for r in ranks:
        nxt = dist[:]
        for w in range(total - r + 1):
            if dist[w]:
                nxt[w + r] += dist[w]
        dist = nxt
    return tuple(dist)


def wilcoxon_signed_rank(pre, post) -> tuple[float, float]:
    """Wilcoxon signed-rank W (min of signed-rank sums) and two-sided p.

    Zero differences are dropped. Exact enumeration of sign assignments
    for <= 20 nonzero pairs (midranks handle tied absolute differences);
    otherwise normal approximation with tie and continuity corrections.
    """
    pre, post = list(pre), list(post)
    if len(pre) != len(post):
        raise ValueError("pre and post must have equal length")
    diffs = [b - a for a, b in zip(pre, post) if b != a]
    if not diffs:
        raise AllZeroDifferences("all pairs are unchanged")
    n = len(diffs)
    absd = [abs(d) for d in diffs]
    ranks = _midranks(absd)
    w_plus = sum(r for r, d in zip(ranks, diffs) if d > 0)
    w_minus = sum(r for r, d in zip(ranks, diffs) if d < 0)
    w = min(w_plus, w_minus)

    if n <= EXACT_LIMIT:
        doubled = tuple(sorted(int(round(2 * r)) for r in ranks))
        dist = _w_counts(doubled)
        cdf = sum(dist[: int(round(2 * w)) + 1])
        p = min(1.0, 2.0 * cdf / 2**n)
        return w, p

    ties = _tie_sizes(absd)
    mean = n * (n + 1) / 4.0
    tie_term = sum(t**3 - t for t in ties)
    sd = math.sqrt(n * (n + 1) * (2 * n + 1) / 24.0 - tie_term / 48.0)
    if sd == 0.0:
        return w, 1.0
    z = (w - mean + 0.5) / sd  # w <= mean, continuity toward the mean
    return w, min(1.0, 2.0 * _norm_sf(abs(z)))


def format_p(p: float) -> str:
    """p-values print with 5 decimals (e.g. 0.22715)."""
    return f"{p:.5f}"
