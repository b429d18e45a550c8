"""Balanced deliberation groups from a 2-D projection of approval ballots.

Voters are projected onto the top two principal components of their
ballot matrix, given an angular position around the centroid, and split
into equally sized, angularly contiguous sectors ("pizza slices") for
the homogeneous round. The heterogeneous round redistributes members
round-robin across those sectors.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateData, TooFewVoters

HOMOGENEOUS = "homogeneous"
HETEROGENEOUS = "heterogeneous"

_POWER_TOL = 1e-9
_POWER_MAX_ITER = 1000
_RANK_EPS = 1e-12


@dataclass(frozen=True)
class OpinionPoint:
    voter_id: str
    pc1: float
    pc2: float
    theta_deg: float  # in [0, 360)
    at_centroid: bool = False  # theta assigned by hash fallback


@dataclass(frozen=True)
class GroupAssignment:
    round: str  # HOMOGENEOUS or HETEROGENEOUS
    groups: dict[str, tuple[str, ...]]  # label -> voter ids
    sector_bounds: tuple[tuple[float, float], ...] | None  # homogeneous only

    def sizes(self) -> dict[str, int]:
        return {g: len(m) for g, m in self.groups.items()}


def _power_iteration(cov: np.ndarray, seed_vec: np.ndarray) -> tuple[float, np.ndarray]:
    v = seed_vec / np.linalg.norm(seed_vec)
    for _ in range(_POWER_MAX_ITER):
        w = cov @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0, v
        w = w / norm
        # successive-iterate angle, sign-insensitive
        if 1.0 - abs(float(v @ w)) < _POWER_TOL:
            v = w
            break
        v = w
    eigval = float(v @ (cov @ v))
    return eigval, v


def _hash_angle(voter_id: str) -> float:
    h = hashlib.sha256(voter_id.encode("utf-8")).digest()
    return int.from_bytes(h[:8], "big") / 2**64 * 360.0


def top2_components(matrix: np.ndarray, standardize: bool = False):
    """Top-2 principal axes of a voters x items matrix by power iteration
    with deflation. Returns (scores n x 2, components 2 x m, eigvals).

    Raises DegenerateData when the second eigenvalue is below 1e-12.
    """
    x = np.asarray(matrix, dtype=float)
    n, m = x.shape
    if n < 2 or m < 2:
        raise DegenerateData("need at least 2 voters and 2 items")
    centered = x - x.mean(axis=0)
    if standardize:
        sd = centered.std(axis=0, ddof=0)
        sd[sd == 0.0] = 1.0
        centered = centered / sd
    cov = centered.T @ centered / (n - 1)

    rng = np.random.default_rng(12345)
    comps = []
    eigvals = []
    deflated = cov.copy()
    for _ in range(2):
        lam, v = _power_iteration(deflated, rng.standard_normal(m))
        # sign convention: largest-magnitude loading positive
        pivot = int(np.argmax(np.abs(v)))
        if v[pivot] < 0:
            v = -v
        comps.append(v)
        eigvals.append(lam)
        deflated = deflated - lam * np.outer(v, v)
    if eigvals[1] < _RANK_EPS:
        raise DegenerateData(f"second eigenvalue {eigvals[1]:.3e} below rank threshold")
    components = np.vstack(comps)
    scores = centered @ components.T
    return scores, components, np.array(eigvals)


def project_2d(ballot_matrix, voter_ids=None, standardize: bool = False,
               on_degenerate: str = "raise") -> list[OpinionPoint]:
    """Project a voters x projects 0/1 matrix into 2-D opinion points.

    theta is the angle around the mean position, normalized to [0, 360).
    Voters exactly at the centroid get a stable hash-derived angle and are
    flagged. With on_degenerate="fallback", rank-1 data maps to theta 0 or
    180 by sign of the first component instead of raising.
    """
    x = np.asarray(ballot_matrix, dtype=float)
    n = x.shape[0]
    if voter_ids is None:
        voter_ids = [str(i) for i in range(n)]
    try:
        scores, _, _ = top2_components(x, standardize=standardize)
    except DegenerateData:
        if on_degenerate != "fallback":
            raise
        centered = x - x.mean(axis=0)
        cov = centered.T @ centered / max(n - 1, 1)
        rng = np.random.default_rng(12345)
        _, v = _power_iteration(cov, rng.standard_normal(x.shape[1]))
        pivot = int(np.argmax(np.abs(v)))
        if v[pivot] < 0:
            v = -v
        pc1 = centered @ v
        scores = np.column_stack([pc1, np.zeros(n)])

    mean1 = float(scores[:, 0].mean())
    mean2 = float(scores[:, 1].mean())
    points = []
    for i, vid in enumerate(voter_ids):
        d1 = float(scores[i, 0]) - mean1
        d2 = float(scores[i, 1]) - mean2
        if d1 == 0.0 and d2 == 0.0:
            points.append(OpinionPoint(vid, float(scores[i, 0]), float(scores[i, 1]),
                                       _hash_angle(vid), at_centroid=True))
            continue
        theta = math.degrees(math.atan2(d2, d1)) % 360.0
        points.append(OpinionPoint(vid, float(scores[i, 0]), float(scores[i, 1]), theta))
    return points


def _group_labels(k: int) -> list[str]:
    labels = []
    for i in range(k):
        label = ""
        j = i
        while True:
            label = chr(ord("A") + j % 26) + label
            j = j // 26 - 1
            if j < 0:
                break
        labels.append(label)
    return labels


def radial_partition(points: list[OpinionPoint], k: int) -> GroupAssignment:
    """Split voters into k balanced, angularly contiguous sectors.

    Voters are sorted by angle; the sweep starts just after the largest
    angular gap between consecutive voters (ties: smallest start angle)
    and assigns runs of size ceil(n/k) for the first n mod k groups, then
    floor(n/k). Labels A, B, C, ... follow the angular order.
    """
    n = len(points)
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < k:
        raise TooFewVoters(f"{n} voters for {k} groups")

    ordered = sorted(points, key=lambda p: (p.theta_deg, p.voter_id))
    # gap after position i: angle from voter i to voter i+1 (wrapping)
    best_start, best_gap = 0, -1.0
    for i in range(n):
        nxt = (i + 1) % n
        gap = ordered[nxt].theta_deg - ordered[i].theta_deg
        if nxt == 0:
            gap += 360.0
        start_angle = ordered[nxt].theta_deg
        if gap > best_gap or (gap == best_gap and start_angle < ordered[best_start].theta_deg):
            best_gap, best_start = gap, nxt

    sweep = ordered[best_start:] + ordered[:best_start]
    big, rem = divmod(n, k)
    sizes = [big + 1] * rem + [big] * (k - rem)

    labels = _group_labels(k)
    groups: dict[str, tuple[str, ...]] = {}
    bounds = []
    pos = 0
    for label, size in zip(labels, sizes):
        run = sweep[pos:pos + size]
        groups[label] = tuple(p.voter_id for p in run)
        bounds.append((run[0].theta_deg, run[-1].theta_deg))
        pos += size
    return GroupAssignment(HOMOGENEOUS, groups, tuple(bounds))


def mix_groups(h: GroupAssignment) -> GroupAssignment:
    """Heterogeneous round: the j-th member (in angular order) of
    homogeneous group g joins heterogeneous group (g + j) mod k. When all
    homogeneous groups have size k this is a Latin square: every output
    group holds exactly one member per source group.
    """
    if h.round != HOMOGENEOUS:
        raise ValueError("mix_groups expects a homogeneous assignment")
    source = list(h.groups.values())
    k = len(source)
    mixed: list[list[str]] = [[] for _ in range(k)]
    for g, members in enumerate(source):
        for j, voter in enumerate(members):
            mixed[(g + j) % k].append(voter)
    groups = {str(i + 1): tuple(m) for i, m in enumerate(mixed)}
    return GroupAssignment(HETEROGENEOUS, groups, None)
