"""Shared test helpers: an independent brute-force reimplementation of the
equal-shares round (subset enumeration of price candidates, no sorted
walk) and random election generators. The oracle must stay independent
of the production code path it checks.
"""

from fractions import Fraction
from itertools import combinations

from assemblykit.model import ApprovalBallot, Election, Project, Voter, approval_counts


def oracle_round_price(cost, supporter_budgets):
    """Minimal price q by enumerating all saturated-subset candidates.

    For each subset S of supporters assumed to pay their full remaining
    budget, the candidate price is (cost - sum(S)) / |rest|; it is valid
    when everyone in S has budget <= q and everyone else has budget >= q.
    Returns the minimal valid q, or None when the project is unaffordable.
    """
    sup = list(supporter_budgets)
    best = None
    for r in range(len(sup)):
        for sat in combinations(range(len(sup)), r):
            sat_set = set(sat)
            paid = sum(sup[i] for i in sat)
            rest = [sup[i] for i in range(len(sup)) if i not in sat_set]
            q = Fraction(cost - paid, len(rest))
            if q < 0:
                continue
            if all(sup[i] <= q for i in sat) and all(b >= q for b in rest):
                if best is None or q < best:
                    best = q
    return best


def oracle_mes_fixed_start(e: Election, start):
    """Brute-force equal-shares run: same tie-break chain, independent q
    computation. Returns list of (project_id, q, payments dict) rounds."""
    counts = approval_counts(e)
    approvers = e.approvers()
    projects = {p.id: p for p in e.projects}
    budgets = {v.id: Fraction(start) for v in e.voters}
    remaining = sorted(projects)
    rounds = []
    while True:
        candidates = {}
        for pid in remaining:
            sup = approvers[pid]
            if not sup:
                continue
            q = oracle_round_price(projects[pid].cost, [budgets[v] for v in sup])
            if q is not None:
                candidates[pid] = q
        if not candidates:
            return rounds
        winner = min(candidates,
                     key=lambda pid: (candidates[pid], -counts[pid], projects[pid].cost, pid))
        q = candidates[winner]
        payments = {v: min(budgets[v], q) for v in approvers[winner]}
        for v, pay in payments.items():
            budgets[v] -= pay
        rounds.append((winner, q, payments))
        remaining.remove(winner)


def random_election(rng, max_voters=6, max_projects=5, max_cost=5, max_budget=10,
                    approve_p=0.5):
    n = rng.integers(1, max_voters + 1)
    m = rng.integers(1, max_projects + 1)
    projects = tuple(
        Project(f"p{j}", f"p{j}", int(rng.integers(1, max_cost + 1))) for j in range(m)
    )
    voters = tuple(Voter(f"v{i}") for i in range(n))
    ballots = tuple(
        ApprovalBallot(v.id, frozenset(p.id for p in projects if rng.random() < approve_p))
        for v in voters
    )
    budget = int(rng.integers(0, max_budget + 1))
    return Election(projects, voters, ballots, budget)


def bloc_election(rng, n_voters=30, n_projects=20, bloc_count=3,
                  cost_range=(100, 500), budget=2000):
    """Clustered preference population: voters belong to blocs of unequal
    size; each bloc strongly approves its own project slice and rarely
    others. Majority blocs dominate greedy counts, which is the regime
    where the equal-shares rule redistributes."""
    sizes = []
    left = n_voters
    for b in range(bloc_count - 1):
        share = int(round(left * (0.55 if b == 0 else 0.5)))
        sizes.append(share)
        left -= share
    sizes.append(left)
    projects = tuple(
        Project(f"p{j:02d}", f"p{j:02d}", int(rng.integers(cost_range[0], cost_range[1] + 1)))
        for j in range(n_projects)
    )
    slice_size = n_projects // bloc_count
    voters, ballots = [], []
    i = 0
    for b, size in enumerate(sizes):
        own = [p.id for p in projects[b * slice_size:(b + 1) * slice_size]]
        other = [p.id for p in projects if p.id not in own]
        for _ in range(size):
            vid = f"v{i:02d}"
            i += 1
            approved = {p for p in own if rng.random() < 0.8}
            approved |= {p for p in other if rng.random() < 0.1}
            voters.append(Voter(vid))
            ballots.append(ApprovalBallot(vid, frozenset(approved)))
    return Election(projects, tuple(voters), tuple(ballots), budget)
