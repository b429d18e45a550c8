"""Equal-shares budget allocation with iterative budget completion,
plus the vote-count greedy baseline and budget-scenario sweeps.

All price and payment arithmetic is exact rational (see _rational).

Completion ("keep raising the per-voter start budget by one minor unit
until the next run would overspend") is implemented without visiting
every start budget: within one run, every branch the algorithm takes
compares quantities that are affine functions of the start budget s, as
long as all earlier branches went the same way. So if two concrete runs
at s=lo and s=hi take identical decision traces, the trace - and hence
the winner sequence and total spend - is constant on every integer in
[lo, hi]. mes_complete exploits this with a galloping search over
trace-constant segments, which turns hundreds of thousands of candidate
start budgets into a few dozen runs while keeping the sequential
semantics exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ._rational import RAT, rat, to_money
from .errors import EmptyVoterSet
from .model import Election, approval_counts

MES = "mes"
GREEDY = "greedy"


@dataclass(frozen=True)
class SelectionRound:
    project_id: str
    price_q: Optional[object]  # exact rational; None for greedy rounds
    payments: dict  # voter_id -> exact rational; empty for greedy


@dataclass(frozen=True)
class AllocationOutcome:
    method: str
    winners: tuple[SelectionRound, ...]
    start_budget_per_voter: Optional[object]  # exact rational; None for greedy
    total_spent: int
    leftover_budgets: Optional[dict]  # voter_id -> exact rational; None for greedy

    def winner_ids(self) -> tuple[str, ...]:
        return tuple(r.project_id for r in self.winners)


def _min_q(cost: int, order: list, budgets: dict):
    """Minimal q with sum(min(b_i, q)) == cost over supporters in `order`
    (sorted by remaining budget ascending). Returns (q, k) where the first
    k supporters pay their full remaining budget; or None if unaffordable.
    """
    s = len(order)
    prefix = RAT(0)
    for k in range(s):
        q = (RAT(cost) - prefix) / (s - k)
        if q <= budgets[order[k]]:
            return q, k
        prefix = prefix + budgets[order[k]]
    return None


def _run_mes(e: Election, start_budget):
    """One fixed-start run. Returns (outcome, trace).

    The trace records every branch decision (per-project affordability,
    supporter ordering, saturation cutoff, round winner and its q-ties)
    but no s-dependent values, so traces from different start budgets
    are comparable.
    """
    counts = approval_counts(e)
    approvers = e.approvers()
    # supporters pre-sorted by id: a later stable sort on budget alone
    # then yields the (budget, id) order without building key tuples
    sup_by_id = {pid: sorted(sup) for pid, sup in approvers.items()}
    ballot_of = e.ballot_map()
    projects = {p.id: p for p in e.projects}
    costs = {p.id: p.cost for p in e.projects}
    budgets = {v.id: RAT(start_budget) for v in e.voters}

    remaining = sorted(projects)
    rounds: list[SelectionRound] = []
    trace: list = []

    # Per-project evaluation cache. Only projects sharing a supporter with
    # the last winner can change between rounds, so everything else keeps
    # its (q, k, order) entry; sup_sum tracks supporter budget totals for
    # the O(1) affordability check.
    start = RAT(start_budget)
    sup_sum = {pid: len(approvers[pid]) * start for pid in projects}
    cache: dict[str, tuple] = {}  # pid -> (affordable, q, k, order)
    dirty = set(remaining)

    while True:
        for pid in dirty:
            sup = sup_by_id[pid]
            if not sup or sup_sum[pid] < costs[pid]:
                cache[pid] = (False, None, None, None)
                continue
            order = tuple(sorted(sup, key=budgets.__getitem__))
            q, k = _min_q(costs[pid], order, budgets)
            cache[pid] = (True, q, k, order)
        dirty.clear()

        decisions = []
        q_min, tied = None, []
        for pid in remaining:
            affordable, q, k, order = cache[pid]
            decisions.append((pid, affordable, order, k))
            if not affordable:
                continue
            if q_min is None or q < q_min:
                q_min, tied = q, [pid]
            elif q == q_min:
                tied.append(pid)

        if q_min is None:
            trace.append((None, frozenset(), tuple(decisions)))
            break

        tied = frozenset(tied)
        winner = min(tied, key=lambda pid: (-counts[pid], costs[pid], pid))
        trace.append((winner, tied, tuple(decisions)))

        _, q, k, order = cache[winner]
        payments = {}
        for i, v in enumerate(order):
            pay = budgets[v] if i < k else q
            payments[v] = pay
            budgets[v] = budgets[v] - pay
        rounds.append(SelectionRound(winner, q, payments))
        remaining.remove(winner)
        live = set(remaining)
        for v, pay in payments.items():
            if pay == 0:
                continue
            for pid in ballot_of[v]:
                if pid in live:
                    sup_sum[pid] -= pay
                    dirty.add(pid)

    outcome = AllocationOutcome(
        method=MES,
        winners=tuple(rounds),
        start_budget_per_voter=RAT(start_budget),
        total_spent=sum(projects[r.project_id].cost for r in rounds),
        leftover_budgets=budgets,
    )
    return outcome, tuple(trace)


def mes_fixed_start(e: Election, start_budget) -> AllocationOutcome:
    """Equal-shares allocation with every voter starting at `start_budget`.

    Each round selects the project with the minimal per-supporter price q
    such that supporters, paying min(remaining budget, q) each, cover the
    cost exactly. Ties on q break by higher approval count, then lower
    cost, then project id. Stops when no project is affordable; an empty
    winner set is a valid outcome.
    """
    outcome, _ = _run_mes(e, start_budget)
    return outcome


def mes_complete(e: Election, step: int = 1) -> AllocationOutcome:
    """Equal-shares allocation with iterative start-budget completion.

    Starts every voter at B/n, then raises the per-voter start budget in
    increments of `step` minor units, keeping the outcome from the largest
    start budget whose total spend stays within B. Stops at the first
    start budget that would overspend, or once the start budget reaches B.
    """
    n = len(e.voters)
    if n == 0:
        raise EmptyVoterSet("election has no voters")
    B = e.total_budget
    base = rat(B, n)
    # largest t with base + t*step <= B
    t_max = int((RAT(B) - base) / step) if B > 0 else 0

    cache: dict[int, tuple] = {}

    def runner(t: int):
        if t not in cache:
            cache[t] = _run_mes(e, base + t * step)
        return cache[t]

    out_lo, tr_lo = runner(0)  # total spend <= n * B/n = B, always feasible
    t_lo = 0
    jump = 1
    while t_lo < t_max:
        t_try = min(t_lo + jump, t_max)
        out_try, tr_try = runner(t_try)
        if tr_try == tr_lo:
            t_lo, out_lo = t_try, out_try
            jump *= 2
            continue
        # First trace change lies in (t_lo, t_try]; bisect for the last
        # start budget still on the current trace.
        lo, hi = t_lo, t_try
        while hi - lo > 1:
            mid = (lo + hi) // 2
            out_mid, tr_mid = runner(mid)
            if tr_mid == tr_lo:
                lo, out_lo = mid, out_mid
            else:
                hi = mid
        if lo > t_lo:
            out_lo, _ = runner(lo)
        out_hi, tr_hi = runner(hi)
        if out_hi.total_spent > B:
            return out_lo
        # seed the next gallop with this segment's width: segment sizes
        # tend to be similar, so this saves probes over restarting at 1
        jump = max(1, hi - t_lo)
        t_lo, out_lo, tr_lo = hi, out_hi, tr_hi
    return out_lo


def greedy(e: Election) -> AllocationOutcome:
    """Vote-count baseline: walk projects by approval count descending
    (ties: lower cost, then id), funding any project that still fits the
    remaining budget (skip-and-continue). No per-voter payments.
    """
    counts = approval_counts(e)
    ranked = sorted(e.projects, key=lambda p: (-counts[p.id], p.cost, p.id))
    remaining = e.total_budget
    rounds = []
    for p in ranked:
        if p.cost <= remaining:
            remaining -= p.cost
            rounds.append(SelectionRound(p.id, None, {}))
    return AllocationOutcome(
        method=GREEDY,
        winners=tuple(rounds),
        start_budget_per_voter=None,
        total_spent=e.total_budget - remaining,
        leftover_budgets=None,
    )


def scenario_sweep(e: Election, budget_levels, step: int = 1):
    """mes_complete evaluated at each budget level (non-decreasing list).

    Results are independent pure computations; repeated levels are served
    from a local memo.
    """
    levels = list(budget_levels)
    if any(b > a for a, b in zip(levels[1:], levels)):
        raise ValueError("budget_levels must be non-decreasing")
    memo: dict[int, AllocationOutcome] = {}
    out = []
    for level in levels:
        if level not in memo:
            scoped = Election(e.projects, e.voters, e.ballots, int(level))
            memo[level] = mes_complete(scoped, step=step)
        out.append((level, memo[level]))
    return out


def per_voter_allocation(e: Election, o: AllocationOutcome) -> dict[str, int]:
    """Winner costs split equally among each winner's approvers, summed per
    voter. The equal split is used for both methods (greedy has no payment
    notion) and rendered to money with round-half-even at the boundary.
    """
    counts = approval_counts(e)
    projects = e.project_map()
    shares = {v.id: RAT(0) for v in e.voters}
    approvers = e.approvers()
    for r in o.winners:
        c = counts[r.project_id]
        if c == 0:
            continue
        share = rat(projects[r.project_id].cost, c)
        for v in approvers[r.project_id]:
            shares[v] = shares[v] + share
    return {v: to_money(x) for v, x in shares.items()}


def projects_won_per_voter(e: Election, o: AllocationOutcome) -> dict[str, int]:
    """How many winning projects each voter approved."""
    won = set(o.winner_ids())
    by_voter = e.ballot_map()
    return {v.id: len(won & by_voter.get(v.id, frozenset())) for v in e.voters}
