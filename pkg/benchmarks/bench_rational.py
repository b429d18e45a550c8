"""Compare the two exact-rational backends (gmpy2.mpq vs fractions.Fraction)
on the hot path: full equal-shares completion runs.

The backend is chosen at import time in assemblykit._rational, so this
benchmark monkeypatches the RAT symbol the engine uses and re-runs the
same workload under each. Run:

    python3 benchmarks/bench_rational.py
"""

import statistics
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

import assemblykit.mes as mes_mod
from assemblykit import _rational
from assemblykit.ingest import load_election
from assemblykit.model import ApprovalBallot, Election, Project, Voter

ROOT = Path(__file__).resolve().parent.parent
FIXTURE = ROOT / "fixtures" / "civic35"


def random_election(rng, n_voters=20, n_projects=15, max_cost=400, budget=2000):
    projects = tuple(Project(f"p{j:02d}", f"p{j:02d}", int(rng.integers(10, max_cost)))
                     for j in range(n_projects))
    voters = tuple(Voter(f"v{i:02d}") for i in range(n_voters))
    ballots = tuple(
        ApprovalBallot(v.id, frozenset(p.id for p in projects if rng.random() < 0.3))
        for v in voters
    )
    return Election(projects, voters, ballots, budget)


def run_with_backend(rat_type, label, workload):
    old = mes_mod.RAT
    mes_mod.RAT = rat_type
    try:
        times = []
        for _ in range(3):
            t0 = time.perf_counter()
            workload()
            times.append(time.perf_counter() - t0)
        best = min(times)
        print(f"{label:>10}: best {best:.3f}s  (runs: "
              + ", ".join(f"{t:.3f}" for t in times) + ")")
        return best
    finally:
        mes_mod.RAT = old


def main():
    rng = np.random.default_rng(7)
    smalls = [random_election(rng) for _ in range(30)]

    def small_workload():
        for e in smalls:
            mes_mod.mes_complete(e)

    print(f"active backend at import: {_rational.BACKEND}")
    print("\nworkload A: 30 random elections (20 voters, 15 projects, B=2000)")
    t_frac = run_with_backend(Fraction, "Fraction", small_workload)
    results = {"Fraction": t_frac}
    if _rational.BACKEND == "gmpy2":
        from gmpy2 import mpq
        results["gmpy2"] = run_with_backend(mpq, "gmpy2", small_workload)

    if FIXTURE.exists():
        e = load_election(FIXTURE / "projects.csv", FIXTURE / "ballots.csv", 190_000)
        print("\nworkload B: bundled fixture, completion at budget 190,000")
        t_frac = run_with_backend(Fraction, "Fraction", lambda: mes_mod.mes_complete(e))
        if _rational.BACKEND == "gmpy2":
            from gmpy2 import mpq
            t_mpq = run_with_backend(mpq, "gmpy2", lambda: mes_mod.mes_complete(e))
            print(f"\nspeedup gmpy2 vs Fraction on fixture: {t_frac / t_mpq:.2f}x")


if __name__ == "__main__":
    main()
