"""Generate the bundled synthetic fixture: a 35-voter, 56-project civic
assembly with a 380,000 total budget (minor units), ranking sheets for
6 groups over both deliberation rounds, and a pre/post opinion file.

Deterministic (seeded); rerunning overwrites fixtures/civic35 in place.

The likert file embeds one statement (S02) whose score multisets were
brute-force searched so the inverse-std consensus moves 0.44 -> 0.47
within 0.01, matching the published room-level figure.
"""

import json
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "fixtures" / "civic35"

N_VOTERS = 35
N_PROJECTS = 56
TOTAL_BUDGET = 380_000

THEMES = [
    ("GRN", "Greening"), ("MOB", "Mobility"), ("CUL", "Culture"),
    ("SPT", "Sport"), ("EDU", "Learning"), ("SOC", "Community"),
]


def make_projects(rng):
    projects = []
    for j in range(N_PROJECTS):
        code, theme = THEMES[j % len(THEMES)]
        cost = int(rng.integers(25, 301)) * 100  # 2,500 .. 30,000
        projects.append((f"{code}{j + 1:02d}", f"{theme} project {j + 1}", cost))
    return projects


def make_ballots(rng, projects):
    # three preference blocs of unequal size, each leaning on two themes
    bloc_themes = [("GRN", "MOB"), ("CUL", "SOC"), ("SPT", "EDU")]
    sizes = [15, 12, 8]
    ballots = []
    i = 0
    for bloc, size in enumerate(sizes):
        own = bloc_themes[bloc]
        for _ in range(size):
            vid = f"v{i + 1:02d}"
            i += 1
            approved = []
            for pid, _, _ in projects:
                p = 0.6 if pid[:3] in own else 0.08
                if rng.random() < p:
                    approved.append(pid)
            if not approved:  # everyone supports at least something
                approved.append(projects[int(rng.integers(len(projects)))][0])
            ballots.append((vid, approved))
    return ballots


def make_rankings(rng, projects):
    pids = [p for p, _, _ in projects]
    rows = []
    for rnd, labels in (("homogeneous", "ABCDEF"), ("heterogeneous", "123456")):
        for g in labels:
            picks = rng.permutation(len(pids))[:5]
            for rank, idx in enumerate(picks, start=1):
                rows.append((rnd, g, rank, pids[idx]))
    return rows


def make_likert(rng):
    rows = []
    # S01: a gentle positive shift with some non-movers
    pre1 = [-1] * 10 + [0] * 10 + [1] * 10 + [2] * 5
    post1 = [0] * 10 + [1] * 12 + [2] * 13
    # S02: consensus fixture, searched multisets (inverse-std 0.440 -> 0.470)
    pre2 = [-1] * 8 + [0] * 1 + [2] * 26
    post2 = [-1] * 6 + [1] * 2 + [2] * 27
    for sid, pre, post in (("S01", pre1, post1), ("S02", pre2, post2)):
        pre, post = list(pre), list(post)
        rng.shuffle(pre)
        rng.shuffle(post)
        for i in range(N_VOTERS):
            rows.append((f"v{i + 1:02d}", sid, "pre", pre[i]))
            rows.append((f"v{i + 1:02d}", sid, "post", post[i]))
    return rows


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20240815)

    projects = make_projects(rng)
    with open(OUT / "projects.csv", "w", encoding="utf-8") as fh:
        fh.write("id,name,cost\n")
        for pid, name, cost in projects:
            fh.write(f"{pid},{name},{cost}\n")

    ballots = make_ballots(rng, projects)
    with open(OUT / "ballots.csv", "w", encoding="utf-8") as fh:
        fh.write("voter_id,project_id\n")
        for vid, approved in ballots:
            for pid in approved:
                fh.write(f"{vid},{pid}\n")

    with open(OUT / "rankings.csv", "w", encoding="utf-8") as fh:
        fh.write("round,group,rank,project_id\n")
        for rnd, g, rank, pid in make_rankings(rng, projects):
            fh.write(f"{rnd},{g},{rank},{pid}\n")

    with open(OUT / "likert.csv", "w", encoding="utf-8") as fh:
        fh.write("participant_id,statement_id,phase,score\n")
        for vid, sid, phase, score in make_likert(rng):
            fh.write(f"{vid},{sid},{phase},{score}\n")

    manifest = {
        "schema_version": "1",
        "currency_unit": "minor",
        "total_budget": TOTAL_BUDGET,
        "files": {
            "projects": "projects.csv",
            "ballots": "ballots.csv",
            "rankings": "rankings.csv",
            "likert": "likert.csv",
        },
    }
    with open(OUT / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")

    print(f"wrote fixture to {OUT}")


if __name__ == "__main__":
    main()
