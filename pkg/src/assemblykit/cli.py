"""Command line entry points.

Subcommands: allocate, cluster, borda, rtr, serve. Exit codes: 0 ok,
1 user error (bad files, validation, domain errors), 2 internal error.
Tables print as aligned text; --format csv switches to delimited output
for pipelines.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import aggregation, clustering, ingest, mes, metrics
from .errors import AssemblyKitError, DegenerateData
from .metrics import format_p
from .model import approval_counts


def _emit_table(rows: list[dict], columns: list[str], fmt: str, out=None):
    out = out if out is not None else sys.stdout
    if fmt == "csv":
        out.write(",".join(columns) + "\n")
        for r in rows:
            out.write(",".join(str(r[c]) for c in columns) + "\n")
        return
    widths = {c: max(len(c), *(len(str(r[c])) for r in rows)) if rows else len(c) for c in columns}
    out.write("  ".join(c.ljust(widths[c]) for c in columns).rstrip() + "\n")
    out.write("  ".join("-" * widths[c] for c in columns) + "\n")
    for r in rows:
        out.write("  ".join(str(r[c]).ljust(widths[c]) for c in columns).rstrip() + "\n")


def _fmt_float(x: float) -> str:
    return f"{x:.4f}"


def cmd_allocate(args) -> int:
    e = ingest.load_election(args.projects, args.ballots, args.budget)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    counts = approval_counts(e)
    projects = e.project_map()

    outcomes = {}
    if args.method in ("mes", "both"):
        outcomes["mes"] = mes.mes_complete(e)
    if args.method in ("greedy", "both"):
        outcomes["greedy"] = mes.greedy(e)

    for name, outcome in outcomes.items():
        path = out_dir / f"{name}_outcome.json"
        ingest.save_outcome(path, outcome)
        print(f"{name}: {len(outcome.winners)} projects funded, "
              f"{outcome.total_spent} of {e.total_budget} spent -> {path}")
        rows = [
            {"project": r.project_id, "name": projects[r.project_id].name,
             "votes": counts[r.project_id], "cost": projects[r.project_id].cost}
            for r in outcome.winners
        ]
        _emit_table(rows, ["project", "name", "votes", "cost"], args.format)

    if args.method == "both":
        rows = []
        gini_values = {}
        for name, outcome in outcomes.items():
            alloc = mes.per_voter_allocation(e, outcome)
            won = mes.projects_won_per_voter(e, outcome)
            gini_values[name] = metrics.gini(list(alloc.values()))
            for v in e.voters:
                rows.append({"voter": v.id, "method": name,
                             "projects_won": won[v.id], "allocation": alloc[v.id]})
        print("\nper-voter comparison:")
        _emit_table(rows, ["voter", "method", "projects_won", "allocation"], args.format)
        print("\nGini (per-voter allocation): "
              + ", ".join(f"{n}={_fmt_float(g)}" for n, g in gini_values.items()))
    return 0


def cmd_cluster(args) -> int:
    voters, ballots = ingest.load_ballots(args.ballots)
    project_ids = sorted({p for b in ballots for p in b.approved})
    index = {p: j for j, p in enumerate(project_ids)}
    matrix = np.zeros((len(voters), len(project_ids)))
    for i, b in enumerate(ballots):
        for p in b.approved:
            matrix[i, index[p]] = 1.0

    voter_ids = [v.id for v in voters]
    try:
        points = clustering.project_2d(matrix, voter_ids, standardize=args.standardize)
    except DegenerateData as exc:
        print(f"note: degenerate opinion data ({exc}); using rank-1 fallback angles")
        points = clustering.project_2d(matrix, voter_ids, standardize=args.standardize,
                                       on_degenerate="fallback")

    homo = clustering.radial_partition(points, args.k)
    hetero = clustering.mix_groups(homo)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ingest.save_points(out_dir / "points.csv", points)
    ingest.save_assignment(out_dir / "homogeneous.csv", homo)
    ingest.save_assignment(out_dir / "heterogeneous.csv", hetero)
    print(f"wrote points.csv, homogeneous.csv, heterogeneous.csv to {out_dir}")

    rows = []
    for label, members in homo.groups.items():
        rows.append({"round": "homogeneous", "group": label, "size": len(members)})
    for label, members in hetero.groups.items():
        rows.append({"round": "heterogeneous", "group": label, "size": len(members)})
    _emit_table(rows, ["round", "group", "size"], args.format)
    return 0


def cmd_borda(args) -> int:
    e = ingest.load_election(args.projects, args.ballots, args.budget) if args.ballots \
        else None
    if e is None:
        projects = ingest.load_projects(args.projects)
        from .model import Election, validate_election
        e = validate_election(Election(tuple(projects), (), (), args.budget))
    sheets = ingest.load_rankings(args.rankings)
    winners, tally = aggregation.select_by_points(e, sheets, args.budget)
    projects = e.project_map()
    rows = [
        {"project": row.project_id, "name": projects[row.project_id].name,
         "hm_points": row.hm_points, "ht_points": row.ht_points, "total": row.total,
         "cost": projects[row.project_id].cost,
         "selected": "yes" if row.selected else "",
         "tag": row.tag or ""}
        for row in tally
    ]
    _emit_table(rows, ["project", "name", "hm_points", "ht_points", "total",
                       "cost", "selected", "tag"], args.format)
    spent = sum(projects[w].cost for w in winners)
    print(f"\nselected {len(winners)} projects, {spent} of {args.budget} spent")
    return 0


def cmd_rtr(args) -> int:
    records = ingest.load_likert(args.likert)
    rows = []
    for s in metrics.shift_report(records):
        ratio = "undef" if s.polarisation_ratio == float("inf") else _fmt_float(s.polarisation_ratio)
        rows.append({
            "statement": s.statement_id,
            "n_paired": s.n_paired,
            "changed_%": _fmt_float(s.percent_changed),
            "polar_norm_pre": _fmt_float(s.polarisation_normalized_pre),
            "polar_norm_post": _fmt_float(s.polarisation_normalized_post),
            "polar_ratio": ratio,
            "cons_major_pre": _fmt_float(s.consensus_majority_pre),
            "cons_major_post": _fmt_float(s.consensus_majority_post),
            "cons_invstd_pre": _fmt_float(s.consensus_inverse_std_pre),
            "cons_invstd_post": _fmt_float(s.consensus_inverse_std_post),
            "mean_pre": _fmt_float(s.mean_pre),
            "mean_post": _fmt_float(s.mean_post),
            "mean_change": _fmt_float(s.mean_change),
        })
    _emit_table(rows, list(rows[0].keys()) if rows else ["statement"], args.format)
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    try:
        serve(args.address, args.data_dir)
    except OSError as exc:
        print(f"BindError: cannot listen on {args.address}: {exc}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="assemblykit",
                                     description="participatory budgeting and deliberation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("allocate", help="run equal-shares and/or greedy allocation")
    p.add_argument("--projects", required=True)
    p.add_argument("--ballots", required=True)
    p.add_argument("--budget", type=int, required=True, help="total budget, minor units")
    p.add_argument("--method", choices=["mes", "greedy", "both"], default="both")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("cluster", help="balanced deliberation groups from ballots")
    p.add_argument("--ballots", required=True)
    p.add_argument("--k", type=int, required=True, help="number of groups")
    p.add_argument("--standardize", action="store_true",
                   help="scale ballot columns to unit variance before projecting")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("borda", help="aggregate ranking sheets and select under budget")
    p.add_argument("--rankings", required=True)
    p.add_argument("--projects", required=True)
    p.add_argument("--ballots", default=None, help="optional, for validation context")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.set_defaults(func=cmd_borda)

    p = sub.add_parser("rtr", help="opinion shift report from a likert file")
    p.add_argument("--likert", required=True)
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.set_defaults(func=cmd_rtr)

    p = sub.add_parser("serve", help="run the session service")
    p.add_argument("--address", default="127.0.0.1:8400")
    p.add_argument("--data-dir", default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AssemblyKitError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
