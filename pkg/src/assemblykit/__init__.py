"""assemblykit: participatory budgeting and deliberation toolkit.

Equal-shares budget allocation with human-in-the-loop control, balanced
deliberation groups over a 2-D opinion projection, ranking aggregation,
and opinion-shift metrics - as a library, CLI, and session service.
"""

from ._rational import BACKEND as RATIONAL_BACKEND
from .aggregation import RankingSheet, alignment, borda_points, select_by_points
from .clustering import GroupAssignment, OpinionPoint, mix_groups, project_2d, radial_partition
from .mes import (
    AllocationOutcome,
    SelectionRound,
    greedy,
    mes_complete,
    mes_fixed_start,
    per_voter_allocation,
    projects_won_per_voter,
    scenario_sweep,
)
from .metrics import (
    LikertRecord,
    consensus,
    gini,
    mann_whitney_u,
    mean_change,
    percent_changed,
    polarisation,
    shift_report,
    wilcoxon_signed_rank,
)
from .model import ApprovalBallot, Election, Project, Voter, approval_counts, validate_election

__version__ = "0.1.0"

__all__ = [
    "ApprovalBallot", "AllocationOutcome", "Election", "GroupAssignment",
    "LikertRecord", "OpinionPoint", "Project", "RankingSheet", "RATIONAL_BACKEND",
    "SelectionRound", "Voter", "alignment", "approval_counts", "borda_points",
    "consensus", "gini", "greedy", "mann_whitney_u", "mean_change", "mes_complete",
    "mes_fixed_start", "mix_groups", "per_voter_allocation", "percent_changed",
    "polarisation", "project_2d", "projects_won_per_voter", "radial_partition",
    "scenario_sweep", "select_by_points", "shift_report", "validate_election",
    "wilcoxon_signed_rank",
]
