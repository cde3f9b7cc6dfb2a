"""Relay placement on a line: achievable rates, optimal placement, and as-you-go deployment."""

from .channel import (
    Exponential,
    LinePlacement,
    ModifiedPowerLaw,
    PowerLaw,
    achievable_rate,
    awgn_capacity,
    gain,
    gain_matrix,
    projection_improves_rate_check,
)
from .deploy import ComparisonReport, DeploymentTrace, deploy, monte_carlo_compare, offline_oracle
from .mdp import MdpConfig, MdpSolution, bellman_backup, constrained_tuning, solve, stage_cost_expectation
from .placement import PlacementProblem, PlacementSolution, rate_vs_N_table, solve_placement
from .single_relay import (
    SingleRelaySolution,
    single_relay_rate,
    solve_exponential_node_power,
    solve_modified_powerlaw_node_power,
    solve_powerlaw_node_power,
)
from .sum_power import (
    DualCertificate,
    PowerAllocation,
    allocate_sum_power,
    dual_certificate,
    relaying_gain,
    single_relay_sum_power,
    uniform_placement_rate,
)

__version__ = "0.1.0"
