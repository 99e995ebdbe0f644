"""Worst-case network overload under routing attacks.

A library for quantifying how much damage an adversary controlling the
routing of a subset of nodes can do to a flow network: minimizing the no-loss
throughput, maximizing traffic loss at a given arrival rate, and choosing
which nodes to hijack, plus generators and a Monte-Carlo sweep harness.
"""

from .bench import (
    GenConfig,
    SweepStats,
    default_routing,
    gen_multihop,
    gen_setcover,
    gen_singlehop,
    run_sweep,
)
from .lossmax import (
    LossResult,
    brute_force_max_loss,
    load_singlehop,
    maxloss_additive,
    maxloss_multiplicative,
    minmu_baseline,
    rand_baseline,
    reduce_normal_ingress,
    singlehop_from_json,
    singlehop_loss,
    singlehop_to_json,
)
from .minthroughput import (
    AttackResult,
    DownstreamView,
    approx2_min_lambda,
    brute_force_min_lambda,
    compute_R,
    distributed_heuristic,
    exact_min_lambda,
    local_min_capacity_attack,
    measure_downstream,
)
from .model import (
    AttackProblem,
    FlowAssignment,
    Network,
    PathDecomposition,
    RoutingMatrix,
    SingleHopInstance,
    ThroughputResult,
    downstream_set,
    load_problem,
    lossless_flows,
    lossless_utilization,
    no_loss_throughput,
    path_fraction,
    problem_from_json,
    problem_to_json,
    propagate,
    routing_from_paths,
    singlehop_node_ids,
    singlehop_to_multihop,
    upstream_set,
    validate,
)
from .nodeselect import (
    SelectionProblem,
    SelectionResult,
    brute_force_select,
    select_parallel_min_lambda,
    select_singlehop_maxloss,
)

__version__ = "0.1.0"

__all__ = [
    "AttackProblem",
    "AttackResult",
    "DownstreamView",
    "FlowAssignment",
    "GenConfig",
    "LossResult",
    "Network",
    "PathDecomposition",
    "RoutingMatrix",
    "SelectionProblem",
    "SelectionResult",
    "SingleHopInstance",
    "SweepStats",
    "ThroughputResult",
    "approx2_min_lambda",
    "brute_force_max_loss",
    "brute_force_min_lambda",
    "brute_force_select",
    "compute_R",
    "default_routing",
    "distributed_heuristic",
    "downstream_set",
    "exact_min_lambda",
    "gen_multihop",
    "gen_setcover",
    "gen_singlehop",
    "load_problem",
    "load_singlehop",
    "local_min_capacity_attack",
    "lossless_flows",
    "lossless_utilization",
    "maxloss_additive",
    "maxloss_multiplicative",
    "measure_downstream",
    "minmu_baseline",
    "no_loss_throughput",
    "path_fraction",
    "problem_from_json",
    "problem_to_json",
    "propagate",
    "rand_baseline",
    "reduce_normal_ingress",
    "routing_from_paths",
    "run_sweep",
    "select_parallel_min_lambda",
    "select_singlehop_maxloss",
    "singlehop_from_json",
    "singlehop_loss",
    "singlehop_node_ids",
    "singlehop_to_json",
    "singlehop_to_multihop",
    "upstream_set",
    "validate",
]
