"""Choosing which nodes to hijack under a budget.

Brute-force subset enumeration for either objective, an exact polynomial
selector for throughput minimization when the candidates are parallel
(none upstream of another), and a greedy heuristic for loss maximization
on single-hop instances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Mapping

from . import lp
from .lossmax import brute_force_max_loss, singlehop_loss
from .minthroughput import _dp_reach, exact_min_lambda
from .model import (
    TOL,
    AttackProblem,
    SingleHopInstance,
    lossless_flows,
    lossless_utilization,
    singlehop_node_ids,
    singlehop_to_multihop,
)

Rows = dict[int, dict[int, float]]


@dataclass(frozen=True)
class SelectionProblem:
    """`base` carries no adversaries; candidates are the hijackable nodes
    (ingress ids when base is single-hop). `arrival` is required for the
    max-loss objective on multi-hop problems."""

    base: AttackProblem | SingleHopInstance
    candidates: frozenset[int]
    budget: int
    objective: str = "min-lambda"  # or "max-loss"
    arrival: float | None = None


@dataclass(frozen=True)
class SelectionResult:
    chosen: frozenset[int]
    rows: Mapping[int, Mapping[int, float]]
    value: float
    algo: str


def _as_attack_problem(
    base: AttackProblem | SingleHopInstance, adversaries: frozenset[int]
) -> AttackProblem:
    """Multi-hop problem with the given nodes hijacked; single-hop bases are
    embedded, with ingress ids translated to embedding node ids."""
    if isinstance(base, SingleHopInstance):
        inst = replace(base, adversaries=adversaries)
        return singlehop_to_multihop(inst)
    return replace(base, adversaries=adversaries)


def _min_lambda_value(
    base: AttackProblem | SingleHopInstance, subset: frozenset[int]
) -> tuple[float, Rows, Rows]:
    """(lambda*, rows in base ids, rows in solver ids) for the hijacked subset."""
    if isinstance(base, SingleHopInstance):
        ing_id, _ = singlehop_node_ids(base)
        prob = _as_attack_problem(base, subset)
        res = exact_min_lambda(prob)
        ns = base.n_ingress
        node_to_ing = {v: i for i, v in ing_id.items()}
        rows = {
            node_to_ing[n]: {j - 1 - ns: x for j, x in row.items()}
            for n, row in res.rows.items()
            if n in node_to_ing
        }
        return res.lambda_star, rows, dict(res.rows)
    prob = _as_attack_problem(base, subset)
    res = exact_min_lambda(prob)
    rows = {a: dict(r) for a, r in res.rows.items()}
    return res.lambda_star, rows, rows


def _max_loss_value(
    base: AttackProblem | SingleHopInstance,
    subset: frozenset[int],
    arrival: float | None,
) -> tuple[float, Rows]:
    if isinstance(base, SingleHopInstance):
        res = brute_force_max_loss(replace(base, adversaries=subset))
        return res.loss, {a: dict(r) for a, r in res.rows.items()}
    if arrival is None:
        raise ValueError("max-loss selection on a multi-hop base needs an arrival rate")
    res = brute_force_max_loss(replace(base, adversaries=subset), arrival)
    return res.loss, {a: dict(r) for a, r in res.rows.items()}


# ---------------------------------------------------------------------------
# brute force


def brute_force_select(
    problem: SelectionProblem, subset_cap: int = 200_000
) -> SelectionResult:
    """Enumerate subsets of size min(K, |candidates|) in lexicographic order.

    Smaller subsets never need checking: a hijacked node may replay its
    default row, and the loss objective is convex over a node's dispatch
    simplex, so both objectives improve weakly under supersets.
    """
    cands = sorted(problem.candidates)
    size = min(problem.budget, len(cands))
    count = math.comb(len(cands), size)
    if count > subset_cap:
        raise ValueError(f"{count} subsets exceed the cap {subset_cap}")
    minimize = problem.objective == "min-lambda"
    best: SelectionResult | None = None
    for combo in itertools.combinations(cands, size):
        subset = frozenset(combo)
        if minimize:
            value, rows, _ = _min_lambda_value(problem.base, subset)
        else:
            value, rows = _max_loss_value(problem.base, subset, problem.arrival)
        better = best is None or (value < best.value if minimize else value > best.value)
        if better:
            best = SelectionResult(subset, rows, value, "brute")
    assert best is not None
    return best


# ---------------------------------------------------------------------------
# exact selection for parallel candidates (throughput minimization)


def _candidate_reach(problem: AttackProblem, start: int, cands: set[int]) -> set[int]:
    """Forward reach treating every candidate as free to use any out-link and
    normal nodes as following positive default ratios."""
    net = problem.network
    seen: set[int] = set()
    stack = [start]
    while stack:
        v = stack.pop()
        if v == net.destination:
            continue
        if v in cands:
            succs = net.out_links[v]
        else:
            row = problem.default_routing.row(v)
            succs = tuple(
                j for j in net.out_links[v] if row is not None and row.get(j, 0.0) > TOL
            )
        for j in succs:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return seen


def _max_inflow(prob: AttackProblem, target: int) -> float:
    net = prob.network
    if target == net.source:
        return 1.0
    if net.is_dag and not prob.dispatch_bounds:
        a, _ = _dp_reach(prob, target)
        return a[net.source]
    return lp.max_flow_to_node(prob, target)[0]


def select_parallel_min_lambda(problem: SelectionProblem) -> SelectionResult:
    """Optimal hijack set for throughput minimization when no candidate is
    upstream of another: rank candidates per downstream link by how much each
    alone lowers the link's saturating arrival rate, then take the best link's
    top-K group (exact in the parallel regime)."""
    base = problem.base
    if isinstance(base, SingleHopInstance):
        ing_id, _ = singlehop_node_ids(base)
        cands = {ing_id[i] for i in problem.candidates}
    else:
        cands = set(problem.candidates)
    prob0 = _as_attack_problem(base, frozenset())
    net = prob0.network

    reach = {v: _candidate_reach(prob0, v, cands) for v in sorted(cands)}
    for v, r in reach.items():
        overlap = r & (cands - {v})
        if overlap:
            raise ValueError(
                f"candidates are not parallel (node {v} is upstream of "
                f"{sorted(overlap)}); use brute_force_select"
            )

    flows0 = lossless_flows(prob0, prob0.default_routing)
    inflow0 = {i: sum(flows0[(k, i)] for k in net.in_links[i]) for i in net.nodes()}
    inflow0[net.source] = inflow0.get(net.source, 0.0) + 1.0
    mf = {}  # (candidate, node) -> max inflow with that candidate hijacked
    single = {v: replace(prob0, adversaries=frozenset({v})) for v in sorted(cands)}

    def sat_rate(c: float, inflow: float, ratio: float) -> float:
        denom = inflow * ratio
        if math.isinf(c):
            return math.inf
        return math.inf if denom <= TOL else c / denom

    best: SelectionResult | None = None
    for i, j, c in net.links:
        if not (i in cands or any(i in reach[v] for v in cands)):
            continue
        ups = [v for v in sorted(cands) if v == i or i in reach[v]]
        if not ups:
            continue
        row0 = prob0.default_routing.row(i)
        x0 = 0.0 if row0 is None else row0.get(j, 0.0)
        base_rate = sat_rate(c, inflow0.get(i, 0.0), x0)
        deltas = []
        for v in ups:
            if (v, i) not in mf:
                mf[(v, i)] = _max_inflow(single[v], i)
            rate_v = sat_rate(c, mf[(v, i)], 1.0 if v == i else x0)
            if math.isinf(base_rate) and math.isinf(rate_v):
                delta = 0.0
            elif math.isinf(base_rate):
                delta = math.inf
            else:
                delta = base_rate - rate_v
            deltas.append((-delta, v))
        deltas.sort()
        group = frozenset(v for _, v in deltas[: min(problem.budget, len(ups))])
        value, rows, _ = _min_lambda_value(base, _to_base_ids(base, group))
        if best is None or value < best.value - TOL:
            best = SelectionResult(_to_base_ids(base, group), rows, value, "parallel")
    if best is None:
        value = lossless_utilization(prob0, prob0.default_routing).lambda_star
        return SelectionResult(frozenset(), {}, value, "parallel")
    return best


def _to_base_ids(
    base: AttackProblem | SingleHopInstance, nodes: frozenset[int]
) -> frozenset[int]:
    if isinstance(base, SingleHopInstance):
        ing_id, _ = singlehop_node_ids(base)
        back = {v: i for i, v in ing_id.items()}
        return frozenset(back[n] for n in nodes)
    return nodes


# ---------------------------------------------------------------------------
# greedy heuristic for single-hop loss maximization


def _psc_best(
    values: list[tuple[float, int]], headroom: float, max_size: int
) -> tuple[float, int]:
    """Peak of (sum of top-k values - headroom)/k over k = 1..max_size, given
    values sorted descending. Returns (peak, k); ties keep the smaller k."""
    best, best_k = -math.inf, 0
    cum = 0.0
    for k in range(1, max_size + 1):
        cum += values[k - 1][0]
        s = (cum - headroom) / k
        if s > best + TOL:
            best, best_k = s, k
    return best, best_k


def _alg8_once(
    instance: SingleHopInstance, cands: list[int], budget: int
) -> tuple[Rows, list[int]]:
    nd = instance.n_egress
    rows: Rows = {}
    selected: list[int] = []
    while len(selected) < budget:
        # current dispatch of every flow-carrying ingress (committed rows win)
        current: Rows = {}
        for i in range(1, instance.n_ingress + 1):
            if instance.arrivals[i - 1] <= 0.0:
                continue
            row = rows.get(i) or instance.routing.get(i)
            if row:
                current[i] = dict(row)
        inflow = [0.0] * nd
        for i, row in current.items():
            for j, x in row.items():
                inflow[j - 1] += instance.arrivals[i - 1] * x
        avail = [i for i in cands if i not in rows and instance.edges[i - 1]]
        best_score, best_j, best_group = 0.0, None, None
        for j in range(1, nd + 1):
            values = []
            for i in avail:
                if j not in instance.edges[i - 1]:
                    continue
                x = current.get(i, {}).get(j, 0.0)
                v = instance.arrivals[i - 1] * (1.0 - x)
                if v > TOL:
                    values.append((v, i))
            if not values:
                continue
            values.sort(key=lambda t: (-t[0], t[1]))
            # remaining service rate; an already-overloaded egress has none
            headroom = max(instance.services[j - 1] - inflow[j - 1], 0.0)
            cap = min(len(values), budget - len(selected))
            score, k = _psc_best(values, headroom, cap)
            if score > best_score + TOL:  # ties keep the lowest egress id
                best_score, best_j, best_group = score, j, [i for _, i in values[:k]]
        if best_j is None or best_score <= TOL:
            break
        for i in best_group:
            rows[i] = {best_j: 1.0}
            selected.append(i)
    return rows, selected


def select_singlehop_maxloss(problem: SelectionProblem) -> SelectionResult:
    """Greedy hijack selection for loss maximization on single-hop instances:
    each round commits to the egress with the highest per-node overload
    contribution the prefix of candidates adding the most traffic there.

    Runs the greedy at every budget up to K and keeps the best outcome, so
    the achieved loss is monotone in the budget."""
    inst = problem.base
    if not isinstance(inst, SingleHopInstance):
        raise ValueError("greedy loss-max selection requires a single-hop base")
    cands = sorted(problem.candidates)
    best: SelectionResult | None = None
    for budget in range(1, min(problem.budget, len(cands)) + 1):
        rows, selected = _alg8_once(inst, cands, budget)
        chosen = frozenset(selected)
        attacked = replace(inst, adversaries=chosen)
        loss, _ = singlehop_loss(attacked, rows)
        if best is None or loss > best.value + TOL:
            best = SelectionResult(chosen, rows, loss, "heuristic")
    if best is None:  # no candidates at all
        loss, _ = singlehop_loss(replace(inst, adversaries=frozenset()), {})
        best = SelectionResult(frozenset(), {}, loss, "heuristic")
    return best
