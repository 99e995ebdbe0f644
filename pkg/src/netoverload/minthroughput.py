"""Attacks that minimize the no-loss throughput lambda*.

Implements the single-link brute force, the exact max-flow-based algorithm,
the downstream-only 2-approximation with its measurement step, the
distributed per-node heuristic, and the local min-capacity baseline.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping

from . import lp
from .model import (
    TOL,
    AttackProblem,
    Link,
    Network,
    RoutingMatrix,
    lossless_flows,
    lossless_utilization,
)

Rows = dict[int, dict[int, float]]


@dataclass(frozen=True)
class AttackResult:
    rows: Mapping[int, Mapping[int, float]]
    lambda_star: float
    saturated_link: Link | None
    algo: str

    def merged(self, problem: AttackProblem) -> RoutingMatrix:
        return problem.default_routing.merged(self.rows)


@dataclass(frozen=True)
class DownstreamView:
    """Everything an attacker can observe downstream of the hijacked nodes:
    the reachable subgraph, loss-free measured flows on it, per-node measured
    arrivals, the total delivered rate, and the default rows of the normal
    nodes inside the subgraph."""

    nodes: frozenset[int]
    links: tuple[tuple[int, int, float], ...]
    flows: Mapping[Link, float]
    node_inflow: Mapping[int, float]
    f_total: float
    routing: Mapping[int, Mapping[int, float]]
    destination: int


def _uniform_row(outs: tuple[int, ...]) -> dict[int, float]:
    share = 1.0 / len(outs)
    return {j: share for j in outs}


def _evaluate(problem: AttackProblem, rows: Rows, algo: str) -> AttackResult:
    merged = problem.default_routing.merged(rows)
    thr = lossless_utilization(problem, merged)
    return AttackResult(rows, thr.lambda_star, thr.bottleneck, algo)


# ---------------------------------------------------------------------------
# brute force (single-link vertex property)


def brute_force_min_lambda(
    problem: AttackProblem, combo_cap: int = 500_000
) -> AttackResult:
    """Enumerate every assignment sending each adversary's whole inflow down a
    single link; optimal by the vertex property of the throughput program."""
    if problem.dispatch_bounds:
        raise ValueError(
            "brute force does not support dispatch bounds; use exact_min_lambda"
        )
    net = problem.network
    advs = [a for a in sorted(problem.adversaries) if net.out_links[a]]
    count = math.prod(len(net.out_links[a]) for a in advs) if advs else 1
    if count > combo_cap:
        raise ValueError(
            f"{count} combinations exceed the cap {combo_cap}; use exact_min_lambda"
        )
    best: AttackResult | None = None
    for combo in itertools.product(*(net.out_links[a] for a in advs)):
        rows: Rows = {a: {j: 1.0} for a, j in zip(advs, combo)}
        try:
            cand = _evaluate(problem, rows, "brute")
        except ValueError:  # degenerate cyclic routing traps all flow
            cand = AttackResult(rows, math.inf, None, "brute")
        if best is None or cand.lambda_star < best.lambda_star:
            best = cand
    assert best is not None
    return best


# ---------------------------------------------------------------------------
# exact algorithm


def _dp_reach(problem: AttackProblem, target: int) -> tuple[dict[int, float], Rows]:
    """On a DAG: a[u] = max fraction of a unit at node u that adversarial
    routing can push to `target` (capacities ignored), plus the single-link
    rows of adversarial nodes realizing the maximum (ties to the lowest head).
    The max inflow to target under unit arrival is a[source]."""
    net = problem.network
    order = net.topological_order
    assert order is not None
    a = {v: 0.0 for v in net.nodes()}
    a[target] = 1.0
    support: Rows = {}
    for u in reversed(order):
        if u == target or u == net.destination:
            continue
        outs = net.out_links[u]
        if not outs:
            continue
        if u in problem.adversaries:
            best_j = min(outs, key=lambda j: (-a[j], j))
            a[u] = a[best_j]
            if a[u] > 0.0:
                support[u] = {best_j: 1.0}
        else:
            row = problem.default_routing.row(u)
            if row is not None:
                a[u] = sum(row.get(j, 0.0) * a[j] for j in outs)
    return a, support


def _link_score(problem: AttackProblem, i: int) -> tuple[float, int | None]:
    """Per-unit-inflow saturation rate at node i's most vulnerable link:
    max_j x_ij/c_ij for normal nodes, the cheapest achievable 1/c (or
    x_max/c under bounds) for adversarial ones. Returns (score, link head)."""
    net = problem.network
    outs = net.out_links[i]
    if not outs:
        return 0.0, None
    best, best_j = 0.0, None
    if i in problem.adversaries:
        for j in outs:
            hi = problem.bound(i, j)[1] if problem.dispatch_bounds else 1.0
            c = net.capacity[(i, j)]
            s = 0.0 if math.isinf(c) else hi / c
            if s > best + TOL:
                best, best_j = s, j
    else:
        row = problem.default_routing.row(i)
        if row is None:
            return 0.0, None
        for j in outs:
            c = net.capacity[(i, j)]
            x = row.get(j, 0.0)
            s = 0.0 if math.isinf(c) else x / c
            if s > best + TOL:
                best, best_j = s, j
    return best, best_j


def _bounded_row(problem: AttackProblem, i: int, prefer: int | None) -> dict[int, float]:
    """A dispatch row for adversarial node i honoring its bounds, pushing as
    much mass as allowed onto `prefer` and filling the rest in link order."""
    outs = problem.network.out_links[i]
    row = {j: problem.bound(i, j)[0] for j in outs}
    rem = 1.0 - sum(row.values())
    if rem < -TOL:
        raise ValueError(f"node {i}: dispatch lower bounds exceed 1")
    order = ([prefer] if prefer is not None else []) + [j for j in outs if j != prefer]
    for j in order:
        give = min(rem, problem.bound(i, j)[1] - row[j])
        if give > 0:
            row[j] += give
            rem -= give
    if rem > TOL:
        raise ValueError(f"node {i}: dispatch upper bounds sum below 1")
    return {j: x for j, x in row.items() if x > 0.0}


def exact_min_lambda(problem: AttackProblem) -> AttackResult:
    """Optimal attack minimizing lambda*: for each node i, the max achievable
    inflow MF[i] times the per-unit saturation score of its most vulnerable
    link gives the best utilization V[i] the adversary can force there; the
    overall optimum is 1/max_i V[i], with the attack reconstructed from the
    flow supporting MF[i*]."""
    net = problem.network
    use_dp = net.is_dag and not problem.dispatch_bounds

    scores = {}
    for i in net.nodes():
        if i == net.destination:
            continue
        s, j = _link_score(problem, i)
        if s > 0.0:
            scores[i] = (s, j)

    best_i, best_v = None, 0.0
    mf_cache: dict[int, tuple[float, object]] = {}
    for i in sorted(scores):
        s, _ = scores[i]
        if use_dp:
            a, support = _dp_reach(problem, i)
            mf = 1.0 if i == net.source else a[net.source]
            mf_cache[i] = (mf, support)
        else:
            mf, flows = lp.max_flow_to_node(problem, i)
            mf_cache[i] = (mf, flows)
        if math.isinf(mf) and s > 0.0:
            raise ValueError(
                "adversarial cycle allows unbounded inflow; lambda* is not "
                "bounded away from zero"
            )
        v = mf * s
        if v > best_v + TOL:
            best_i, best_v = i, v

    if best_i is None:
        rows: Rows = {
            a: _uniform_row(net.out_links[a])
            for a in sorted(problem.adversaries)
            if net.out_links[a]
        }
        return AttackResult(rows, math.inf, None, "exact")

    target_j = scores[best_i][1]
    rows = {}
    if use_dp:
        support = mf_cache[best_i][1]
        for a in sorted(problem.adversaries):
            if not net.out_links[a]:
                continue
            if a == best_i:
                rows[a] = {target_j: 1.0}
            elif a in support:
                rows[a] = dict(support[a])
            else:
                rows[a] = _uniform_row(net.out_links[a])
    else:
        flows = mf_cache[best_i][1]
        for a in sorted(problem.adversaries):
            outs = net.out_links[a]
            if not outs:
                continue
            if a == best_i:
                rows[a] = _bounded_row(problem, a, target_j)
                continue
            inflow = sum(flows[(k, a)] for k in net.in_links[a])
            if a == net.source:
                inflow += 1.0
            if inflow > TOL:
                raw = {j: flows[(a, j)] / inflow for j in outs if flows[(a, j)] > TOL}
                total = sum(raw.values())
                rows[a] = {j: x / total for j, x in raw.items()} if total > TOL else (
                    _bounded_row(problem, a, None)
                )
            else:
                rows[a] = _bounded_row(problem, a, None)
    return _evaluate(problem, rows, "exact")


# ---------------------------------------------------------------------------
# downstream measurement and the 2-approximation


def measure_downstream(problem: AttackProblem) -> DownstreamView:
    """Simulate the pre-attack measurement: propagate the default routing
    (adversaries included) losslessly and record what is visible downstream
    of the adversary set."""
    net = problem.network
    from .model import downstream_set

    region: set[int] = set(problem.adversaries)
    for a in problem.adversaries:
        region |= downstream_set(problem, a)
    links = tuple(
        (i, j, c) for i, j, c in net.links if i in region and j in region
    )
    all_flows = lossless_flows(problem, problem.default_routing)
    flows = {(i, j): all_flows[(i, j)] for i, j, _ in links}
    node_inflow = {}
    for v in sorted(region):
        inflow = sum(all_flows[(k, v)] for k in net.in_links[v])
        if v == net.source:
            inflow += 1.0
        node_inflow[v] = inflow
    f_total = sum(all_flows[(k, net.destination)] for k in net.in_links[net.destination])
    if net.source == net.destination:
        f_total = 1.0
    routing = {
        i: dict(problem.default_routing.rows.get(i, {}))
        for i in sorted(region)
        if i not in problem.adversaries and i != net.destination
    }
    return DownstreamView(
        nodes=frozenset(region),
        links=links,
        flows=flows,
        node_inflow=node_inflow,
        f_total=f_total,
        routing=routing,
        destination=net.destination,
    )


def _subgraph_topo(nodes: frozenset[int], links) -> list[int]:
    indeg = {v: 0 for v in nodes}
    out: dict[int, list[int]] = {v: [] for v in nodes}
    for i, j, _ in links:
        indeg[j] += 1
        out[i].append(j)
    queue = sorted(v for v, d in indeg.items() if d == 0)
    order: list[int] = []
    while queue:
        v = queue.pop(0)
        order.append(v)
        for j in sorted(out[v]):
            indeg[j] -= 1
            if indeg[j] == 0:
                queue.append(j)
    if len(order) != len(nodes):
        raise ValueError("downstream subgraph contains a cycle; measurement "
                         "traversal is only defined on acyclic subgraphs")
    return order


def compute_R(view: DownstreamView, adversaries: frozenset[int]) -> dict[int, float]:
    """Fraction R[i] of source traffic reaching each adversarial node without
    traversing any other adversarial node, from downstream measurements only.

    Walks the subgraph topologically; at each adversarial node it freezes
    R[i] = F[i]/F_total, then pushes node i's remaining measured throughput
    forward along measured dispatch fractions and subtracts it from every
    downstream F[j], so traffic is never attributed to two adversaries."""
    order = _subgraph_topo(view.nodes, view.links)
    out: dict[int, list[int]] = {v: [] for v in view.nodes}
    for i, j, _ in view.links:
        out[i].append(j)
    pos = {v: k for k, v in enumerate(order)}
    f = {a: view.node_inflow[a] for a in adversaries}
    r: dict[int, float] = {}
    for u in order:
        if u not in adversaries:
            continue
        r[u] = f[u] / view.f_total if view.f_total > TOL else 0.0
        t = {v: 0.0 for v in view.nodes}
        t[u] = f[u]
        for w in order[pos[u]:]:
            if t[w] <= TOL or view.node_inflow.get(w, 0.0) <= TOL:
                continue
            if w in adversaries and w != u and pos[w] > pos[u]:
                f[w] -= t[w]
            for j in sorted(out[w]):
                t[j] += t[w] * view.flows[(w, j)] / view.node_inflow[w]
    return r


def approx2_min_lambda(
    view: DownstreamView,
    adversaries: frozenset[int],
    full_problem: AttackProblem | None = None,
) -> AttackResult:
    """Downstream-only attack: inject R[i] units at each adversarial node into
    the downstream subgraph and solve the exact problem there; guaranteed
    within a factor 2 of the optimum on the full network."""
    r = compute_R(view, adversaries)
    total_r = sum(r.values())
    rows: Rows = {}
    if view.destination in view.nodes and total_r > TOL:
        meta = max(max(view.nodes), view.destination) + 1
        links = list(view.links) + [
            (meta, a, math.inf) for a in sorted(adversaries)
        ]
        net = Network(
            node_count=meta,
            links=tuple(sorted(links)),
            source=meta,
            destination=view.destination,
        )
        sub_rows = {i: dict(row) for i, row in view.routing.items()}
        sub_rows[meta] = {a: r[a] / total_r for a in sorted(adversaries)}
        sub = AttackProblem(
            network=net,
            adversaries=frozenset(adversaries),
            default_routing=RoutingMatrix(sub_rows),
        )
        rows = {a: dict(row) for a, row in exact_min_lambda(sub).rows.items()}
    if not rows:
        net0 = full_problem.network if full_problem else None
        for a in sorted(adversaries):
            outs = (
                net0.out_links[a]
                if net0 is not None
                else tuple(sorted(j for i, j, _ in view.links if i == a))
            )
            if outs:
                rows[a] = _uniform_row(outs)
    if full_problem is None:
        return AttackResult(rows, math.nan, None, "approx2")
    return _evaluate(full_problem, rows, "approx2")


# ---------------------------------------------------------------------------
# distributed heuristic and local baseline


def distributed_heuristic(problem: AttackProblem) -> AttackResult:
    """Each adversary, from sink to source, fixes its own row by solving the
    exact problem on its downstream subgraph with itself as the source,
    honoring rows already fixed by downstream adversaries."""
    net = problem.network
    order = net.topological_order
    if order is None:
        raise ValueError("distributed heuristic requires an acyclic network")
    fixed: Rows = {}
    for i in reversed(order):
        if i not in problem.adversaries or not net.out_links[i]:
            continue
        routing = problem.default_routing.merged(fixed)
        sub_nodes = {i}
        stack = [i]
        while stack:
            v = stack.pop()
            if v == net.destination:
                continue
            if v == i:
                succs = net.out_links[v]
            else:
                row = routing.row(v)
                succs = [j for j in net.out_links[v] if row and row.get(j, 0.0) > TOL]
            for j in succs:
                if j not in sub_nodes:
                    sub_nodes.add(j)
                    stack.append(j)
        sub_links = tuple(
            (u, w, c) for u, w, c in net.links if u in sub_nodes and w in sub_nodes
        )
        sub_net = Network(
            node_count=net.node_count,
            links=sub_links,
            source=i,
            destination=net.destination,
        )
        sub_rows = {
            u: dict(routing.rows[u])
            for u in sub_nodes
            if u != i and u in routing.rows
        }
        sub = AttackProblem(
            network=sub_net,
            adversaries=frozenset({i}),
            default_routing=RoutingMatrix(sub_rows),
        )
        res = exact_min_lambda(sub)
        fixed[i] = dict(res.rows.get(i, _uniform_row(net.out_links[i])))
    return _evaluate(problem, fixed, "distributed")


def local_min_capacity_attack(problem: AttackProblem) -> AttackResult:
    """Baseline: every adversary routes everything down its minimum-capacity
    outgoing link (ties to the lowest head id)."""
    net = problem.network
    rows: Rows = {}
    for a in sorted(problem.adversaries):
        outs = net.out_links[a]
        if not outs:
            continue
        j = min(outs, key=lambda w: (net.capacity[(a, w)], w))
        rows[a] = {j: 1.0}
    return _evaluate(problem, rows, "local")
