"""Core network model: graphs, dispatch-ratio routing, and flow propagation.

Nodes are 1-based integers. Capacities are floats where ``math.inf`` is a
distinguished value (a link that can never saturate); the utilization f/inf
is defined as 0 everywhere.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

TOL = 1e-9

Link = tuple[int, int]
Rows = Mapping[int, Mapping[int, float]]


class ThroughputResult(NamedTuple):
    """No-loss throughput together with the first link to saturate."""

    lambda_star: float
    bottleneck: Link | None
    flows: dict[Link, float]


@dataclass(frozen=True)
class Network:
    """Directed graph with per-link capacities and a single commodity."""

    node_count: int
    links: tuple[tuple[int, int, float], ...]
    source: int
    destination: int

    @cached_property
    def link_set(self) -> frozenset[Link]:
        return frozenset((i, j) for i, j, _ in self.links)

    @cached_property
    def capacity(self) -> dict[Link, float]:
        return {(i, j): c for i, j, c in self.links}

    @cached_property
    def out_links(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {v: [] for v in self.nodes()}
        for i, j, _ in self.links:
            out[i].append(j)
        return {v: tuple(sorted(js)) for v, js in out.items()}

    @cached_property
    def in_links(self) -> dict[int, tuple[int, ...]]:
        inn: dict[int, list[int]] = {v: [] for v in self.nodes()}
        for i, j, _ in self.links:
            inn[j].append(i)
        return {v: tuple(sorted(js)) for v, js in inn.items()}

    def nodes(self) -> range:
        return range(1, self.node_count + 1)

    @cached_property
    def topological_order(self) -> tuple[int, ...] | None:
        """Kahn topological order of all nodes, or None if the graph is cyclic."""
        indeg = {v: 0 for v in self.nodes()}
        for _, j, _ in self.links:
            indeg[j] += 1
        queue = deque(sorted(v for v, d in indeg.items() if d == 0))
        order: list[int] = []
        while queue:
            v = queue.popleft()
            order.append(v)
            for j in self.out_links[v]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    queue.append(j)
        if len(order) != self.node_count:
            return None
        return tuple(order)

    @property
    def is_dag(self) -> bool:
        return self.topological_order is not None

    def has_path(self, start: int, end: int) -> bool:
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            if v == end:
                return True
            for j in self.out_links[v]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return False


@dataclass(frozen=True)
class RoutingMatrix:
    """Per-node dispatch-ratio rows; each present row sums to 1 over out-links."""

    rows: Mapping[int, Mapping[int, float]]

    def row(self, node: int) -> Mapping[int, float] | None:
        return self.rows.get(node)

    def ratio(self, i: int, j: int) -> float:
        return self.rows.get(i, {}).get(j, 0.0)

    def merged(self, attack_rows: Rows) -> "RoutingMatrix":
        """Routing with the given rows overriding or extending this one."""
        rows = {i: dict(r) for i, r in self.rows.items()}
        for i, r in attack_rows.items():
            rows[i] = dict(r)
        return RoutingMatrix(rows)


@dataclass(frozen=True)
class FlowAssignment:
    """Per-link transmission rates produced by lossy propagation."""

    flows: Mapping[Link, float]
    arrival_rate: float
    delivered: float

    @property
    def loss(self) -> float:
        return self.arrival_rate - self.delivered


@dataclass(frozen=True)
class AttackProblem:
    """Network plus adversary set, default routing, and optional dispatch bounds.

    ``default_routing`` must cover every normal flow-carrying node; rows for
    adversarial nodes, when present, record their pre-hijack defaults (used by
    the downstream-measurement step).
    """

    network: Network
    adversaries: frozenset[int]
    default_routing: RoutingMatrix
    dispatch_bounds: Mapping[Link, tuple[float, float]] | None = None

    def is_adversarial(self, node: int) -> bool:
        return node in self.adversaries

    def bound(self, i: int, j: int) -> tuple[float, float]:
        if self.dispatch_bounds is None:
            return (0.0, 1.0)
        return self.dispatch_bounds.get((i, j), (0.0, 1.0))


@dataclass(frozen=True)
class PathDecomposition:
    """Source-to-destination paths with traffic fractions summing to 1."""

    paths: tuple[tuple[tuple[int, ...], float], ...]


@dataclass(frozen=True)
class SingleHopInstance:
    """Bipartite ingress/egress model. Ingress ids 1..n_ingress, egress 1..n_egress.

    ``loss_offset`` carries pre-existing overload mass produced when normal
    ingress traffic is folded into the service rates (see
    ``lossmax.reduce_normal_ingress``).
    """

    arrivals: tuple[float, ...]
    services: tuple[float, ...]
    edges: tuple[tuple[int, ...], ...]  # per-ingress sorted egress ids
    adversaries: frozenset[int]
    routing: Mapping[int, Mapping[int, float]] = field(default_factory=dict)
    loss_offset: float = 0.0
    # optional per-edge [lo, hi] limits on adversarial dispatch ratios
    dispatch_bounds: Mapping[tuple[int, int], tuple[float, float]] | None = None

    def bound(self, i: int, j: int) -> tuple[float, float]:
        if self.dispatch_bounds is None:
            return 0.0, 1.0
        return self.dispatch_bounds.get((i, j), (0.0, 1.0))

    @property
    def n_ingress(self) -> int:
        return len(self.arrivals)

    @property
    def n_egress(self) -> int:
        return len(self.services)

    @property
    def total_arrival(self) -> float:
        return float(sum(self.arrivals))


# ---------------------------------------------------------------------------
# validation


def validate(problem: AttackProblem) -> list[str]:
    """Check every structural invariant; returns diagnostics, empty if clean."""
    net = problem.network
    out: list[str] = []
    seen: set[Link] = set()
    for i, j, c in net.links:
        if i == j:
            out.append(f"link ({i},{j}): self-loop")
        if (i, j) in seen:
            out.append(f"link ({i},{j}): duplicate")
        seen.add((i, j))
        if not (c > 0):
            out.append(f"link ({i},{j}): capacity {c} must be > 0 or inf")
        for v in (i, j):
            if not 1 <= v <= net.node_count:
                out.append(f"link ({i},{j}): node {v} out of range")
    for name, v in (("source", net.source), ("destination", net.destination)):
        if not 1 <= v <= net.node_count:
            out.append(f"{name} {v} out of range")
            return out
    if not net.has_path(net.source, net.destination):
        out.append("disconnected: no source->destination path")
    if net.destination in problem.adversaries:
        out.append(f"node {net.destination}: destination cannot be adversarial")

    for i, row in problem.default_routing.rows.items():
        for j in row:
            if (i, j) not in net.link_set:
                out.append(f"routing row {i}: ratio on non-link ({i},{j})")
        bad = [j for j, x in row.items() if x < -TOL or x > 1 + TOL]
        if bad:
            out.append(f"routing row {i}: ratios outside [0,1] toward {bad}")

    for i in _flow_carriers(problem):
        if i == net.destination or i in problem.adversaries:
            continue
        if not net.out_links[i]:
            continue
        row = problem.default_routing.row(i)
        if row is None:
            out.append(f"node {i}: flow-carrying normal node has no routing row")
        elif abs(sum(row.values()) - 1.0) > TOL:
            out.append(f"node {i}: routing row sums to {sum(row.values()):.12g}, not 1")

    if problem.dispatch_bounds is not None:
        for (i, j), (lo, hi) in problem.dispatch_bounds.items():
            if (i, j) not in net.link_set:
                out.append(f"bounds on non-link ({i},{j})")
            if not (0 <= lo <= hi <= 1):
                out.append(f"bounds on ({i},{j}): need 0 <= {lo} <= {hi} <= 1")
        for a in sorted(problem.adversaries):
            lows = sum(problem.bound(a, j)[0] for j in net.out_links[a])
            highs = sum(problem.bound(a, j)[1] for j in net.out_links[a])
            if net.out_links[a] and not (lows <= 1 + TOL <= highs + 2 * TOL):
                out.append(
                    f"node {a}: infeasible bounds, sum(min)={lows:.6g} sum(max)={highs:.6g}"
                )
    return out


def _flow_carriers(problem: AttackProblem) -> set[int]:
    """Nodes reachable from the source: adversaries via any link, normal nodes
    via positive default ratios (a node with no row absorbs)."""
    net = problem.network
    seen = {net.source}
    stack = [net.source]
    while stack:
        v = stack.pop()
        if v == net.destination:
            continue
        if v in problem.adversaries:
            succs: Iterable[int] = net.out_links[v]
        else:
            row = problem.default_routing.row(v)
            succs = [j for j in net.out_links[v] if row and row.get(j, 0.0) > TOL]
        for j in succs:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return seen


# ---------------------------------------------------------------------------
# path <-> dispatch-ratio conversions


def routing_from_paths(network: Network, paths: PathDecomposition) -> RoutingMatrix:
    """Dispatch ratios induced by a weighted path set: per-link weight over
    per-node weight, rows omitted for nodes on no positive-weight path."""
    total = sum(theta for _, theta in paths.paths)
    if abs(total - 1.0) > TOL:
        raise ValueError(f"path fractions sum to {total:.12g}, not 1")
    beta: dict[Link, float] = {}
    for path, theta in paths.paths:
        _check_path(network, path)
        for i, j in zip(path, path[1:]):
            beta[(i, j)] = beta.get((i, j), 0.0) + theta
    rows: dict[int, dict[int, float]] = {}
    node_mass: dict[int, float] = {}
    for (i, _), b in beta.items():
        node_mass[i] = node_mass.get(i, 0.0) + b
    for (i, j), b in beta.items():
        if node_mass[i] <= TOL:
            continue
        rows.setdefault(i, {})[j] = b / node_mass[i]
    return RoutingMatrix(rows)


def path_fraction(network: Network, routing: RoutingMatrix, path: Sequence[int]) -> float:
    """Fraction of traffic taking the given source->destination path: the
    product of dispatch ratios along it."""
    _check_path(network, path)
    if path[0] != network.source or path[-1] != network.destination:
        raise ValueError("path must run from source to destination")
    frac = 1.0
    for i, j in zip(path, path[1:]):
        frac *= routing.ratio(i, j)
    return frac


def _check_path(network: Network, path: Sequence[int]) -> None:
    if len(path) < 2:
        raise ValueError(f"path too short: {path}")
    if len(set(path)) != len(path):
        raise ValueError(f"path is not simple: {path}")
    for i, j in zip(path, path[1:]):
        if (i, j) not in network.link_set:
            raise ValueError(f"path uses non-link ({i},{j})")


# ---------------------------------------------------------------------------
# single-hop embedding


def singlehop_to_multihop(instance: SingleHopInstance) -> AttackProblem:
    """Embed a bipartite instance as a commodity from a meta-source to a
    meta-destination.

    Node numbering: meta-source 1, ingress i -> 1+i, egress j -> 1+n_S+j,
    meta-destination 2+n_S+n_D. Ingress links get infinite capacity; the link
    out of egress j carries its service rate.
    """
    total = instance.total_arrival
    if total <= 0:
        raise ValueError("total arrival must be positive")
    ns, nd = instance.n_ingress, instance.n_egress
    s0, d0 = 1, 2 + ns + nd
    s = lambda i: 1 + i
    d = lambda j: 1 + ns + j
    links: list[tuple[int, int, float]] = []
    rows: dict[int, dict[int, float]] = {s0: {}}
    for i in range(1, ns + 1):
        links.append((s0, s(i), math.inf))
        rows[s0][s(i)] = instance.arrivals[i - 1] / total
        for j in instance.edges[i - 1]:
            links.append((s(i), d(j), math.inf))
    for j in range(1, nd + 1):
        links.append((d(j), d0, instance.services[j - 1]))
        rows[d(j)] = {d0: 1.0}
    for i in range(1, ns + 1):
        row = instance.routing.get(i)
        if row:
            rows[s(i)] = {d(j): x for j, x in row.items()}
        elif instance.edges[i - 1] and i not in instance.adversaries:
            share = 1.0 / len(instance.edges[i - 1])
            rows[s(i)] = {d(j): share for j in instance.edges[i - 1]}
    net = Network(
        node_count=d0,
        links=tuple(sorted(links)),
        source=s0,
        destination=d0,
    )
    return AttackProblem(
        network=net,
        adversaries=frozenset(s(i) for i in instance.adversaries),
        default_routing=RoutingMatrix(rows),
    )


def singlehop_node_ids(instance: SingleHopInstance) -> tuple[dict[int, int], dict[int, int]]:
    """Maps (ingress id -> multihop node id, egress id -> multihop node id)."""
    ns = instance.n_ingress
    return (
        {i: 1 + i for i in range(1, ns + 1)},
        {j: 1 + ns + j for j in range(1, instance.n_egress + 1)},
    )


# ---------------------------------------------------------------------------
# propagation


def propagate(
    problem: AttackProblem,
    full_routing: RoutingMatrix,
    arrival: float,
    max_iter: int = 100_000,
    residual_tol: float = 1e-10,
) -> FlowAssignment:
    """Lossy propagation: f_ij = min(inflow_i * x_ij, c_ij).

    Exact topological pass on DAGs; monotone fixed-point iteration from the
    all-zero assignment otherwise. Traffic reaching a node with no routing
    row (and the excess at saturated links) is dropped.
    """
    net = problem.network
    if arrival < 0:
        raise ValueError("arrival must be nonnegative")
    order = net.topological_order
    if order is not None:
        flows, delivered = _propagate_pass(net, full_routing, arrival, None)
        return FlowAssignment(flows, arrival, delivered)
    flows: dict[Link, float] = {(i, j): 0.0 for i, j, _ in net.links}
    for _ in range(max_iter):
        new_flows, _ = _propagate_pass(net, full_routing, arrival, flows)
        residual = max(
            (abs(new_flows[e] - flows[e]) for e in flows), default=0.0
        )
        flows = new_flows
        if residual < residual_tol:
            delivered = arrival if net.source == net.destination else sum(
                flows[(k, net.destination)] for k in net.in_links[net.destination]
            )
            return FlowAssignment(flows, arrival, delivered)
    raise RuntimeError(
        f"lossy propagation did not converge after {max_iter} iterations "
        f"(residual {residual:.3e})"
    )


def _propagate_pass(
    net: Network,
    routing: RoutingMatrix,
    arrival: float,
    prev: dict[Link, float] | None,
) -> tuple[dict[Link, float], float]:
    """One evaluation of the flow map. With prev=None the graph must be a DAG
    and the pass is exact; otherwise inflows are read from prev."""
    flows: dict[Link, float] = {}
    inflow: dict[int, float] = {v: 0.0 for v in net.nodes()}
    inflow[net.source] += arrival
    if prev is None:
        for v in net.topological_order:  # type: ignore[union-attr]
            if v == net.destination:
                continue
            row = routing.row(v)
            if row is None or inflow[v] <= 0.0:
                for j in net.out_links[v]:
                    flows[(v, j)] = 0.0
                continue
            for j in net.out_links[v]:
                f = min(inflow[v] * row.get(j, 0.0), net.capacity[(v, j)])
                flows[(v, j)] = f
                inflow[j] += f
        return flows, inflow[net.destination]
    for k, v in prev:
        inflow[v] += prev[(k, v)]
    for v in net.nodes():
        if v == net.destination:
            for j in net.out_links[v]:
                flows[(v, j)] = 0.0
            continue
        row = routing.row(v)
        for j in net.out_links[v]:
            x = 0.0 if row is None else row.get(j, 0.0)
            flows[(v, j)] = min(inflow[v] * x, net.capacity[(v, j)])
    delivered = inflow[net.destination]
    return flows, delivered


def lossless_flows(problem: AttackProblem, routing: RoutingMatrix) -> dict[Link, float]:
    """Per-link traffic proportions under unit arrival, assuming no link ever
    saturates. Forward pass on DAGs, linear-system solve on cyclic graphs."""
    net = problem.network
    order = net.topological_order
    if order is not None:
        inflow = {v: 0.0 for v in net.nodes()}
        inflow[net.source] = 1.0
        flows: dict[Link, float] = {(i, j): 0.0 for i, j, _ in net.links}
        for v in order:
            if v == net.destination:
                continue
            row = routing.row(v)
            if row is None or inflow[v] == 0.0:
                continue
            for j in net.out_links[v]:
                f = inflow[v] * row.get(j, 0.0)
                flows[(v, j)] = f
                inflow[j] += f
        return flows
    n = net.node_count
    a = np.eye(n)
    for i in net.nodes():
        if i == net.destination:
            continue
        row = routing.row(i)
        if row is None:
            continue
        for j, x in row.items():
            a[j - 1, i - 1] -= x
    b = np.zeros(n)
    b[net.source - 1] = 1.0
    try:
        v = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"degenerate cyclic routing: {exc}") from exc
    if not np.all(np.isfinite(v)) or np.max(np.abs(a @ v - b)) > 1e-7:
        raise ValueError("degenerate cyclic routing: singular flow system")
    flows = {}
    for i, j, _ in net.links:
        x = routing.ratio(i, j) if i != net.destination else 0.0
        flows[(i, j)] = float(v[i - 1]) * x
    return flows


def lossless_utilization(
    problem: AttackProblem, routing: RoutingMatrix
) -> ThroughputResult:
    """No-loss throughput of a fixed routing plus the first saturated link.

    lambda* is the reciprocal of the maximum link utilization under unit
    arrival; infinite when every loaded link has infinite capacity. Ties in
    the argmax break toward the lexicographically smallest link."""
    flows = lossless_flows(problem, routing)
    best: float = 0.0
    best_link: Link | None = None
    for (i, j) in sorted(flows):
        c = problem.network.capacity[(i, j)]
        util = 0.0 if math.isinf(c) else flows[(i, j)] / c
        if util > best + TOL:
            best = util
            best_link = (i, j)
    if best <= TOL:
        return ThroughputResult(math.inf, None, flows)
    return ThroughputResult(1.0 / best, best_link, flows)


def no_loss_throughput(problem: AttackProblem, full_routing: RoutingMatrix) -> float:
    return lossless_utilization(problem, full_routing).lambda_star


# ---------------------------------------------------------------------------
# reachability


def downstream_set(problem: AttackProblem, node: int) -> set[int]:
    """Nodes reachable from `node`: any link out of an adversarial node,
    positive-ratio links out of normal ones. Excludes the node itself."""
    return _reach(problem, node, forward=True)


def upstream_set(problem: AttackProblem, node: int) -> set[int]:
    """Nodes from which `node` is reachable under the same link rule."""
    down = {
        v for v in problem.network.nodes() if v != node and node in _reach(problem, v, True)
    }
    return down


def _reach(problem: AttackProblem, start: int, forward: bool) -> set[int]:
    net = problem.network
    seen: set[int] = set()
    stack = [start]
    while stack:
        v = stack.pop()
        if v == net.destination:
            continue
        if v in problem.adversaries:
            succs: Iterable[int] = net.out_links[v]
        else:
            row = problem.default_routing.row(v)
            succs = [j for j in net.out_links[v] if row and row.get(j, 0.0) > TOL]
        for j in succs:
            if j not in seen and j != start:
                seen.add(j)
                stack.append(j)
            elif j == start:
                pass
    return seen


# ---------------------------------------------------------------------------
# JSON interchange


def problem_to_json(problem: AttackProblem) -> dict:
    net = problem.network
    links = [
        {"from": i, "to": j, "cap": "inf" if math.isinf(c) else c}
        for i, j, c in net.links
    ]
    doc: dict = {
        "nodes": net.node_count,
        "source": net.source,
        "destination": net.destination,
        "links": links,
        "adversaries": sorted(problem.adversaries),
        "routing": {
            str(i): {str(j): x for j, x in sorted(row.items())}
            for i, row in sorted(problem.default_routing.rows.items())
        },
    }
    if problem.dispatch_bounds:
        doc["bounds"] = {
            f"{i},{j}": [lo, hi] for (i, j), (lo, hi) in sorted(problem.dispatch_bounds.items())
        }
    return doc


def problem_from_json(doc: dict) -> AttackProblem:
    links = tuple(
        (int(l["from"]), int(l["to"]), math.inf if l["cap"] == "inf" else float(l["cap"]))
        for l in doc["links"]
    )
    net = Network(
        node_count=int(doc["nodes"]),
        links=tuple(sorted(links)),
        source=int(doc["source"]),
        destination=int(doc["destination"]),
    )
    rows = {
        int(i): {int(j): float(x) for j, x in row.items()}
        for i, row in doc.get("routing", {}).items()
    }
    bounds = None
    if "bounds" in doc:
        bounds = {}
        for key, (lo, hi) in doc["bounds"].items():
            i, j = (int(t) for t in key.split(","))
            bounds[(i, j)] = (float(lo), float(hi))
    return AttackProblem(
        network=net,
        adversaries=frozenset(int(v) for v in doc.get("adversaries", [])),
        default_routing=RoutingMatrix(rows),
        dispatch_bounds=bounds,
    )


def load_problem(path: str) -> AttackProblem:
    with open(path) as fh:
        return problem_from_json(json.load(fh))
