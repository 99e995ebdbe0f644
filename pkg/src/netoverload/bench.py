"""Random instance generators and the Monte-Carlo sweep harness.

Generated topologies are acyclic (links only from lower to higher ids) with
node 1 as source and node N as destination; capacities, adversary sets, and
rate draws are seeded independently so a sweep can vary them on a grid.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import networkx as nx
import numpy as np

from . import lossmax, minthroughput
from .model import (
    AttackProblem,
    Network,
    PathDecomposition,
    RoutingMatrix,
    SingleHopInstance,
    routing_from_paths,
    validate,
)
from .nodeselect import SelectionProblem

POLICIES = ("uniform", "proportional", "ecmp", "maxflow")


@dataclass(frozen=True)
class GenConfig:
    mode: str = "multihop"  # multihop | singlehop
    n: int = 20
    n_ingress: int = 8
    n_egress: int = 8
    density: float = 0.4
    cap_range: tuple[float, float] = (1.0, 10.0)
    ratio: float = 2.0  # total service / total arrival (single-hop)
    uniformity: str = "hetero"  # hetero | homo (max 10% service spread)
    policy: str = "uniform"
    adv_count: int = 4
    topologies: int = 10
    adv_sets: int = 1
    cap_draws: int = 1
    seed: int = 0
    arrival: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.density <= 1.0:
            raise ValueError("density must be in (0, 1]")
        if self.ratio <= 0.0:
            raise ValueError("ratio must be positive")
        if min(self.topologies, self.adv_sets, self.cap_draws) < 1:
            raise ValueError("counts must be >= 1")


def config_from_dict(doc: Mapping) -> GenConfig:
    kwargs = dict(doc)
    if "cap_range" in kwargs:
        kwargs["cap_range"] = tuple(float(x) for x in kwargs["cap_range"])
    return GenConfig(**kwargs)


# ---------------------------------------------------------------------------
# generators


def _random_dag(n: int, p: float, rng: np.random.Generator) -> list[tuple[int, int]]:
    links = []
    for i in range(1, n):
        for j in range(i + 1, n + 1):
            if rng.random() < p:
                links.append((i, j))
    return links


def _connected(n: int, links: list[tuple[int, int]]) -> bool:
    succ: dict[int, list[int]] = {}
    for i, j in links:
        succ.setdefault(i, []).append(j)
    seen = {1}
    stack = [1]
    while stack:
        v = stack.pop()
        for j in succ.get(v, ()):
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return n in seen


def gen_multihop(
    config: GenConfig,
    topology_seed: int | None = None,
    adv_seed: int | None = None,
    cap_seed: int | None = None,
) -> AttackProblem:
    """Random acyclic network with seeded topology, capacities, adversary set,
    and the configured default-routing policy."""
    n = config.n
    t_rng = np.random.default_rng(config.seed if topology_seed is None else topology_seed)
    for _ in range(10_000):
        links = _random_dag(n, config.density, t_rng)
        if _connected(n, links):
            break
    else:
        raise ValueError("no connected topology found in 10000 draws")
    c_rng = np.random.default_rng(config.seed if cap_seed is None else cap_seed)
    lo, hi = config.cap_range
    caps = {l: float(c_rng.uniform(lo, hi)) for l in sorted(links)}
    net = Network(
        node_count=n,
        links=tuple((i, j, caps[(i, j)]) for i, j in sorted(links)),
        source=1,
        destination=n,
    )
    a_rng = np.random.default_rng(config.seed if adv_seed is None else adv_seed)
    interior = np.arange(2, n)
    k = min(config.adv_count, interior.size)
    advs = frozenset(int(v) for v in a_rng.choice(interior, size=k, replace=False))
    routing = default_routing(net, config.policy)
    problem = AttackProblem(net, advs, routing)
    issues = validate(problem)
    if issues:
        raise AssertionError(f"generator produced an invalid instance: {issues}")
    return problem


def default_routing(
    network: Network, policy: str, path_cap: int = 100_000
) -> RoutingMatrix:
    """Dispatch rows for every non-destination node with out-links."""
    if policy == "uniform":
        rows = {
            v: {j: 1.0 / len(network.out_links[v]) for j in network.out_links[v]}
            for v in network.nodes()
            if v != network.destination and network.out_links[v]
        }
        return RoutingMatrix(rows)
    if policy == "proportional":
        rows = {}
        for v in network.nodes():
            outs = network.out_links[v]
            if v == network.destination or not outs:
                continue
            caps = [network.capacity[(v, j)] for j in outs]
            infinite = [j for j, c in zip(outs, caps) if math.isinf(c)]
            if infinite:  # the formula is undefined at infinity; split there
                rows[v] = {j: 1.0 / len(infinite) for j in infinite}
            else:
                total = sum(caps)
                rows[v] = {j: c / total for j, c in zip(outs, caps)}
        return RoutingMatrix(rows)
    if policy == "ecmp":
        paths = _min_hop_paths(network, path_cap)
        share = 1.0 / len(paths)
        decomp = PathDecomposition(tuple((p, share) for p in paths))
        matrix = routing_from_paths(network, decomp)
        rows = {i: dict(r) for i, r in matrix.rows.items()}
        for v in network.nodes():  # off-path nodes fall back to a uniform row
            outs = network.out_links[v]
            if v != network.destination and outs and v not in rows:
                rows[v] = {j: 1.0 / len(outs) for j in outs}
        return RoutingMatrix(rows)
    if policy == "maxflow":
        return _maxflow_routing(network)
    raise ValueError(f"unknown routing policy {policy!r}")


def _min_hop_paths(network: Network, cap: int) -> list[tuple[int, ...]]:
    dist = {network.source: 0}
    frontier = [network.source]
    while frontier:
        nxt = []
        for v in frontier:
            for j in network.out_links[v]:
                if j not in dist:
                    dist[j] = dist[v] + 1
                    nxt.append(j)
        frontier = nxt
    if network.destination not in dist:
        raise ValueError("destination unreachable")
    paths: list[tuple[int, ...]] = []
    stack: list[tuple[int, ...]] = [(network.source,)]
    while stack:
        path = stack.pop()
        v = path[-1]
        if v == network.destination:
            paths.append(path)
            if len(paths) > cap:
                raise ValueError(f"more than {cap} equal-cost paths")
            continue
        for j in sorted(network.out_links[v], reverse=True):
            if dist.get(j, -1) == dist[v] + 1 and dist[j] <= dist[network.destination]:
                stack.append(path + (j,))
    return paths


def _maxflow_routing(network: Network) -> RoutingMatrix:
    g = nx.DiGraph()
    g.add_nodes_from(network.nodes())
    for i, j, c in network.links:
        if math.isinf(c):
            g.add_edge(i, j)  # no capacity attribute = unbounded
        else:
            g.add_edge(i, j, capacity=c)
    # edmonds_karp: the default preflow-push can crash on graphs with
    # nodes that cannot reach the sink
    from networkx.algorithms.flow import edmonds_karp

    _, flow = nx.maximum_flow(
        g, network.source, network.destination, flow_func=edmonds_karp
    )
    rows = {}
    for v in network.nodes():
        outs = network.out_links[v]
        if v == network.destination or not outs:
            continue
        outflow = sum(flow[v].get(j, 0.0) for j in outs)
        if outflow > 1e-12:
            rows[v] = {
                j: flow[v].get(j, 0.0) / outflow
                for j in outs
                if flow[v].get(j, 0.0) > 1e-12
            }
        else:
            rows[v] = {j: 1.0 / len(outs) for j in outs}
    return RoutingMatrix(rows)


def gen_singlehop(
    config: GenConfig,
    topology_seed: int | None = None,
    rate_seed: int | None = None,
) -> SingleHopInstance:
    """Random bipartite instance: seeded edge draws (every ingress keeps at
    least one), arrivals uniform on [1, 10], services drawn heterogeneously
    on [1, 10] or homogeneously within a 10% band, then scaled so total
    service / total arrival equals the configured ratio. All ingress nodes
    are adversarial, with uniform pre-hijack rows recorded."""
    ns, nd = config.n_ingress, config.n_egress
    t_rng = np.random.default_rng(config.seed if topology_seed is None else topology_seed)
    edges = []
    for _ in range(ns):
        row = tuple(j for j in range(1, nd + 1) if t_rng.random() < config.density)
        if not row:
            row = (int(t_rng.integers(1, nd + 1)),)
        edges.append(row)
    r_rng = np.random.default_rng(config.seed if rate_seed is None else rate_seed)
    lam = r_rng.uniform(1.0, 10.0, size=ns)
    if config.uniformity == "homo":
        mu = r_rng.uniform(0.9, 1.0, size=nd)
    else:
        mu = r_rng.uniform(1.0, 10.0, size=nd)
    mu *= config.ratio * lam.sum() / mu.sum()
    routing = {
        i: {j: 1.0 / len(edges[i - 1]) for j in edges[i - 1]} for i in range(1, ns + 1)
    }
    return SingleHopInstance(
        arrivals=tuple(float(x) for x in lam),
        services=tuple(float(x) for x in mu),
        edges=tuple(edges),
        adversaries=frozenset(range(1, ns + 1)),
        routing=routing,
    )


def gen_setcover(
    m: int,
    n: int,
    membership: Sequence[Sequence[int]] | None = None,
    seed: int = 0,
) -> tuple[SingleHopInstance, SelectionProblem]:
    """Covering structure as attack instances: elements are unit-arrival
    ingress nodes, sets are unit-capacity egress nodes, and an edge means the
    set contains the element. The optimal loss is m minus the minimum cover
    size. The companion selection problem adds a relay node T that everything
    reaches directly by default over unbounded links, so the no-loss
    throughput drops from infinity to 1 exactly when the chosen nodes force
    all traffic through the unit-capacity link into T."""
    if membership is None:
        rng = np.random.default_rng(seed)
        while True:
            membership = [
                [e for e in range(1, m + 1) if rng.random() < 0.5] for _ in range(n)
            ]
            if all(any(e in s for s in membership) for e in range(1, m + 1)):
                break
    covered = {e for s in membership for e in s}
    missing = sorted(set(range(1, m + 1)) - covered)
    if missing:
        raise ValueError(f"elements {missing} not covered by any set")

    edges = tuple(
        tuple(sorted(j for j in range(1, n + 1) if e in membership[j - 1]))
        for e in range(1, m + 1)
    )
    instance = SingleHopInstance(
        arrivals=(1.0,) * m,
        services=(1.0,) * n,
        edges=edges,
        adversaries=frozenset(range(1, m + 1)),
        routing={i: {j: 1.0 / len(edges[i - 1]) for j in edges[i - 1]} for i in range(1, m + 1)},
    )

    # selection variant: source 1, elements 2..m+1, sets m+2..m+n+1,
    # collector d0 = m+n+2, relay/destination T = m+n+3
    s = lambda i: 1 + i
    d = lambda j: 1 + m + j
    d0, t_node = m + n + 2, m + n + 3
    links: list[tuple[int, int, float]] = [(1, s(i), math.inf) for i in range(1, m + 1)]
    rows: dict[int, dict[int, float]] = {1: {s(i): 1.0 / m for i in range(1, m + 1)}}
    for i in range(1, m + 1):
        links.append((s(i), t_node, math.inf))
        rows[s(i)] = {t_node: 1.0}
        for j in edges[i - 1]:
            links.append((s(i), d(j), math.inf))
    for j in range(1, n + 1):
        links.append((d(j), t_node, math.inf))
        links.append((d(j), d0, math.inf))
        rows[d(j)] = {t_node: 1.0}
    links.append((d0, t_node, 1.0))
    rows[d0] = {t_node: 1.0}
    base = AttackProblem(
        network=Network(
            node_count=t_node, links=tuple(sorted(links)), source=1, destination=t_node
        ),
        adversaries=frozenset(),
        default_routing=RoutingMatrix(rows),
    )
    selection = SelectionProblem(
        base=base,
        candidates=frozenset(range(2, m + n + 2)),
        budget=m + n,
        objective="min-lambda",
    )
    return instance, selection


# ---------------------------------------------------------------------------
# sweep harness


@dataclass
class SweepStats:
    values: list[float] = field(default_factory=list)
    failures: int = 0

    @property
    def count(self) -> int:
        return len(self.values)

    def _pct(self, q: float) -> float:
        ordered = sorted(self.values)
        idx = max(0, math.ceil(q * len(ordered)) - 1)
        return ordered[idx]

    def summary(self) -> dict:
        if not self.values:
            return {"count": 0, "failures": self.failures}
        return {
            "count": self.count,
            "failures": self.failures,
            "mean": sum(self.values) / self.count,
            "p10": self._pct(0.10),
            "p90": self._pct(0.90),
            "min": min(self.values),
            "max": max(self.values),
        }

    def cdf(self) -> list[tuple[float, float]]:
        ordered = sorted(self.values)
        n = len(ordered)
        return [(v, (k + 1) / n) for k, v in enumerate(ordered)]


def _ratio(value: float, oracle: float) -> float:
    if (math.isinf(value) and math.isinf(oracle)) or (value == 0.0 and oracle == 0.0):
        return 1.0
    return value / oracle


MULTIHOP_ALGOS = ("exact", "brute", "approx2", "distributed", "local")
SINGLEHOP_ALGOS = ("brute", "mul", "add", "minmu", "rand")


def _run_multihop(problem: AttackProblem, algo: str) -> float:
    if algo == "exact":
        return minthroughput.exact_min_lambda(problem).lambda_star
    if algo == "brute":
        return minthroughput.brute_force_min_lambda(problem).lambda_star
    if algo == "approx2":
        view = minthroughput.measure_downstream(problem)
        return minthroughput.approx2_min_lambda(
            view, problem.adversaries, problem
        ).lambda_star
    if algo == "distributed":
        return minthroughput.distributed_heuristic(problem).lambda_star
    if algo == "local":
        return minthroughput.local_min_capacity_attack(problem).lambda_star
    raise ValueError(f"unknown multihop algorithm {algo!r}")


def _run_singlehop(instance: SingleHopInstance, algo: str, seed: int) -> float:
    if algo == "brute":
        return lossmax.brute_force_max_loss(instance).loss
    if algo == "mul":
        return lossmax.maxloss_multiplicative(instance).loss
    if algo == "add":
        return lossmax.maxloss_additive(instance).loss
    if algo == "minmu":
        return lossmax.minmu_baseline(instance).loss
    if algo == "rand":
        return lossmax.rand_baseline(instance, seed).loss
    raise ValueError(f"unknown singlehop algorithm {algo!r}")


def run_sweep(
    config: GenConfig,
    algorithms: Sequence[str],
    out_prefix: str | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> dict[str, dict[str, SweepStats]]:
    """Generate the topology x adversary-set x rate-draw grid, run each
    algorithm, and aggregate per-metric statistics.

    Multi-hop metric: `ratio` (lambda* of the algorithm over the exact
    optimum). Single-hop metrics: `ratio` (loss over the brute-force
    optimum), `gap` ((optimal loss - loss) / total arrival), and
    `loss_ratio` (loss / total arrival). Writes `<prefix>.csv`,
    `<prefix>.summary.json`, and `<prefix>.cdf.csv` when a prefix is given;
    outputs are a pure function of the config, so reruns are byte-identical.
    """
    master = np.random.default_rng(config.seed)
    topo_seeds = master.integers(2**31, size=config.topologies)
    adv_seeds = master.integers(2**31, size=config.adv_sets)
    cap_seeds = master.integers(2**31, size=config.cap_draws)

    stats: dict[str, dict[str, SweepStats]] = {a: {} for a in algorithms}
    rows: list[tuple] = []
    total = config.topologies * config.adv_sets * config.cap_draws
    instance_id = 0
    for ts in topo_seeds:
        for as_ in adv_seeds:
            for cs in cap_seeds:
                if progress is not None:
                    progress(instance_id, total)
                if config.mode == "multihop":
                    problem = gen_multihop(config, int(ts), int(as_), int(cs))
                    oracle = minthroughput.exact_min_lambda(problem).lambda_star
                    for algo in algorithms:
                        try:
                            value = _run_multihop(problem, algo)
                        except (ValueError, RuntimeError):
                            stats[algo].setdefault("ratio", SweepStats()).failures += 1
                            continue
                        metric_value = _ratio(value, oracle)
                        stats[algo].setdefault("ratio", SweepStats()).values.append(
                            metric_value
                        )
                        rows.append(
                            (instance_id, int(ts), int(as_), int(cs), algo, "ratio",
                             metric_value, 0)
                        )
                elif config.mode == "singlehop":
                    instance = gen_singlehop(config, int(ts), int(cs))
                    oracle = lossmax.brute_force_max_loss(instance).loss
                    total_arrival = instance.total_arrival
                    for algo in algorithms:
                        try:
                            value = _run_singlehop(instance, algo, int(as_))
                        except (ValueError, RuntimeError):
                            for metric in ("ratio", "gap", "loss_ratio"):
                                stats[algo].setdefault(metric, SweepStats()).failures += 1
                            continue
                        metrics = {
                            "ratio": _ratio(value, oracle),
                            "gap": (oracle - value) / total_arrival,
                            "loss_ratio": value / total_arrival,
                        }
                        for metric, mv in metrics.items():
                            stats[algo].setdefault(metric, SweepStats()).values.append(mv)
                            rows.append(
                                (instance_id, int(ts), int(as_), int(cs), algo,
                                 metric, mv, 0)
                            )
                else:
                    raise ValueError(f"unknown sweep mode {config.mode!r}")
                instance_id += 1

    if out_prefix is not None:
        _write_outputs(out_prefix, rows, stats)
    return stats


def _fmt(x: float) -> str:
    return "%.12g" % x


def _write_outputs(
    prefix: str, rows: list[tuple], stats: dict[str, dict[str, SweepStats]]
) -> None:
    with open(prefix + ".csv", "w") as fh:
        fh.write("instance_id,topology_seed,adv_seed,cap_seed,algo,metric,value,runtime_ms\n")
        for iid, ts, as_, cs, algo, metric, value, rt in rows:
            fh.write(f"{iid},{ts},{as_},{cs},{algo},{metric},{_fmt(value)},{rt}\n")
    summary = {
        algo: {metric: st.summary() for metric, st in metrics.items()}
        for algo, metrics in stats.items()
    }
    with open(prefix + ".summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(prefix + ".cdf.csv", "w") as fh:
        fh.write("algo,metric,value,cumulative_fraction\n")
        for algo in sorted(stats):
            for metric in sorted(stats[algo]):
                for v, frac in stats[algo][metric].cdf():
                    fh.write(f"{algo},{metric},{_fmt(v)},{_fmt(frac)}\n")
