"""Attacks that maximize throughput loss at a given arrival rate.

Covers the exact brute force over single-egress assignments, the greedy pair
with a 1/sqrt(|V_A|) multiplicative guarantee, the iterative-saturation
algorithm with a lambda/4 additive guarantee, the normal-ingress reduction,
and the min-mu / random baselines.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .minthroughput import exact_min_lambda
from .model import (
    TOL,
    AttackProblem,
    Network,
    RoutingMatrix,
    SingleHopInstance,
    propagate,
    singlehop_node_ids,
    singlehop_to_multihop,
)

Rows = dict[int, dict[int, float]]


@dataclass(frozen=True)
class LossResult:
    rows: Mapping[int, Mapping[int, float]]
    loss: float
    overloads: tuple[float, ...]
    algo: str


# ---------------------------------------------------------------------------
# evaluation and the normal-ingress reduction


def _full_rows(instance: SingleHopInstance, rows: Mapping[int, Mapping[int, float]]) -> Rows:
    """Rows for every flow-carrying ingress: attack rows for adversaries
    (uniform when unassigned), defaults for normal nodes."""
    out: Rows = {}
    for i in range(1, instance.n_ingress + 1):
        edges = instance.edges[i - 1]
        if not edges:
            continue
        if i in instance.adversaries:
            row = rows.get(i)
            if row is None:
                row = {j: 1.0 / len(edges) for j in edges}
            out[i] = dict(row)
        else:
            row = instance.routing.get(i)
            if row:
                out[i] = dict(row)
    return out


def singlehop_loss(
    instance: SingleHopInstance, rows: Mapping[int, Mapping[int, float]]
) -> tuple[float, tuple[float, ...]]:
    """Loss under the given adversarial rows: per-egress overload
    max(inflow - mu, 0) summed, plus the instance's constant offset."""
    inflow = [0.0] * instance.n_egress
    full = _full_rows(instance, rows)
    for i, row in full.items():
        lam = instance.arrivals[i - 1]
        if lam <= 0.0:
            continue
        for j, x in row.items():
            inflow[j - 1] += lam * x
    overloads = tuple(
        max(inflow[j] - instance.services[j], 0.0) for j in range(instance.n_egress)
    )
    return sum(overloads) + instance.loss_offset, overloads


def _evaluate_singlehop(
    instance: SingleHopInstance, rows: Rows, algo: str
) -> LossResult:
    loss, overloads = singlehop_loss(instance, rows)
    return LossResult(rows, loss, overloads, algo)


def reduce_normal_ingress(
    instance: SingleHopInstance,
) -> tuple[SingleHopInstance, dict[int, int]]:
    """Fold the fixed traffic of normal ingress nodes into the service rates
    and drop them, leaving an all-adversarial instance.

    Service rates driven negative (pre-existing overload) are clamped to zero
    with the clamped mass carried in ``loss_offset``, so total loss is
    preserved. Returns the reduced instance and a map from its renumbered
    ingress ids back to the original ones.
    """
    services = list(instance.services)
    offset = instance.loss_offset
    for i in range(1, instance.n_ingress + 1):
        if i in instance.adversaries:
            continue
        lam = instance.arrivals[i - 1]
        row = instance.routing.get(i)
        if lam <= 0.0 or not row:
            continue
        for j, x in row.items():
            services[j - 1] -= lam * x
    for j in range(len(services)):
        if services[j] < 0.0:
            offset += -services[j]
            services[j] = 0.0
    keep = sorted(instance.adversaries)
    id_map = {k + 1: old for k, old in enumerate(keep)}
    bounds = None
    if instance.dispatch_bounds:
        inv = {old: new for new, old in id_map.items()}
        bounds = {
            (inv[i], j): b
            for (i, j), b in instance.dispatch_bounds.items()
            if i in inv
        }
    reduced = SingleHopInstance(
        arrivals=tuple(instance.arrivals[old - 1] for old in keep),
        services=tuple(services),
        edges=tuple(instance.edges[old - 1] for old in keep),
        adversaries=frozenset(range(1, len(keep) + 1)),
        routing={},
        loss_offset=offset,
        dispatch_bounds=bounds,
    )
    return reduced, id_map


# ---------------------------------------------------------------------------
# brute force


def brute_force_max_loss(
    obj: SingleHopInstance | AttackProblem,
    arrival: float | None = None,
    combo_cap: int = 2_000_000,
) -> LossResult:
    """Enumerate all assignments routing each adversary's whole traffic down a
    single edge (single link in the multi-hop case); optimal by the vertex
    property of the loss objective. Ties keep the earliest assignment in
    product order over adversaries sorted ascending."""
    if isinstance(obj, SingleHopInstance):
        return _brute_singlehop(obj, combo_cap)
    if arrival is None:
        raise ValueError("multi-hop loss maximization requires an arrival rate")
    return _brute_multihop(obj, arrival, combo_cap)


def _brute_singlehop(instance: SingleHopInstance, combo_cap: int) -> LossResult:
    if instance.dispatch_bounds:
        raise ValueError("brute force does not support dispatch bounds")
    lam = np.asarray(instance.arrivals, dtype=float)
    mu = np.asarray(instance.services, dtype=float)
    base = np.zeros(instance.n_egress)
    for i in range(1, instance.n_ingress + 1):
        if i in instance.adversaries or lam[i - 1] <= 0.0:
            continue
        row = instance.routing.get(i)
        if not row:
            continue
        for j, x in row.items():
            base[j - 1] += lam[i - 1] * x
    advs = [
        i
        for i in sorted(instance.adversaries)
        if lam[i - 1] > 0.0 and instance.edges[i - 1]
    ]
    opts = [np.asarray(instance.edges[a - 1], dtype=int) - 1 for a in advs]
    ncombo = math.prod(len(o) for o in opts) if advs else 1
    if ncombo > combo_cap:
        raise ValueError(f"{ncombo} combinations exceed the cap {combo_cap}")
    strides = []
    s = ncombo
    for o in opts:
        s //= len(o)
        strides.append(s)

    best_loss, best_idx = -1.0, 0
    chunk = 1 << 18
    for start in range(0, ncombo, chunk):
        idx = np.arange(start, min(start + chunk, ncombo))
        inflow = np.tile(base, (idx.size, 1))
        rowsel = np.arange(idx.size)
        for a, o, st in zip(advs, opts, strides):
            inflow[rowsel, o[(idx // st) % len(o)]] += lam[a - 1]
        losses = np.maximum(inflow - mu, 0.0).sum(axis=1)
        k = int(np.argmax(losses))
        if losses[k] > best_loss:
            best_loss, best_idx = float(losses[k]), int(idx[k])

    rows: Rows = {}
    for a, o, st in zip(advs, opts, strides):
        rows[a] = {int(o[(best_idx // st) % len(o)]) + 1: 1.0}
    return _evaluate_singlehop(instance, rows, "brute")


def _brute_multihop(
    problem: AttackProblem, arrival: float, combo_cap: int
) -> LossResult:
    if problem.dispatch_bounds:
        raise ValueError("brute force does not support dispatch bounds")
    net = problem.network
    advs = [a for a in sorted(problem.adversaries) if net.out_links[a]]
    ncombo = math.prod(len(net.out_links[a]) for a in advs) if advs else 1
    if ncombo > combo_cap:
        raise ValueError(f"{ncombo} combinations exceed the cap {combo_cap}")
    best: tuple[float, Rows] | None = None
    for combo in itertools.product(*(net.out_links[a] for a in advs)):
        rows: Rows = {a: {j: 1.0} for a, j in zip(advs, combo)}
        fa = propagate(problem, problem.default_routing.merged(rows), arrival)
        if best is None or fa.loss > best[0]:
            best = (fa.loss, rows)
    assert best is not None
    return LossResult(best[1], best[0], (), "brute")


# ---------------------------------------------------------------------------
# greedy pair with multiplicative guarantee


def _greedy_state(instance: SingleHopInstance):
    """Initial state honoring lower dispatch bounds: rows pre-committed with
    the per-edge minima, per-ingress remaining fraction, residual services."""
    rows: Rows = {}
    rem: dict[int, float] = {}
    mu_t = list(instance.services)
    for i in sorted(instance.adversaries):
        lam = instance.arrivals[i - 1]
        edges = instance.edges[i - 1]
        if lam <= 0.0 or not edges:
            continue
        row = {}
        for j in edges:
            lo = instance.bound(i, j)[0]
            if lo > 0.0:
                row[j] = lo
                mu_t[j - 1] -= lam * lo
        rows[i] = row
        rem[i] = 1.0 - sum(row.values())
    return rows, rem, mu_t


def _greedy_fill(instance: SingleHopInstance, rows: Rows, rem: dict[int, float]) -> None:
    """Spread any undecided fraction over the ingress's edges: uniformly when
    unbounded, otherwise capped by the upper bounds in edge order."""
    for i, r in rem.items():
        if r <= TOL:
            continue
        edges = instance.edges[i - 1]
        if instance.dispatch_bounds is None:
            share = r / len(edges)
            for j in edges:
                rows[i][j] = rows[i].get(j, 0.0) + share
        else:
            left = r
            for j in edges:
                give = min(left, instance.bound(i, j)[1] - rows[i].get(j, 0.0))
                if give > 0.0:
                    rows[i][j] = rows[i].get(j, 0.0) + give
                    left -= give
            if left > 1e-7:
                raise ValueError(f"ingress {i}: upper dispatch bounds sum below 1")
        rem[i] = 0.0


def _greedy_rounds(instance: SingleHopInstance, normalized: bool) -> Rows:
    """One greedy pass. Each round targets the egress maximizing the loss
    increment (normalized per committed traffic fraction when `normalized`)
    and commits undecided dispatch mass onto it; stops when no target has a
    positive score."""
    rows, rem, mu_t = _greedy_state(instance)
    lam = instance.arrivals
    while True:
        ud = [i for i, r in rem.items() if r > TOL]
        if not ud:
            break
        best_score, best_j, best_gives = 0.0, None, None
        for j in range(1, instance.n_egress + 1):
            gives = []
            for i in ud:
                if j not in instance.edges[i - 1]:
                    continue
                g = min(rem[i], instance.bound(i, j)[1] - rows[i].get(j, 0.0))
                if g > TOL:
                    gives.append((i, g))
            if not gives:
                continue
            headroom = max(mu_t[j - 1], 0.0)
            if not normalized:
                score = sum(lam[i - 1] * g for i, g in gives) - headroom
                chosen = gives
            else:
                gives.sort(key=lambda t: (-lam[t[0] - 1] * t[1], t[0]))
                score, chosen = -math.inf, None
                val = frac = 0.0
                for k in range(len(gives)):
                    i, g = gives[k]
                    val += lam[i - 1] * g
                    frac += g
                    s = (val - headroom) / frac
                    if s > score + TOL:
                        score, chosen = s, gives[: k + 1]
            if score > best_score + TOL:  # ties keep the lowest egress id
                best_score, best_j, best_gives = score, j, chosen
        if best_j is None or best_score <= TOL:
            break
        for i, g in best_gives:
            rows[i][best_j] = rows[i].get(best_j, 0.0) + g
            rem[i] -= g
            mu_t[best_j - 1] -= lam[i - 1] * g
    _greedy_fill(instance, rows, rem)
    return {i: {j: x for j, x in row.items() if x > 0.0} for i, row in rows.items()}


def maxloss_multiplicative(instance: SingleHopInstance) -> LossResult:
    """Runs the absolute-overload greedy and the per-ingress-normalized greedy
    and keeps the one with higher loss (the normalized one on ties); the pair
    is within a factor 1/sqrt(|V_A|) of the optimum."""
    reduced, id_map = reduce_normal_ingress(instance)
    results = []
    for normalized, tag in ((False, "approach1"), (True, "approach2")):
        red_rows = _greedy_rounds(reduced, normalized)
        rows = {id_map[i]: row for i, row in red_rows.items()}
        results.append(_evaluate_singlehop(instance, rows, tag))
    best = results[1] if results[1].loss >= results[0].loss else results[0]
    return LossResult(best.rows, best.loss, best.overloads, "mul")


# ---------------------------------------------------------------------------
# iterative saturation with additive guarantee


def _forward_reach(net: Network, routing: RoutingMatrix, start: int) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        if v == net.destination:
            continue
        row = routing.row(v)
        if row is None:
            continue
        for j, x in row.items():
            if x > TOL and j not in seen:
                seen.add(j)
                stack.append(j)
    return seen


def _additive_multihop(problem: AttackProblem, arrival: float) -> Rows:
    """Iteratively solve the throughput-minimization problem, committing the
    adversaries that feed each first-saturated link and lifting that link's
    capacity, until the saturating rate exceeds the actual arrival."""
    net = problem.network
    committed: Rows = {}
    undecided = {a for a in problem.adversaries if net.out_links[a]}
    lifted: set[tuple[int, int]] = set()
    guard = len(net.links) + len(problem.adversaries) + 2
    for _ in range(guard):
        if not undecided:
            break
        links = tuple(
            (i, j, math.inf if (i, j) in lifted else c) for i, j, c in net.links
        )
        cur_net = replace(net, links=links)
        cur = AttackProblem(
            network=cur_net,
            adversaries=frozenset(undecided),
            default_routing=problem.default_routing.merged(committed),
            dispatch_bounds=problem.dispatch_bounds,
        )
        res = exact_min_lambda(cur)
        if res.lambda_star > arrival + 1e-12 or res.saturated_link is None:
            break
        i_star = res.saturated_link[0]
        merged = cur.default_routing.merged(res.rows)
        for a in sorted(undecided):
            if a == i_star or i_star in _forward_reach(cur_net, merged, a):
                committed[a] = dict(res.rows[a])
                undecided.discard(a)
        lifted.add(res.saturated_link)
    else:
        raise RuntimeError("saturation loop failed to terminate")
    for a in sorted(undecided):
        outs = net.out_links[a]
        committed[a] = {j: 1.0 / len(outs) for j in outs}
    return committed


def maxloss_additive(
    obj: SingleHopInstance | AttackProblem, arrival: float | None = None
) -> LossResult:
    """Loss within lambda/4 of the optimum on single-hop instances; also
    applicable to multi-hop problems, where each round fixes the adversaries
    upstream of the next saturated link."""
    if isinstance(obj, SingleHopInstance):
        if arrival is None:
            arrival = obj.total_arrival
        problem = singlehop_to_multihop(obj)
        ing_id, _ = singlehop_node_ids(obj)
        node_to_ing = {v: i for i, v in ing_id.items()}
        ns = obj.n_ingress
        committed = _additive_multihop(problem, arrival)
        rows: Rows = {}
        for node, row in committed.items():
            i = node_to_ing.get(node)
            if i is None:
                continue
            rows[i] = {j - 1 - ns: x for j, x in row.items()}
        return _evaluate_singlehop(obj, rows, "add")
    if arrival is None:
        raise ValueError("multi-hop loss maximization requires an arrival rate")
    rows = _additive_multihop(obj, arrival)
    fa = propagate(obj, obj.default_routing.merged(rows), arrival)
    return LossResult(rows, fa.loss, (), "add")


# ---------------------------------------------------------------------------
# baselines


def minmu_baseline(instance: SingleHopInstance) -> LossResult:
    """Each adversarial ingress sends everything to its connected egress with
    the smallest residual service rate (ties to the lowest id)."""
    reduced, id_map = reduce_normal_ingress(instance)
    rows: Rows = {}
    for i in range(1, reduced.n_ingress + 1):
        edges = reduced.edges[i - 1]
        if not edges:
            continue
        j = min(edges, key=lambda e: (reduced.services[e - 1], e))
        rows[id_map[i]] = {j: 1.0}
    return _evaluate_singlehop(instance, rows, "minmu")


def rand_baseline(instance: SingleHopInstance, seed: int) -> LossResult:
    """Each adversarial ingress (ascending id) sends everything to a uniformly
    random connected egress; deterministic under the seed."""
    rng = np.random.default_rng(seed)
    rows: Rows = {}
    for i in sorted(instance.adversaries):
        edges = instance.edges[i - 1]
        if not edges:
            continue
        rows[i] = {edges[int(rng.integers(len(edges)))]: 1.0}
    return _evaluate_singlehop(instance, rows, "rand")


# ---------------------------------------------------------------------------
# JSON round-trip


def singlehop_to_json(instance: SingleHopInstance) -> dict:
    doc: dict = {
        "ingress": [
            {
                "id": i,
                "lambda": instance.arrivals[i - 1],
                "edges": list(instance.edges[i - 1]),
            }
            for i in range(1, instance.n_ingress + 1)
        ],
        "egress": [
            {"id": j, "mu": instance.services[j - 1]}
            for j in range(1, instance.n_egress + 1)
        ],
        "adversaries": sorted(instance.adversaries),
        "routing": {
            str(i): {str(j): x for j, x in sorted(row.items())}
            for i, row in sorted(instance.routing.items())
        },
    }
    if instance.loss_offset:
        doc["loss_offset"] = instance.loss_offset
    if instance.dispatch_bounds:
        doc["bounds"] = {
            f"{i},{j}": list(b) for (i, j), b in sorted(instance.dispatch_bounds.items())
        }
    return doc


def singlehop_from_json(doc: dict) -> SingleHopInstance:
    ingress = sorted(doc["ingress"], key=lambda r: r["id"])
    egress = sorted(doc["egress"], key=lambda r: r["id"])
    bounds = None
    if "bounds" in doc:
        bounds = {}
        for key, b in doc["bounds"].items():
            i, j = key.split(",")
            bounds[(int(i), int(j))] = (float(b[0]), float(b[1]))
    return SingleHopInstance(
        arrivals=tuple(float(r["lambda"]) for r in ingress),
        services=tuple(float(r["mu"]) for r in egress),
        edges=tuple(tuple(sorted(int(j) for j in r["edges"])) for r in ingress),
        adversaries=frozenset(int(a) for a in doc.get("adversaries", [])),
        routing={
            int(i): {int(j): float(x) for j, x in row.items()}
            for i, row in doc.get("routing", {}).items()
        },
        loss_offset=float(doc.get("loss_offset", 0.0)),
        dispatch_bounds=bounds,
    )


def load_singlehop(path: str) -> SingleHopInstance:
    with open(path) as fh:
        return singlehop_from_json(json.load(fh))
