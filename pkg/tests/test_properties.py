"""Property tests: conservation, monotonicity, and round-trip invariants.

The four seeded checks are shared with the acceptance suite, which re-runs
them at 200 instances each.
"""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netoverload import (
    PathDecomposition,
    lossless_flows,
    path_fraction,
    propagate,
    routing_from_paths,
)
from netoverload.lp import max_flow_to_node
from netoverload.minthroughput import _dp_reach
from netoverload.nodeselect import _psc_best

from conftest import fresh_rng, random_multihop

TOL = 1e-9


# ---------------------------------------------------------------------------
# seeded property checks (also exercised by the acceptance suite)


def check_flow_conservation(n_instances: int, seed: int = 12001) -> None:
    """Lossless unit-arrival flows: inflow equals outflow at every interior
    node that has a routing row, and total outflow of the source is 1."""
    rng = fresh_rng(seed)
    for _ in range(n_instances):
        problem = random_multihop(rng)
        net = problem.network
        flows = lossless_flows(problem, problem.default_routing)
        for v in net.nodes():
            inflow = sum(flows[(k, v)] for k in net.in_links[v])
            if v == net.source:
                inflow += 1.0
            outflow = sum(flows[(v, j)] for j in net.out_links[v])
            if v == net.destination:
                assert outflow == pytest.approx(0.0, abs=1e-9)
            elif problem.default_routing.row(v) is not None and net.out_links[v]:
                assert outflow == pytest.approx(inflow, abs=1e-9)


def check_loss_monotone_in_arrival(n_instances: int, seed: int = 12002) -> None:
    """Lossy propagation: total loss never decreases as the arrival grows."""
    rng = fresh_rng(seed)
    for _ in range(n_instances):
        problem = random_multihop(rng, n_lo=6, n_hi=10)
        prev = -1.0
        for arrival in (0.5, 1.0, 2.0, 5.0, 10.0, 50.0):
            loss = propagate(problem, problem.default_routing, arrival).loss
            assert loss >= prev - 1e-9
            prev = loss


def check_path_round_trip(n_instances: int, seed: int = 12003) -> None:
    """A routing built from a path decomposition reproduces each path's
    traffic fraction as the product of its dispatch ratios."""
    rng = fresh_rng(seed)
    built = 0
    for _ in range(n_instances * 3):
        if built == n_instances:
            break
        problem = random_multihop(rng, n_lo=5, n_hi=9)
        net = problem.network
        # enumerate a few source->destination paths
        paths = []
        stack = [(net.source,)]
        while stack and len(paths) < 4:
            path = stack.pop()
            if path[-1] == net.destination:
                paths.append(path)
                continue
            for j in sorted(net.out_links[path[-1]], reverse=True):
                if j not in path:
                    stack.append(path + (j,))
        if len(paths) < 2:
            continue
        built += 1
        weights = rng.dirichlet([1.0] * len(paths))
        decomposition = PathDecomposition(
            tuple((p, float(w)) for p, w in zip(paths, weights))
        )
        routing = routing_from_paths(net, decomposition)
        # link-level round trip: the induced lossless flows match the summed
        # per-path weights on every link (paths sharing a node get remixed at
        # it, so only the link totals are invariant)
        flows = lossless_flows(problem, routing)
        wanted = {link: 0.0 for link in flows}
        for p, w in decomposition.paths:
            for i, j in zip(p, p[1:]):
                wanted[(i, j)] += w
        for link, f in flows.items():
            assert f == pytest.approx(wanted[link], abs=1e-9)
        # and every individual path keeps a positive, well-defined fraction
        for p, w in decomposition.paths:
            if w > 0:
                assert path_fraction(net, routing, p) > 0.0
    assert built == n_instances


def check_max_inflow_monotone_in_adversaries(
    n_instances: int, seed: int = 12004
) -> None:
    """MF[i] never decreases when the adversary set grows."""
    from dataclasses import replace

    rng = fresh_rng(seed)
    for _ in range(n_instances):
        problem = random_multihop(rng, n_lo=6, n_hi=10, adv_hi=3)
        if len(problem.adversaries) < 2:
            continue
        smaller = replace(
            problem, adversaries=frozenset(sorted(problem.adversaries)[:-1])
        )
        net = problem.network
        for target in net.nodes():
            if target in (net.source, net.destination):
                continue
            a_small, _ = _dp_reach(smaller, target)
            a_full, _ = _dp_reach(problem, target)
            assert a_full[net.source] >= a_small[net.source] - 1e-9


def test_flow_conservation():
    check_flow_conservation(60)


def test_loss_monotone_in_arrival():
    check_loss_monotone_in_arrival(60)


def test_path_round_trip():
    check_path_round_trip(60)


def test_max_inflow_monotone_in_adversaries():
    check_max_inflow_monotone_in_adversaries(60)


def test_dp_matches_lp_max_inflow():
    rng = fresh_rng(12005)
    for _ in range(40):
        problem = random_multihop(rng, n_lo=5, n_hi=9)
        net = problem.network
        for target in net.nodes():
            if target in (net.source, net.destination):
                continue
            a, _ = _dp_reach(problem, target)
            value, _ = max_flow_to_node(problem, target)
            assert value == pytest.approx(a[net.source], abs=1e-7)


# ---------------------------------------------------------------------------
# hypothesis properties


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(0.01, 10.0), min_size=1, max_size=8),
    st.floats(0.0, 20.0),
)
def test_psc_best_is_true_prefix_peak(raw_values, headroom):
    values = sorted(((v, i) for i, v in enumerate(raw_values)), key=lambda t: (-t[0], t[1]))
    peak, k = _psc_best(values, headroom, len(values))
    scan = [
        (sum(v for v, _ in values[:m]) - headroom) / m
        for m in range(1, len(values) + 1)
    ]
    assert 1 <= k <= len(values)
    assert peak == pytest.approx(max(scan), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(0.1, 10.0), st.floats(0.1, 5.0))
def test_throughput_scales_with_capacity(c1, c2, scale):
    from netoverload import AttackProblem, Network, RoutingMatrix, no_loss_throughput

    net = Network(3, ((1, 2, c1), (2, 3, c2)), 1, 3)
    problem = AttackProblem(net, frozenset(), RoutingMatrix({1: {2: 1.0}, 2: {3: 1.0}}))
    base = no_loss_throughput(problem, problem.default_routing)
    scaled_net = Network(3, ((1, 2, c1 * scale), (2, 3, c2 * scale)), 1, 3)
    scaled = AttackProblem(
        scaled_net, frozenset(), RoutingMatrix({1: {2: 1.0}, 2: {3: 1.0}})
    )
    assert no_loss_throughput(scaled, scaled.default_routing) == pytest.approx(
        base * scale, rel=1e-9
    )


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(0.1, 5.0), min_size=2, max_size=5),
    st.lists(st.floats(0.1, 5.0), min_size=2, max_size=5),
)
def test_singlehop_loss_never_negative(arrivals, services):
    from netoverload import SingleHopInstance, singlehop_loss

    ns, nd = len(arrivals), len(services)
    edges = tuple(tuple(range(1, nd + 1)) for _ in range(ns))
    inst = SingleHopInstance(
        arrivals=tuple(arrivals),
        services=tuple(services),
        edges=edges,
        adversaries=frozenset(range(1, ns + 1)),
        routing={},
    )
    loss, overloads = singlehop_loss(inst, {i: {1: 1.0} for i in range(1, ns + 1)})
    assert loss >= -TOL
    assert all(o >= -TOL for o in overloads)
    assert loss <= sum(arrivals) + TOL
    assert math.isfinite(loss)
