"""Small hand-built networks used in tests and demos.

Each builder documents the behavior it exhibits; numbers are chosen so the
interesting quantities come out as exact fractions.
"""

from __future__ import annotations

import math

from .model import AttackProblem, Network, RoutingMatrix, SingleHopInstance

INF = math.inf


def six_node_split(adversaries: frozenset[int] = frozenset({3})) -> AttackProblem:
    """Six nodes, two disjoint branches re-merging at the sink. The hijacked
    node 3 chooses between a wide and a narrow branch: concentrating on the
    narrow link (3,5) minimizes the no-loss throughput (lambda* = 2, first
    saturating (5,6)), while concentrating on (3,4) maximizes loss at high
    arrival (loss 7 at arrival 10, bounded by capacity 3 of (4,6))."""
    net = Network(
        node_count=6,
        links=(
            (1, 2, 10.0),
            (1, 3, 10.0),
            (2, 4, 5.0),
            (3, 4, 5.0),
            (3, 5, 4.0),
            (4, 6, 3.0),
            (5, 6, 1.0),
        ),
        source=1,
        destination=6,
    )
    routing = RoutingMatrix(
        {1: {2: 0.5, 3: 0.5}, 2: {4: 1.0}, 4: {6: 1.0}, 5: {6: 1.0}}
    )
    return AttackProblem(net, adversaries, routing)


def overlap_mesh(
    x12: float = 3.0 / 7.0, x34: float = 2.0 / 3.0
) -> AttackProblem:
    """Six-node mesh with two hijacked nodes {2, 4} whose downstream regions
    overlap. With the defaults, node 2 receives 3/7 of the source traffic and
    node 4 receives 8/21 that bypasses node 2; the max achievable inflows are
    MF[2] = x12, MF[3] = 1, MF[4] = x12 + (1-x12)*x34, MF[5] = 1."""
    x13 = 1.0 - x12
    net = Network(
        node_count=6,
        links=(
            (1, 2, INF),
            (1, 3, INF),
            (2, 3, INF),
            (2, 4, INF),
            (3, 4, INF),
            (3, 5, INF),
            (4, 5, INF),
            (4, 6, 2.0),
            (5, 6, 1.0),
        ),
        source=1,
        destination=6,
    )
    routing = RoutingMatrix(
        {
            1: {2: x12, 3: x13},
            2: {3: 2.0 / 3.0, 4: 1.0 / 3.0},
            3: {4: x34, 5: 1.0 - x34},
            4: {6: 1.0},
            5: {6: 1.0},
        }
    )
    return AttackProblem(net, frozenset({2, 4}), routing)


def cascade_chain(eps: float = 0.01) -> AttackProblem:
    """Eight-node ladder where per-node greedy decisions compound.

    Odd nodes split half/half between the next two nodes; each hijacked even
    node chooses between continuing inward (rejoining all traffic) or a
    finite shortcut to the sink. The jointly optimal attack routes inward and
    saturates (7,8) at lambda* = 1; deciding each hijacked node separately
    from the sink upward picks all three shortcuts and only reaches
    lambda* = 8(1-eps)."""
    net = Network(
        node_count=8,
        links=(
            (1, 2, INF),
            (1, 3, INF),
            (2, 3, INF),
            (2, 8, 4.0 - 4.0 * eps),
            (3, 4, INF),
            (3, 5, INF),
            (4, 5, INF),
            (4, 8, 2.0 - 2.0 * eps),
            (5, 6, INF),
            (5, 7, INF),
            (6, 7, INF),
            (6, 8, 1.0 - eps),
            (7, 8, 1.0),
        ),
        source=1,
        destination=8,
    )
    routing = RoutingMatrix(
        {1: {2: 0.5, 3: 0.5}, 3: {4: 0.5, 5: 0.5}, 5: {6: 0.5, 7: 0.5}, 7: {8: 1.0}}
    )
    return AttackProblem(net, frozenset({2, 4, 6}), routing)


def tight_additive_pair(eps: float = 0.1) -> SingleHopInstance:
    """Two ingresses, two egresses; the iterative-saturation attack routes the
    hijacked ingress 2 to the nearly-saturating egress 2 (loss 1 + eps at
    eps < 1) while the optimum overloads egress 1 (loss 2), realizing the
    worst-case additive gap (2 - (1 + eps)) / 4 -> 1/4."""
    return SingleHopInstance(
        arrivals=(2.0, 2.0),
        services=(2.0, 1.0 - eps),
        edges=((1,), (1, 2)),
        adversaries=frozenset({2}),
        routing={1: {1: 1.0}},
    )


def normalized_target_pair() -> SingleHopInstance:
    """Two ingresses where absolute and per-ingress-normalized greedy scoring
    disagree: the absolute score favors egress 1 (joint overload 0.5) while
    the normalized score favors egress 2 (0.6 from ingress 2 alone), which is
    the optimum."""
    return SingleHopInstance(
        arrivals=(1.0, 1.0),
        services=(1.5, 0.4),
        edges=((1,), (1, 2)),
        adversaries=frozenset({1, 2}),
        routing={},
    )
