"""Shared helpers for the test suite: seeded random problem streams."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from netoverload.bench import GenConfig, gen_multihop, gen_singlehop

POLICIES = ("uniform", "proportional", "ecmp", "maxflow")


def random_multihop(rng, n_lo=6, n_hi=13, densities=(0.4, 0.8), adv_hi=3, policy=None):
    """One random multi-hop problem drawn from the given regime."""
    n = int(rng.integers(n_lo, n_hi))
    density = densities[int(rng.integers(len(densities)))]
    adv = min(int(rng.integers(1, adv_hi + 1)), n - 2)
    pol = policy or POLICIES[int(rng.integers(len(POLICIES)))]
    cfg = GenConfig(mode="multihop", n=n, density=density, adv_count=adv, policy=pol, seed=0)
    return gen_multihop(
        cfg,
        int(rng.integers(2**31)),
        int(rng.integers(2**31)),
        int(rng.integers(2**31)),
    )


def random_singlehop(rng, ns=8, nd=8, density=0.3, ratio=2.0, uniformity="hetero"):
    cfg = GenConfig(
        mode="singlehop",
        n_ingress=ns,
        n_egress=nd,
        density=density,
        ratio=ratio,
        uniformity=uniformity,
        seed=0,
    )
    return gen_singlehop(cfg, int(rng.integers(2**31)), int(rng.integers(2**31)))


def clear_adversaries(instance):
    return replace(instance, adversaries=frozenset())


def is_node_cut(problem) -> bool:
    """True when removing the adversaries disconnects source from destination."""
    net = problem.network
    if net.source in problem.adversaries:
        return False
    seen = {net.source}
    stack = [net.source]
    while stack:
        v = stack.pop()
        for j in net.out_links[v]:
            if j not in seen and j not in problem.adversaries:
                seen.add(j)
                stack.append(j)
    return net.destination not in seen


def fresh_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)
