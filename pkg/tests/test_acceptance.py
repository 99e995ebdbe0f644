"""Acceptance gate: twelve end-to-end criteria, one test (and one pass/fail
line under ``pytest -v``) per criterion.

Statistical criteria use frozen seeds; theorem bounds are asserted at full
strictness on every instance they cover.
"""

import itertools
import math
from dataclasses import replace

import numpy as np
import pytest

from netoverload import (
    SelectionProblem,
    approx2_min_lambda,
    brute_force_max_loss,
    brute_force_min_lambda,
    brute_force_select,
    compute_R,
    distributed_heuristic,
    exact_min_lambda,
    gen_multihop,
    gen_setcover,
    gen_singlehop,
    maxloss_additive,
    maxloss_multiplicative,
    measure_downstream,
    propagate,
    run_sweep,
    select_parallel_min_lambda,
    select_singlehop_maxloss,
)
from netoverload.bench import GenConfig, MULTIHOP_ALGOS
from netoverload.instances import (
    cascade_chain,
    overlap_mesh,
    six_node_split,
    tight_additive_pair,
)

import test_properties
from conftest import POLICIES, clear_adversaries, is_node_cut


def _dag_suite():
    """500 seeded random DAGs (N <= 12, |V_A| <= 3, densities 0.4/0.8, all
    four routing policies) with exact/brute/approx2 results. Cached."""
    if _dag_suite.cache is None:
        rng = np.random.default_rng(1001)
        records = []
        for t in range(500):
            n = int(rng.integers(6, 13))
            density = (0.4, 0.8)[t % 2]
            adv = min(int(rng.integers(1, 4)), n - 2)
            cfg = GenConfig(
                mode="multihop", n=n, density=density, adv_count=adv,
                policy=POLICIES[t % 4], seed=0,
            )
            problem = gen_multihop(
                cfg,
                int(rng.integers(2**31)),
                int(rng.integers(2**31)),
                int(rng.integers(2**31)),
            )
            exact = exact_min_lambda(problem).lambda_star
            brute = brute_force_min_lambda(problem).lambda_star
            view = measure_downstream(problem)
            approx = approx2_min_lambda(view, problem.adversaries, problem).lambda_star
            records.append((problem, exact, brute, approx))
        _dag_suite.cache = records
    return _dag_suite.cache


_dag_suite.cache = None


def _loss_sweep():
    """400 single-hop instances over densities {0.3, 0.5}, ratios {2, 3},
    hetero+homo services, with brute/multiplicative/additive losses. Cached."""
    if _loss_sweep.cache is None:
        rng = np.random.default_rng(6007)
        records = []
        for density in (0.3, 0.5):
            for ratio in (2.0, 3.0):
                for uniformity in ("hetero", "homo"):
                    for _ in range(50):
                        cfg = GenConfig(
                            mode="singlehop", n_ingress=8, n_egress=8,
                            density=density, ratio=ratio,
                            uniformity=uniformity, seed=0,
                        )
                        inst = gen_singlehop(
                            cfg, int(rng.integers(2**31)), int(rng.integers(2**31))
                        )
                        records.append(
                            (
                                uniformity,
                                inst,
                                brute_force_max_loss(inst).loss,
                                maxloss_multiplicative(inst).loss,
                                maxloss_additive(inst).loss,
                            )
                        )
        _loss_sweep.cache = records
    return _loss_sweep.cache


_loss_sweep.cache = None


def _p90(values):
    ordered = sorted(values)
    return ordered[max(0, int(math.ceil(0.9 * len(ordered))) - 1)]


def test_criterion_01_exact_equals_brute_force_on_500_dags():
    for _, exact, brute, _ in _dag_suite():
        assert exact == pytest.approx(brute, abs=1e-6)
    print("CRITERION 1 PASS: exact minimum lambda* equals brute force on 500 DAGs")


def test_criterion_02_six_node_fixture():
    problem = six_node_split()
    attack = exact_min_lambda(problem)
    assert attack.lambda_star == 2.0
    assert attack.saturated_link == (5, 6)
    assert attack.rows == {3: {5: 1.0}}
    loss = brute_force_max_loss(problem, arrival=10.0)
    assert loss.loss == 7.0
    assert loss.rows == {3: {4: 1.0}}
    # the same values re-derived through plain propagation
    assert propagate(
        problem, problem.default_routing.merged(loss.rows), 10.0
    ).loss == pytest.approx(7.0)
    print("CRITERION 2 PASS: six-node fixture yields lambda*=2 on (5,6) and loss 7 at arrival 10")


def test_criterion_03_two_approximation_band_and_node_cut_exactness():
    cuts = 0
    for problem, exact, _, approx in _dag_suite():
        if math.isinf(exact):
            assert math.isinf(approx)
            continue
        ratio = approx / exact
        assert 1.0 - 1e-9 <= ratio <= 2.0 + 1e-9
        if is_node_cut(problem):
            cuts += 1
            assert ratio == pytest.approx(1.0, abs=1e-6)
    assert cuts > 0
    print(
        f"CRITERION 3 PASS: downstream-only attack within [1,2] on 500 DAGs, "
        f"exact on all {cuts} node-cut instances"
    )


def test_criterion_04_downstream_attack_statistics_at_n20():
    rng = np.random.default_rng(2002)
    ratios = {p: [] for p in POLICIES}
    for density in (0.4, 0.8):
        for adv in (4, 8):
            for t in range(1000):
                policy = POLICIES[t % 4]
                cfg = GenConfig(
                    mode="multihop", n=20, density=density, adv_count=adv,
                    policy=policy, seed=0,
                )
                problem = gen_multihop(
                    cfg,
                    int(rng.integers(2**31)),
                    int(rng.integers(2**31)),
                    int(rng.integers(2**31)),
                )
                exact = exact_min_lambda(problem).lambda_star
                view = measure_downstream(problem)
                approx = approx2_min_lambda(
                    view, problem.adversaries, problem
                ).lambda_star
                ratios[policy].append(approx / exact if exact > 0 else 1.0)
    for policy in POLICIES:
        values = ratios[policy]
        assert max(values) <= 2.0 + 1e-9
        if policy != "maxflow":
            assert sum(values) / len(values) <= 1.05
            assert _p90(values) <= 1.20
    means = {p: round(sum(v) / len(v), 4) for p, v in ratios.items()}
    print(f"CRITERION 4 PASS: 4000-instance N=20 ratio statistics {means}")


def test_criterion_05_cascade_fixture_heuristic_gap():
    problem = cascade_chain(eps=0.01)
    assert exact_min_lambda(problem).lambda_star == pytest.approx(1.0, abs=1e-9)
    distributed = distributed_heuristic(problem).lambda_star
    assert distributed == pytest.approx(7.92, abs=1e-6)
    print("CRITERION 5 PASS: cascade fixture gives exact 1.0 vs per-node heuristic 7.92")


def test_criterion_06_multiplicative_guarantee():
    worst = math.inf
    for _, inst, opt, mul, _ in _loss_sweep():
        if opt <= 1e-12:
            continue
        ratio = mul / opt
        assert ratio >= 1.0 / math.sqrt(len(inst.adversaries)) - 1e-9
        worst = min(worst, ratio)
    assert worst >= 0.60
    print(f"CRITERION 6 PASS: multiplicative loss ratio >= 1/sqrt(8) always, min {worst:.4f}")


def test_criterion_07_additive_guarantee():
    gaps = {"hetero": [], "homo": []}
    for uniformity, inst, opt, _, add in _loss_sweep():
        gap = (opt - add) / inst.total_arrival
        assert gap <= 0.25 + 1e-9
        gaps[uniformity].append(gap)
    assert _p90(gaps["hetero"]) <= 0.08
    assert _p90(gaps["homo"]) <= 0.02
    fixture = tight_additive_pair(eps=0.1)
    opt = brute_force_max_loss(fixture).loss
    add = maxloss_additive(fixture).loss
    assert opt == 2.0
    assert add == pytest.approx(1.1, abs=1e-12)
    assert (opt - add) / fixture.total_arrival == pytest.approx(0.225, abs=1e-12)
    print(
        f"CRITERION 7 PASS: additive gap <= 0.25 always, p90 "
        f"{_p90(gaps['hetero']):.4f} hetero / {_p90(gaps['homo']):.4f} homo, "
        f"pair fixture gap 0.225"
    )


def test_criterion_08_reach_fraction_arithmetic():
    problem = overlap_mesh()
    view = measure_downstream(problem)
    r = compute_R(view, problem.adversaries)
    assert r[2] == pytest.approx(3.0 / 7.0, abs=1e-9)
    assert r[4] == pytest.approx(8.0 / 21.0, abs=1e-9)
    print("CRITERION 8 PASS: overlapping-region reach fractions 3/7 and 8/21")


def test_criterion_09_set_cover_reduction():
    rng = np.random.default_rng(9009)
    for _ in range(50):
        m = int(rng.integers(2, 9))
        n = int(rng.integers(2, 7))
        inst, _ = gen_setcover(m, n, seed=int(rng.integers(2**31)))
        # exhaustive minimum-cover oracle over the membership sets
        memberships = [set(edges) for edges in inst.edges]
        universe = set(range(1, inst.n_egress + 1))
        used = set().union(*memberships)
        p = None
        for k in range(1, inst.n_egress + 1):
            for combo in itertools.combinations(sorted(used), k):
                if all(membership & set(combo) for membership in memberships):
                    p = k
                    break
            if p is not None:
                break
        assert p is not None
        loss = brute_force_max_loss(inst).loss
        assert loss == m - p
    print("CRITERION 9 PASS: max loss equals m minus the minimum cover size on 50 covers")


def test_criterion_10_node_selection():
    # exact selector vs brute force on 300 parallel-candidate instances
    rng = np.random.default_rng(21)
    for _ in range(300):
        ns = int(rng.integers(3, 7))
        nd = int(rng.integers(3, 7))
        cfg = GenConfig(
            mode="singlehop", n_ingress=ns, n_egress=nd, density=0.5, ratio=1.5, seed=0
        )
        inst = clear_adversaries(
            gen_singlehop(cfg, int(rng.integers(2**31)), int(rng.integers(2**31)))
        )
        budget = int(rng.integers(1, 4))
        ncand = int(rng.integers(1, ns + 1))
        cands = frozenset(int(v) + 1 for v in rng.choice(ns, size=ncand, replace=False))
        sp = SelectionProblem(base=inst, candidates=cands, budget=budget)
        brute = brute_force_select(sp)
        parallel = select_parallel_min_lambda(sp)
        assert parallel.value == pytest.approx(brute.value, abs=1e-6)
    # greedy loss selection on the 12x12 regime: >= 80% of the optimum in
    # >= 90% of 200 seeds
    rng = np.random.default_rng(7)
    good = 0
    for _ in range(200):
        cfg = GenConfig(
            mode="singlehop", n_ingress=12, n_egress=12, density=0.3, ratio=2.0, seed=0
        )
        inst = clear_adversaries(
            gen_singlehop(cfg, int(rng.integers(2**31)), int(rng.integers(2**31)))
        )
        sp = SelectionProblem(
            base=inst, candidates=frozenset(range(1, 13)), budget=4,
            objective="max-loss",
        )
        optimum = brute_force_select(sp).value
        achieved = select_singlehop_maxloss(sp).value
        if optimum <= 1e-12 or achieved / optimum >= 0.8 - 1e-9:
            good += 1
    assert good >= 180
    print(
        f"CRITERION 10 PASS: parallel selection exact on 300 instances; greedy "
        f"selection within 80% of optimal loss on {good}/200 seeds"
    )


def test_criterion_11_sweep_determinism(tmp_path):
    cfg = GenConfig(
        mode="multihop", n=10, density=0.5, adv_count=2, topologies=5,
        adv_sets=2, cap_draws=2, seed=42,
    )
    first = tmp_path / "first"
    second = tmp_path / "second"
    run_sweep(cfg, list(MULTIHOP_ALGOS), out_prefix=str(first))
    run_sweep(cfg, list(MULTIHOP_ALGOS), out_prefix=str(second))
    for ext in (".csv", ".summary.json", ".cdf.csv"):
        a = (tmp_path / ("first" + ext)).read_bytes()
        b = (tmp_path / ("second" + ext)).read_bytes()
        assert a == b
    print("CRITERION 11 PASS: repeated sweeps produce byte-identical outputs")


def test_criterion_12_property_suite():
    test_properties.check_flow_conservation(200)
    test_properties.check_loss_monotone_in_arrival(200)
    test_properties.check_path_round_trip(200)
    test_properties.check_max_inflow_monotone_in_adversaries(200)
    print(
        "CRITERION 12 PASS: conservation, loss monotonicity, path round-trip, "
        "and max-inflow monotonicity on 200 instances each"
    )
