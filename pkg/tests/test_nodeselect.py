"""Hijack-set selection: brute force, exact parallel selector, greedy heuristic."""

import math
from dataclasses import replace

import pytest

from netoverload import (
    SelectionProblem,
    brute_force_max_loss,
    brute_force_select,
    exact_min_lambda,
    select_parallel_min_lambda,
    select_singlehop_maxloss,
)
from netoverload.instances import six_node_split
from netoverload.nodeselect import _psc_best

from conftest import clear_adversaries, fresh_rng, random_singlehop


def _random_selection(rng, k_hi=3):
    ns = int(rng.integers(3, 7))
    nd = int(rng.integers(3, 7))
    inst = clear_adversaries(
        random_singlehop(rng, ns=ns, nd=nd, density=0.5, ratio=1.5)
    )
    budget = int(rng.integers(1, k_hi + 1))
    ncand = int(rng.integers(1, ns + 1))
    cands = frozenset(
        int(v) + 1 for v in rng.choice(ns, size=ncand, replace=False)
    )
    return SelectionProblem(base=inst, candidates=cands, budget=budget)


def test_full_budget_equals_inner_algorithm():
    rng = fresh_rng(11)
    for _ in range(20):
        inst = clear_adversaries(random_singlehop(rng, ns=4, nd=4, density=0.5))
        pool = frozenset(range(1, 5))
        sp = SelectionProblem(base=inst, candidates=pool, budget=4, objective="max-loss")
        best = brute_force_select(sp)
        inner = brute_force_max_loss(replace(inst, adversaries=pool))
        assert best.chosen == pool
        assert best.value == pytest.approx(inner.loss, abs=1e-9)


def test_parallel_selector_matches_brute_force():
    rng = fresh_rng(21)
    for _ in range(100):
        sp = _random_selection(rng)
        brute = brute_force_select(sp)
        par = select_parallel_min_lambda(sp)
        assert par.value == pytest.approx(brute.value, abs=1e-6)
        assert len(par.chosen) <= sp.budget


def test_parallel_selector_rejects_chained_candidates():
    problem = six_node_split(adversaries=frozenset())
    sp = SelectionProblem(base=problem, candidates=frozenset({1, 3}), budget=1)
    with pytest.raises(ValueError, match="brute_force_select"):
        select_parallel_min_lambda(sp)


def test_parallel_selector_picks_upstream_of_bottleneck():
    # candidates 2 and 3 are parallel; only 3 can reach the narrow (5,6) link
    problem = six_node_split(adversaries=frozenset())
    sp = SelectionProblem(base=problem, candidates=frozenset({2, 3}), budget=1)
    result = select_parallel_min_lambda(sp)
    assert result.chosen == frozenset({3})
    assert result.value == pytest.approx(2.0)


def test_psc_best_matches_exhaustive_scan():
    rng = fresh_rng(31)
    for _ in range(300):
        n = int(rng.integers(1, 7))
        values = sorted(
            ((float(v), i) for i, v in enumerate(rng.uniform(0.0, 5.0, size=n))),
            key=lambda t: (-t[0], t[1]),
        )
        headroom = float(rng.uniform(0.0, 6.0))
        max_size = int(rng.integers(1, n + 1))
        peak, k = _psc_best(values, headroom, max_size)
        scan = [
            (sum(v for v, _ in values[:m]) - headroom) / m
            for m in range(1, max_size + 1)
        ]
        assert peak == pytest.approx(max(scan), abs=1e-12)
        assert scan[k - 1] == pytest.approx(peak, abs=1e-12)


def test_heuristic_selection_respects_budget_and_groups():
    rng = fresh_rng(41)
    for _ in range(40):
        sp = _random_selection(rng)
        sp = replace(sp, objective="max-loss")
        result = select_singlehop_maxloss(sp)
        assert len(result.chosen) <= sp.budget
        assert result.chosen <= sp.candidates
        for i in result.chosen:
            row = result.rows[i]
            assert len(row) == 1 and sum(row.values()) == pytest.approx(1.0)


def test_monotone_budget_for_both_selectors():
    rng = fresh_rng(51)
    for _ in range(25):
        inst = clear_adversaries(random_singlehop(rng, ns=5, nd=5, density=0.5, ratio=1.5))
        pool = frozenset(range(1, 6))
        prev_lambda = math.inf
        prev_loss = -1.0
        for k in range(1, 6):
            sp = SelectionProblem(base=inst, candidates=pool, budget=k)
            lam = select_parallel_min_lambda(sp).value
            assert lam <= prev_lambda + 1e-9
            prev_lambda = lam
            sp_loss = replace(sp, objective="max-loss")
            loss = select_singlehop_maxloss(sp_loss).value
            assert loss >= prev_loss - 1e-9
            prev_loss = loss


def test_brute_force_subset_cap():
    rng = fresh_rng(61)
    inst = clear_adversaries(random_singlehop(rng, ns=8, nd=4, density=0.5))
    sp = SelectionProblem(base=inst, candidates=frozenset(range(1, 9)), budget=4)
    with pytest.raises(ValueError, match="cap"):
        brute_force_select(sp, subset_cap=10)


def test_multihop_selection_on_fixture():
    problem = six_node_split(adversaries=frozenset())
    sp = SelectionProblem(base=problem, candidates=frozenset({2, 3}), budget=2)
    result = brute_force_select(sp)
    # hijacking both nodes cannot beat node 3's narrow-branch attack
    assert result.value == pytest.approx(
        exact_min_lambda(six_node_split(frozenset({2, 3}))).lambda_star
    )
    assert result.value == pytest.approx(2.0)
