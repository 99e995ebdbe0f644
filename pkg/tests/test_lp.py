"""Simplex solver and the max-inflow linear program."""

import math

import numpy as np
import pytest

from netoverload import lp
from netoverload.minthroughput import _dp_reach
from netoverload.model import AttackProblem, Network, RoutingMatrix

from conftest import fresh_rng, random_multihop


def test_solve_known_optimum():
    # max 3x + 2y  s.t.  x + y <= 4,  x <= 2  ->  x = 2, y = 2
    problem = lp.LinearProgram(
        objective=np.array([3.0, 2.0]),
        a_ub=np.array([[1.0, 1.0]]),
        b_ub=np.array([4.0]),
        upper=np.array([2.0, np.inf]),
    )
    sol = lp.solve(problem)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(10.0)
    assert sol.x == pytest.approx([2.0, 2.0])


def test_solve_equality_constraints():
    # max x + y  s.t.  x + 2y = 3, x - y = 0  ->  x = y = 1
    problem = lp.LinearProgram(
        objective=np.array([1.0, 1.0]),
        a_eq=np.array([[1.0, 2.0], [1.0, -1.0]]),
        b_eq=np.array([3.0, 0.0]),
    )
    sol = lp.solve(problem)
    assert sol.status == "optimal"
    assert sol.x == pytest.approx([1.0, 1.0])


def test_solve_detects_infeasible():
    problem = lp.LinearProgram(
        objective=np.array([1.0]),
        a_eq=np.array([[1.0]]),
        b_eq=np.array([-2.0]),  # x = -2 impossible with x >= 0
    )
    assert lp.solve(problem).status == "infeasible"


def test_solve_detects_unbounded():
    problem = lp.LinearProgram(objective=np.array([1.0, 0.0]))
    assert lp.solve(problem).status == "unbounded"


def test_solve_matches_scipy_on_random_programs():
    from scipy.optimize import linprog

    rng = fresh_rng(17)
    for _ in range(50):
        n = int(rng.integers(2, 6))
        m = int(rng.integers(1, 4))
        c = rng.uniform(-2, 2, size=n)
        a_ub = rng.uniform(-1, 2, size=(m, n))
        b_ub = rng.uniform(1, 5, size=m)
        upper = rng.uniform(0.5, 3.0, size=n)
        ours = lp.solve(
            lp.LinearProgram(objective=c, a_ub=a_ub, b_ub=b_ub, upper=upper)
        )
        ref = linprog(-c, A_ub=a_ub, b_ub=b_ub, bounds=[(0, u) for u in upper])
        assert ours.status == "optimal"
        assert ref.status == 0
        assert ours.objective == pytest.approx(-ref.fun, abs=1e-7)


def test_max_flow_matches_dag_dynamic_program():
    rng = fresh_rng(23)
    for _ in range(60):
        problem = random_multihop(rng, n_lo=6, n_hi=11)
        net = problem.network
        for target in sorted(net.nodes()):
            if target in (net.source, net.destination):
                continue
            a, _ = _dp_reach(problem, target)
            value, flows = lp.max_flow_to_node(problem, target)
            assert value == pytest.approx(a[net.source], abs=1e-7)
            if flows is not None and value > 0:
                inflow = sum(flows.get((k, target), 0.0) for k in net.in_links[target])
                assert inflow == pytest.approx(value, abs=1e-7)


def test_max_flow_unbounded_on_adversarial_cycle():
    net = Network(
        node_count=4,
        links=((1, 2, 10.0), (2, 3, 10.0), (3, 2, 10.0), (2, 4, 10.0)),
        source=1,
        destination=4,
    )
    problem = AttackProblem(
        net, frozenset({2, 3}), RoutingMatrix({1: {2: 1.0}})
    )
    value, flows = lp.max_flow_to_node(problem, 2)
    assert math.isinf(value)
    assert flows is None
