"""Dense two-phase simplex solver and the max-flow-to-node program builder.

The solver is deliberately small: instances here have at most a few hundred
variables (one per link), so a dense tableau with Bland's anti-cycling rule
is simple, exact enough, and dependency-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import AttackProblem, Link

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7


@dataclass(frozen=True)
class LinearProgram:
    """maximize objective @ x  s.t.  a_eq x = b_eq, a_ub x <= b_ub, 0 <= x <= upper."""

    objective: np.ndarray
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    a_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    upper: np.ndarray | None = None


@dataclass(frozen=True)
class LPSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    objective: float | None = None


def _bland_simplex(tab: np.ndarray, basis: list[int], cost: np.ndarray) -> str:
    """Maximize cost @ x on the tableau in place. Returns 'optimal'/'unbounded'."""
    m, ncol = tab.shape[0], tab.shape[1] - 1
    max_iter = 200 * (m + ncol) + 1000
    for _ in range(max_iter):
        cb = cost[basis]
        reduced = cost - cb @ tab[:, :ncol]
        reduced[basis] = 0.0
        enter = -1
        for j in range(ncol):
            if reduced[j] > PIVOT_TOL:
                enter = j
                break
        if enter < 0:
            return "optimal"
        col = tab[:, enter]
        leave, best_ratio, best_var = -1, math.inf, -1
        for i in range(m):
            if col[i] > PIVOT_TOL:
                ratio = tab[i, -1] / col[i]
                if ratio < best_ratio - PIVOT_TOL or (
                    abs(ratio - best_ratio) <= PIVOT_TOL and basis[i] < best_var
                ):
                    leave, best_ratio, best_var = i, ratio, basis[i]
        if leave < 0:
            return "unbounded"
        piv = tab[leave, enter]
        tab[leave] /= piv
        for i in range(m):
            if i != leave and abs(tab[i, enter]) > 1e-14:
                tab[i] -= tab[i, enter] * tab[leave]
        basis[leave] = enter
    raise RuntimeError("simplex exceeded the iteration safeguard (cycling?)")


def solve(lp: LinearProgram) -> LPSolution:
    c = np.atleast_1d(np.asarray(lp.objective, dtype=float))
    n = c.size
    a_eq = np.zeros((0, n)) if lp.a_eq is None else np.atleast_2d(np.asarray(lp.a_eq, float))
    b_eq = np.zeros(0) if lp.b_eq is None else np.atleast_1d(np.asarray(lp.b_eq, float))
    a_ub = np.zeros((0, n)) if lp.a_ub is None else np.atleast_2d(np.asarray(lp.a_ub, float))
    b_ub = np.zeros(0) if lp.b_ub is None else np.atleast_1d(np.asarray(lp.b_ub, float))
    if lp.upper is not None:
        upper = np.asarray(lp.upper, float)
        finite = np.flatnonzero(np.isfinite(upper))
        if finite.size:
            rows = np.zeros((finite.size, n))
            rows[np.arange(finite.size), finite] = 1.0
            a_ub = np.vstack([a_ub, rows])
            b_ub = np.concatenate([b_ub, upper[finite]])
    if not (np.all(np.isfinite(b_eq)) and np.all(np.isfinite(b_ub))):
        raise ValueError("constraint right-hand sides must be finite")

    m_eq, m_ub = a_eq.shape[0], a_ub.shape[0]
    m = m_eq + m_ub
    body = np.vstack([a_eq, a_ub]) if m else np.zeros((0, n))
    rhs = np.concatenate([b_eq, b_ub])
    slack = np.zeros((m, m_ub))
    if m_ub:
        slack[m_eq + np.arange(m_ub), np.arange(m_ub)] = 1.0
    tab_body = np.hstack([body, slack])
    flip = rhs < 0
    tab_body[flip] *= -1.0
    rhs = np.where(flip, -rhs, rhs)

    ncol = n + m_ub
    basis = [-1] * m
    for i in range(m_eq, m):
        if not flip[i]:
            basis[i] = n + (i - m_eq)
    art_rows = [i for i in range(m) if basis[i] < 0]
    n_art = len(art_rows)
    art = np.zeros((m, n_art))
    for k, i in enumerate(art_rows):
        art[i, k] = 1.0
        basis[i] = ncol + k
    tab = np.hstack([tab_body, art, rhs[:, None]])

    if n_art:
        cost1 = np.zeros(ncol + n_art)
        cost1[ncol:] = -1.0
        status = _bland_simplex(tab, basis, cost1)
        if status != "optimal":  # phase 1 is always bounded
            raise RuntimeError("phase-1 simplex failed")
        if -(cost1[basis] @ tab[:, -1]) > FEAS_TOL:
            return LPSolution(status="infeasible")
        # drive remaining artificials out of the basis, or drop redundant rows
        drop: list[int] = []
        for i in range(m):
            if basis[i] >= ncol:
                piv_col = next(
                    (j for j in range(ncol) if abs(tab[i, j]) > PIVOT_TOL), -1
                )
                if piv_col < 0:
                    drop.append(i)
                    continue
                tab[i] /= tab[i, piv_col]
                for r in range(m):
                    if r != i and abs(tab[r, piv_col]) > 1e-14:
                        tab[r] -= tab[r, piv_col] * tab[i]
                basis[i] = piv_col
        if drop:
            keep = [i for i in range(m) if i not in set(drop)]
            tab = tab[keep]
            basis = [basis[i] for i in keep]
            m = len(keep)
        tab = np.hstack([tab[:, :ncol], tab[:, -1:]])

    cost2 = np.zeros(ncol)
    cost2[:n] = c
    status = _bland_simplex(tab, basis, cost2)
    if status != "optimal":
        return LPSolution(status=status)
    x_full = np.zeros(ncol)
    for i in range(m):
        x_full[basis[i]] = tab[i, -1]
    x = x_full[:n]
    return LPSolution(status="optimal", x=x, objective=float(c @ x))


def max_flow_to_node(
    problem: AttackProblem, target: int
) -> tuple[float, dict[Link, float] | None]:
    """Maximum total inflow to `target` under unit arrival at the source,
    maximizing over the routing of adversarial nodes and ignoring capacities.

    Returns (value, supporting flow vector); the value is math.inf when an
    adversarial cycle lets flow circulate without bound, with flows None.
    Normal nodes without a routing row absorb (their out-links are forced
    to zero), matching lossy propagation semantics.
    """
    net = problem.network
    if target == net.destination:
        raise ValueError("target must not be the destination")
    links = [(i, j) for i, j, _ in net.links]
    idx = {l: k for k, l in enumerate(links)}
    n = len(links)

    def inflow_vec(i: int) -> tuple[np.ndarray, float]:
        coeff = np.zeros(n)
        for k in net.in_links[i]:
            coeff[idx[(k, i)]] = 1.0
        return coeff, (1.0 if i == net.source else 0.0)

    rows_eq: list[np.ndarray] = []
    rhs_eq: list[float] = []
    rows_ub: list[np.ndarray] = []
    rhs_ub: list[float] = []
    for i in net.nodes():
        outs = net.out_links[i]
        if not outs:
            continue
        if i == net.destination:
            for j in outs:  # the destination absorbs; nothing leaves it
                row = np.zeros(n)
                row[idx[(i, j)]] = 1.0
                rows_eq.append(row)
                rhs_eq.append(0.0)
            continue
        coeff, const = inflow_vec(i)
        if i in problem.adversaries:
            row = -coeff.copy()
            for j in outs:
                row[idx[(i, j)]] += 1.0
            rows_eq.append(row)
            rhs_eq.append(const)
            if problem.dispatch_bounds:
                for j in outs:
                    if (i, j) not in problem.dispatch_bounds:
                        continue
                    lo, hi = problem.dispatch_bounds[(i, j)]
                    up = np.zeros(n)
                    up[idx[(i, j)]] = 1.0
                    rows_ub.append(up - hi * coeff)
                    rhs_ub.append(hi * const)
                    rows_ub.append(lo * coeff - up)
                    rhs_ub.append(-lo * const)
        else:
            drow = problem.default_routing.row(i)
            for j in outs:
                x = 0.0 if drow is None else drow.get(j, 0.0)
                row = -x * coeff
                row[idx[(i, j)]] += 1.0
                rows_eq.append(row)
                rhs_eq.append(x * const)

    obj, obj_const = inflow_vec(target)
    lp = LinearProgram(
        objective=obj,
        a_eq=np.vstack(rows_eq) if rows_eq else None,
        b_eq=np.array(rhs_eq) if rhs_eq else None,
        a_ub=np.vstack(rows_ub) if rows_ub else None,
        b_ub=np.array(rhs_ub) if rhs_ub else None,
    )
    sol = solve(lp)
    if sol.status == "unbounded":
        return math.inf, None
    if sol.status != "optimal":
        raise ValueError(f"max-flow program {sol.status} for target {target}")
    flows = {links[k]: max(float(sol.x[k]), 0.0) for k in range(n)}
    return float(sol.objective) + obj_const, flows
