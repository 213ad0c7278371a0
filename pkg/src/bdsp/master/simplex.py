"""Revised simplex for min c.x s.t. Ax = 1, x >= 0 with 0/1 columns.

The basis inverse is kept explicitly and updated by elementary row
operations. Float mode refactorises periodically; exact mode runs on
``fractions.Fraction`` entries and never refactorises.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.sparse as sp

FEAS_TOL = 1e-7
PIVOT_TOL = 1e-9
DEGENERATE_STREAK = 30
REFACTOR_EVERY = 100


@dataclass
class SimplexResult:
    status: str  # optimal | infeasible | iteration_limit
    objective: float
    x: list
    duals: list
    iterations: int
    basis: list[int]


class _Tableau:
    def __init__(self, costs: Sequence, rows: Sequence[Sequence[int]], m: int, exact: bool):
        self.m = m
        self.n = len(costs)
        self.exact = exact
        self.rows = [tuple(r) for r in rows] + [(i,) for i in range(m)]
        self.N = self.n + m
        if exact:
            self.zero, self.one = Fraction(0), Fraction(1)
            self.Binv = np.array([[Fraction(int(i == j)) for j in range(m)] for i in range(m)], dtype=object).reshape(m, m)
            self.xB = np.array([Fraction(1)] * m, dtype=object)
            self.tol = 0
            self.ptol = 0
        else:
            self.zero, self.one = 0.0, 1.0
            self.Binv = np.eye(m)
            self.xB = np.ones(m)
            self.tol = FEAS_TOL
            self.ptol = PIVOT_TOL
            data, ri, ci = [], [], []
            for j, r in enumerate(self.rows):
                for i in r:
                    data.append(1.0)
                    ri.append(j)
                    ci.append(i)
            self.AT = sp.csr_matrix((data, (ri, ci)), shape=(self.N, m))
        self.basis = list(range(self.n, self.N))
        self.in_basis = np.zeros(self.N, dtype=bool)
        self.in_basis[self.n :] = True
        self.iterations = 0
        self.since_refactor = 0

    def column(self, j: int):
        r = self.rows[j]
        if self.exact:
            out = np.array([Fraction(0)] * self.m, dtype=object)
            for i in r:
                out = out + self.Binv[:, i]
            return out
        return self.Binv[:, list(r)].sum(axis=1)

    def reduced_costs(self, cost, y):
        if self.exact:
            return [cost[j] - sum((y[i] for i in self.rows[j]), Fraction(0)) for j in range(self.N)]
        return cost - self.AT @ y

    def refactor(self):
        if self.exact:
            return
        B = np.zeros((self.m, self.m))
        for k, j in enumerate(self.basis):
            B[list(self.rows[j]), k] = 1.0
        self.Binv = np.linalg.inv(B)
        self.xB = self.Binv.sum(axis=1)
        self.since_refactor = 0

    def pivot(self, r: int, j: int, d):
        piv = d[r]
        row = self.Binv[r, :] / piv
        xr = self.xB[r] / piv
        self.Binv = self.Binv - np.outer(d, row)
        self.Binv[r, :] = row
        self.xB = self.xB - d * xr
        self.xB[r] = xr
        self.in_basis[self.basis[r]] = False
        self.basis[r] = j
        self.in_basis[j] = True
        self.iterations += 1
        self.since_refactor += 1
        if self.since_refactor >= REFACTOR_EVERY:
            self.refactor()

    def run(self, cost, allowed, max_iter: int) -> str:
        streak = 0
        while True:
            if self.iterations >= max_iter:
                return "iteration_limit"
            cB = [cost[j] for j in self.basis]
            if self.exact:
                y = np.array(cB, dtype=object) @ self.Binv
            else:
                y = np.asarray(cB, dtype=float) @ self.Binv
            rc = self.reduced_costs(cost, y)
            bland = streak >= DEGENERATE_STREAK
            enter = -1
            if self.exact:
                best = 0
                for j in range(self.N):
                    if self.in_basis[j] or not allowed[j]:
                        continue
                    v = rc[j]
                    if v < best:
                        enter, best = j, v
                        if bland:
                            break
            else:
                cand = np.flatnonzero((~self.in_basis) & allowed & (rc < -self.tol))
                if len(cand):
                    enter = int(cand[0]) if bland else int(cand[np.argmin(rc[cand])])
            if enter < 0:
                return "optimal"
            d = self.column(enter)
            r, theta = -1, None
            for i in range(self.m):
                if d[i] > self.ptol:
                    ratio = self.xB[i] / d[i]
                    if theta is None or ratio < theta - (0 if self.exact else 1e-12) or (
                        abs(ratio - theta) <= (0 if self.exact else 1e-12) and self.basis[i] < self.basis[r]
                    ):
                        r, theta = i, ratio
            if r < 0:
                return "unbounded"
            streak = streak + 1 if theta <= self.tol else 0
            self.pivot(r, enter, d)
            if not self.exact:
                self.xB[np.abs(self.xB) < 1e-12] = 0.0

    def drive_out_artificials(self):
        """Pivot zero-level artificials out of the basis where possible."""
        for r in range(self.m):
            if self.basis[r] < self.n:
                continue
            for j in range(self.n):
                if self.in_basis[j]:
                    continue
                d = self.column(j)
                if abs(d[r]) > (self.ptol if not self.exact else 0) and (self.exact or abs(d[r]) > 1e-7):
                    self.pivot(r, j, d)
                    break

    def duals(self, cost):
        cB = [cost[j] for j in self.basis]
        if self.exact:
            return list(np.array(cB, dtype=object) @ self.Binv)
        return list(np.asarray(cB, dtype=float) @ self.Binv)


def solve_lp(costs: Sequence, rows: Sequence[Sequence[int]], m: int, exact: bool = False, max_iter: int = 100000) -> SimplexResult:
    n = len(costs)
    if m == 0:
        zero = Fraction(0) if exact else 0.0
        return SimplexResult("optimal", zero, [zero] * n, [], 0, [])
    T = _Tableau(costs, rows, m, exact)
    if exact:
        c1 = [Fraction(0)] * n + [Fraction(1)] * m
        c2 = [Fraction(c) for c in costs] + [Fraction(0)] * m
    else:
        c1 = np.concatenate([np.zeros(n), np.ones(m)])
        c2 = np.concatenate([np.asarray(costs, dtype=float), np.zeros(m)])
    allow_all = np.ones(T.N, dtype=bool)
    status = T.run(c1, allow_all, max_iter)
    if status != "optimal":
        return SimplexResult(status, None, [], [], T.iterations, T.basis)
    infeas = sum((T.xB[k] for k, j in enumerate(T.basis) if j >= n), T.zero)
    if infeas > (0 if exact else 1e-6):
        return SimplexResult("infeasible", None, [], [], T.iterations, T.basis)
    T.drive_out_artificials()
    allowed = np.concatenate([np.ones(n, dtype=bool), np.zeros(m, dtype=bool)])
    status = T.run(c2, allowed, max_iter)
    if status != "optimal":
        return SimplexResult(status, None, [], [], T.iterations, T.basis)
    if not exact:
        T.refactor()
    x = [T.zero] * n
    for k, j in enumerate(T.basis):
        if j < n:
            x[j] = T.xB[k]
    if not exact:
        x = [float(max(v, 0.0)) for v in x]
    obj = sum((c2[j] * x[j] for j in range(n)), T.zero)
    y = T.duals(c2)
    if not exact:
        y = [float(v) for v in y]
        obj = float(obj)
    return SimplexResult("optimal", obj, x, y, T.iterations, list(T.basis))
