"""Linear-optimisation backends for min c.x s.t. Ax = 1 over 0/1 columns.

A backend solves the LP relaxation (primal and one dual per row) and the
binary program. ``HighsBackend`` delegates to HiGHS through scipy;
``BundledBackend`` uses the in-package revised simplex and a depth-first
branch-and-bound, optionally in exact rational arithmetic.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from . import simplex

try:
    import highspy
except ImportError:  # the stateless scipy route still works
    highspy = None

INT_TOL = 1e-6


@dataclass
class LpSolution:
    status: str  # optimal | infeasible
    objective: float | Fraction | None
    x: list
    duals: list


@dataclass
class IpSolution:
    status: str  # optimal | feasible | none | infeasible
    objective: int | None
    chosen: list[int]
    bound: float
    nodes: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


@dataclass
class IpLimits:
    time_limit: float | None = None
    node_limit: int | None = None
    expired: Callable[[], bool] | None = None  # external deadline, checked between nodes


def int_bound(lp: float | Fraction) -> int:
    """Smallest integer objective at least the LP bound."""
    if isinstance(lp, Fraction):
        return math.ceil(lp)
    if math.isinf(lp):
        return lp
    return math.ceil(lp - INT_TOL)


def _matrix(rows: Sequence[Sequence[int]], m: int):
    data, ri, ci = [], [], []
    for j, r in enumerate(rows):
        for i in r:
            data.append(1.0)
            ri.append(i)
            ci.append(j)
    return sp.csc_matrix((data, (ri, ci)), shape=(m, len(rows)))


def round_solution(x: Sequence[float], rows: Sequence[Sequence[int]], costs: Sequence, m: int) -> list[int] | None:
    """Pick columns by descending LP value without overlap, then fill the
    remaining rows with the cheapest-per-row disjoint columns."""
    covered = [False] * m
    chosen = []
    order = sorted((j for j in range(len(x)) if x[j] > INT_TOL), key=lambda j: (-float(x[j]), j))
    for j in order:
        if not any(covered[i] for i in rows[j]):
            chosen.append(j)
            for i in rows[j]:
                covered[i] = True
    if all(covered):
        return chosen
    fill = sorted(range(len(rows)), key=lambda j: (costs[j] / len(rows[j]), j))
    for j in fill:
        if not any(covered[i] for i in rows[j]):
            chosen.append(j)
            for i in rows[j]:
                covered[i] = True
    return chosen if all(covered) else None


class LpSession:
    """Restricted master kept alive across column-generation iterations.

    Rows are the legs; the first ``m`` columns are big-M artificials, then
    the pool columns in the order they were added. Re-solves start from the
    previous basis.
    """

    def __init__(self, m: int, big_m: float):
        self.m = m
        self.h = h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("threads", 1)
        h.setOptionValue("presolve", "off")
        ones = np.ones(m)
        h.addRows(m, ones, ones, 0, np.zeros(0, dtype=np.int32), np.zeros(0, dtype=np.int32), np.zeros(0))
        self.n_cols = 0
        self._add([big_m] * m, [(i,) for i in range(m)])
        self.n_cols = 0  # pool columns only

    def _add(self, costs, rows) -> None:
        k = len(costs)
        if not k:
            return
        starts = np.zeros(k, dtype=np.int32)
        idx = []
        for j, r in enumerate(rows):
            starts[j] = len(idx)
            idx.extend(r)
        self.h.addCols(k, np.asarray(costs, dtype=float), np.zeros(k), np.full(k, np.inf), len(idx), starts,
                       np.asarray(idx, dtype=np.int32), np.ones(len(idx)))

    def add(self, costs: Sequence, rows: Sequence[Sequence[int]]) -> None:
        self._add(costs, rows)
        self.n_cols += len(costs)

    def solve(self) -> LpSolution:
        """x lists the artificial columns first."""
        h = self.h
        h.run()
        status = h.getModelStatus()
        if status == highspy.HighsModelStatus.kInfeasible:
            return LpSolution("infeasible", None, [], [])
        if status != highspy.HighsModelStatus.kOptimal:
            raise RuntimeError(f"HiGHS LP failed: {h.modelStatusToString(status)}")
        sol = h.getSolution()
        return LpSolution("optimal", float(h.getInfo().objective_function_value), list(sol.col_value), list(sol.row_dual))


class Backend:
    name = "abstract"
    exact = False

    def lp_session(self, m: int, big_m: float) -> LpSession | None:
        """Incremental LP for column generation, or None to re-solve from scratch."""
        return None

    def solve_lp(self, costs: Sequence, rows: Sequence[Sequence[int]], m: int) -> LpSolution:
        raise NotImplementedError

    def solve_ip(
        self,
        costs: Sequence[int],
        rows: Sequence[Sequence[int]],
        m: int,
        limits: IpLimits | None = None,
        incumbent: list[int] | None = None,
    ) -> IpSolution:
        raise NotImplementedError


class HighsBackend(Backend):
    name = "highs"

    def __init__(self, incremental: bool = True):
        self.incremental = incremental and highspy is not None

    def lp_session(self, m, big_m):
        return LpSession(m, big_m) if self.incremental and m else None

    def solve_lp(self, costs, rows, m):
        if m == 0:
            return LpSolution("optimal", 0.0, [0.0] * len(costs), [])
        A = _matrix(rows, m)
        res = linprog(np.asarray(costs, dtype=float), A_eq=A, b_eq=np.ones(m), bounds=(0, None), method="highs")
        if res.status == 2:
            return LpSolution("infeasible", None, [], [])
        if res.status != 0:
            raise RuntimeError(f"HiGHS LP failed: {res.message}")
        return LpSolution("optimal", float(res.fun), [float(v) for v in res.x], [float(v) for v in res.eqlin.marginals])

    def solve_ip(self, costs, rows, m, limits=None, incumbent=None):
        limits = limits or IpLimits()
        n = len(costs)
        if m == 0:
            return IpSolution("optimal", 0, [], 0.0)
        lp = self.solve_lp(costs, rows, m)
        if lp.status != "optimal":
            return IpSolution("infeasible", None, [], math.inf)
        bound = int_bound(lp.objective)
        inc_obj = sum(costs[j] for j in incumbent) if incumbent is not None else None
        if inc_obj is None:
            heur = round_solution(lp.x, rows, costs, m)
            if heur is not None:
                incumbent, inc_obj = heur, sum(costs[j] for j in heur)
        if inc_obj is not None and inc_obj <= bound:
            return IpSolution("optimal", inc_obj, sorted(incumbent), float(bound))
        A = _matrix(rows, m)
        cons = [LinearConstraint(A, np.ones(m), np.ones(m))]
        if inc_obj is not None:
            cons.append(LinearConstraint(np.asarray(costs, dtype=float).reshape(1, -1), -np.inf, inc_obj - 1 + 1e-6))
        opts = {"mip_rel_gap": 0.0, "presolve": True}
        if limits.time_limit is not None:
            opts["time_limit"] = max(float(limits.time_limit), 0.01)
        if limits.node_limit is not None:
            opts["node_limit"] = int(limits.node_limit)
        res = milp(np.asarray(costs, dtype=float), integrality=np.ones(n), bounds=Bounds(0, 1), constraints=cons, options=opts)
        found = None
        if res.x is not None:
            cand = [j for j in range(n) if res.x[j] > 0.5]
            obj = sum(costs[j] for j in cand)
            if _is_partition(cand, rows, m) and (inc_obj is None or obj < inc_obj):
                found = (cand, obj)
        mip_bound = getattr(res, "mip_dual_bound", None)
        if mip_bound is not None and np.isfinite(mip_bound):
            bound = max(bound, int_bound(float(mip_bound)))
        proven = res.status == 0 or (res.status == 2 and res.x is None)  # 2: cutoff row infeasible
        if found is not None:
            incumbent, inc_obj = found
        if inc_obj is None:
            return IpSolution("infeasible" if proven else "none", None, [], float(bound))
        if proven or inc_obj <= bound:
            return IpSolution("optimal", inc_obj, sorted(incumbent), float(inc_obj))
        return IpSolution("feasible", inc_obj, sorted(incumbent), float(bound))


def _is_partition(chosen, rows, m) -> bool:
    seen = [0] * m
    for j in chosen:
        for i in rows[j]:
            seen[i] += 1
    return all(v == 1 for v in seen)


class BundledBackend(Backend):
    """In-package revised simplex with depth-first branch-and-bound."""

    def __init__(self, exact: bool = False):
        self.exact = exact
        self.name = "exact" if exact else "simplex"

    def solve_lp(self, costs, rows, m):
        res = simplex.solve_lp(costs, rows, m, exact=self.exact)
        if res.status == "infeasible":
            return LpSolution("infeasible", None, [], [])
        if res.status != "optimal":
            raise RuntimeError(f"simplex stopped: {res.status}")
        return LpSolution("optimal", res.objective, res.x, res.duals)

    def solve_ip(self, costs, rows, m, limits=None, incumbent=None):
        limits = limits or IpLimits()
        start = time.perf_counter()
        n = len(costs)
        if m == 0:
            return IpSolution("optimal", 0, [], 0.0)
        best = list(incumbent) if incumbent is not None else None
        best_obj = sum(costs[j] for j in best) if best is not None else math.inf
        nodes = 0
        root_bound = None
        complete = True

        def out_of_budget() -> bool:
            if limits.node_limit is not None and nodes >= limits.node_limit:
                return True
            if limits.time_limit is not None and time.perf_counter() - start >= limits.time_limit:
                return True
            return bool(limits.expired and limits.expired())

        # node: (fixed-one columns, zero-fixed set); explored depth first, x=1 child first
        stack: list[tuple[tuple[int, ...], frozenset[int]]] = [((), frozenset())]
        while stack:
            if root_bound is not None and out_of_budget():
                complete = False
                break
            ones, zeros = stack.pop()
            nodes += 1
            covered = set()
            fixed = 0
            for j in ones:
                covered.update(rows[j])
                fixed += costs[j]
            free_rows = [i for i in range(m) if i not in covered]
            rmap = {i: k for k, i in enumerate(free_rows)}
            sub = [j for j in range(n) if j not in zeros and not covered.intersection(rows[j])]
            lp = self.solve_lp([costs[j] for j in sub], [[rmap[i] for i in rows[j]] for j in sub], len(free_rows))
            if lp.status != "optimal":
                if root_bound is None:
                    root_bound = math.inf
                continue
            lb = fixed + lp.objective
            if root_bound is None:
                root_bound = lb
                heur = round_solution(lp.x, [rows[j] for j in sub], [costs[j] for j in sub], len(free_rows))
                if heur is not None:
                    cand = [sub[k] for k in heur]
                    obj = sum(costs[j] for j in cand)
                    if obj < best_obj:
                        best, best_obj = cand, obj
            if int_bound(lb) >= best_obj:
                continue
            frac = [(abs(float(lp.x[k]) - 0.5), sub[k]) for k in range(len(sub)) if INT_TOL < lp.x[k] < 1 - INT_TOL]
            if self.exact:
                frac = [(abs(float(lp.x[k]) - 0.5), sub[k]) for k in range(len(sub)) if 0 < lp.x[k] < 1]
            if not frac:
                cand = list(ones) + [sub[k] for k in range(len(sub)) if lp.x[k] > 0.5]
                obj = sum(costs[j] for j in cand)
                if obj < best_obj:
                    best, best_obj = cand, obj
                continue
            _, jb = min(frac)
            stack.append((ones, zeros | {jb}))
            stack.append((ones + (jb,), zeros))
        if root_bound is None:
            root_bound = -math.inf
        if best is None:
            return IpSolution("infeasible" if complete else "none", None, [], float(root_bound), nodes)
        if complete:
            return IpSolution("optimal", best_obj, sorted(best), float(best_obj), nodes)
        bound = max(float(root_bound), -math.inf)
        status = "optimal" if best_obj <= int_bound(root_bound) else "feasible"
        return IpSolution(status, best_obj, sorted(best), bound, nodes)


def make_backend(name: str = "highs") -> Backend:
    if name == "highs":
        return HighsBackend()
    if name == "simplex":
        return BundledBackend(exact=False)
    if name == "exact":
        return BundledBackend(exact=True)
    raise ValueError(f"unknown backend {name!r}")
