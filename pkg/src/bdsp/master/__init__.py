"""Set-partitioning master problem over a column pool."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..model import Instance, Solution, evaluate_solution
from .backend import Backend, BundledBackend, HighsBackend, IpLimits, IpSolution, LpSolution, int_bound, make_backend
from .pool import Column, ColumnPool, legs_of, mask_of

__all__ = [
    "Backend", "BundledBackend", "Column", "ColumnPool", "HighsBackend", "IntegerResult", "IpLimits", "IpSolution",
    "LpSolution", "RestrictedMaster", "RmpResult", "int_bound", "legs_of", "make_backend", "mask_of", "solve_integer", "solve_rmp",
]


@dataclass
class RmpResult:
    objective: float | Fraction
    x: list  # one value per pool column
    duals: list  # one per leg
    artificial: float | Fraction = 0  # total value of big-M artificial columns

    @property
    def integral(self) -> bool:
        tol = 0 if isinstance(self.objective, Fraction) else 1e-6
        return self.artificial <= tol and all(v <= tol or v >= 1 - tol for v in self.x)

    def support(self, tol: float = 1e-6) -> list[int]:
        return [j for j, v in enumerate(self.x) if v > tol]


class InfeasibleMasterError(RuntimeError):
    pass


def solve_rmp(pool: ColumnPool, n_legs: int, backend: Backend | None = None, big_m: int | None = None) -> RmpResult:
    """LP relaxation of the restricted master. With ``big_m`` every row gets
    an artificial column of that cost, so the LP is always feasible."""
    backend = backend or HighsBackend()
    costs = [c.cost for c in pool]
    rows = [c.legs for c in pool]
    if big_m is not None:
        costs += [big_m] * n_legs
        rows += [(i,) for i in range(n_legs)]
    lp = backend.solve_lp(costs, rows, n_legs)
    if lp.status != "optimal":
        raise InfeasibleMasterError("restricted master is infeasible; the pool does not cover every leg")
    k = len(pool)
    zero = Fraction(0) if backend.exact else 0.0
    art = sum(lp.x[k:], zero)
    return RmpResult(lp.objective, lp.x[:k], lp.duals, art)


class RestrictedMaster:
    """LP relaxation over a pool that only grows; re-solves warm when the
    backend offers an incremental session, otherwise from scratch."""

    def __init__(self, pool: ColumnPool, n_legs: int, backend: Backend | None = None, big_m: int | None = None):
        self.pool = pool
        self.n_legs = n_legs
        self.backend = backend or HighsBackend()
        self.big_m = big_m
        self.session = self.backend.lp_session(n_legs, big_m) if big_m is not None else None
        self.synced = 0

    def solve(self) -> RmpResult:
        if self.session is None:
            return solve_rmp(self.pool, self.n_legs, self.backend, self.big_m)
        pool = self.pool
        fresh = [pool[j] for j in range(self.synced, len(pool))]
        self.session.add([c.cost for c in fresh], [c.legs for c in fresh])
        self.synced = len(pool)
        lp = self.session.solve()
        if lp.status != "optimal":
            raise InfeasibleMasterError("restricted master is infeasible")
        n = self.n_legs
        return RmpResult(lp.objective, lp.x[n:], lp.duals, float(sum(lp.x[:n])))


@dataclass
class IntegerResult:
    solution: Solution
    columns: list[Column]
    optimal: bool
    bound: float
    status: str
    nodes: int = 0


def solve_integer(
    pool: ColumnPool,
    inst: Instance,
    timeout: float | None = None,
    warm_start: Sequence[Column] | None = None,
    backend: Backend | None = None,
    node_limit: int | None = None,
    expired=None,
) -> IntegerResult:
    """Best integer partition from the pool. Falls back to singletons (not
    necessarily pool members) if the backend finds nothing in time."""
    backend = backend or HighsBackend()
    n = inst.n_legs
    costs = [c.cost for c in pool]
    rows = [c.legs for c in pool]
    incumbent = None
    if warm_start is not None:
        incumbent = [pool.index(c.mask) for c in warm_start]
    res = backend.solve_ip(costs, rows, n, IpLimits(timeout, node_limit, expired), incumbent)
    if res.objective is None:
        cols = [Column.of((i,), inst) for i in range(n)]
        status = "fallback"
        optimal = False
    else:
        cols = [pool[j] for j in res.chosen]
        status = res.status
        optimal = res.optimal
    sol = evaluate_solution([c.leg_ids(inst) for c in cols], inst)
    return IntegerResult(sol, cols, optimal, res.bound, status, res.nodes)
