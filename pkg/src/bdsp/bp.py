"""Branch-and-price over consecutive-leg connections.

Each node runs column generation on the columns compatible with its
branching decisions, then the integer master over every column generated so
far. Nodes are explored best-bound first, deeper nodes first on ties.
"""
from __future__ import annotations

import heapq
import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

from .clock import Deadline, WallClock
from .master import (
    Backend, Column, ColumnPool, RestrictedMaster, RmpResult, int_bound, make_backend, solve_integer,
)
from .model import Instance, Solution, evaluate_solution, greedy_construct
from .rcspp import SINK, SOURCE, Pricer, PricingConfig

log = logging.getLogger(__name__)

Pair = tuple[int, int]


@dataclass
class BpConfig:
    pricing: PricingConfig = field(default_factory=PricingConfig)
    backend: str = "highs"
    integer_timeout: float = 60.0
    final_integer_timeout: float = 60.0
    integer_node_limit: int = 500  # used instead of time limits under a work clock
    node_limit: int | None = None
    root_only: bool = False
    lagrangean_prune: bool = False
    initial: str = "singletons"  # start solution when no incumbent is passed: singletons | greedy

    def __post_init__(self):
        if self.initial not in ("singletons", "greedy"):
            raise ValueError("initial is 'singletons' or 'greedy'")
        if self.backend not in ("highs", "simplex", "exact"):
            raise ValueError(f"unknown backend {self.backend!r}")


@dataclass(frozen=True)
class BranchNode:
    lb: float
    depth: int
    forced: frozenset = frozenset()
    forbidden: frozenset = frozenset()

    def admits(self, col: Column) -> bool:
        legs = col.legs
        pos = {leg: k for k, leg in enumerate(legs)}
        for i, j in self.forced:
            if i == SOURCE:
                if j in pos and pos[j] != 0:
                    return False
            elif j == SINK:
                if i in pos and pos[i] != len(legs) - 1:
                    return False
            else:
                a, b = pos.get(i), pos.get(j)
                if a is None and b is None:
                    continue
                if a is None or b is None or b != a + 1:
                    return False
        for i, j in self.forbidden:
            if i == SOURCE:
                if legs[0] == j:
                    return False
            elif j == SINK:
                if legs[-1] == i:
                    return False
            elif i in pos and pos.get(j) == pos[i] + 1:
                return False
        return True

    def arc_mask(self, arcs: Iterable[Pair]) -> set[Pair]:
        """Base-graph arcs removed in this node."""
        out = set(self.forbidden)
        for (a, b) in arcs:
            for i, j in self.forced:
                if i == SOURCE:
                    if b == j and a != SOURCE:
                        out.add((a, b))
                elif j == SINK:
                    if a == i and b != SINK:
                        out.add((a, b))
                elif (a == i and b != j) or (b == j and a != i):
                    out.add((a, b))
        return out


@dataclass
class NodeLog:
    time: float
    node: int
    depth: int
    rmp_objective: float
    columns_added: int
    cg_iterations: int
    incumbent: float
    lagrangean: float  # best Lagrangean bound of this node's subproblem


@dataclass
class BpReport:
    solution: Solution
    lower_bound: float
    termination: str  # optimal | timeout | node_limit
    nodes: list[NodeLog]
    root_lp: float | None
    columns: int
    pool: ColumnPool

    @property
    def root_lagrangean(self) -> float:
        return self.nodes[0].lagrangean if self.nodes and self.nodes[0].depth == 0 else -math.inf

    @property
    def gap(self) -> float:
        if self.lower_bound <= 0:
            return math.inf
        return max(0.0, (self.solution.objective - self.lower_bound) / self.lower_bound)

    @property
    def optimal(self) -> bool:
        return self.termination == "optimal"


def lagrangean_bound(rmp_obj: float, min_reduced_cost: float, inst: Instance) -> float:
    """rmp + kappa * min reduced cost, kappa = floor(rmp / cheapest possible shift)."""
    if min_reduced_cost >= 0 or not inst.legs:
        return rmp_obj
    R = inst.rules
    min_cost = R.weight_work * R.work_min + min(l.drive for l in inst.legs)
    kappa = math.floor(rmp_obj / min_cost)
    return rmp_obj + kappa * min_reduced_cost


def big_m(inst: Instance) -> int:
    """Artificial column cost, far above the cost of any partition."""
    R = inst.rules
    n = inst.n_legs
    shift_max = R.weight_work * R.work_max + (R.weight_span + R.weight_ride) * R.span_max + (R.weight_change + R.weight_split) * n
    return max(10**6, n * shift_max + 1)


def branch_select(rmp: RmpResult, pool: ColumnPool, tol: float = 1e-6) -> Pair | None:
    """Connection whose fractional weight is closest to 0.5, leg pairs before
    source/sink pairs; ties broken by the pair order."""
    inner: dict[Pair, float] = {}
    outer: dict[Pair, float] = {}
    for x, col in zip(rmp.x, pool):
        if not (tol < x < 1 - tol):
            continue
        for p in col.consecutive():
            inner[p] = inner.get(p, 0) + x
        outer[(SOURCE, col.legs[0])] = outer.get((SOURCE, col.legs[0]), 0) + x
        outer[(col.legs[-1], SINK)] = outer.get((col.legs[-1], SINK), 0) + x
    for weights in (inner, outer):
        cand = [(abs(2 * w - 1), p) for p, w in weights.items() if tol < w < 1 - tol]  # exact for rationals
        if cand:
            return min(cand)[1]
    return None


def apply_branch(node: BranchNode, pair: Pair, side: str) -> BranchNode:
    if side == "left":
        return replace(node, depth=node.depth + 1, forced=node.forced | {pair})
    if side == "right":
        return replace(node, depth=node.depth + 1, forbidden=node.forbidden | {pair})
    raise ValueError(side)


@dataclass
class CgResult:
    rmp: RmpResult | None
    converged: bool
    infeasible: bool
    iterations: int
    columns_added: int
    lagrangean: float


def column_generation(
    inst: Instance,
    pool: ColumnPool,
    pricer: Pricer,
    backend: Backend,
    deadline: Deadline,
    on_columns: Callable[[list[Column]], None] | None = None,
    admits: Callable[[Column], bool] | None = None,
) -> CgResult:
    """Alternate RMP solves and pricing until pricing returns nothing at full
    throttle or the deadline passes. New columns are added to ``pool``."""
    clock = deadline.clock
    n = inst.n_legs
    M = big_m(inst)
    cfg = pricer.config
    quotas = cfg.quotas
    stagnation = 0
    last = None
    lag = -math.inf
    iterations = 0
    added = 0
    tol = 0 if backend.exact else 1e-6
    master = RestrictedMaster(pool, n, backend, M)
    while True:
        rmp = master.solve()
        clock.charge(len(pool) + n)
        iterations += 1
        if last is not None and abs(rmp.objective - last) <= 1e-9:
            stagnation += 1
        else:
            stagnation = 0
        last = rmp.objective
        if deadline.expired():
            return CgResult(rmp, False, False, iterations, added, lag)
        before = pricer.created
        res = pricer.price(rmp.duals, quotas[min(stagnation, len(quotas) - 1)])
        clock.charge(pricer.created - before)
        if rmp.artificial <= tol:
            lag = max(lag, lagrangean_bound(rmp.objective, res.lower_bound, inst))
        new = []
        for pc in res.columns:
            col = Column.of(pc.legs, inst)
            if admits is not None and not admits(col):
                raise AssertionError(f"pricing produced a column violating the branch: {col.legs}")
            if pool.add(col):
                new.append(col)
        added += len(new)
        if new and on_columns is not None:
            on_columns(new)
        if not res.columns and res.exact:
            break
        if res.columns and not new:
            log.warning("pricing returned only known columns; stopping column generation")
            break
    infeasible = rmp.artificial > tol
    return CgResult(rmp, True, infeasible, iterations, added, lag)


def rmp_solution(rmp: RmpResult, pool: ColumnPool, inst: Instance) -> Solution | None:
    if not rmp.integral:
        return None
    cols = [pool[j] for j in rmp.support(0.5)]
    return evaluate_solution([c.leg_ids(inst) for c in cols], inst)


def _columns_of(sol: Solution, inst: Instance) -> list[Column]:
    return [Column.of([inst.index_of(i) for i in s], inst) for s in sol.shifts]


def run_bp(
    inst: Instance,
    timeout: float | None = None,
    config: BpConfig | None = None,
    clock=None,
    columns: Iterable[Column] = (),
    incumbent: Solution | None = None,
    on_columns: Callable[[list[Column]], None] | None = None,
    external: Callable[[], Solution | None] | None = None,
    final_deadline: Deadline | None = None,
) -> BpReport:
    """Branch-and-price. ``columns`` seed the pool next to the singletons,
    ``incumbent`` is an initial solution, ``on_columns`` receives every new
    column, and ``external`` may offer better solutions between nodes.
    ``final_deadline`` caps the integer solve that follows an interrupted node
    (otherwise it gets ``final_integer_timeout`` past the time limit)."""
    cfg = config or BpConfig()
    clock = clock or WallClock()
    deadline = Deadline(clock, timeout)
    backend = make_backend(cfg.backend)
    pcfg = cfg.pricing if not backend.exact else replace(cfg.pricing, tolerance=0)
    pricer = Pricer(inst, pcfg)
    pool = ColumnPool.singletons(inst)
    pool.extend(columns)
    if incumbent is not None:
        pool.extend(_columns_of(incumbent, inst))
    best = incumbent
    if best is None and cfg.initial == "greedy" and inst.n_legs:
        best = greedy_construct(inst)
        pool.extend(_columns_of(best, inst))
    if best is None:
        best = evaluate_solution([[l.id] for l in inst.legs], inst)

    def offer(sol: Solution | None):
        nonlocal best
        if sol is not None and sol.objective < best.objective:
            best = sol
            pool.extend(_columns_of(sol, inst))

    counter = itertools.count()
    root = BranchNode(-math.inf, 0)
    heap = [(root.lb, -root.depth, next(counter), root)]
    logs: list[NodeLog] = []
    root_lp = None
    termination = "optimal"
    processed = 0
    unresolved_lb = math.inf  # bound of a node interrupted by the deadline

    while heap:
        if deadline.expired():
            termination = "timeout"
            break
        if cfg.node_limit is not None and processed >= cfg.node_limit:
            termination = "node_limit"
            break
        lb, _, _, node = heapq.heappop(heap)
        if int_bound(lb) >= best.objective:
            continue
        processed += 1
        node_pool = pool.filtered(node.admits) if node.depth else pool
        pricer.set_forbidden(node.arc_mask(pricer.graph.arcs))
        pricer.throttle.reset()

        def record(new, node_pool=node_pool):
            if node_pool is not pool:
                pool.extend(new)
            if on_columns is not None:
                on_columns(new)

        cg = column_generation(inst, node_pool, pricer, backend, deadline, record, node.admits if node.depth else None)
        rmp = cg.rmp
        if node.depth == 0:
            root_lp = rmp.objective if cg.converged else None
        node_lb = lb
        if cg.converged and not cg.infeasible:
            node_lb = max(lb, rmp.objective)
        elif (cfg.lagrangean_prune or not cg.converged) and math.isfinite(cg.lagrangean):
            node_lb = max(lb, cg.lagrangean)

        if external is not None:
            offer(external())
        if not cg.infeasible:
            offer(rmp_solution(rmp, node_pool, inst))
        if not (cg.infeasible or (cg.converged and int_bound(node_lb) >= best.objective)):
            limits = _limits(cfg, clock, deadline, final=not cg.converged, final_deadline=final_deadline)
            ip = solve_integer(pool, inst, warm_start=_columns_of(best, inst), backend=backend, **limits)
            clock.charge(len(pool) * 10)
            offer(ip.solution)
        logs.append(
            NodeLog(clock.now(), processed, node.depth, float(rmp.objective), cg.columns_added, cg.iterations, best.objective,
                    float(cg.lagrangean))
        )
        if not cg.converged:
            unresolved_lb = min(unresolved_lb, node_lb)
            termination = "timeout"
            break
        if cg.infeasible or int_bound(node_lb) >= best.objective or rmp.integral:
            continue
        if cfg.root_only:
            unresolved_lb = min(unresolved_lb, node_lb)
            termination = "root_only"
            break
        pair = branch_select(rmp, node_pool)
        if pair is None:
            unresolved_lb = min(unresolved_lb, node_lb)
            log.warning("no fractional connection despite a fractional master")
            continue
        for side in ("left", "right"):
            child = replace(apply_branch(node, pair, side), lb=node_lb)
            heapq.heappush(heap, (node_lb, -child.depth, next(counter), child))

    if external is not None:
        offer(external())
    if termination == "optimal":
        lower = best.objective
    else:
        open_lb = min((h[0] for h in heap), default=math.inf)
        lower = min(open_lb, unresolved_lb, best.objective)
        if lower == -math.inf:
            lower = 0.0
        if int_bound(lower) >= best.objective:
            lower, termination = best.objective, "optimal"
    return BpReport(best, float(lower), termination, logs, None if root_lp is None else float(root_lp), len(pool), pool)


def _limits(cfg: BpConfig, clock, deadline: Deadline, final: bool, final_deadline: Deadline | None = None) -> dict:
    if final:
        budget = cfg.final_integer_timeout
        if final_deadline is not None:
            budget = min(budget, max(final_deadline.remaining(), 0.05))
    else:
        budget = min(cfg.integer_timeout, max(deadline.remaining(), 0.0))
    if clock.deterministic:
        return {"node_limit": cfg.integer_node_limit}
    return {"timeout": budget}


def solve_root(
    inst: Instance,
    timeout: float | None = None,
    config: BpConfig | None = None,
    clock=None,
    columns: Iterable[Column] = (),
    incumbent: Solution | None = None,
    on_columns: Callable[[list[Column]], None] | None = None,
    final_deadline: Deadline | None = None,
) -> BpReport:
    """Root-node column generation followed by one integer master solve."""
    cfg = replace(config or BpConfig(), root_only=True)
    return run_bp(inst, timeout, cfg, clock, columns, incumbent, on_columns, final_deadline=final_deadline)
