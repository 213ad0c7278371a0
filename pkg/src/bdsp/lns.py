"""Large neighbourhood search with column-generation repair.

Each iteration removes a set of shifts, re-solves their legs as a
sub-instance, and keeps the result only if the full objective strictly
improves. The destruction size grows by one after ``n_max`` consecutive
failures and resets on success.
"""
from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .bp import BpConfig, run_bp, solve_root
from .clock import Deadline, WallClock
from .integration import BackgroundWorker, ColumnStore, init_subproblem_columns, merge_best, reindex
from .master import Column
from .model import Instance, Solution, evaluate_solution, greedy_construct

OPERATORS = ("EU", "EW", "TR")


@dataclass
class LnsConfig:
    k0: int = 10
    k_max: int = 20
    n_max: int = 50
    operators: tuple[str, ...] = ("TR",)
    weights: tuple[float, ...] | None = None  # default 1/|operators| each
    lam: float = 0.9
    adaptive: bool = False
    repair: str = "cg"  # cg | bp
    repair_budget: float = 300.0
    budget: float = 60.0
    seed: int = 0
    bp: BpConfig = field(default_factory=BpConfig)
    keep_candidates: bool = False
    max_iterations: int | None = None

    def __post_init__(self):
        if not 1 <= self.k0 <= self.k_max:
            raise ValueError("need 1 <= k0 <= k_max")
        if self.n_max < 1:
            raise ValueError("n_max must be positive")
        unknown = set(self.operators) - set(OPERATORS)
        if unknown or not self.operators:
            raise ValueError(f"operators must be a non-empty subset of {OPERATORS}")
        if self.weights is not None:
            if len(self.weights) != len(self.operators) or any(w < 0 for w in self.weights) or not any(self.weights):
                raise ValueError("weights must be nonnegative, one per operator, not all zero")
        if not 0 <= self.lam <= 1:
            raise ValueError("lam must lie in [0, 1]")
        if self.repair not in ("cg", "bp"):
            raise ValueError("repair is 'cg' or 'bp'")


@dataclass
class IterationLog:
    time: float
    iteration: int
    operator: str
    k: int
    accepted: bool
    objective: int
    candidate: int
    store_size: int = 0


@dataclass
class LnsState:
    best: Solution
    k: int
    weights: list[float]
    since_improvement: int = 0
    sigma: list[int] = field(default_factory=list)
    tau: list[float] = field(default_factory=list)
    log: list[IterationLog] = field(default_factory=list)
    candidates: list[Solution] = field(default_factory=list)


@dataclass
class LnsResult:
    solution: Solution
    initial: Solution
    state: LnsState
    iterations: int
    convergence: list[tuple[float, int]]

    @property
    def log(self) -> list[IterationLog]:
        return self.state.log


def destroy_eu(solution: Solution, k: int, rng: random.Random) -> list[int]:
    n = solution.n_shifts
    return sorted(rng.sample(range(n), min(k, n)))


def destroy_ew(solution: Solution, k: int, rng: random.Random) -> list[int]:
    """floor(k/2) shifts drawn by cost without replacement, the rest uniformly."""
    n = solution.n_shifts
    if k >= n:
        return list(range(n))
    pool = list(range(n))
    weights = [e.cost for e in solution.evaluations]
    chosen = []
    for _ in range(k // 2):
        idx = rng.choices(range(len(pool)), weights=weights)[0]
        chosen.append(pool.pop(idx))
        weights.pop(idx)
    chosen += rng.sample(pool, k - len(chosen))
    return sorted(chosen)


def destroy_tr(solution: Solution, k: int, rng: random.Random, inst: Instance) -> list[int]:
    """Remove every shift touching a random tour, tour after tour, until at least k are gone."""
    n = solution.n_shifts
    if k >= n:
        return list(range(n))
    by_tour: dict[int, set[int]] = {}
    for s, shift in enumerate(solution.shifts):
        for leg_id in shift:
            by_tour.setdefault(inst.leg(leg_id).tour, set()).add(s)
    tours = sorted(by_tour)
    rng.shuffle(tours)
    chosen: set[int] = set()
    for t in tours:
        chosen |= by_tour[t]
        if len(chosen) >= k:
            break
    return sorted(chosen)


def destroy(name: str, solution: Solution, k: int, rng: random.Random, inst: Instance) -> list[int]:
    if name == "EU":
        return destroy_eu(solution, k, rng)
    if name == "EW":
        return destroy_ew(solution, k, rng)
    if name == "TR":
        return destroy_tr(solution, k, rng, inst)
    raise ValueError(name)


def select_operator(weights: Sequence[float], rng: random.Random) -> int:
    """Roulette wheel; uniform when every weight is zero."""
    total = sum(weights)
    if total <= 0:
        return rng.randrange(len(weights))
    r = rng.random() * total
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if r < acc:
            return i
    return max(i for i, w in enumerate(weights) if w > 0)


def update_weights(state: LnsState, lam: float) -> list[float]:
    new = []
    for rho, s, t in zip(state.weights, state.sigma, state.tau):
        ratio = s / t if t > 0 else 0.0
        new.append(lam * rho + (1 - lam) * ratio)
    state.weights = new
    return new


def make_subinstance(inst: Instance, solution: Solution, removed: Sequence[int]) -> Instance:
    legs = [leg for s in removed for leg in solution.shifts[s]]
    return inst.subinstance(legs, name=f"{inst.name}/sub")


def repair(
    sub: Instance,
    removed: Solution,
    config: LnsConfig,
    budget: float,
    clock=None,
    columns: Sequence[Column] = (),
    on_columns: Callable[[list[Column]], None] | None = None,
    final_deadline: Deadline | None = None,
):
    """Re-solve the sub-instance, warm-started from the removed shifts.
    Returns the BP report; its solution never costs more than ``removed``."""
    bp_cfg = config.bp
    if config.repair == "cg":
        return solve_root(sub, budget, bp_cfg, clock, columns, removed, on_columns, final_deadline)
    return run_bp(sub, budget, bp_cfg, clock, columns, removed, on_columns, final_deadline=final_deadline)


def run_lns(
    inst: Instance,
    config: LnsConfig | None = None,
    clock=None,
    store: ColumnStore | None = None,
    reuse: bool = False,
    worker: BackgroundWorker | None = None,
    deterministic_background: bool = False,
    initial: Solution | None = None,
) -> LnsResult:
    """LNS main loop. With ``store`` the repairs feed generated columns into it
    (per its policy); ``reuse`` seeds repairs from the store; ``worker`` is a
    background integer master merged at iteration boundaries. With
    ``deterministic_background`` the worker runs one cycle per iteration on
    this thread instead of its own."""
    cfg = config or LnsConfig()
    clock = clock or WallClock()
    deadline = Deadline(clock, cfg.budget)
    rng = random.Random(cfg.seed)
    start = initial or greedy_construct(inst)
    ops = list(cfg.operators)
    weights = list(cfg.weights) if cfg.weights is not None else [1.0 / len(ops)] * len(ops)
    state = LnsState(start, cfg.k0, weights, sigma=[0] * len(ops), tau=[0.0] * len(ops))
    convergence = [(clock.now(), start.objective)]
    if worker is not None:
        worker.offer(start)
    it = 0
    while not deadline.expired() and state.best.n_shifts > 0:
        if cfg.max_iterations is not None and it >= cfg.max_iterations:
            break
        it += 1
        t0 = clock.now()
        op = select_operator(state.weights, rng)
        best = state.best
        k_used = state.k
        removed = destroy(ops[op], best, k_used, rng, inst)
        sub = make_subinstance(inst, best, removed)
        removed_sol = evaluate_solution([best.shifts[s] for s in removed], sub)
        seeds = init_subproblem_columns(store, sub) if (store is not None and reuse) else []
        report = repair(sub, removed_sol, cfg, min(cfg.repair_budget, max(deadline.remaining(), 1e-3)), clock, seeds,
                        final_deadline=deadline)
        gone = set(removed)
        kept = [best.shifts[s] for s in range(best.n_shifts) if s not in gone]
        candidate = evaluate_solution(kept + list(report.solution.shifts), inst)
        if store is not None:
            generated = [reindex(c, sub, inst) for c in report.pool]
            best_cols = [Column.of([inst.index_of(i) for i in s], inst) for s in report.solution.shifts]
            store.update(generated, best_cols)
        s_bg = None
        if worker is not None:
            if deterministic_background:
                worker.cycle()
            s_bg = worker.latest()
        merged = merge_best(candidate, best, s_bg)
        improved = merged.objective < best.objective
        state.tau[op] += clock.now() - t0
        if candidate.objective < best.objective:
            state.sigma[op] += 1
        if improved:
            state.best = merged
            state.k = cfg.k0
            state.since_improvement = 0
            convergence.append((clock.now(), merged.objective))
            if worker is not None and merged is candidate:
                worker.offer(candidate)
        else:
            state.since_improvement += 1
            if state.since_improvement >= cfg.n_max:
                state.k = min(state.k + 1, cfg.k_max)
                state.since_improvement = 0
        if cfg.adaptive:
            update_weights(state, cfg.lam)
        if cfg.keep_candidates:
            state.candidates.append(candidate)
        state.log.append(
            IterationLog(clock.now(), it, ops[op], k_used, improved,
                         state.best.objective, candidate.objective, len(store) if store is not None else 0)
        )
    if worker is not None:
        final = merge_best(None, state.best, worker.latest())
        if final is not state.best:
            state.best = final
            convergence.append((clock.now(), final.objective))
    return LnsResult(state.best, start, state, it, convergence)


def write_log(path, result: LnsResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time_s", "iteration", "operator", "k", "accepted", "objective"])
        for row in result.log:
            w.writerow([f"{row.time:.3f}", row.iteration, row.operator, row.k, int(row.accepted), row.objective])
