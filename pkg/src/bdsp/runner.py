"""Run one algorithm variant on an instance and collect its outputs."""
from __future__ import annotations

import csv
import json
import resource
from dataclasses import dataclass, field, replace
from pathlib import Path

from .bp import BpConfig, run_bp
from .clock import Deadline, WallClock, WorkClock
from .integration import BackgroundWorker, ColumnStore, variant
from .io import write_solution
from .lns import LnsConfig, run_lns, write_log
from .model import Instance, Solution, gap, greedy_construct, singleton_solution


@dataclass
class RunConfig:
    algorithm: str = "lns"
    seed: int = 0
    budget: float = 60.0
    lns: LnsConfig = field(default_factory=LnsConfig)
    bp: BpConfig = field(default_factory=BpConfig)
    background_timeout: float = 60.0
    deterministic: bool = False  # work clock, synchronous background cycles
    max_store_columns: int | None = None
    bks: float | None = None

    def __post_init__(self):
        variant(self.algorithm)
        if self.budget <= 0:
            raise ValueError("budget must be positive")


@dataclass
class RunResult:
    solution: Solution
    convergence: list[tuple[float, int]]
    summary: dict
    lns_result: object = None
    bp_report: object = None


def memory_high_water_mb() -> float:
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0


def solve(inst: Instance, cfg: RunConfig) -> RunResult:
    var = variant(cfg.algorithm)
    clock = WorkClock() if cfg.deterministic else WallClock()
    bp_cfg = cfg.bp
    greedy = greedy_construct(inst)
    store = worker = None
    if var.reuse or var.background:
        store = ColumnStore(inst, var.policy, cfg.max_store_columns)
    if var.background:
        worker = BackgroundWorker(
            store, cfg.background_timeout, bp_cfg.backend,
            node_limit=bp_cfg.integer_node_limit if cfg.deterministic else None, clock=clock,
            deadline=Deadline(clock, cfg.budget),
        )
    summary = {"algorithm": var.name, "seed": cfg.seed, "budget_s": cfg.budget, "instance": inst.name,
               "legs": inst.n_legs, "greedy_objective": greedy.objective, "deterministic": cfg.deterministic}
    lns_res = report = None
    if worker is not None and not cfg.deterministic:
        worker.start()
    try:
        if var.algorithm == "lns":
            lcfg = replace(cfg.lns, budget=cfg.budget, seed=cfg.seed, bp=bp_cfg)
            lns_res = run_lns(inst, lcfg, clock, store, var.reuse, worker, cfg.deterministic, greedy)
            sol = lns_res.solution
            convergence = lns_res.convergence
            summary.update(iterations=lns_res.iterations, final_k=lns_res.state.k)
        else:
            on_columns = store.add if store is not None else None
            external = worker.latest if worker is not None else None
            start = singleton_solution(inst) if bp_cfg.initial == "singletons" else greedy
            if worker is not None:
                worker.offer(start)
            report = run_bp(inst, cfg.budget, bp_cfg, clock, incumbent=start, on_columns=on_columns, external=external)
            sol = report.solution
            convergence = [(0.0, start.objective)]
            for n in report.nodes:
                if n.incumbent < convergence[-1][1]:
                    convergence.append((n.time, n.incumbent))
            if sol.objective < convergence[-1][1]:
                convergence.append((clock.now(), sol.objective))
            summary.update(lower_bound=report.lower_bound, optimal=report.optimal, gap_to_bound=report.gap,
                           termination=report.termination, nodes=len(report.nodes), root_lp=report.root_lp,
                           root_lagrangean=report.root_lagrangean, iterations=len(report.nodes))
    finally:
        if worker is not None and not cfg.deterministic:
            worker.stop()
    if store is not None:
        summary["store_columns"] = len(store)
    if worker is not None:
        summary["background_cycles"] = worker.cycles
    summary["objective"] = sol.objective
    summary["shifts"] = sol.n_shifts
    if cfg.bks is not None:
        summary["gap_percent"] = gap(sol.objective, cfg.bks)
    summary["elapsed_s"] = round(clock.now(), 3)
    summary["memory_high_water_mb"] = round(memory_high_water_mb(), 1)
    return RunResult(sol, convergence, summary, lns_res, report)


def write_outputs(result: RunResult, inst: Instance, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"solution": out / "solution.json", "convergence": out / "convergence.csv", "summary": out / "summary.json"}
    write_solution(result.solution, inst, paths["solution"], {"algorithm": result.summary["algorithm"], "seed": result.summary["seed"]})
    with open(paths["convergence"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["elapsed_s", "best_objective"])
        for t, z in result.convergence:
            w.writerow([f"{t:.3f}", z])
    paths["summary"].write_text(json.dumps(result.summary, indent=1, default=str) + "\n")
    if result.lns_result is not None:
        paths["iterations"] = out / "iterations.csv"
        write_log(paths["iterations"], result.lns_result)
    return paths
