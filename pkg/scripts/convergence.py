"""Best-so-far objective over time for several variants on one instance.

    python scripts/convergence.py --tours 20 --seed 1 --budget 300 --out results/convergence.csv

Samples every variant's convergence log on a common time grid so the CSV
can be plotted directly (one column per variant).
"""
from __future__ import annotations

import argparse
import bisect
import csv
from dataclasses import dataclass, field, fields
from pathlib import Path

from bdsp.generate import generate_instance
from bdsp.io import read_instance
from bdsp.runner import RunConfig, solve


@dataclass
class ConvergenceConfig:
    tours: int = 20
    seed: int = 1
    instance: str = ""  # instance file; overrides tours/seed
    run_seed: int = 0
    budget: float = 300.0
    step: float = 5.0
    algorithms: list[str] = field(default_factory=lambda: ["bp", "lns", "lns+r(f)", "lns+b(f)", "lns+rb(f)"])
    out: str = "results/convergence.csv"


def sample(log: list[tuple[float, int]], grid: list[float]) -> list[int]:
    """Best objective at each grid time; the start solution covers times before its log entry."""
    times = [t for t, _ in log]
    return [log[max(bisect.bisect_right(times, t) - 1, 0)][1] for t in grid]


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for f in fields(ConvergenceConfig):
        if f.name == "algorithms":
            p.add_argument("--algorithms", nargs="+", default=ConvergenceConfig().algorithms)
        else:
            p.add_argument(f"--{f.name.replace('_', '-')}", type=type(f.default), default=f.default)
    cfg = ConvergenceConfig(**vars(p.parse_args()))
    inst = read_instance(cfg.instance) if cfg.instance else generate_instance(cfg.tours, cfg.seed)
    grid = [round(k * cfg.step, 3) for k in range(int(cfg.budget / cfg.step) + 1)]
    columns = {}
    for alg in cfg.algorithms:
        res = solve(inst, RunConfig(alg, cfg.run_seed, cfg.budget))
        columns[alg] = sample(res.convergence, grid)
        print(f"{alg:10s} final={res.solution.objective} elapsed={res.summary['elapsed_s']}s", flush=True)
    out = Path(cfg.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time_s"] + cfg.algorithms)
        for k, t in enumerate(grid):
            w.writerow([t] + [columns[a][k] for a in cfg.algorithms])
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
