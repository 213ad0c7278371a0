"""Final-objective comparison of algorithm variants on generated instances.

    python scripts/compare_variants.py --tours 40 --instances 5 --seeds 10 --budget 120 \
        --algorithms lns lns+rb(f) --out results/variants.csv

Writes one row per run and prints per-instance medians relative to greedy.
"""
from __future__ import annotations

import argparse
import csv
import statistics
from dataclasses import dataclass, field, fields
from pathlib import Path

from bdsp.generate import generate_instance
from bdsp.model import greedy_construct
from bdsp.runner import RunConfig, solve


@dataclass
class CompareConfig:
    tours: int = 40
    instances: int = 5
    first_instance_seed: int = 300
    seeds: int = 10
    budget: float = 120.0
    algorithms: list[str] = field(default_factory=lambda: ["lns", "lns+rb(f)"])
    out: str = "results/variants.csv"


def run(cfg: CompareConfig) -> list[dict]:
    rows = []
    for i in range(cfg.instances):
        inst = generate_instance(cfg.tours, cfg.first_instance_seed + i)
        greedy = greedy_construct(inst).objective
        for alg in cfg.algorithms:
            for seed in range(cfg.seeds):
                res = solve(inst, RunConfig(alg, seed, cfg.budget))
                rows.append(dict(instance=inst.name, legs=inst.n_legs, algorithm=alg, seed=seed, greedy=greedy,
                                 objective=res.solution.objective, elapsed_s=res.summary["elapsed_s"]))
                print(f"{inst.name} {alg:10s} seed={seed} {res.solution.objective} ({greedy})", flush=True)
    return rows


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for f in fields(CompareConfig):
        if f.name == "algorithms":
            p.add_argument("--algorithms", nargs="+", default=CompareConfig().algorithms)
        else:
            p.add_argument(f"--{f.name.replace('_', '-')}", type=type(f.default), default=f.default)
    cfg = CompareConfig(**vars(p.parse_args()))
    rows = run(cfg)
    out = Path(cfg.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    for name in dict.fromkeys(r["instance"] for r in rows):
        line = [name]
        for alg in cfg.algorithms:
            ratios = [r["objective"] / r["greedy"] for r in rows if r["instance"] == name and r["algorithm"] == alg]
            line.append(f"{alg}={statistics.median(ratios):.4f}")
        print("median objective/greedy:", " ".join(line))


if __name__ == "__main__":
    main()
