"""Seeded synthetic instance generator.

Positions are points on a square grid with Manhattan travel times; position 0
is the depot. Each tour leaves the depot, visits random stops, and returns, so
consecutive legs of a tour always chain.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .model import Instance, Leg, RulesConfig


@dataclass
class GeneratorConfig:
    positions: int = 8
    legs_per_tour: tuple[int, int] = (8, 12)
    drive: tuple[int, int] = (20, 70)
    turnaround: tuple[int, int] = (0, 25)
    first_departure: tuple[int, int] = (300, 720)
    grid: int = 12
    minutes_per_cell: int = 3
    forbidden_share: float = 0.0
    depot_start_work: int = 15
    depot_end_work: int = 10


def generate_instance(tours: int, seed: int, config: GeneratorConfig | None = None, rules: RulesConfig | None = None) -> Instance:
    if tours < 1:
        raise ValueError("tours must be at least 1")
    cfg = config or GeneratorConfig()
    rng = random.Random(seed)
    n = cfg.positions
    coords = [(rng.randrange(cfg.grid), rng.randrange(cfg.grid)) for _ in range(n)]
    no_transfer = 10**6
    dist = [[0] * n for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            d = cfg.minutes_per_cell * (abs(coords[a][0] - coords[b][0]) + abs(coords[a][1] - coords[b][1]))
            d = max(d, 1)
            if a and b and rng.random() < cfg.forbidden_share:
                d = no_transfer
            dist[a][b] = dist[b][a] = d
    start_work = [0] * n
    end_work = [0] * n
    start_work[0] = cfg.depot_start_work
    end_work[0] = cfg.depot_end_work

    legs: list[Leg] = []
    leg_id = 0
    for tour in range(tours):
        count = rng.randint(*cfg.legs_per_tour)
        t = rng.randint(*cfg.first_departure)
        pos = 0
        for k in range(count):
            if k == count - 1:
                nxt = 0
            else:
                nxt = rng.choice([p for p in range(n) if p != pos])
            drive = rng.randint(*cfg.drive)
            legs.append(Leg(leg_id, tour, pos, nxt, t, t + drive))
            leg_id += 1
            t += drive + rng.randint(*cfg.turnaround)
            pos = nxt
    return Instance(dist, start_work, end_work, tuple(legs), rules or RulesConfig(), no_transfer, f"gen-t{tours}-s{seed}")


def small_instance(n_legs: int, seed: int, tours: int | None = None) -> Instance:
    """A compact instance with exactly ``n_legs`` legs over a few overlapping tours."""
    rng = random.Random(seed)
    tours = tours or max(1, min(n_legs, rng.randint(2, 4)))
    base = [n_legs // tours + (1 if i < n_legs % tours else 0) for i in range(tours)]
    cfg = GeneratorConfig(positions=5, legs_per_tour=(1, 1), first_departure=(360, 480), drive=(25, 90), turnaround=(0, 40))
    # one generator call per tour length, stitched into one instance
    dist_inst = generate_instance(1, seed, cfg)
    legs: list[Leg] = []
    leg_id = 0
    for tour, count in enumerate(base):
        t = rng.randint(*cfg.first_departure)
        pos = 0
        for k in range(count):
            nxt = 0 if k == count - 1 else rng.choice([p for p in range(1, cfg.positions) if p != pos])
            drive = rng.randint(*cfg.drive)
            legs.append(Leg(leg_id, tour, pos, nxt, t, t + drive))
            leg_id += 1
            t += drive + rng.randint(*cfg.turnaround)
            pos = nxt
    return Instance(
        dist_inst.distance, dist_inst.start_work, dist_inst.end_work, tuple(legs), RulesConfig(), dist_inst.no_transfer,
        f"small-n{n_legs}-s{seed}",
    )
