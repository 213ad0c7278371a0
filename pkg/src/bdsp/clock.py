"""Time sources. ``WorkClock`` advances only when components charge work
units, which makes logs and time budgets reproducible across machines."""
from __future__ import annotations

import math
import time


class WallClock:
    deterministic = False

    def __init__(self):
        self.t0 = time.perf_counter()

    def now(self) -> float:
        return time.perf_counter() - self.t0

    def charge(self, units: float) -> None:
        pass


class WorkClock:
    deterministic = True

    def __init__(self, seconds_per_unit: float = 2e-5):
        self.seconds_per_unit = seconds_per_unit
        self.units = 0.0

    def now(self) -> float:
        return self.units * self.seconds_per_unit

    def charge(self, units: float) -> None:
        self.units += units


class Deadline:
    def __init__(self, clock, budget: float | None = None):
        self.clock = clock
        self.end = math.inf if budget is None else clock.now() + budget

    def remaining(self) -> float:
        return max(0.0, self.end - self.clock.now())

    def expired(self) -> bool:
        return self.clock.now() >= self.end

    def sub(self, budget: float | None) -> "Deadline":
        d = Deadline(self.clock)
        d.end = self.end if budget is None else min(self.end, self.clock.now() + budget)
        return d
