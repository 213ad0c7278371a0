"""Column reuse across LNS repairs and the background integer master.

The store is append-only. Repairs seed their pools with stored columns that
fit inside the freed legs; the background worker repeatedly solves the
integer master over a snapshot of the store and publishes its best partition.
"""
from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from typing import Iterable, Sequence

from .clock import Deadline, WallClock
from .master import Column, ColumnPool, make_backend, mask_of, solve_integer
from .model import Instance, Solution

log = logging.getLogger(__name__)

POLICIES = ("best", "full")


class ColumnStore:
    """Columns over full-instance leg indices, keyed by leg mask.

    One appender, any number of snapshot readers. ``max_columns`` is a hard
    ceiling: once reached, further columns are dropped with a warning rather
    than evicting stored ones.
    """

    def __init__(self, inst: Instance, policy: str = "best", max_columns: int | None = None, seed_singletons: bool = True):
        if policy not in POLICIES:
            raise ValueError(f"unknown store policy {policy!r}")
        self.inst = inst
        self.policy = policy
        self.max_columns = max_columns
        self._lock = threading.Lock()
        self._columns: list[Column] = []
        self._masks: set[int] = set()
        self._by_low: dict[int, list[int]] = {}
        self.generation = 0
        self.full = False
        if seed_singletons:
            self.add(Column.of((i,), inst) for i in range(inst.n_legs))

    def __len__(self) -> int:
        return len(self._columns)

    def __contains__(self, mask: int) -> bool:
        return mask in self._masks

    def add(self, cols: Iterable[Column]) -> int:
        added = 0
        with self._lock:
            for c in cols:
                if c.mask in self._masks:
                    continue
                if self.max_columns is not None and len(self._columns) >= self.max_columns:
                    if not self.full:
                        log.warning("column store reached %d columns; new columns are dropped", self.max_columns)
                    self.full = True
                    break
                self._masks.add(c.mask)
                self._by_low.setdefault(c.legs[0], []).append(len(self._columns))
                self._columns.append(c)
                added += 1
            if added:
                self.generation += 1
        return added

    def update(self, generated: Iterable[Column], best: Iterable[Column]) -> int:
        """Add the repair's best shifts (policy best) or all its columns (policy full)."""
        return self.add(best if self.policy == "best" else generated)

    def snapshot(self) -> tuple[int, list[Column]]:
        with self._lock:
            return self.generation, list(self._columns)

    def columns(self) -> list[Column]:
        return self.snapshot()[1]

    def subset_columns(self, legs: Iterable[int]) -> list[Column]:
        """Stored columns whose legs all lie in ``legs`` (full-instance indices)."""
        legs = sorted(set(legs))
        allowed = mask_of(legs)
        with self._lock:
            cols = self._columns
            out_idx = []
            for low in legs:
                for k in self._by_low.get(low, ()):
                    if cols[k].mask & ~allowed == 0:
                        out_idx.append(k)
            out_idx.sort()
            return [cols[k] for k in out_idx]


def reindex(col: Column, source: Instance, target: Instance) -> Column:
    legs = tuple(sorted(target.index_of(source.legs[i].id) for i in col.legs))
    return Column(legs, mask_of(legs), col.cost)


def init_subproblem_columns(store: ColumnStore, sub: Instance) -> list[Column]:
    """Stored columns inside the sub-instance's legs, re-indexed to it."""
    full = store.inst
    legs = [full.index_of(l.id) for l in sub.legs]
    return [reindex(c, full, sub) for c in store.subset_columns(legs)]


def merge_best(s_new: Solution | None, s_bsf: Solution, s_bg: Solution | None = None) -> Solution:
    """Minimum-objective solution; on ties the incumbent is kept."""
    best = s_bsf
    for cand in (s_new, s_bg):
        if cand is not None and cand.objective < best.objective:
            best = cand
    return best


class BackgroundWorker:
    """Repeated integer-master solves over store snapshots.

    ``start`` runs cycles on a daemon thread; without it, call ``cycle`` at
    iteration boundaries for a deterministic single-threaded schedule.
    """

    def __init__(
        self,
        store: ColumnStore,
        timeout: float = 60.0,
        backend: str = "highs",
        node_limit: int | None = None,
        clock=None,
        deadline: Deadline | None = None,
    ):
        self.store = store
        self.deadline = deadline  # cycles never run past it
        self.inst = store.inst
        self.timeout = timeout
        self.backend = make_backend(backend)
        self.node_limit = node_limit
        self.clock = clock or WallClock()
        self._lock = threading.Lock()
        self._best: Solution | None = None
        self._best_cols: list[Column] | None = None
        self._seen_generation = -1
        self.cycles = 0
        self.skipped = 0
        self.history: list[tuple[float, int]] = []
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        self.error: BaseException | None = None

    def latest(self) -> Solution | None:
        with self._lock:
            return self._best

    def offer(self, sol: Solution) -> None:
        """Use ``sol`` as warm start if better than the published result."""
        cols = [Column.of([self.inst.index_of(i) for i in s], self.inst) for s in sol.shifts]
        self.store.add(cols)
        with self._lock:
            if self._best is None or sol.objective < self._best.objective:
                self._best, self._best_cols = sol, cols

    def cycle(self, snapshot: tuple[int, Sequence[Column]] | None = None) -> Solution | None:
        generation, cols = snapshot if snapshot is not None else self.store.snapshot()
        if generation == self._seen_generation:
            self.skipped += 1
            return self.latest()
        self._seen_generation = generation
        pool = ColumnPool(cols)
        with self._lock:
            warm = self._best_cols
        if warm is not None and not all(c.mask in pool for c in warm):
            warm = None
        if self.node_limit is not None:
            limits = {"node_limit": self.node_limit}
        elif self.deadline is not None:
            limits = {"timeout": min(self.timeout, max(self.deadline.remaining(), 0.05))}
        else:
            limits = {"timeout": self.timeout}
        res = solve_integer(pool, self.inst, warm_start=warm, backend=self.backend, **limits)
        self.clock.charge(len(pool) * 10)
        self.cycles += 1
        with self._lock:
            if self._best is None or res.solution.objective < self._best.objective:
                self._best, self._best_cols = res.solution, res.columns
            self.history.append((self.clock.now(), self._best.objective))
            return self._best

    def _run(self):
        try:
            while not self._stop.is_set():
                if self.deadline is not None and self.deadline.expired():
                    break
                before = self.skipped
                self.cycle()
                if self.skipped != before:
                    self._stop.wait(0.05)
        except BaseException as exc:  # surfaced to the caller by stop()
            self.error = exc

    def start(self) -> None:
        self._thread = threading.Thread(target=self._run, name="bdsp-background", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join()
            self._thread = None
        if self.error is not None:
            raise RuntimeError("background worker failed") from self.error


def background_cycle(worker: BackgroundWorker, snapshot: tuple[int, Sequence[Column]] | None = None) -> Solution | None:
    return worker.cycle(snapshot)


@dataclass(frozen=True)
class Variant:
    name: str
    reuse: bool = False
    background: bool = False
    policy: str = "best"
    algorithm: str = "lns"  # lns | bp


VARIANTS = {
    "lns": Variant("lns"),
    "lns+r(b)": Variant("lns+r(b)", reuse=True, policy="best"),
    "lns+r(f)": Variant("lns+r(f)", reuse=True, policy="full"),
    "lns+b(b)": Variant("lns+b(b)", background=True, policy="best"),
    "lns+b(f)": Variant("lns+b(f)", background=True, policy="full"),
    "lns+rb(b)": Variant("lns+rb(b)", reuse=True, background=True, policy="best"),
    "lns+rb(f)": Variant("lns+rb(f)", reuse=True, background=True, policy="full"),
    "bp": Variant("bp", algorithm="bp"),
    "bp+b": Variant("bp+b", background=True, policy="full", algorithm="bp"),
}


def variant(name: str) -> Variant:
    try:
        return VARIANTS[name]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; choose from {', '.join(VARIANTS)}") from None
