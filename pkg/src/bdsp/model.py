"""Problem data, the shift-evaluation oracle, objective, and greedy construction.

All times are integer minutes since midnight and all costs are integers, so
every comparison in the solver stack is exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Iterable, Sequence


@dataclass(frozen=True)
class RulesConfig:
    """Austrian regional-line rule constants and objective weights (minutes)."""

    drive_max: int = 540
    span_max: int = 840
    work_max: int = 600
    work_min: int = 390
    drive_block_max: int = 240
    split_min: int = 180
    unpaid_edge: int = 120
    centered_edge: int = 180
    unpaid_cap_centered: int = 90
    unpaid_cap_uncentered: int = 60
    rest_part_min: int = 15
    rest_long_part: int = 30
    rest_first_deadline: int = 360
    rest_tier_long: int = 540
    rest_required_long: int = 45
    break_one: int = 30
    break_two: int = 20
    break_three: int = 15
    weight_work: int = 2
    weight_span: int = 1
    weight_ride: int = 1
    weight_change: int = 30
    weight_split: int = 180

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ValueError(f"rule {f.name} must be positive")
        if self.work_min > self.work_max:
            raise ValueError("work_min must not exceed work_max")
        if self.unpaid_cap_uncentered > self.unpaid_cap_centered:
            raise ValueError("uncentered unpaid cap exceeds centered cap")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class Leg:
    id: int
    tour: int
    start_pos: int
    end_pos: int
    start: int
    end: int

    @property
    def drive(self) -> int:
        return self.end - self.start

    @property
    def order_key(self) -> tuple[int, int]:
        return (self.start, self.tour)


class InstanceError(ValueError):
    pass


class PartitionError(ValueError):
    def __init__(self, missing: Sequence[int], duplicated: Sequence[int], unknown: Sequence[int] = ()):
        self.missing = sorted(missing)
        self.duplicated = sorted(duplicated)
        self.unknown = sorted(unknown)
        parts = []
        if self.missing:
            parts.append(f"missing legs {self.missing}")
        if self.duplicated:
            parts.append(f"duplicated legs {self.duplicated}")
        if self.unknown:
            parts.append(f"unknown legs {self.unknown}")
        super().__init__("not a partition: " + "; ".join(parts))


@dataclass(frozen=True)
class Instance:
    """Immutable BDSP instance. ``legs`` is sorted by (start, tour)."""

    distance: tuple[tuple[int, ...], ...]
    start_work: tuple[int, ...]
    end_work: tuple[int, ...]
    legs: tuple[Leg, ...]
    rules: RulesConfig = field(default_factory=RulesConfig)
    no_transfer: int = 10**6
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "distance", tuple(tuple(int(v) for v in row) for row in self.distance))
        object.__setattr__(self, "start_work", tuple(int(v) for v in self.start_work))
        object.__setattr__(self, "end_work", tuple(int(v) for v in self.end_work))
        object.__setattr__(self, "legs", tuple(sorted(self.legs, key=lambda l: l.order_key)))
        self._validate()
        object.__setattr__(self, "_index", {leg.id: i for i, leg in enumerate(self.legs)})

    def _validate(self):
        n = len(self.distance)
        if any(len(row) != n for row in self.distance):
            raise InstanceError("distance matrix must be square")
        if len(self.start_work) != n or len(self.end_work) != n:
            raise InstanceError("start_work/end_work need one entry per position")
        if any(v < 0 for row in self.distance for v in row):
            raise InstanceError("negative distance")
        ids = set()
        keys = set()
        for leg in self.legs:
            if leg.id in ids:
                raise InstanceError(f"duplicate leg id {leg.id}")
            ids.add(leg.id)
            if leg.order_key in keys:
                raise InstanceError(f"leg {leg.id}: (start, tour) not unique")
            keys.add(leg.order_key)
            if leg.end <= leg.start:
                raise InstanceError(f"leg {leg.id}: end must be after start")
            if not (0 <= leg.start_pos < n and 0 <= leg.end_pos < n):
                raise InstanceError(f"leg {leg.id}: position out of range")
        by_tour: dict[int, list[Leg]] = {}
        for leg in self.legs:
            by_tour.setdefault(leg.tour, []).append(leg)
        for tour, legs in by_tour.items():
            for a, b in zip(legs, legs[1:]):
                if b.start < a.end:
                    raise InstanceError(f"tour {tour}: legs {a.id} and {b.id} overlap")

    @property
    def n_positions(self) -> int:
        return len(self.distance)

    @property
    def n_legs(self) -> int:
        return len(self.legs)

    @property
    def tours(self) -> list[int]:
        return sorted({leg.tour for leg in self.legs})

    def index_of(self, leg_id: int) -> int:
        return self._index[leg_id]

    def leg(self, leg_id: int) -> Leg:
        return self.legs[self._index[leg_id]]

    def has_leg(self, leg_id: int) -> bool:
        return leg_id in self._index

    def order(self, leg_ids: Iterable[int]) -> list[int]:
        """Sort leg ids by the total order of the instance."""
        return sorted(leg_ids, key=self._index.__getitem__)

    def subinstance(self, leg_ids: Iterable[int], name: str = "") -> "Instance":
        keep = set(leg_ids)
        return replace(self, legs=tuple(l for l in self.legs if l.id in keep), name=name or self.name)


def can_chain(inst: Instance, a: Leg, b: Leg) -> bool:
    """Whether leg ``b`` may directly follow leg ``a`` in one shift."""
    if b.order_key <= a.order_key:
        return False
    if a.tour == b.tour and a.end_pos == b.start_pos:
        return b.start >= a.end
    d = inst.distance[a.end_pos][b.start_pos]
    if d >= inst.no_transfer:
        return False
    return b.start >= a.end + d


@dataclass(frozen=True)
class ShiftEvaluation:
    feasible: bool
    reason: str | None = None
    drive: int = 0
    span: int = 0
    work: int = 0
    paid: int = 0
    ride: int = 0
    changes: int = 0
    splits: int = 0
    split_time: int = 0
    unpaid: int = 0
    rest: int = 0
    cost: int = 0

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _infeasible(reason: str) -> ShiftEvaluation:
    return ShiftEvaluation(False, reason)


def _overlap(a: int, b: int, lo: int, hi: int) -> int:
    return min(b, hi) - max(a, lo)


def evaluate_shift(legs: Sequence[Leg], inst: Instance) -> ShiftEvaluation:
    """Simulate one driver's day over ``legs`` and return its evaluation.

    Never raises for rule violations; the first violated rule is named in
    ``reason``. Possible reasons: empty, order, chaining, drive_block,
    drive_total, span, work_max, rest_first_part, rest_long, rest_long_part.
    """
    R = inst.rules
    if not legs:
        return _infeasible("empty")
    for a, b in zip(legs, legs[1:]):
        if b.order_key <= a.order_key:
            return _infeasible("order")
        if not can_chain(inst, a, b):
            return _infeasible("chaining")

    first, last = legs[0], legs[-1]
    start_work = inst.start_work[first.start_pos]
    end_work = inst.end_work[last.end_pos]
    shift_start = first.start - start_work
    last_end = last.end

    # gap records: (end_i, length, ride, change, split, remain, rest)
    gaps = []
    for a, b in zip(legs, legs[1:]):
        length = b.start - a.end
        ride = inst.distance[a.end_pos][b.start_pos] if a.end_pos != b.start_pos else 0
        change = int(a.tour != b.tour)
        split = int(length - ride >= R.split_min)
        remain = 0 if split else length - ride
        rest = remain if remain >= R.rest_part_min else 0
        gaps.append((a.end, length, ride, change, split, remain, rest))

    # driving blocks
    block = legs[0].drive
    n15 = n20 = 0
    if block > R.drive_block_max:
        return _infeasible("drive_block")
    for (_, length, *_), b in zip(gaps, legs[1:]):
        done = (
            length >= R.break_one
            or (length >= R.break_two and n20 >= 1)
            or (length >= R.break_three and n15 >= 2)
        )
        if done:
            block, n15, n20 = b.drive, 0, 0
        else:
            block += b.drive
            n15 += length >= R.break_three
            n20 += length >= R.break_two
        if block > R.drive_block_max:
            return _infeasible("drive_block")

    drive = sum(l.drive for l in legs)
    if drive > R.drive_max:
        return _infeasible("drive_total")
    span = last_end + end_work - shift_start
    if span > R.span_max:
        return _infeasible("span")

    # rest parts are assumed to start right at the end of the preceding leg
    eligible = []
    has_long = has_centered = False
    for end_i, _, _, _, _, _, rest in gaps:
        if rest == 0:
            continue
        if rest >= R.rest_long_part:
            has_long = True
        inner = _overlap(end_i, end_i + rest, shift_start + R.unpaid_edge, last_end - R.unpaid_edge)
        eligible.append(inner if inner >= R.rest_part_min else 0)
        centered = _overlap(end_i, end_i + rest, shift_start + R.centered_edge, last_end - R.centered_edge)
        if centered >= R.rest_long_part:
            has_centered = True
    if has_centered:
        cap = R.unpaid_cap_centered
    elif has_long:
        cap = R.unpaid_cap_uncentered
    else:
        cap = 0

    # prefix working time after each leg, unpaid accumulated under the final cap
    worked = start_work + legs[0].drive
    unpaid = 0
    rest_total = 0
    split_time = 0
    k = 0
    if worked >= R.rest_first_deadline and rest_total < R.rest_part_min:
        return _infeasible("rest_first_part")
    for (_, length, ride, _, split, remain, rest), b in zip(gaps, legs[1:]):
        worked += remain + ride + b.drive
        if split:
            split_time += length - ride
        if rest:
            unpaid = min(unpaid + eligible[k], cap)
            rest_total += rest
            k += 1
        if worked - unpaid > R.work_max:
            return _infeasible("work_max")
        if worked - unpaid >= R.rest_first_deadline and rest_total < R.rest_part_min:
            return _infeasible("rest_first_part")
    worked += end_work
    work = worked - unpaid
    if work > R.work_max:
        return _infeasible("work_max")
    if work >= R.rest_first_deadline and rest_total < R.rest_part_min:
        return _infeasible("rest_first_part")
    if work > R.rest_tier_long and rest_total < R.rest_required_long:
        return _infeasible("rest_long")
    if work >= R.rest_first_deadline and not has_long:
        return _infeasible("rest_long_part")
    assert work == span - unpaid - split_time

    ride = sum(g[2] for g in gaps)
    changes = sum(g[3] for g in gaps)
    splits = sum(g[4] for g in gaps)
    paid = max(work, R.work_min)
    cost = (
        R.weight_work * paid
        + R.weight_span * span
        + R.weight_ride * ride
        + R.weight_change * changes
        + R.weight_split * splits
    )
    return ShiftEvaluation(
        True, None, drive, span, work, paid, ride, changes, splits, split_time, unpaid, rest_total, cost
    )


def evaluate_ids(leg_ids: Iterable[int], inst: Instance) -> ShiftEvaluation:
    return evaluate_shift([inst.leg(i) for i in inst.order(leg_ids)], inst)


@dataclass
class Solution:
    """A set partition of the legs; each shift is an ordered tuple of leg ids."""

    shifts: list[tuple[int, ...]]
    objective: int
    evaluations: list[ShiftEvaluation]

    @property
    def n_shifts(self) -> int:
        return len(self.shifts)


def validate_partition(shifts: Iterable[Iterable[int]], inst: Instance) -> None:
    seen: set[int] = set()
    dup: set[int] = set()
    unknown: set[int] = set()
    for shift in shifts:
        for leg_id in shift:
            if not inst.has_leg(leg_id):
                unknown.add(leg_id)
            elif leg_id in seen:
                dup.add(leg_id)
            seen.add(leg_id)
    missing = {l.id for l in inst.legs} - seen
    if missing or dup or unknown:
        raise PartitionError(missing, dup, unknown)


class InfeasibleShiftError(ValueError):
    def __init__(self, shift: Sequence[int], reason: str):
        self.shift = tuple(shift)
        self.reason = reason
        super().__init__(f"shift {list(shift)} infeasible: {reason}")


def evaluate_solution(shifts: Iterable[Iterable[int]], inst: Instance) -> Solution:
    """Check the partition, evaluate every shift, and sum the objective."""
    shifts = [tuple(inst.order(s)) for s in shifts]
    validate_partition(shifts, inst)
    evals = []
    for s in shifts:
        ev = evaluate_ids(s, inst)
        if not ev.feasible:
            raise InfeasibleShiftError(s, ev.reason)
        evals.append(ev)
    return Solution(shifts, sum(e.cost for e in evals), evals)


def gap(z: float, z_bks: float) -> float:
    """Relative gap in percent to a best-known objective."""
    if z_bks <= 0:
        raise ValueError("best-known objective must be positive")
    return 100.0 * (z - z_bks) / z_bks


GREEDY_NEW_SHIFT_MARGIN = 500


def greedy_construct(inst: Instance) -> Solution:
    """Insert legs in order at the cheapest feasible shift end.

    A new shift is opened when no append is feasible, or when a new shift
    costs at most 500 more than the cheapest append.
    """
    shifts: list[list[Leg]] = []
    costs: list[int] = []
    for leg in inst.legs:
        single = evaluate_shift([leg], inst)
        if not single.feasible:
            raise InstanceError(f"leg {leg.id} cannot form a feasible shift ({single.reason})")
        best_idx, best_inc = -1, math.inf
        for idx, shift in enumerate(shifts):
            if not can_chain(inst, shift[-1], leg):
                continue
            ev = evaluate_shift(shift + [leg], inst)
            if ev.feasible and ev.cost - costs[idx] < best_inc:
                best_idx, best_inc = idx, ev.cost - costs[idx]
        if best_idx < 0 or single.cost - best_inc <= GREEDY_NEW_SHIFT_MARGIN:
            shifts.append([leg])
            costs.append(single.cost)
        else:
            shifts[best_idx].append(leg)
            costs[best_idx] += best_inc
    return evaluate_solution([[l.id for l in s] for s in shifts], inst)


def singleton_solution(inst: Instance) -> Solution:
    return evaluate_solution([[l.id] for l in inst.legs], inst)
