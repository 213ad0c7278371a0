"""JSON instance and solution files, the independent verifier, and a
best-effort converter for tabular benchmark exports.

Instance file::

    {"format": "bdsp-instance", "version": 1, "name": "...",
     "no_transfer": 1000000,
     "distance": [[0, 12], [12, 0]],      # minutes; no_transfer forbids the move
     "start_work": [15, 0], "end_work": [10, 0],
     "legs": [{"id": 0, "tour": 0, "start_pos": 0, "end_pos": 1, "start": 400, "end": 430}, ...],
     "rules": {"work_min": 390, ...}}    # optional overrides
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

from .model import Instance, InstanceError, Leg, RulesConfig, Solution, evaluate_shift

INSTANCE_FORMAT = "bdsp-instance"
SOLUTION_FORMAT = "bdsp-solution"
LEG_FIELDS = ("id", "tour", "start_pos", "end_pos", "start", "end")


class FormatError(ValueError):
    """Parse error pointing at a line (syntax) or a field path (content)."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None, field: str | None = None):
        self.message = message
        self.path = path
        self.line = line
        self.field = field
        where = []
        if path:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field {field}")
        super().__init__(f"{': '.join(where)}: {message}" if where else message)


def _int(value: Any, field: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise FormatError(f"expected an integer, got {value!r}", field=field)
    return value


def _load(path) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, str(path), exc.lineno) from None


def instance_to_dict(inst: Instance) -> dict:
    default = RulesConfig()
    rules = {k: v for k, v in inst.rules.to_dict().items() if getattr(default, k) != v}
    return {
        "format": INSTANCE_FORMAT,
        "version": 1,
        "name": inst.name,
        "no_transfer": inst.no_transfer,
        "distance": [list(r) for r in inst.distance],
        "start_work": list(inst.start_work),
        "end_work": list(inst.end_work),
        "legs": [{f: getattr(l, f) for f in LEG_FIELDS} for l in inst.legs],
        "rules": rules,
    }


def instance_from_dict(data: Any) -> Instance:
    if not isinstance(data, dict):
        raise FormatError("instance document must be an object")
    if data.get("format", INSTANCE_FORMAT) != INSTANCE_FORMAT:
        raise FormatError(f"unexpected format {data.get('format')!r}", field="format")
    for key in ("distance", "start_work", "end_work", "legs"):
        if key not in data:
            raise FormatError("missing", field=key)
    dist = data["distance"]
    if not isinstance(dist, list) or not dist:
        raise FormatError("expected a non-empty matrix", field="distance")
    n = len(dist)
    matrix = []
    for i, row in enumerate(dist):
        if not isinstance(row, list) or len(row) != n:
            raise FormatError(f"expected a row of {n} entries", field=f"distance[{i}]")
        matrix.append([_int(v, f"distance[{i}][{j}]") for j, v in enumerate(row)])
    work = {}
    for key in ("start_work", "end_work"):
        vals = data[key]
        if not isinstance(vals, list) or len(vals) != n:
            raise FormatError(f"expected {n} entries", field=key)
        work[key] = [_int(v, f"{key}[{i}]") for i, v in enumerate(vals)]
    legs = []
    if not isinstance(data["legs"], list):
        raise FormatError("expected a list", field="legs")
    for k, rec in enumerate(data["legs"]):
        if not isinstance(rec, dict):
            raise FormatError("expected an object", field=f"legs[{k}]")
        vals = {}
        for f in LEG_FIELDS:
            if f not in rec:
                raise FormatError("missing", field=f"legs[{k}].{f}")
            vals[f] = _int(rec[f], f"legs[{k}].{f}")
        for f in ("start_pos", "end_pos"):
            if not 0 <= vals[f] < n:
                raise FormatError(f"position {vals[f]} outside 0..{n - 1}", field=f"legs[{k}].{f}")
        if vals["end"] <= vals["start"]:
            raise FormatError("end must be after start", field=f"legs[{k}].end")
        legs.append(Leg(**vals))
    overrides = data.get("rules") or {}
    if not isinstance(overrides, dict):
        raise FormatError("expected an object", field="rules")
    names = {f.name for f in fields(RulesConfig)}
    for key, v in overrides.items():
        if key not in names:
            raise FormatError("unknown rule", field=f"rules.{key}")
        _int(v, f"rules.{key}")
    try:
        rules = RulesConfig(**overrides)
        return Instance(
            matrix, work["start_work"], work["end_work"], tuple(legs), rules,
            _int(data.get("no_transfer", 10**6), "no_transfer"), str(data.get("name", "")),
        )
    except (InstanceError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(str(exc)) from None


def dumps_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1) + "\n"


def write_instance(inst: Instance, path) -> None:
    Path(path).write_text(dumps_instance(inst))


def read_instance(path) -> Instance:
    try:
        return instance_from_dict(_load(path))
    except FormatError as exc:
        if exc.path is None:
            raise FormatError(exc.message, str(path), exc.line, exc.field) from None
        raise


def solution_to_dict(sol: Solution, inst: Instance, meta: dict | None = None) -> dict:
    return {
        "format": SOLUTION_FORMAT,
        "version": 1,
        "instance": inst.name,
        "objective": sol.objective,
        "shifts": [{"legs": list(s), "evaluation": e.to_dict()} for s, e in zip(sol.shifts, sol.evaluations)],
        **({"meta": meta} if meta else {}),
    }


def write_solution(sol: Solution, inst: Instance, path, meta: dict | None = None) -> None:
    Path(path).write_text(json.dumps(solution_to_dict(sol, inst, meta), indent=1) + "\n")


@dataclass
class SolutionFile:
    shifts: list[list[int]]
    objective: int | None


def read_solution(path) -> SolutionFile:
    data = _load(path)
    if not isinstance(data, dict) or not isinstance(data.get("shifts"), list):
        raise FormatError("expected an object with a shifts list", str(path), field="shifts")
    shifts = []
    for k, rec in enumerate(data["shifts"]):
        legs = rec.get("legs") if isinstance(rec, dict) else rec
        if not isinstance(legs, list) or not legs:
            raise FormatError("expected a non-empty leg list", str(path), field=f"shifts[{k}].legs")
        shifts.append([_int(v, f"shifts[{k}].legs") for v in legs])
    obj = data.get("objective")
    if obj is not None:
        obj = _int(obj, "objective")
    return SolutionFile(shifts, obj)


@dataclass
class VerifyReport:
    ok: bool
    reason: str | None = None
    detail: str = ""
    objective: int | None = None

    def __str__(self) -> str:
        if self.ok:
            return f"PASS objective={self.objective}"
        return f"FAIL({self.reason}) {self.detail}".rstrip()


def verify(inst: Instance, shifts: list[list[int]], claimed: int | None) -> VerifyReport:
    """Check the partition and every shift with the oracle, in the order given."""
    seen: dict[int, int] = {}
    for k, shift in enumerate(shifts):
        for leg_id in shift:
            if not inst.has_leg(leg_id):
                return VerifyReport(False, "unknown leg", f"shift {k} lists leg {leg_id}")
            if leg_id in seen:
                return VerifyReport(False, "duplicated leg", f"leg {leg_id} in shifts {seen[leg_id]} and {k}")
            seen[leg_id] = k
    missing = [l.id for l in inst.legs if l.id not in seen]
    if missing:
        return VerifyReport(False, "missing leg", f"legs {missing[:10]} uncovered")
    total = 0
    for k, shift in enumerate(shifts):
        ev = evaluate_shift([inst.leg(i) for i in shift], inst)
        if not ev.feasible:
            return VerifyReport(False, ev.reason, f"shift {k} {shift}")
        total += ev.cost
    if claimed is not None and claimed != total:
        return VerifyReport(False, "objective mismatch", f"claimed {claimed}, recomputed {total}", total)
    return VerifyReport(True, objective=total)


def convert_tabular(legs_csv, distance_csv, positions_csv, name: str = "", no_transfer: int = 10**6) -> Instance:
    """Build an instance from three CSV exports.

    ``legs_csv``: header tour,start_pos,end_pos,start,end[,id];
    ``distance_csv``: square matrix without header, empty cells forbidden;
    ``positions_csv``: header position,start_work,end_work.
    The public benchmark files are not in a documented format, so this is
    the adapter point for them.
    """
    with open(distance_csv, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    dist = [[no_transfer if c.strip() == "" else int(c) for c in r] for r in rows]
    n = len(dist)
    sw, ew = [0] * n, [0] * n
    with open(positions_csv, newline="") as fh:
        for line, rec in enumerate(csv.DictReader(fh), start=2):
            try:
                p = int(rec["position"])
                sw[p], ew[p] = int(rec["start_work"]), int(rec["end_work"])
            except (KeyError, ValueError, IndexError) as exc:
                raise FormatError(str(exc), str(positions_csv), line) from None
    legs = []
    with open(legs_csv, newline="") as fh:
        for line, rec in enumerate(csv.DictReader(fh), start=2):
            try:
                legs.append(Leg(int(rec.get("id") or len(legs)), int(rec["tour"]), int(rec["start_pos"]),
                                int(rec["end_pos"]), int(rec["start"]), int(rec["end"])))
            except (KeyError, ValueError) as exc:
                raise FormatError(str(exc), str(legs_csv), line) from None
    return Instance(dist, sw, ew, tuple(legs), RulesConfig(), no_transfer, name)
