"""Shared oracles: exhaustive shift enumeration and best set partition.

These only use the rule checker (``evaluate_shift``/``can_chain``) and
plain recursion, never the pricing graph or the master LP.
"""
from __future__ import annotations

import os
from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

from bdsp.model import Instance, Leg, RulesConfig, can_chain, evaluate_shift

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def chains(inst: Instance) -> list[tuple[int, ...]]:
    """Every chainable leg sequence (leg indices), feasible or not."""
    legs = inst.legs
    out: list[tuple[int, ...]] = []

    def walk(acc):
        out.append(tuple(acc))
        last = legs[acc[-1]]
        for k in range(acc[-1] + 1, len(legs)):
            if can_chain(inst, last, legs[k]):
                acc.append(k)
                walk(acc)
                acc.pop()

    for i in range(len(legs)):
        walk([i])
    return out


def feasible_shifts(inst: Instance) -> dict[tuple[int, ...], int]:
    """Feasible leg index sequences mapped to their oracle cost."""
    out = {}
    for c in chains(inst):
        ev = evaluate_shift([inst.legs[i] for i in c], inst)
        if ev.feasible:
            out[c] = ev.cost
    return out


def best_partition(n_legs: int, columns: dict[tuple[int, ...], int]) -> float:
    """Cheapest exact cover of legs 0..n-1 by the given columns (inf if none)."""
    full = (1 << n_legs) - 1
    by_low: dict[int, list[tuple[int, int]]] = {}
    for legs, cost in columns.items():
        mask = 0
        for i in legs:
            mask |= 1 << i
        by_low.setdefault(min(legs), []).append((mask, cost))

    @lru_cache(maxsize=None)
    def f(covered: int) -> float:
        if covered == full:
            return 0
        low = (~covered & (covered + 1)).bit_length() - 1
        best = float("inf")
        for mask, cost in by_low.get(low, ()):
            if not mask & covered:
                best = min(best, cost + f(covered | mask))
        return best

    return f(0)


def depot_instance(legs, distance=None, start_work=15, end_work=10, rules=None, no_transfer=10**6) -> Instance:
    """Instance over positions 0..n-1 with position 0 as the depot."""
    if distance is None:
        n = 1 + max(max(l.start_pos, l.end_pos) for l in legs) if legs else 1
        distance = [[0 if a == b else 10 for b in range(n)] for a in range(n)]
    n = len(distance)
    sw = [start_work] + [0] * (n - 1)
    ew = [end_work] + [0] * (n - 1)
    return Instance(distance, sw, ew, tuple(legs), rules or RulesConfig(), no_transfer)


def leg(id, start, end, tour=0, start_pos=0, end_pos=0) -> Leg:
    return Leg(id, tour, start_pos, end_pos, start, end)


@pytest.fixture
def tmp_instance_path(tmp_path):
    from bdsp.generate import generate_instance
    from bdsp.io import write_instance

    path = tmp_path / "inst.json"
    write_instance(generate_instance(1, 3), path)
    return path


def label_paths(graph, variant, duals=None):
    """Every complete label of one variant by exhaustive extension (no
    dominance, no bounds): list of (leg tuple, final reduced cost)."""
    from bdsp.rcspp import extend_label, initial_label
    from bdsp.rcspp.graph import SINK_NODE

    inst = graph.inst
    R = inst.rules
    duals = duals or [0] * inst.n_legs
    w = R.weight_work + R.weight_span
    res = []

    def walk(lab, v):
        for h, arc in graph.out[v]:
            if not variant.admits(arc, R):
                continue
            li = graph.node_leg[h]
            drive = inst.legs[li].drive if li >= 0 else 0
            dual = duals[li] if li >= 0 else 0
            y = extend_label(lab, h, arc, graph.node_end[h], drive, w * drive, dual, variant, R)
            if y is None:
                continue
            if h == SINK_NODE:
                res.append((lab.legs(), y.final))
            else:
                walk(y, h)

    walk(initial_label(), 0)
    return res


ACCEPTANCE: list[str] = []  # one verdict line per acceptance criterion


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
