"""Label-setting pricing over the three graph variants."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from ..model import Instance
from .dominance import KDStore, second_pass
from .graph import SINK_NODE, SOURCE_NODE, PricingGraph, pricing_graph
from .labels import VARIANTS, Variant, dominance_key, dominates, extend_label, initial_label


@dataclass
class PricingConfig:
    columns_per_variant: int = 1000
    quotas: tuple[int, int, int] = (10, 100, 1000)
    throttle_start: int = 100
    throttle_factor: int = 2
    throttle: bool = True
    dominance: str = "kd"  # kd | naive | none
    mode: str = "strengthened"  # strengthened | base
    cost_bound: bool = True
    tolerance: float = 1e-6
    engine: str = "auto"  # auto | python | compiled; auto compiles kd pricing with float duals

    def __post_init__(self):
        if self.engine not in ("auto", "python", "compiled"):
            raise ValueError("engine is auto, python or compiled")
        if self.engine == "compiled" and (self.dominance != "kd" or self.mode != "strengthened"):
            raise ValueError("the compiled engine implements strengthened k-d dominance only")


@dataclass
class PricedColumn:
    legs: tuple[int, ...]  # leg indices of the priced instance
    reduced_cost: float
    variant: Variant


@dataclass
class PricingStats:
    created: int = 0
    expanded: int = 0
    bound_pruned: int = 0


class Throttle:
    """Arc-cost cap on leg-to-leg arcs: start, start*f, start*f^2, ... until all arcs fit."""

    def __init__(self, max_cost: int, start: int = 100, factor: int = 2, enabled: bool = True):
        self.start = start
        self.factor = factor
        self.max_cost = max_cost
        self.cap = start if enabled else math.inf

    @property
    def full(self) -> bool:
        return self.cap >= self.max_cost

    def escalate(self) -> None:
        if not self.full:
            self.cap *= self.factor

    def reset(self) -> None:
        if math.isfinite(self.cap):
            self.cap = self.start


def admitted_arcs(
    graph: PricingGraph, variant: Variant, arc_cap: float, forbidden: frozenset | set = frozenset()
) -> list[list]:
    rules = graph.inst.rules
    out = []
    for arcs in graph.out:
        keep = []
        for head, arc in arcs:
            if arc.inner and arc.cost > arc_cap:
                continue
            if not variant.admits(arc, rules):
                continue
            if forbidden and (arc.tail, arc.head) in forbidden:
                continue
            keep.append((head, arc))
        out.append(keep)
    return out


def _node_data(graph: PricingGraph, duals: Sequence[float]):
    legs = graph.inst.legs
    w = graph.inst.rules.weight_work + graph.inst.rules.weight_span
    drive, ncost, dual = [], [], []
    for leg in graph.node_leg:
        if leg >= 0:
            drive.append(legs[leg].drive)
            ncost.append(w * legs[leg].drive)
            dual.append(duals[leg])
        else:
            drive.append(0)
            ncost.append(0)
            dual.append(0)
    return drive, ncost, dual


def cost_bound(graph: PricingGraph, duals: Sequence[float], adm: list[list] | None = None) -> list[float]:
    """Backward resource-free bound: B(t) = 0, B(i) = max_j B(j) - rc(i, j).

    -B(i) is the cheapest completion from i to the sink; -inf marks nodes
    without an admitted route to the sink.
    """
    if adm is None:
        adm = graph.out
    _, ncost, dual = _node_data(graph, duals)
    B = [-math.inf] * graph.n_nodes
    B[SINK_NODE] = 0
    order = list(range(graph.n_nodes - 1, 1, -1)) + [SOURCE_NODE]
    for v in order:
        best = -math.inf
        for head, arc in adm[v]:
            val = B[head] - (arc.cost + ncost[head] - dual[head])
            if val > best:
                best = val
        B[v] = best
    return B


def label_setting(
    graph: PricingGraph,
    duals: Sequence[float],
    variant: Variant,
    arc_cap: float = math.inf,
    forbidden: frozenset | set = frozenset(),
    config: PricingConfig | None = None,
    stats: PricingStats | None = None,
    limit: int | None = None,
) -> tuple[list[PricedColumn], float]:
    """Negative reduced-cost columns of one variant, and the minimum reduced
    cost seen at the sink (inf when no feasible sink label survived)."""
    cfg = config or PricingConfig()
    stats = stats if stats is not None else PricingStats()
    rules = graph.inst.rules
    tol = cfg.tolerance
    adm = admitted_arcs(graph, variant, arc_cap, forbidden)
    drive, ncost, dual = _node_data(graph, duals)
    node_end = graph.node_end
    slack = rules.weight_work * variant.cap(rules)
    bound = cost_bound(graph, duals, adm) if cfg.cost_bound else None
    mode = cfg.dominance
    strengthened = cfg.mode == "strengthened"
    if mode == "kd" and not strengthened:
        raise ValueError("k-d dominance store needs the strengthened criterion")

    n = graph.n_nodes
    stores: list = [None] * n
    stores[SOURCE_NODE] = [initial_label()]
    best: dict[tuple[int, ...], float] = {}
    min_rc = math.inf

    for v in range(n):
        if v == SINK_NODE:
            continue
        store = stores[v]
        if store is None:
            continue
        stores[v] = None
        if v == SOURCE_NODE or mode == "none":
            labels = store
        elif mode == "kd":
            labels = [lab for bucket in store.values() for _, lab in second_pass(bucket)]
        else:
            labels = store
        stats.expanded += len(labels)
        for lab in labels:
            for head, arc in adm[v]:
                y = extend_label(lab, head, arc, node_end[head], drive[head], ncost[head], dual[head], variant, rules)
                if y is None:
                    continue
                stats.created += 1
                if head == SINK_NODE:
                    rc = y.final
                    if rc < min_rc:
                        min_rc = rc
                    if rc < -tol:
                        key = lab.legs()
                        if rc < best.get(key, math.inf):
                            best[key] = rc
                    continue
                if bound is not None and y.cost + rules.weight_work * y.u - slack - bound[head] >= -tol:
                    stats.bound_pruned += 1
                    continue
                target = stores[head]
                if mode == "kd":
                    if target is None:
                        target = stores[head] = {}
                    bucket, vec = dominance_key(y, variant, rules)
                    tree = target.get(bucket)
                    if tree is None:
                        tree = target[bucket] = KDStore(len(vec))
                    tree.add(vec, y)
                elif mode == "naive":
                    if target is None:
                        target = stores[head] = []
                    if any(dominates(x, y, variant, rules, cfg.mode) for x in target):
                        continue
                    target[:] = [x for x in target if not dominates(y, x, variant, rules, cfg.mode)]
                    target.append(y)
                else:
                    if target is None:
                        target = stores[head] = []
                    target.append(y)

    cols = sorted(best.items(), key=lambda kv: (kv[1], kv[0]))
    if limit is not None:
        cols = cols[:limit]
    return [PricedColumn(legs, rc, variant) for legs, rc in cols], min_rc


def compiled_label_setting(
    arrays,
    duals: Sequence[float],
    variant: Variant,
    arc_cap: float = math.inf,
    config: PricingConfig | None = None,
    stats: PricingStats | None = None,
    limit: int | None = None,
) -> tuple[list[PricedColumn], float]:
    """Same contract as ``label_setting`` on a ``kernel.GraphArrays`` view
    (its ``forbidden`` mask plays the role of the forbidden pairs)."""
    from . import kernel

    cfg = config or PricingConfig()
    stats = stats if stats is not None else PricingStats()
    ga = arrays
    code = VARIANTS.index(variant)
    rules = ga.rules
    ucap = variant.cap(ga.rules_config)
    ok = kernel._admitted(ga.inner, ga.cost, ga.rest, ga.forbidden, float(arc_cap), code, int(rules[kernel.RL_LONG_PART]))
    ndual = ga.node_duals(duals)
    B = kernel.cost_bound_kernel(ga.n, ga.ptr, ga.head, ga.cost, ga.node_cost, ndual, ok)
    L, preds, rcs, min_rc, created, expanded = kernel.label_setting_kernel(
        ga.n, ga.ptr, ga.head, ga.length, ga.ride, ga.remain, ga.rest, ga.cost, ga.tail_end, ga.inner,
        ga.node_leg, ga.node_end, ga.node_drive, ga.node_cost, ndual, ok, B, cfg.cost_bound, code, ucap,
        rules, cfg.tolerance,
    )
    stats.created += int(created)
    stats.expanded += int(expanded)
    best: dict[tuple[int, ...], float] = {}
    for idx, rc in zip(preds.tolist(), rcs.tolist()):
        key = kernel.decode(L, ga.node_leg, idx)
        if rc < best.get(key, math.inf):
            best[key] = rc
    cols = sorted(best.items(), key=lambda kv: (kv[1], kv[0]))
    if limit is not None:
        cols = cols[:limit]
    return [PricedColumn(legs, rc, variant) for legs, rc in cols], float(min_rc)


@dataclass
class PricingResult:
    columns: list[PricedColumn]
    lower_bound: float  # lower bound on the minimum reduced cost over all shifts
    exact: bool  # every variant solved at full throttle
    cap: float


class Pricer:
    """Owns one pricing graph, its throttle, and the branching arc mask."""

    def __init__(self, inst: Instance, config: PricingConfig | None = None, graph: PricingGraph | None = None):
        self.inst = inst
        self.config = config or PricingConfig()
        self.graph = graph if graph is not None else pricing_graph(inst)
        max_cost = max((a.cost for a in self.graph.arcs.values() if a.inner), default=0)
        self.throttle = Throttle(max_cost, self.config.throttle_start, self.config.throttle_factor, self.config.throttle)
        self.forbidden: set[tuple[int, int]] = set()
        self._arrays = None
        self.expanded = {v: 0 for v in VARIANTS}
        self.created = 0
        self.calls = 0

    def set_forbidden(self, pairs) -> None:
        self.forbidden = set(pairs)
        if self._arrays is not None:
            self._arrays.set_forbidden(self.forbidden)

    def _compiled(self, duals) -> bool:
        cfg = self.config
        if cfg.engine == "python" or cfg.dominance != "kd" or cfg.mode != "strengthened":
            return False
        if cfg.engine == "auto" and any(not isinstance(d, (float, int)) and type(d).__module__ != "numpy" for d in duals):
            return False  # exact rational duals stay on the reference route
        if self._arrays is None:
            from .kernel import GraphArrays

            self._arrays = GraphArrays(self.graph)
            self._arrays.set_forbidden(self.forbidden)
        return True

    def _solve(self, duals, variant, cap, stats):
        cfg = self.config
        if self._compiled(duals):
            return compiled_label_setting(self._arrays, duals, variant, cap, cfg, stats, cfg.columns_per_variant)
        return label_setting(self.graph, duals, variant, cap, self.forbidden, cfg, stats, cfg.columns_per_variant)

    def relaxed_bound(self, duals: Sequence[float], variant: Variant) -> float:
        slack = self.inst.rules.weight_work * variant.cap(self.inst.rules)
        if self._compiled(duals):
            from . import kernel

            ga = self._arrays
            ok = kernel._admitted(ga.inner, ga.cost, ga.rest, ga.forbidden, math.inf, VARIANTS.index(variant),
                                  self.inst.rules.rest_long_part)
            B = kernel.cost_bound_kernel(ga.n, ga.ptr, ga.head, ga.cost, ga.node_cost, ga.node_duals(duals), ok)
            return -float(B[SOURCE_NODE]) - slack
        adm = admitted_arcs(self.graph, variant, math.inf, self.forbidden)
        B = cost_bound(self.graph, duals, adm)
        return -B[SOURCE_NODE] - slack

    def price(self, duals: Sequence[float], quota: int | None = None) -> PricingResult:
        """Columns with negative reduced cost; escalates the throttle when the
        yield is below ``quota``. An empty result with ``exact`` set means no
        negative column exists."""
        cfg = self.config
        quota = cfg.quotas[0] if quota is None else quota
        self.calls += 1
        while True:
            cap = self.throttle.cap
            cols: list[PricedColumn] = []
            mins: dict[Variant, float] = {}
            for variant in sorted(VARIANTS, key=lambda v: (self.expanded[v], VARIANTS.index(v))):
                stats = PricingStats()
                found, m = self._solve(duals, variant, cap, stats)
                self.expanded[variant] += stats.expanded
                self.created += stats.created
                # labels cut by the cost bound have reduced cost >= -tol, so the
                # sink minimum is only a bound once clamped at zero
                mins[variant] = min(m, 0.0) if cfg.cost_bound else m
                cols.extend(found)
                if len(cols) >= quota:
                    break
            full = self.throttle.full
            if len(cols) < quota and not full:
                self.throttle.escalate()
                if not cols:
                    continue
            break
        seen = set()
        unique = []
        for col in sorted(cols, key=lambda c: (c.reduced_cost, c.legs)):
            if col.legs not in seen:
                seen.add(col.legs)
                unique.append(col)
        exact = full and len(mins) == len(VARIANTS)
        lb = math.inf
        for variant in VARIANTS:
            if full and variant in mins:
                lb = min(lb, mins[variant])
            else:
                lb = min(lb, self.relaxed_bound(duals, variant))
        return PricingResult(unique, lb, exact, cap)
