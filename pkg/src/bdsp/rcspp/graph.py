"""Pricing graph: leg nodes, arc properties, and the end-time replica extension."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..model import Instance, can_chain

SOURCE = -1
SINK = -2
SOURCE_NODE = 0
SINK_NODE = 1


@dataclass(frozen=True)
class Arc:
    """Connection properties between two legs (or source/sink), shared by all replica images."""

    tail: int
    head: int
    length: int
    ride: int
    change: int
    split: int
    remain: int
    rest: int
    cost: int
    tail_end: int

    @property
    def inner(self) -> bool:
        return self.tail != SOURCE and self.head != SINK


def make_arc(inst: Instance, tail: int, head: int) -> Arc:
    R = inst.rules
    if tail == SOURCE:
        leg = inst.legs[head]
        length = inst.start_work[leg.start_pos]
        ride = change = split = 0
        tail_end = leg.start
    elif head == SINK:
        leg = inst.legs[tail]
        length = inst.end_work[leg.end_pos]
        ride = change = split = 0
        tail_end = leg.end
    else:
        a, b = inst.legs[tail], inst.legs[head]
        length = b.start - a.end
        ride = inst.distance[a.end_pos][b.start_pos] if a.end_pos != b.start_pos else 0
        change = int(a.tour != b.tour)
        split = int(length - ride >= R.split_min)
        tail_end = a.end
    remain = 0 if split else length - ride
    rest = remain if tail != SOURCE and head != SINK and remain >= R.rest_part_min else 0
    cost = (
        R.weight_work * remain
        + R.weight_span * length
        + (R.weight_work + R.weight_ride) * ride
        + R.weight_change * change
        + R.weight_split * split
    )
    return Arc(tail, head, length, ride, change, split, remain, rest, cost, tail_end)


@dataclass
class PricingGraph:
    """Acyclic pricing graph. Node 0 is the source, node 1 the sink.

    ``node_end`` is the shift end time a node commits to: the final leg's
    end for replica nodes, infinity for original leg nodes.
    """

    inst: Instance
    node_leg: list[int] = field(default_factory=list)
    node_final: list[int] = field(default_factory=list)
    node_end: list[float] = field(default_factory=list)
    out: list[list[tuple[int, Arc]]] = field(default_factory=list)
    arcs: dict[tuple[int, int], Arc] = field(default_factory=dict)
    extended: bool = False

    def add_node(self, leg: int, final: int = -1, end: float = math.inf) -> int:
        self.node_leg.append(leg)
        self.node_final.append(final)
        self.node_end.append(end)
        self.out.append([])
        return len(self.node_leg) - 1

    @property
    def n_nodes(self) -> int:
        return len(self.node_leg)

    @property
    def n_arcs(self) -> int:
        return sum(len(o) for o in self.out)

    def successors(self, leg: int) -> list[int]:
        return [h for (t, h) in self.arcs if t == leg and h != SINK]

    def s_t_paths(self, limit: int | None = None) -> list[tuple[int, ...]]:
        """All source-to-sink paths as leg index tuples (exponential; for tests)."""
        paths: list[tuple[int, ...]] = []

        def walk(node, acc):
            if limit is not None and len(paths) >= limit:
                return
            for head, _ in self.out[node]:
                if head == SINK_NODE:
                    paths.append(tuple(acc))
                else:
                    acc.append(self.node_leg[head])
                    walk(head, acc)
                    acc.pop()

        walk(SOURCE_NODE, [])
        return paths


def build_graph(inst: Instance) -> PricingGraph:
    """Base graph: one node per leg, arcs between chainable legs, O(n^2)."""
    g = PricingGraph(inst)
    g.add_node(SOURCE)
    g.add_node(SINK)
    legs = inst.legs
    nodes = [g.add_node(i) for i in range(len(legs))]
    for i in range(len(legs)):
        g.arcs[(SOURCE, i)] = make_arc(inst, SOURCE, i)
        g.arcs[(i, SINK)] = make_arc(inst, i, SINK)
        for k in range(i + 1, len(legs)):
            if can_chain(inst, legs[i], legs[k]):
                g.arcs[(i, k)] = make_arc(inst, i, k)
    for (t, h), arc in g.arcs.items():
        tail = SOURCE_NODE if t == SOURCE else nodes[t]
        head = SINK_NODE if h == SINK else nodes[h]
        g.out[tail].append((head, arc))
    return g


def _predecessors(base: PricingGraph) -> dict[int, list[int]]:
    preds: dict[int, list[int]] = {}
    for (t, h) in base.arcs:
        if t >= 0 and h >= 0:
            preds.setdefault(h, []).append(t)
    return preds


def end_window(inst: Instance, j: int, base: PricingGraph, preds: dict[int, list[int]] | None = None) -> list[int]:
    """Legs that can reach ``j`` and end within the last window before ``end_j``."""
    legs = inst.legs
    horizon = legs[j].end - inst.rules.centered_edge
    if preds is None:
        preds = _predecessors(base)
    members = {j}
    stack = [j]
    while stack:
        k = stack.pop()
        for i in preds.get(k, ()):
            if i not in members and legs[i].end > horizon:
                members.add(i)
                stack.append(i)
    return sorted(members)


def extend_graph(base: PricingGraph) -> PricingGraph:
    """Add one replica sub-network per final leg so rest positions near the
    shift end can be priced while processing nodes in temporal order.

    For final leg j with window set N_j: replica i_j for i in N_j, arcs
    i_j -> k_j when i -> k, arcs i -> k_j when i not in N_j, and j_j -> t
    replaces j -> t. Original nodes keep end time infinity.
    """
    inst = base.inst
    n = inst.n_legs
    g = PricingGraph(inst, arcs=dict(base.arcs), extended=True)
    g.add_node(SOURCE)
    g.add_node(SINK)
    preds = _predecessors(base)
    windows = [end_window(inst, j, base, preds) for j in range(n)]
    final_of: dict[int, list[int]] = {}
    for j, members in enumerate(windows):
        for i in members:
            final_of.setdefault(i, []).append(j)
    original: list[int] = []
    replica: dict[tuple[int, int], int] = {}
    # node ids follow leg order, replicas right after their original
    for i in range(n):
        original.append(g.add_node(i))
        for j in sorted(final_of.get(i, ())):
            replica[(i, j)] = g.add_node(i, final=j, end=inst.legs[j].end)
    in_window = [set(w) for w in windows]

    for (t, h), arc in base.arcs.items():
        if t == SOURCE:
            g.out[SOURCE_NODE].append((original[h], arc))
            for j in final_of.get(h, ()):
                g.out[SOURCE_NODE].append((replica[(h, j)], arc))
        elif h == SINK:
            g.out[replica[(t, t)]].append((SINK_NODE, arc))
        else:
            g.out[original[t]].append((original[h], arc))
            for j in final_of.get(h, ()):
                if t in in_window[j]:
                    g.out[replica[(t, j)]].append((replica[(h, j)], arc))
                else:
                    g.out[original[t]].append((replica[(h, j)], arc))
    _prune_dead(g)
    return g


def _prune_dead(g: PricingGraph) -> None:
    """Drop arcs into nodes that cannot reach the sink."""
    alive = [False] * g.n_nodes
    alive[SINK_NODE] = True
    for node in range(g.n_nodes - 1, 1, -1):
        alive[node] = any(alive[h] for h, _ in g.out[node])
    for node in range(g.n_nodes):
        g.out[node] = [(h, a) for h, a in g.out[node] if alive[h]]


def pricing_graph(inst: Instance) -> PricingGraph:
    return extend_graph(build_graph(inst))
