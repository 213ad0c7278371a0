from collections import Counter

from hypothesis import given, strategies as st

from bdsp.generate import small_instance
from bdsp.model import can_chain
from bdsp.rcspp import SINK, SOURCE, build_graph, extend_graph, pricing_graph
from bdsp.rcspp.graph import SINK_NODE, SOURCE_NODE

from conftest import chains, depot_instance, leg


def test_tour_example_arc():
    dist = [[0, 10, 10], [10, 0, 10], [10, 10, 0]]
    inst = depot_instance([leg(1, 400, 495, 1, 0, 1), leg(2, 510, 555, 1, 1, 2)], dist)
    a = build_graph(inst).arcs[(0, 1)]
    assert (a.length, a.ride, a.change, a.split, a.remain, a.rest) == (15, 0, 0, 0, 15, 15)
    assert a.cost == 2 * 15 + 15 == 45


def test_source_arc_pays_start_work():
    inst = depot_instance([leg(1, 400, 495)])
    a = build_graph(inst).arcs[(SOURCE, 0)]
    assert (a.length, a.ride, a.change, a.split, a.rest) == (15, 0, 0, 0, 0)
    # start work is paid working time and span, as the shift evaluation counts it
    assert a.cost == 2 * 15 + 15


def test_long_gap_is_a_split():
    inst = depot_instance([leg(1, 400, 500), leg(2, 700, 800)])
    a = build_graph(inst).arcs[(0, 1)]
    assert (a.split, a.remain, a.rest) == (1, 0, 0)
    assert a.cost == 200 + 180 == 380


def test_far_apart_legs_get_one_replica_each():
    inst = depot_instance([leg(1, 300, 340), leg(2, 600, 640), leg(3, 900, 940)])
    g = pricing_graph(inst)
    replicas = [v for v in range(g.n_nodes) if g.node_final[v] >= 0]
    assert len(replicas) == 3
    assert all(g.node_leg[v] == g.node_final[v] for v in replicas)


def test_window_wiring():
    inst = depot_instance([leg(1, 300, 340), leg(2, 500, 540), leg(3, 560, 600)])
    g = pricing_graph(inst)
    name = {}
    for v in range(2, g.n_nodes):
        name[v] = (g.node_leg[v], g.node_final[v])
    edges = {(name.get(v, v), name.get(h, h)) for v in range(g.n_nodes) for h, _ in g.out[v]}
    # leg 0 lies outside the window of final leg 2, so it feeds the replica 1_2 directly
    assert ((0, -1), (1, 2)) in edges
    assert ((1, 2), (2, 2)) in edges
    assert ((2, 2), SINK_NODE) in edges
    assert all(n != (0, 2) for n in name.values())
    # only replicas j_j close the shift
    assert {t for t, h in edges if h == SINK_NODE} == {(0, 0), (1, 1), (2, 2)}


def test_ten_leg_paths_match_base_graph_one_to_one():
    inst = small_instance(10, 1)
    base = build_graph(inst).s_t_paths()
    ext = Counter(pricing_graph(inst).s_t_paths())
    assert set(base) == set(ext)
    assert all(c == 1 for c in ext.values())
    assert set(base) == set(chains(inst))


@given(st.integers(0, 10_000), st.integers(1, 11))
def test_extension_bijection(seed, n):
    inst = small_instance(n, seed)
    ext = Counter(pricing_graph(inst).s_t_paths())
    assert set(ext) == set(build_graph(inst).s_t_paths())
    assert max(ext.values()) == 1


@given(st.integers(0, 10_000), st.integers(1, 12))
def test_graph_is_topological_and_chainable(seed, n):
    inst = small_instance(n, seed)
    base = build_graph(inst)
    for (t, h) in base.arcs:
        if t != SOURCE and h != SINK:
            assert can_chain(inst, inst.legs[t], inst.legs[h])
    g = extend_graph(base)
    for v in range(g.n_nodes):
        for h, arc in g.out[v]:
            assert h == SINK_NODE or h > v
            assert v != SINK_NODE and h != SOURCE_NODE
            if h != SINK_NODE:
                assert arc.head == g.node_leg[h]
