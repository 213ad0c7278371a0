import random
from collections import Counter
from types import SimpleNamespace

import pytest

from bdsp.bp import BpConfig
from bdsp.clock import WorkClock
from bdsp.generate import generate_instance, small_instance
from bdsp.lns import (
    LnsConfig, LnsState, destroy_eu, destroy_ew, destroy_tr, make_subinstance, repair, run_lns, select_operator,
    update_weights,
)
from bdsp.model import evaluate_solution, greedy_construct, validate_partition

from conftest import best_partition, depot_instance, feasible_shifts, leg


def _costed(costs):
    return SimpleNamespace(n_shifts=len(costs), evaluations=[SimpleNamespace(cost=c) for c in costs])


def _tour_singletons(tour_sizes):
    legs, lid = [], 1
    for tour, size in enumerate(tour_sizes):
        for _ in range(size):
            legs.append(leg(lid, 300 + 50 * lid, 340 + 50 * lid, tour))
            lid += 1
    inst = depot_instance(legs)
    return inst, evaluate_solution([[l.id] for l in inst.legs], inst)


def test_eu_edge_cases_and_replay():
    sol = _costed([5] * 6)
    assert destroy_eu(sol, 6, random.Random(0)) == list(range(6))
    assert destroy_eu(sol, 9, random.Random(0)) == list(range(6))
    assert destroy_eu(_costed([5]), 1, random.Random(3)) == [0]
    assert destroy_eu(sol, 3, random.Random(42)) == destroy_eu(sol, 3, random.Random(42))


def test_ew_draw_counts():
    sol = _costed(list(range(1, 21)))
    rng = random.Random(0)
    for _ in range(200):
        got = destroy_ew(sol, 5, rng)
        assert len(got) == len(set(got)) == 5


def test_ew_heavy_shift_frequency():
    # first (cost-weighted) draw takes shift 0 with prob .99, the uniform draw picks it half the remaining time
    sol = _costed([198, 1, 1])
    rng = random.Random(1)
    trials = 20_000
    hits = sum(0 in destroy_ew(sol, 2, rng) for _ in range(trials))
    assert abs(hits / trials - (0.99 + 0.01 * 0.5)) <= 0.02


def test_ew_equal_costs_is_uniform():
    sol = _costed([7] * 5)
    rng = random.Random(2)
    trials = 20_000
    freq = Counter(s for _ in range(trials) for s in destroy_ew(sol, 2, rng))
    for s in range(5):
        assert abs(freq[s] / trials - 2 / 5) <= 0.02


def test_tr_single_tour_draw():
    inst, sol = _tour_singletons([3, 3])
    for seed in range(10):
        got = destroy_tr(sol, 3, random.Random(seed), inst)
        assert got in ([0, 1, 2], [3, 4, 5])


def test_tr_may_exceed_k():
    inst, sol = _tour_singletons([7, 7])
    assert len(destroy_tr(sol, 5, random.Random(0), inst)) == 7


def test_tr_one_shift_per_tour():
    inst, sol = _tour_singletons([1] * 8)
    for k in range(1, 8):
        assert len(destroy_tr(sol, k, random.Random(k), inst)) == k


def test_roulette_examples():
    rng = random.Random(0)
    assert {select_operator((1, 0, 0), rng) for _ in range(500)} == {0}
    n = 10_000
    freq = Counter(select_operator((3, 1, 0), rng) for _ in range(n))
    assert abs(freq[0] / n - 0.75) <= 0.02 and abs(freq[1] / n - 0.25) <= 0.02 and freq[2] == 0
    freq = Counter(select_operator((1, 1, 1), rng) for _ in range(n))
    assert all(abs(freq[i] / n - 1 / 3) <= 0.02 for i in range(3))
    freq = Counter(select_operator((0, 0), rng) for _ in range(n))
    assert abs(freq[0] / n - 0.5) <= 0.02


def _state(weights, sigma, tau):
    return LnsState(best=None, k=10, weights=list(weights), sigma=list(sigma), tau=list(tau))


def test_update_weights_examples():
    assert update_weights(_state([0.2, 0.8], [3, 1], [2.0, 4.0]), 1.0) == [0.2, 0.8]
    assert update_weights(_state([0.5, 0.5], [0, 0], [0.0, 0.0]), 0.9) == pytest.approx([0.45, 0.45])
    assert update_weights(_state([0.3], [1], [2.0]), 0.0) == [0.5]
    st = _state([0.5, 0.5], [4, 0], [1.0, 3.0])
    for _ in range(20):
        assert min(update_weights(st, 0.7)) >= 0


def test_make_subinstance():
    inst = small_instance(9, 1)
    sol = greedy_construct(inst)
    everything = make_subinstance(inst, sol, range(sol.n_shifts))
    assert everything.legs == inst.legs and everything.distance == inst.distance
    single = evaluate_solution([[l.id] for l in inst.legs], inst)
    assert make_subinstance(inst, single, [4]).legs == (inst.legs[4],)
    removed = [0, sol.n_shifts - 1]
    assert make_subinstance(inst, sol, removed).n_legs == sum(len(sol.shifts[s]) for s in removed)


def test_repair_examples():
    inst = depot_instance([leg(1, 400, 495)])
    rem = evaluate_solution([[1]], inst)
    assert repair(inst, rem, LnsConfig(), 10).solution.shifts == [(1,)]
    for seed in range(3):
        inst = small_instance(8, seed)
        rem = evaluate_solution([[l.id] for l in inst.legs], inst)
        rep = repair(inst, rem, LnsConfig(repair="bp"), 60)
        assert rep.solution.objective == best_partition(8, feasible_shifts(inst))


def test_tiny_budget_returns_greedy():
    inst = small_instance(12, 2)
    res = run_lns(inst, LnsConfig(budget=0))
    assert res.iterations == 0 and res.solution == greedy_construct(inst)


def test_size_grows_after_n_max_failures():
    inst = small_instance(8, 5)
    opt = repair(inst, greedy_construct(inst), LnsConfig(repair="bp"), 60).solution
    cfg = LnsConfig(k0=10, k_max=20, n_max=50, max_iterations=52, budget=10**6)
    res = run_lns(inst, cfg, clock=WorkClock(), initial=opt)
    ks = [row.k for row in res.log]
    assert not any(row.accepted for row in res.log)
    assert ks[:50] == [10] * 50 and ks[50:] == [11, 11]


def test_size_schedule_and_validity():
    inst = generate_instance(2, 4)
    cfg = LnsConfig(k0=2, k_max=4, n_max=1, max_iterations=15, budget=10**6, operators=("EU", "EW", "TR"))
    res = run_lns(inst, cfg, clock=WorkClock())
    log = res.log
    assert any(r.accepted for r in log)
    for a, b in zip(log, log[1:]):
        assert b.k == (cfg.k0 if a.accepted else min(a.k + 1, cfg.k_max))
        assert b.objective <= a.objective
        assert cfg.k0 <= b.k <= cfg.k_max
    assert res.solution.objective <= greedy_construct(inst).objective
    validate_partition(res.solution.shifts, inst)


def test_seed_determinism():
    inst = generate_instance(3, 8)

    def run():
        cfg = LnsConfig(k0=3, max_iterations=6, budget=10**6, seed=11, operators=("EU", "TR"),
                        bp=BpConfig(backend="simplex"))
        res = run_lns(inst, cfg, clock=WorkClock())
        return [(r.time, r.operator, r.k, r.accepted, r.objective) for r in res.log]

    assert run() == run()


def test_config_validation():
    for bad in (dict(k0=0), dict(k0=21), dict(n_max=0), dict(operators=()), dict(operators=("XX",)),
                dict(weights=(0.0,)), dict(weights=(1.0, 1.0)), dict(lam=1.5), dict(repair="mip")):
        with pytest.raises(ValueError):
            LnsConfig(**bad)
