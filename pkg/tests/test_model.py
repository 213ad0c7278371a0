import pytest
from hypothesis import given, strategies as st

from bdsp.generate import small_instance
from bdsp.model import (
    InfeasibleShiftError, PartitionError, RulesConfig, evaluate_shift, evaluate_solution, gap, greedy_construct,
)

from conftest import chains, depot_instance, leg


def test_single_depot_leg_pays_minimum_working_time():
    inst = depot_instance([leg(1, 400, 495)])
    ev = evaluate_shift(inst.legs, inst)
    assert ev.feasible
    assert (ev.span, ev.work, ev.paid) == (120, 120, 390)
    assert ev.cost == 2 * 390 + 120 == 900


def test_chaining_needs_transfer_time():
    dist = [[0, 10, 10], [10, 0, 10], [10, 10, 0]]
    inst = depot_instance([leg(1, 400, 500, 0, 0, 1), leg(2, 505, 560, 1, 2, 0)], dist)
    ev = evaluate_shift(inst.legs, inst)
    assert not ev.feasible and ev.reason == "chaining"


def test_short_gap_gives_no_drive_break():
    inst = depot_instance([leg(1, 300, 540), leg(2, 550, 610)])
    ev = evaluate_shift(inst.legs, inst)
    assert not ev.feasible and ev.reason == "drive_block"


def test_tour_example_first_two_legs():
    dist = [[0, 10, 10], [10, 0, 10], [10, 10, 0]]
    inst = depot_instance([leg(1, 400, 495, 1, 0, 1), leg(2, 510, 555, 1, 1, 2)], dist)
    ev = evaluate_shift(inst.legs, inst)
    assert ev.feasible
    assert (ev.ride, ev.changes, ev.splits) == (0, 0, 0)
    assert inst.legs[1].start - inst.legs[0].end == 15


def test_span_limit():
    inst = depot_instance([leg(1, 400, 500), leg(2, 1250, 1300)])
    ev = evaluate_shift(inst.legs, inst)
    assert not ev.feasible and ev.reason == "span"


def test_first_rest_part_required_by_360_minutes():
    # a 30-minute gap that is mostly passive ride breaks the drive block but leaves no rest
    dist = [[0, 20], [20, 0]]
    inst = depot_instance([leg(1, 400, 600, 0, 0, 1), leg(2, 630, 800, 1, 0, 0)], dist)
    ev = evaluate_shift(inst.legs, inst)
    assert not ev.feasible and ev.reason == "rest_first_part"


def test_split_is_unpaid_and_penalised():
    inst = depot_instance([leg(1, 400, 500), leg(2, 700, 800)])
    ev = evaluate_shift(inst.legs, inst)
    assert ev.feasible and ev.splits == 1 and ev.split_time == 200
    assert ev.work == ev.span - 200
    assert ev.cost == 2 * ev.paid + ev.span + 180


def test_rule_constants_are_validated():
    with pytest.raises(ValueError):
        RulesConfig(work_min=0)
    with pytest.raises(ValueError):
        RulesConfig(work_min=700)


def test_empty_solution_of_empty_instance():
    inst = depot_instance([])
    assert evaluate_solution([], inst).objective == 0


def test_singleton_solution_sums_single_evaluations():
    inst = small_instance(8, 4)
    sol = evaluate_solution([[l.id] for l in inst.legs], inst)
    assert sol.objective == sum(evaluate_shift([l], inst).cost for l in inst.legs)


def test_partition_errors():
    inst = small_instance(8, 4)
    ids = [l.id for l in inst.legs]
    with pytest.raises(PartitionError) as exc:
        evaluate_solution([[i] for i in ids] + [[ids[0]]], inst)
    assert exc.value.duplicated == [ids[0]]
    with pytest.raises(PartitionError) as exc:
        evaluate_solution([[i] for i in ids[1:]], inst)
    assert exc.value.missing == [ids[0]]


def test_infeasible_shift_in_solution_is_rejected():
    inst = depot_instance([leg(1, 300, 540), leg(2, 550, 610)])
    with pytest.raises(InfeasibleShiftError):
        evaluate_solution([[1, 2]], inst)


@pytest.mark.parametrize("z,bks,expected", [(100, 100, 0.0), (110, 100, 10.0), (14709.2, 14709.2, 0.0)])
def test_gap(z, bks, expected):
    assert gap(z, bks) == pytest.approx(expected)


def test_gap_domain():
    with pytest.raises(ValueError):
        gap(1, 0)


def test_greedy_single_leg():
    inst = depot_instance([leg(1, 400, 495)])
    assert greedy_construct(inst).shifts == [(1,)]


def test_greedy_joins_close_same_tour_legs():
    inst = depot_instance([leg(1, 400, 495), leg(2, 510, 555)])
    together = evaluate_shift(inst.legs, inst).cost
    apart = sum(evaluate_shift([l], inst).cost for l in inst.legs)
    assert together < apart
    assert greedy_construct(inst).shifts == [(1, 2)]


def test_greedy_separates_overlapping_legs():
    inst = depot_instance([leg(1, 400, 495, 0), leg(2, 450, 520, 1)])
    assert len(greedy_construct(inst).shifts) == 2


def _centered_long_part(inst, legs):
    R = inst.rules
    lo = legs[0].start - inst.start_work[legs[0].start_pos] + R.centered_edge
    hi = legs[-1].end - R.centered_edge
    for a, b in zip(legs, legs[1:]):
        ride = inst.distance[a.end_pos][b.start_pos] if a.end_pos != b.start_pos else 0
        remain = b.start - a.end - ride
        if remain >= R.split_min or remain < R.rest_long_part:
            continue
        if min(a.end + remain, hi) - max(a.end, lo) >= R.rest_long_part:
            return True
    return False


@given(st.integers(0, 10_000), st.integers(4, 11))
def test_evaluation_invariants(seed, n):
    inst = small_instance(n, seed)
    R = inst.rules
    for c in chains(inst)[:200]:
        legs = [inst.legs[i] for i in c]
        ev = evaluate_shift(legs, inst)
        assert ev == evaluate_shift(legs, inst)
        if not ev.feasible:
            assert ev.reason
            continue
        assert ev.work == ev.span - ev.unpaid - ev.split_time
        assert ev.paid == max(ev.work, R.work_min)
        assert ev.cost == 2 * ev.paid + ev.span + ev.ride + 30 * ev.changes + 180 * ev.splits
        assert min(ev.drive, ev.span, ev.work, ev.ride, ev.unpaid) >= 0
        assert ev.unpaid <= R.unpaid_cap_centered
        if not _centered_long_part(inst, legs):
            assert ev.unpaid <= R.unpaid_cap_uncentered
        gaps = [b.start - a.end for a, b in zip(legs, legs[1:])]
        if all(g < R.rest_long_part for g in gaps):
            assert ev.unpaid == 0


@given(st.integers(0, 10_000))
def test_greedy_is_a_feasible_partition(seed):
    inst = small_instance(12, seed)
    sol = greedy_construct(inst)
    again = evaluate_solution(sol.shifts, inst)
    assert again.objective == sol.objective == sum(e.cost for e in sol.evaluations)
