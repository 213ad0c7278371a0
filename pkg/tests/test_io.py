import json

import pytest
from hypothesis import given, settings, strategies as st

from bdsp.generate import generate_instance, small_instance
from bdsp.io import (
    FormatError, convert_tabular, instance_from_dict, instance_to_dict, read_instance, read_solution, verify,
    write_instance, write_solution,
)
from bdsp.model import RulesConfig, greedy_construct


@given(st.integers(1, 4), st.integers(0, 10_000))
@settings(max_examples=20)
def test_round_trip(tours, seed):
    inst = generate_instance(tours, seed)
    assert instance_from_dict(json.loads(json.dumps(instance_to_dict(inst)))) == inst


def test_round_trip_keeps_rule_overrides(tmp_path):
    inst = small_instance(5, 1)
    from dataclasses import replace

    inst = replace(inst, rules=RulesConfig(work_min=400))
    write_instance(inst, tmp_path / "i.json")
    back = read_instance(tmp_path / "i.json")
    assert back == inst and back.rules.work_min == 400


def test_syntax_error_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n "distance": [[0]],\n "legs": [,]\n}\n')
    with pytest.raises(FormatError) as exc:
        read_instance(p)
    assert exc.value.line == 3 and "line 3" in str(exc.value)


@pytest.mark.parametrize("mutate,field", [
    (lambda d: d["legs"][1].pop("end"), "legs[1].end"),
    (lambda d: d["legs"][0].__setitem__("start", "9:00"), "legs[0].start"),
    (lambda d: d["legs"][2].__setitem__("start_pos", 99), "legs[2].start_pos"),
    (lambda d: d["distance"][1].pop(), "distance[1]"),
    (lambda d: d["start_work"].pop(), "start_work"),
    (lambda d: d.__setitem__("rules", {"bogus": 1}), "rules.bogus"),
    (lambda d: d.pop("legs"), "legs"),
])
def test_content_errors_name_the_field(tmp_path, mutate, field):
    data = instance_to_dict(generate_instance(1, 2))
    mutate(data)
    p = tmp_path / "i.json"
    p.write_text(json.dumps(data))
    with pytest.raises(FormatError) as exc:
        read_instance(p)
    assert exc.value.field == field


def _solved(tmp_path):
    inst = generate_instance(2, 5)
    sol = greedy_construct(inst)
    write_solution(sol, inst, tmp_path / "s.json")
    return inst, sol, json.loads((tmp_path / "s.json").read_text())


def test_solver_output_verifies(tmp_path):
    inst, sol, _ = _solved(tmp_path)
    f = read_solution(tmp_path / "s.json")
    rep = verify(inst, f.shifts, f.objective)
    assert rep.ok and rep.objective == sol.objective


def test_tampered_chaining_fails(tmp_path):
    from conftest import depot_instance, leg

    inst = depot_instance([leg(1, 300, 400, 0, 0, 1), leg(2, 405, 450, 1, 0, 0), leg(3, 500, 560, 1, 0, 0)],
                          [[0, 10], [10, 0]])
    rep = verify(inst, [[1, 2], [3]], None)
    assert not rep.ok and rep.reason == "chaining"


def test_objective_off_by_one(tmp_path):
    inst, sol, data = _solved(tmp_path)
    rep = verify(inst, [s["legs"] for s in data["shifts"]], sol.objective + 1)
    assert not rep.ok and rep.reason == "objective mismatch"


def test_partition_failures(tmp_path):
    inst, sol, data = _solved(tmp_path)
    shifts = [list(s["legs"]) for s in data["shifts"]]
    assert verify(inst, shifts[1:], None).reason == "missing leg"
    assert verify(inst, shifts + [shifts[0][:1]], None).reason == "duplicated leg"
    assert verify(inst, shifts + [[10**7]], None).reason == "unknown leg"


def test_convert_tabular(tmp_path):
    (tmp_path / "legs.csv").write_text("tour,start_pos,end_pos,start,end\n0,0,1,400,495\n0,1,0,510,555\n")
    (tmp_path / "dist.csv").write_text("0,10\n10,\n")
    (tmp_path / "pos.csv").write_text("position,start_work,end_work\n0,15,10\n1,0,0\n")
    inst = convert_tabular(tmp_path / "legs.csv", tmp_path / "dist.csv", tmp_path / "pos.csv", "t")
    assert inst.n_legs == 2 and inst.distance[1][1] == inst.no_transfer
    assert list(inst.start_work) == [15, 0] and list(inst.end_work) == [10, 0]
    (tmp_path / "legs.csv").write_text("tour,start_pos,end_pos,start,end\n0,0,1,four,495\n")
    with pytest.raises(FormatError) as exc:
        convert_tabular(tmp_path / "legs.csv", tmp_path / "dist.csv", tmp_path / "pos.csv")
    assert exc.value.line == 2
