import json
from fractions import Fraction
from pathlib import Path

import pytest

from spfsim.channel import PID, ChannelSpec, Inertial, PiecewiseConstant, Semantics
from spfsim.circuit import (
    AND2,
    NOT,
    OR2,
    Circuit,
    CircuitBuilder,
    ClockSpec,
    CnfParams,
    InvalidCircuit,
    ParamViolation,
    build_paper_circuit,
    check,
    clock_signal,
    figure3_circuit,
    load_netlist,
    save_netlist,
    validate,
    validate_cnf_params,
)
from spfsim.signal import make_signal
from spfsim.timebase import NEG_INF, QTime, SQRT2

NETLISTS = Path(__file__).resolve().parent.parent / "netlists"
Q = QTime


def codes(c):
    return sorted(v.code for v in validate(c))


def test_figure3_valid_and_round_trips(tmp_path):
    c = figure3_circuit()
    assert validate(c) == []
    path = tmp_path / "fig3.json"
    save_netlist(c, path)
    assert load_netlist(path) == c
    assert Circuit.loads(c.dumps()).dumps() == c.dumps()


def test_output_needs_one_driver():
    b = CircuitBuilder()
    b.input("i")
    b.output("o")
    b.output("o2")
    b.connect("i", "o", 1)
    b.connect("i", "o2", 1)
    b.connect("i", "o2", 2, "second")
    assert codes(b.build()) == ["C5"]
    with pytest.raises(InvalidCircuit) as info:
        check(b.build())
    assert "C5" in str(info.value.violations[0])


def test_bad_truth_table_and_order():
    b = CircuitBuilder()
    b.input("i")
    b.gate("g", AND2)
    b.output("o")
    b.connect("i", "g", 1)
    b.connect("g", "o", 1)
    assert codes(b.build()) == ["C2"]
    b.order("g", ["i->g", "i->g"])
    assert "C6" in codes(b.build())


def test_input_with_driver_and_dangling_edge():
    b = CircuitBuilder()
    b.input("i")
    b.gate("g", NOT)
    b.output("o")
    b.connect("g", "i", 1)
    b.connect("i", "g", 1)
    b.connect("g", "o", 1)
    assert codes(b.build()) == ["C4"]
    b.connect("g", "nowhere", 1)
    assert codes(b.build()) == ["REF"]


def test_nonconstant_channel_on_cycle_rejected():
    b = CircuitBuilder()
    b.input("i")
    b.gate("OR", OR2)
    b.output("o")
    b.connect("i", "OR", 1)
    b.connect("OR", "OR", ChannelSpec(Semantics.FORGETFUL, Inertial(2, 1)))
    b.connect("OR", "o", 1)
    assert codes(b.build()) == ["CYCLE"]


def test_duplicate_ids():
    b = CircuitBuilder()
    b.input("i")
    b.input("i")
    assert "ID" in codes(b.build())


def test_multi_edges_keep_order():
    c = build_paper_circuit("cev", alpha=SQRT2)
    assert [e.id for e in c.in_edges("OR")] == ["OR->OR#alpha", "i->OR", "OR->OR#1"]
    assert c.graph().number_of_edges("OR", "OR") == 2


def test_clock_signal():
    spec = ClockSpec(4, ((0, 1), (2, 1)))
    s = clock_signal(spec, 9)
    assert s.value_at(0) == 1 and s.value_at(1) == 0 and s.value_at(Q(5, 0) / 2) == 1
    assert s.value_at(8) == 1
    # a high interval filling the whole period touches its successor: one run
    merged = clock_signal(ClockSpec(2, ((0, 2),)), 6)
    assert merged.events[:2] == make_signal([(NEG_INF, 0), (0, 1)]).events
    assert all(merged.value_at(Q(k, 0) / 4) == 1 for k in range(24))
    assert ClockSpec.from_json(spec.to_json()) == spec


def test_ring_oscillator_example_is_valid():
    c = load_netlist(NETLISTS / "ring_oscillator.json")
    assert validate(c) == []
    assert len(c.gates) == 3


# -- builders --------------------------------------------------------------


def test_cff_builds_and_checks_eps():
    ch = ChannelSpec(Semantics.FORGETFUL, Inertial(2, 1))
    c = build_paper_circuit("Cff", ch, eps=1)
    assert c.edges["c*"].channel == ch
    with pytest.raises(ParamViolation) as info:
        build_paper_circuit("Cff", ch, eps=5)
    assert "eps<gamma" in info.value.tags
    with pytest.raises(ParamViolation):
        build_paper_circuit("Cff", ChannelSpec(Semantics.NONFORGETFUL, Inertial(2, 1)), eps=1)


def test_cff_initial_one_wraps_in_inverters():
    ch = ChannelSpec(Semantics.FORGETFUL, Inertial(2, 1), 1)
    c = build_paper_circuit("Cff", ch, eps=1)
    assert c.edges["c*"].src == "NOT1" and c.edges["c*"].dst == "NOT2"


CASE1 = PiecewiseConstant([(-2, 1), (0, 2)], 3)
CASE21 = PiecewiseConstant([(-2, 1)], 3)
H = Fraction(1, 2)


def case1_params():
    return CnfParams(A=4, B=4, C=H, D=H, E=2, F=H, eps=H, eps_prime=Fraction(1, 8), Delta=1)


def case21_params(eps_prime=Fraction(3, 4)):
    return CnfParams(A=3, B=H, C=H, D=3, E=6, F=1 - eps_prime, eps=H, eps_prime=eps_prime)


def test_cnf_param_systems():
    assert validate_cnf_params(CASE1, "case1", case1_params()) == []
    assert validate_cnf_params(CASE21, "case2.1", case21_params()) == []
    assert validate_cnf_params(CASE21, "case2.1", case21_params(Fraction(1, 4))) == []
    bad = CnfParams(A=4, B=3, C=H, D=H, E=2, F=H, eps=H, eps_prime=Fraction(1, 8), Delta=1)
    assert [v.code for v in validate_cnf_params(CASE1, "case1", bad)] == ["(iv)"]
    bad = CnfParams(A=3, B=H, C=H, D=3, E=5, F=H, eps=H, eps_prime=H)
    assert [v.code for v in validate_cnf_params(CASE21, "case2.1", bad)] == ["(vi)"]


def test_cnf_builder():
    ch = ChannelSpec(Semantics.NONFORGETFUL, CASE1)
    c = build_paper_circuit("Cnf", ch, case1_params(), case="case1")
    assert c.meta["case"] == "case1"
    assert [e.id for e in c.in_edges("AND")] == ["c*", "CLK_F->AND"]
    with pytest.raises(ParamViolation):
        build_paper_circuit("Cnf", ch, case1_params(), case="case2.1")
    with pytest.raises(ParamViolation):
        build_paper_circuit("Cnf", ChannelSpec(Semantics.NONFORGETFUL, CASE1, 1), case1_params())


def test_cnc_builder():
    case22 = PiecewiseConstant([(-2, 1), (-1, 2)], 3)
    c = build_paper_circuit("Cnc", ChannelSpec(Semantics.NONFORGETFUL, case22))
    assert c.meta["eps_prime"] == str(Q(1))
    with pytest.raises(ParamViolation):
        build_paper_circuit("Cnc", ChannelSpec(Semantics.NONFORGETFUL, CASE1))


def test_netlist_json_shape():
    ch = ChannelSpec(Semantics.FORGETFUL, PID(1, 1, Fraction(1, 4), 40))
    c = build_paper_circuit("Cff", ch, eps=Fraction(1, 2))
    obj = json.loads(c.dumps())
    edge = next(e for e in obj["edges"] if e["id"] == "c*")
    assert edge["channel"]["delay"]["kind"] == "pid"
    assert Circuit.from_json(obj) == c
