import json

import pytest

from spfsim.cli import main, qlist
from spfsim.timebase import QTime

from test_circuit import NETLISTS


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_qlist_geometric():
    assert qlist("1/2,1/4,...,1/16") == [QTime(1, 0) / k for k in (2, 4, 8, 16)]
    assert qlist("1, r2") == [QTime(1), QTime(0, 1)]
    with pytest.raises(ValueError):
        qlist("1/2,1/4,...,1/5")


def test_simulate_writes_csvs(tmp_path, capsys):
    out = tmp_path / "run"
    code, text, _ = run(capsys, "simulate", "--netlist", str(NETLISTS / "figure3.json"),
                        "--pulse", "1/2,2", "--horizon", "10", "--out", str(out),
                        "--vcd", str(tmp_path / "w.vcd"))
    assert code == 0
    assert sorted(p.name for p in out.iterdir()) == ["OR.csv", "i.csv", "o.csv"]
    assert (out / "o.csv").read_text().splitlines()[2].startswith("5/2+0/1*r2,1")
    assert (tmp_path / "w.vcd").read_text().startswith("$timescale")


def test_simulate_from_csv(tmp_path, capsys):
    wave = tmp_path / "in.csv"
    wave.write_text("time,value\n-inf,0\n1,1\n3,0\n")
    code, _, _ = run(capsys, "simulate", "--netlist", str(NETLISTS / "figure3.json"),
                     "--input", str(wave), "--horizon", "6", "--out", str(tmp_path / "r"))
    assert code == 0


def test_invalid_netlist_exit_2(tmp_path, capsys):
    obj = json.loads((NETLISTS / "figure3.json").read_text())
    obj["edges"].append({"id": "extra", "from": "i", "to": "o",
                         "channel": {"semantics": "constant", "delay": {"kind": "constant", "d": "1"}}})
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(obj))
    code, _, err = run(capsys, "simulate", "--netlist", str(bad), "--pulse", "0,1",
                       "--horizon", "5", "--out", str(tmp_path / "x"))
    assert code == 2 and "C5" in err


def test_budget_exit_3(tmp_path, capsys):
    code, _, err = run(capsys, "simulate", "--netlist", str(NETLISTS / "ring_oscillator.json"),
                       "--pulse", "0,1", "--horizon", "1000", "--out", str(tmp_path / "x"),
                       "--budget", "100")
    assert code == 3 and "budget" in err


def test_bad_time_exit_2(capsys):
    code, _, err = run(capsys, "discrepancy", "--alpha", "r2r2", "--N", "3")
    assert code == 2 and "error" in err


def test_build_variants(tmp_path, capsys):
    code, text, _ = run(capsys, "build", "cev", "--alpha", "r2")
    assert code == 0 and len(json.loads(text)["edges"]) == 4
    code, _, _ = run(capsys, "build", "cff", "--inertial", "2,1", "--eps", "1",
                     "--out", str(tmp_path / "cff.json"))
    assert code == 0
    code, _, err = run(capsys, "build", "cff", "--inertial", "2,1", "--eps", "5")
    assert code == 2 and "eps<gamma" in err
    code, text, _ = run(capsys, "build", "cnf", "--piecewise=-2:1;0:2;3",
                        "--params", "A=4,B=4,C=1/2,D=1/2,E=2,F=1/2,eps=1/2,eps_prime=1/8,Delta=1")
    assert code == 0 and json.loads(text)["meta"]["case"] == "case1"
    code, _, err = run(capsys, "build", "cnf", "--piecewise=-2:1;0:2;3",
                       "--params", "A=4,B=3,C=1/2,D=1/2,E=2,F=1/2,eps=1/2,eps_prime=1/8,Delta=1")
    assert code == 2 and "(iv)" in err
    code, text, _ = run(capsys, "build", "cnc", "--piecewise=-2:1;-1:2;3")
    assert code == 0
    code, _, _ = run(capsys, "build", "cff", "--pid", "1,1,1/4", "--eps", "1/2")
    assert code == 0


def test_spf_report(tmp_path, capsys):
    net = tmp_path / "cff.json"
    assert main(["build", "cff", "--inertial", "2,1", "--eps", "1", "--out", str(net)]) == 0
    rep = tmp_path / "rep.json"
    code, _, err = run(capsys, "spf", "--netlist", str(net), "--lengths", "1/2,1,2,3,4",
                       "--horizon", "20", "--out", str(rep))
    assert code == 0
    obj = json.loads(rep.read_text())
    assert {v["status"] for v in obj["verdicts"].values()} == {"evidence_pass"}
    first = rep.read_text()
    run(capsys, "spf", "--netlist", str(net), "--lengths", "1/2,1,2,3,4",
        "--horizon", "20", "--out", str(rep))
    assert rep.read_text() == first


def test_discrepancy_and_depgraph(capsys):
    code, text, _ = run(capsys, "discrepancy", "--alpha", "r2", "--N", "10", "--deltas", "2/5")
    obj = json.loads(text)
    assert code == 0 and obj["discrepancy"][0]["D_N_approx"].startswith("1.857")
    assert obj["delta_table"][0]["K"] == 4
    code, text, _ = run(capsys, "depgraph", "--netlist", str(NETLISTS / "figure3.json"), "--time", "6")
    obj = json.loads(text)
    assert obj["measure_points"] == ["0/1+0/1*r2", "2/1+0/1*r2", "4/1+0/1*r2"]


def test_ev_sweep_csv(tmp_path, capsys):
    out = tmp_path / "ev.csv"
    code, _, _ = run(capsys, "ev-sweep", "--deltas", "1/2,1/4,...,1/8", "--out", str(out))
    rows = out.read_text().splitlines()
    assert code == 0 and rows[0] == "delta,K,bound,measured_T" and len(rows) == 4
