import json
from fractions import Fraction
from pathlib import Path

import pytest

from ckpde import cli

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def s(name):
    return str(SAMPLES / name)


def call(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    return code, capsys.readouterr().out


def test_compat_transport(capsys):
    code, out = call(capsys, "compat", "--system", s("transport.json"), "--format", "text")
    assert code == 0 and "compatible (symbolic)" in out


def test_compat_incompatible(capsys):
    code, out = call(capsys, "compat", "--system", s("incompatible.json"))
    assert code == 1 and json.loads(out)["status"] == "negative"


def test_solve_burgers(capsys):
    code, out = call(capsys, "solve", "--system", s("burgers.json"), "--data", s("line_data.json"))
    assert code == 0
    assert json.loads(out)["status"] == "positive"


def test_solve_with_wrong_data(capsys):
    code, out = call(capsys, "solve", "--system", s("transport.json"), "--data", s("wrong_data.json"))
    assert code == 2 and "wrong_data.json" in json.loads(out)["error"]


def test_slope(capsys):
    code, out = call(capsys, "slope", "--system", s("transport.json"), "--slope", s("slope_half.json"),
                     "--format", "text")
    assert code == 0 and "3/2" in out
    code, _ = call(capsys, "slope", "--system", s("transport.json"), "--slope", s("slope_characteristic.json"))
    assert code == 1


def test_jet(capsys):
    code, out = call(capsys, "jet", "--system", s("burgers.json"), "--data", s("line_data.json"))
    assert code == 0
    code, _ = call(capsys, "jet", "--system", s("incompatible.json"))
    assert code == 1


def test_eds(capsys):
    code, _ = call(capsys, "eds", "--system", s("transport.json"), "--element", s("transport_element.json"))
    assert code == 0
    code, _ = call(capsys, "eds", "--system", s("transport.json"), "--element", s("bad_element.json"))
    assert code == 1


@pytest.mark.parametrize("rhs,code", [("f_const.json", 1), ("f_x1t.json", 1), ("f_potential.json", 0),
                                      ("f_zero.json", 0)])
def test_monge_classification(capsys, rhs, code):
    got, out = call(capsys, "monge", "--rhs", s(rhs), "--format", "text")
    assert got == code
    if rhs == "f_const.json":
        assert out.startswith("inadmissible: t-independent nonzero f")


def test_monge_solve(capsys):
    code, out = call(capsys, "monge", "--rhs", s("f_zero.json"), "--data", s("monge_data.json"), "--format", "text")
    assert code == 0 and "residual: clean" in out


def test_gauss_then_levi(capsys):
    code, out = call(capsys, "gauss", "--curve", s("moment.json"), "--order", 8, "--then", "levi",
                     "--format", "text")
    assert code == 0 and "l = 3 at 0; Levi number verdict: n" in out
    code, _ = call(capsys, "gauss", "--curve", s("great_circle.json"), "--then", "levi")
    assert code == 1


def test_levi_from_curve(capsys):
    code, out = call(capsys, "levi", "--curve", s("moment.json"))
    assert code == 0 and json.loads(out)["l"] == 3


def test_levi_needs_one_source(capsys):
    code, _ = call(capsys, "levi")
    assert code == 2
    code, _ = call(capsys, "levi", "--curve", s("moment.json"), "--model", s("moment.json"))
    assert code == 2


def test_output_file_is_deterministic(tmp_path):
    outs = []
    for i in range(2):
        target = tmp_path / f"r{i}.json"
        assert cli.main(["compat", "--system", s("incompatible.json"), "--seed", "4", "-o", str(target)]) == 1
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]


def test_default_order_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("CK_DEFAULT_ORDER", "5")
    code, out = call(capsys, "monge", "--rhs", s("f_zero.json"), "--data", s("monge_data.json"))
    assert code == 0 and json.loads(out)["solution"]["u"]["order"] == 5
    monkeypatch.setenv("CK_DEFAULT_ORDER", "five")
    code, _ = call(capsys, "monge", "--rhs", s("f_zero.json"))
    assert code == 2


def test_text_fractions():
    assert cli.fmt_rational(Fraction(-3, 2)) == "-3/2 (-1.5)"
    assert cli.fmt_rational(Fraction(4)) == "4"


@pytest.mark.parametrize("argv", [
    ["compat", "--system", "no/such/file.json"],
    ["compat", "--system", "BADJSON"],
    ["compat", "--system", s("transport.json"), "--samples", "0"],
    ["solve", "--system", s("transport.json"), "--data", s("line_data.json"), "--order", "1"],
    ["compat"],
    ["frobnicate"],
])
def test_input_errors(capsys, tmp_path, argv):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    argv = [str(bad) if a == "BADJSON" else a for a in argv]
    assert cli.main(argv) == 2


CORPUS = [
    (["compat", "--system", "transport.json"], 0),
    (["compat", "--system", "burgers.json"], 0),
    (["compat", "--system", "incompatible.json"], 1),
    (["solve", "--system", "transport.json", "--data", "line_data.json"], 0),
    (["jet", "--system", "transport.json", "--slope", "slope_half.json"], 0),
    (["jet", "--system", "transport.json", "--slope", "slope_characteristic.json"], 1),
    (["monge", "--rhs", "f_potential.json"], 0),
    (["levi", "--curve", "great_circle.json"], 1),
]


@pytest.mark.parametrize("argv,code", CORPUS)
def test_exit_status_and_report_agree(capsys, argv, code):
    argv = [s(a) if a.endswith(".json") else a for a in argv]
    got, out = call(capsys, *argv)
    assert got == code
    doc = json.loads(out)
    assert doc["status"] == ("positive" if code == 0 else "negative")
