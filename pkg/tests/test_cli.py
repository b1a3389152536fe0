import json
import math

import pytest

from sftlift.cli import main


@pytest.fixture(scope="module")
def inputs(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli-inputs")

    def dump(name, payload):
        path = root / name
        path.write_text(json.dumps(payload))
        return str(path)

    files = {}
    files["rule102"] = dump("rule102.json", {
        "memory": 0, "anticipation": 1, "alphabet": ["0", "1"],
        "block_map": {"00": "0", "01": "1", "10": "1", "11": "0"}})
    files["diff4"] = dump("diff4.json", {
        "memory": 0, "anticipation": 1, "alphabet": ["0", "1", "2", "3"],
        "block_map": {f"{a}{b}": str((b - a) % 4)
                      for a in range(4) for b in range(4)}})
    files["constant"] = dump("constant-map.json", {
        "x_symbols": ["0", "1"],
        "transitions": [["0", "0"], ["0", "1"], ["1", "0"], ["1", "1"]],
        "label": {"0": "z", "1": "z"}})
    files["golden"] = dump("golden.json", {
        "x_symbols": ["a", "b"],
        "transitions": [["a", "a"], ["a", "b"], ["b", "a"]],
        "label": {"a": "a", "b": "b"}})
    files["push_bernoulli"] = dump("nu.json", {
        "type": "pushforward",
        "base": {"type": "bernoulli", "alphabet": ["0", "1"],
                 "probabilities": ["7/10", "3/10"]}})
    files["markov_sub"] = dump("nu_sub.json", {
        "type": "markov", "states": ["0"], "transitions": {"0": {"0": "1"}}})
    files["collapse"] = dump("collapse.json", {
        "x_symbols": ["u", "v", "w"],
        "transitions": [["u", "v"], ["v", "u"], ["u", "w"], ["w", "v"]],
        "label": {"u": "0", "v": "0", "w": "1"}})
    return files


def run(capsys, *args):
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out


def test_degree_rule102(inputs, capsys):
    code, out = run(capsys, "degree", inputs["rule102"])
    assert code == 0
    payload = json.loads(out)
    assert payload["degree"] == 2 and payload["finite_to_one"] is True


def test_analyze_constant_map(inputs, capsys):
    code, out = run(capsys, "analyze", inputs["constant"])
    assert code == 0
    payload = json.loads(out)
    assert payload["finite_to_one"] is False
    assert abs(payload["entropy_x"] - math.log(2)) < 1e-9
    assert abs(payload["entropy_y"]) < 1e-12


def test_degree_constant_map_refuses(inputs, capsys):
    code, out = run(capsys, "degree", inputs["constant"])
    assert code == 2
    payload = json.loads(out)
    assert payload["finite_to_one"] is False


def test_periodic_lifts_diff4(inputs, capsys):
    code, out = run(capsys, "periodic-lifts", inputs["diff4"], "--max-period", "1")
    assert code == 0
    payload = json.loads(out)
    rows = {tuple(r["orbit"]): r for r in payload["orbits"]}
    row = rows[("2",)]
    assert row["fiber_size"] == 4
    lifts = {(tuple(e["measure"]["orbit"]), e["multiplicity"]) for e in row["lifts"]}
    assert lifts == {(("0", "2"), 2), (("1", "3"), 2)}


def test_periodic_lifts_table_format(inputs, capsys):
    code, out = run(capsys, "periodic-lifts", inputs["diff4"],
                    "--max-period", "1", "--format", "table")
    assert code == 0
    assert "orbit 2" in out and "mult 2" in out


def test_joining_export(inputs, capsys):
    code, out = run(capsys, "joining", inputs["rule102"])
    assert code == 0
    payload = json.loads(out)
    assert payload["degree"] == 2
    assert len(payload["x_symbols"]) == 4


def test_joining_dot(inputs, capsys):
    code, out = run(capsys, "joining", inputs["rule102"], "--format", "dot")
    assert code == 0
    assert out.startswith("digraph")


def test_lift_mc(inputs, capsys):
    code, out = run(capsys, "lift-mc", inputs["rule102"],
                    "--measure", inputs["push_bernoulli"], "--length", "50000")
    assert code == 0
    payload = json.loads(out)
    assert payload["degree"] == 2
    assert sorted(e["multiplicity"] for e in payload["lifts"]) == [1, 1]
    assert payload["details"]["seed"] == 0


def test_lift_mc_refusal(inputs, capsys):
    code, _out = run(capsys, "lift-mc", inputs["collapse"],
                     "--measure", inputs["markov_sub"], "--length", "2000")
    assert code == 2


def test_ca_exact_only(capsys):
    code, out = run(capsys, "ca", "--family", "diff", "--modulus", "4",
                    "--vector", "1/8,3/8,1/8,3/8", "--skip-mc")
    assert code == 0
    payload = json.loads(out)
    lifts = payload["exact"]["lifts"]
    assert sorted(e["multiplicity"] for e in lifts) == [2, 2]


def test_ca_with_cross_validation(capsys):
    code, out = run(capsys, "ca", "--family", "sum", "--modulus", "5",
                    "--vector", "3/5,1/10,1/10,1/10,1/10", "--length", "60000")
    assert code == 0
    payload = json.loads(out)
    mc = payload["cross_validation"]["monte_carlo"]
    assert sorted(e["multiplicity"] for e in mc["lifts"]) == [1, 2, 2]


def test_reruns_are_byte_identical(inputs, capsys):
    for args in (
        ("analyze", inputs["golden"]),
        ("degree", inputs["rule102"]),
        ("joining", inputs["rule102"]),
        ("periodic-lifts", inputs["diff4"], "--max-period", "2"),
        ("lift-mc", inputs["rule102"], "--measure", inputs["push_bernoulli"],
         "--length", "20000", "--seed", "9"),
    ):
        _code1, out1 = run(capsys, *args)
        _code2, out2 = run(capsys, *args)
        assert out1 == out2
