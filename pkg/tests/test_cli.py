"""Command-line interface: solve/verify round trips and exit codes."""

import json

import pytest

from knapsolve.cli import main


@pytest.fixture
def z_group(tmp_path):
    path = tmp_path / "z.json"
    path.write_text(json.dumps({"type": "IntegerGroup", "generator": "t"}))
    return str(path)


@pytest.fixture
def free_group(tmp_path):
    path = tmp_path / "free.json"
    path.write_text(json.dumps({
        "type": "GraphProduct",
        "vertices": [
            {"type": "CyclicGroup", "order": 2, "generator": "a"},
            {"type": "CyclicGroup", "order": 3, "generator": "b"},
        ],
        "edges": [],
    }))
    return str(path)


def test_solve_integer_instance(z_group, capsys):
    code = main(["solve", "--group", z_group, "--expr", "t^x t'^4"])
    assert code == 0
    data = json.loads(capsys.readouterr().out)
    assert data["vars"] == ["x"]
    assert data["components"] == [{"base": [4], "periods": []}]
    assert "diagnostics" in data


def test_solve_output_sorted(free_group, capsys):
    code = main(["solve", "--group", free_group, "--expr", "a^x b^y"])
    assert code == 0
    data = json.loads(capsys.readouterr().out)
    comps = data["components"]
    assert comps == sorted(comps, key=lambda c: (c["base"], c["periods"]))


def test_malformed_expression_exit_code(z_group, capsys):
    code = main(["solve", "--group", z_group, "--expr", "t^x )("])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_missing_group_file_exit_code(capsys):
    code = main(["solve", "--group", "/nonexistent.json", "--expr", "t^x"])
    assert code == 1


def test_budget_exhaustion_exit_code(free_group, capsys):
    code = main([
        "solve", "--group", free_group,
        "--expr", "(a b)^x (b b a)^y (a b b)^z",
        "--budget-automata", "2",
    ])
    assert code == 2


def test_fast_mode_warns(free_group, capsys):
    code = main([
        "solve", "--group", free_group, "--expr", "(a b)^x (b' a)^y", "--fast",
    ])
    captured = capsys.readouterr()
    assert code == 0
    assert "miss" in captured.err


def test_solve_then_verify_round_trip(free_group, tmp_path, capsys):
    code = main([
        "solve", "--group", free_group, "--expr", "(a b)^x (b' a)^y",
    ])
    assert code == 0
    out = tmp_path / "result.json"
    out.write_text(capsys.readouterr().out)
    code = main([
        "verify", "--group", free_group, "--expr", "(a b)^x (b' a)^y",
        "--result", str(out), "--box", "6",
    ])
    report = json.loads(capsys.readouterr().out)
    assert code == 0
    assert report["ok"]


def test_verify_rejects_perturbed_result(z_group, tmp_path, capsys):
    out = tmp_path / "wrong.json"
    out.write_text(json.dumps({
        "vars": ["x"], "components": [{"base": [3], "periods": []}],
    }))
    code = main([
        "verify", "--group", z_group, "--expr", "t^x t'^4",
        "--result", str(out), "--box", "8",
    ])
    report = json.loads(capsys.readouterr().out)
    assert code == 1
    assert not report["ok"]


def test_verify_dimension_mismatch(z_group, tmp_path, capsys):
    out = tmp_path / "mismatch.json"
    out.write_text(json.dumps({
        "vars": ["x", "y"],
        "components": [{"base": [0, 0], "periods": []}],
    }))
    code = main([
        "verify", "--group", z_group, "--expr", "t^x t'^4",
        "--result", str(out), "--box", "5",
    ])
    assert code == 1
    assert "error" in capsys.readouterr().err
