"""CLI surface: parsing, artifact runs, exit codes, error reporting."""

import json

import numpy as np
import pytest

from unigrad.cli import build_parser, main
from unigrad.problems import synth_lasso, save_samples


def test_parser_run_defaults():
    args = build_parser().parse_args(
        ["run", "--algorithm", "oupgm", "--problem", "synth-lasso"]
    )
    assert args.algorithm == "oupgm"
    assert args.eps == "1e-2"
    assert args.T == 1000
    assert args.order == "random"
    assert not args.fixed_step


def test_parser_rejects_unknown_algorithm(capsys):
    with pytest.raises(SystemExit):
        build_parser().parse_args(
            ["run", "--algorithm", "sgd", "--problem", "synth-lasso"]
        )


def test_run_writes_artifacts_and_prints_paths(tmp_path, capsys):
    out = tmp_path / "art"
    code = main([
        "run", "--algorithm", "oupgm", "--problem", "synth-lasso",
        "--p", "4", "--n", "60", "--sparsity", "2", "--T", "40",
        "--eps", "1e-2", "--seed", "1", "--out", str(out),
    ])
    assert code == 0
    paths = json.loads(capsys.readouterr().out)
    assert set(paths) == {"trace", "report", "bounds"}
    assert paths["trace"] == str(out / "trace.csv")
    assert (out / "trace.csv").exists()
    assert (out / "report.json").exists()
    assert (out / "bounds.csv").exists()


def test_run_invalid_eps_exits_2_naming_field(capsys):
    code = main([
        "run", "--algorithm", "oupgm", "--problem", "synth-lasso",
        "--eps", "-3",
    ])
    assert code == 2
    err = capsys.readouterr().err
    assert "error:" in err and "eps" in err


def test_run_non_numeric_eps_exits_2(capsys):
    code = main([
        "run", "--algorithm", "oupgm", "--problem", "synth-lasso",
        "--eps", "soon",
    ])
    assert code == 2
    assert "eps" in capsys.readouterr().err


def test_run_lasso_csv_requires_data_flag(capsys):
    code = main(["run", "--algorithm", "oupgm", "--problem", "lasso-csv"])
    assert code == 2
    assert "data" in capsys.readouterr().err


def test_run_eps_auto_with_degree_override(tmp_path, capsys):
    out = tmp_path / "auto"
    code = main([
        "run", "--algorithm", "oupgm", "--problem", "synth-lasso",
        "--p", "4", "--n", "30", "--sparsity", "2", "--T", "25",
        "--eps", "auto", "--v", "1.0", "--seed", "2", "--out", str(out),
    ])
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["eps"] == pytest.approx(25.0 ** -1.0)


def test_check_bounds_round_trip(tmp_path, capsys):
    out = tmp_path / "art"
    assert main([
        "run", "--algorithm", "oudgm", "--problem", "steiner",
        "--p", "3", "--m", "8", "--T", "30", "--eps", "1e-1",
        "--seed", "3", "--out", str(out),
    ]) == 0
    capsys.readouterr()
    code = main(["check-bounds", str(out / "trace.csv")])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["ok"] is True
    assert report["checked"] == "thm2"


def test_check_bounds_missing_file_exits_2(tmp_path, capsys):
    code = main(["check-bounds", str(tmp_path / "nope.csv")])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_reference_subcommand_prints_solution(capsys):
    code = main([
        "reference", "synth-lasso", "--p", "3", "--n", "20",
        "--sparsity", "1", "--noise", "0.0", "--mu", "0.0", "--seed", "4",
    ])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert set(out) == {"x_star", "f_star", "iterations", "residual"}
    assert out["f_star"] <= 1e-10
    assert len(out["x_star"]) == 3


def test_reference_with_csv_data(tmp_path, capsys):
    inst = synth_lasso(p=2, n=10, sparsity=1, noise=0.0, seed=5)
    path = tmp_path / "d.csv"
    save_samples(inst, path)
    code = main([
        "reference", "lasso-csv", "--data", str(path), "--mu", "0.0",
    ])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    np.testing.assert_allclose(out["x_star"], inst.x_true, atol=1e-6)
