"""CLI surface: JSON queries, CSV emission, figure sweeps, exit codes."""

import csv
import json
import subprocess
import sys

import pytest

from entverify import cli

HEADER = ",".join(cli.CSV_HEADER)


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_analytic_rank2_full(capsys):
    code, out, _ = run_cli(
        capsys, "analytic", "--strategy", "rank2-full", "--fidelity", "0.9", "--n", "22"
    )
    assert code == 0
    rec = json.loads(out)
    assert rec["delta"] == pytest.approx(0.09847709021836118, abs=1e-12)
    assert rec["ebits_consumed"] == pytest.approx(5.0 if rec["n"] is None else rec["ebits_consumed"])


def test_analytic_resource_query(capsys):
    code, out, _ = run_cli(
        capsys, "analytic", "--strategy", "single-copy", "--delta", "0.1", "--fidelity", "0.9"
    )
    assert code == 0
    rec = json.loads(out)
    assert rec["copies"] == 22


def test_analytic_noiseless_limit(capsys):
    code, out, _ = run_cli(
        capsys, "analytic", "--strategy", "werner-full", "--fidelity", "1.0", "--n", "5"
    )
    assert code == 0
    assert json.loads(out)["delta"] == 1.0


def test_analytic_exact_mode(capsys):
    code, out, _ = run_cli(
        capsys,
        "analytic",
        "--strategy",
        "werner-full",
        "--fidelity",
        "9/10",
        "--n",
        "9",
        "--exact",
    )
    assert code == 0
    rec = json.loads(out)
    assert rec["delta_exact"] == "289074868537/492075000000"


def test_analytic_requires_n_or_delta(capsys):
    code, _, err = run_cli(capsys, "analytic", "--strategy", "werner-full", "--fidelity", "0.9")
    assert code == 2
    assert "error" in err


def test_simulate_pure_target(capsys):
    code, out, _ = run_cli(
        capsys,
        "simulate",
        "--strategy",
        "werner-full",
        "--fidelity",
        "0.9",
        "--n",
        "4",
        "--noise",
        "pure-target",
        "--trials",
        "10000",
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == HEADER
    row = dict(zip(cli.CSV_HEADER, lines[1].split(",")))
    assert float(row["estimate"]) == 1.0
    assert row["method"] == "mc"


def test_simulate_within_sigma(capsys):
    from entverify.analytic import werner_delta_full

    trials = 200_000
    code, out, _ = run_cli(
        capsys,
        "simulate",
        "--strategy",
        "werner-full",
        "--fidelity",
        "0.7",
        "--n",
        "2",
        "--trials",
        str(trials),
        "--seed",
        "3",
    )
    assert code == 0
    row = dict(zip(cli.CSV_HEADER, out.strip().splitlines()[1].split(",")))
    expected = float(werner_delta_full(0.7, 2))  # 0.66
    sigma = (expected * (1 - expected) / trials) ** 0.5
    assert abs(float(row["estimate"]) - expected) < 4 * sigma
    assert float(row["ci_low"]) <= expected <= float(row["ci_high"])


def test_simulate_byte_deterministic(capsys, tmp_path):
    argv = [
        "simulate",
        "--strategy",
        "werner-subspace",
        "--fidelity",
        "0.8",
        "--n",
        "6",
        "--m",
        "2",
        "--trials",
        "50000",
        "--seed",
        "11",
    ]
    first = run_cli(capsys, *argv)
    second = run_cli(capsys, *argv, "--workers", "4")
    assert first[0] == second[0] == 0
    assert first[1] == second[1]
    # file output matches stdout rows
    out_file = tmp_path / "row.csv"
    code, out, _ = run_cli(capsys, *argv, "--out", str(out_file))
    assert code == 0
    assert out_file.read_text() == out


def test_reproduce_fig2a(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "reproduce", "--figure", "2a", "--out", str(tmp_path))
    assert code == 0
    path = tmp_path / "fig2a.csv"
    assert path.exists()
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    by_key = {(r["strategy"], r["F"]): r for r in rows}
    assert by_key[("single-copy", "0.9")]["copies_consumed"] == "22"
    assert by_key[("rank2-full", "0.9")]["copies_consumed"] == "5"
    # subspace cost is constant across the fidelity grid
    sub = {r["copies_consumed"] for r in rows if r["strategy"] == "rank2-subspace"}
    assert sub == {"4"}


def test_reproduce_all_files(capsys, tmp_path):
    code, _, _ = run_cli(capsys, "reproduce", "--figure", "all", "--out", str(tmp_path))
    assert code == 0
    names = {p.name for p in tmp_path.glob("*.csv")}
    assert names == {
        "fig2a.csv",
        "fig2b.csv",
        "app_c_a.csv",
        "app_c_b.csv",
        "app_c_c.csv",
        "app_c_d.csv",
    }
    for p in sorted(tmp_path.glob("*.csv")):
        first = p.read_text().splitlines()[0]
        assert first == HEADER, p.name


def test_reproduce_deterministic_bytes(capsys, tmp_path):
    a_dir = tmp_path / "a"
    b_dir = tmp_path / "b"
    run_cli(capsys, "reproduce", "--figure", "2b", "--out", str(a_dir))
    run_cli(capsys, "reproduce", "--figure", "2b", "--out", str(b_dir))
    assert (a_dir / "fig2b.csv").read_bytes() == (b_dir / "fig2b.csv").read_bytes()


def test_crosscheck_passes(capsys):
    code, out, _ = run_cli(capsys, "crosscheck", "--max-n", "4", "--trials", "50000")
    assert code == 0
    assert "all cross-checks passed" in out
    assert out.count("[PASS]") == 6


def test_exit_code_domain_error(capsys):
    code, _, err = run_cli(
        capsys, "analytic", "--strategy", "werner-full", "--fidelity", "0.1", "--n", "3"
    )
    assert code == 2
    assert "error" in err


def test_exit_code_resource_limit(capsys):
    # a delta target this small pushes the search past its iteration cap
    code, _, err = run_cli(
        capsys,
        "analytic",
        "--strategy",
        "werner-full",
        "--fidelity",
        "0.5",
        "--delta",
        "1e-30",
    )
    assert code == 3
    assert "resource limit" in err


def test_config_file_defaults(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"trials": 20000, "seed": 7}))
    code, out, _ = run_cli(
        capsys,
        "--config",
        str(cfg),
        "simulate",
        "--strategy",
        "rank2-full",
        "--fidelity",
        "0.9",
        "--n",
        "4",
    )
    assert code == 0
    row = dict(zip(cli.CSV_HEADER, out.strip().splitlines()[1].split(",")))
    assert row["trials"] == "20000"
    assert row["seed"] == "7"


def test_module_entry_point():
    proc = subprocess.run(
        [
            sys.executable,
            "-m",
            "entverify.cli",
            "analytic",
            "--strategy",
            "rank2-full",
            "--fidelity",
            "0.9",
            "--n",
            "22",
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["n"] == 22
