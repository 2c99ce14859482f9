"""End-to-end tests of the command-line front end.

Commands run in-process through cli.main, which returns the exit code the
console script would produce.  A reduced 400-node grid keeps the solve-based
tests fast; the oracle error there is 1.1e-4 (measured), still an order of
magnitude inside the 1e-3 tolerance.
"""

import csv
import json

import pytest

from fracradial.cli import main


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """A config on a 400-node grid plus one solve and both verify runs."""
    root = tmp_path_factory.mktemp("cli")
    config = root / "run.ini"
    config.write_text(
        "[grid]\nnodes = 400\n\n"
        f"[output]\ndirectory = {root / 'solve'}\n")
    assert main(["solve", "--config", str(config)]) == 0
    assert main(["verify-decay", "--config", str(config),
                 "--out", str(root / "fresh")]) == 0
    assert main(["verify-decay", "--config", str(config),
                 "--solution", str(root / "solve" / "solution.json"),
                 "--out", str(root / "reloaded")]) == 0
    return root


# ---------------------------------------------------------------------------
# specfun-table


def test_table_exact_identity_regime(tmp_path):
    code = main(["specfun-table", "--out", str(tmp_path),
                 "--radii", "1,10,100"])
    assert code == 0
    rows = read_csv(tmp_path / "specfun_table.csv")
    assert rows[0] == ["radius", "h_beta", "fraclap_exact",
                       "fraclap_asymptotic", "ratio"]
    assert len(rows) == 4
    for row in rows[1:]:
        assert abs(float(row[4]) - 1.0) <= 1e-9


def test_table_log_corrected_regime(tmp_path):
    code = main(["specfun-table", "--out", str(tmp_path),
                 "--beta", "3", "--radii", "100"])
    assert code == 0
    rec = read_json(tmp_path / "specfun_table.json")
    assert rec["asymptotic_regime"] == "equal_N"
    ratio = rec["rows"][0]["ratio"]
    assert abs(ratio - 1.0) <= 0.1   # measured 0.99967


def test_table_empty_radius_list(tmp_path):
    code = main(["specfun-table", "--out", str(tmp_path), "--radii", ""])
    assert code == 0
    rows = read_csv(tmp_path / "specfun_table.csv")
    assert len(rows) == 1   # header only


def test_format_flag_restricts_outputs(tmp_path):
    code = main(["specfun-table", "--out", str(tmp_path), "--format", "csv"])
    assert code == 0
    assert (tmp_path / "specfun_table.csv").exists()
    assert not (tmp_path / "specfun_table.json").exists()


# ---------------------------------------------------------------------------
# oracle


def test_oracle_single_case_passes(tmp_path):
    code = main(["oracle", "--out", str(tmp_path), "--set", "grid.nodes=400",
                 "--case", "3,0.5,2"])
    assert code == 0
    rec = read_json(tmp_path / "oracle_report.json")
    assert len(rec["rows"]) == 1
    assert rec["rows"][0]["passed"] is True
    assert rec["rows"][0]["max_rel_err"] <= 1e-3


def test_oracle_coarse_grid_fails(tmp_path):
    # 50 nodes cannot resolve the kernel: measured error 7.6e-2
    code = main(["oracle", "--out", str(tmp_path), "--set", "grid.nodes=50",
                 "--case", "3,0.5,2"])
    assert code == 1
    rec = read_json(tmp_path / "oracle_report.json")
    assert rec["rows"][0]["passed"] is False


# ---------------------------------------------------------------------------
# configuration errors


def test_unknown_config_key_rejected(tmp_path):
    config = tmp_path / "bad.ini"
    config.write_text("[solver]\ntolerence = 1e-8\n")
    assert main(["solve", "--config", str(config)]) == 2


def test_unknown_config_section_rejected(tmp_path):
    config = tmp_path / "bad.ini"
    config.write_text("[solvers]\ntolerance = 1e-8\n")
    assert main(["solve", "--config", str(config)]) == 2


@pytest.mark.parametrize("override", [
    "solver.typo=1",          # unknown key
    "problem.s=abc",          # unparsable number
    "problem.s=1.5",          # outside (0, 1)
    "output.formats=xml",     # unsupported format
    "analysis.fit_window=50", # needs two numbers
])
def test_invalid_overrides_exit_2(tmp_path, override):
    assert main(["solve", "--out", str(tmp_path), "--set", override]) == 2


def test_missing_config_file_exits_2(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "none.ini")]) == 2


def test_malformed_solution_record_rejected(tmp_path):
    bad = tmp_path / "solution.json"
    bad.write_text('{"kind": "something-else"}')
    assert main(["verify-decay", "--solution", str(bad),
                 "--out", str(tmp_path)]) == 2


def test_nonconvergence_exits_3(tmp_path):
    code = main(["solve", "--out", str(tmp_path),
                 "--set", "grid.nodes=400", "--set", "solver.max_iter=3"])
    assert code == 3


# ---------------------------------------------------------------------------
# solve outputs and the two pipeline invariants


def test_solve_writes_record_and_tables(workdir):
    solve_dir = workdir / "solve"
    rec = read_json(solve_dir / "solution.json")
    assert rec["schema_version"] == 1
    assert rec["kind"] == "fracradial.solution"
    assert rec["problem"]["r"] == 1.7
    assert len(rec["profile"]["values"]) == 400
    assert rec["diagnostics"]["regime"] == "choquard_dominated"
    rows = read_csv(solve_dir / "profile.csv")
    assert rows[0] == ["radius", "u", "u_scaled"]
    assert len(rows) == 401


def test_reports_round_trip_bitwise(workdir):
    """Reloading the solution file reproduces the fresh report exactly."""
    fresh = (workdir / "fresh" / "verify_report.json").read_bytes()
    reloaded = (workdir / "reloaded" / "verify_report.json").read_bytes()
    assert fresh == reloaded
    fresh_csv = (workdir / "fresh" / "verify_report.csv").read_bytes()
    reloaded_csv = (workdir / "reloaded" / "verify_report.csv").read_bytes()
    assert fresh_csv == reloaded_csv


def test_repeated_solve_is_byte_identical(workdir, tmp_path):
    config = workdir / "run.ini"
    assert main(["solve", "--config", str(config),
                 "--out", str(tmp_path)]) == 0
    first = (workdir / "solve" / "profile.csv").read_bytes()
    second = (tmp_path / "profile.csv").read_bytes()
    assert first == second
    assert (workdir / "solve" / "solution.json").read_bytes() == \
        (tmp_path / "solution.json").read_bytes()


def test_verify_report_checks(workdir):
    rec = read_json(workdir / "fresh" / "verify_report.json")
    assert rec["passed"] is True
    assert rec["prediction"]["regime"] == "choquard_dominated"
    assert abs(rec["prediction"]["beta"] - 10.0 / 3.0) <= 1e-12
    names = {c["name"] for c in rec["checks"]}
    assert {"fit_exponent", "tail_constant", "bounds_ordered",
            "kappa_ledger", "riesz_tail"} <= names
    assert any(n.startswith("chain_rule_theta_") for n in names)
    fit = rec["fit"]["fitted_exponent"]
    assert abs(fit - 10.0 / 3.0) <= 0.1 * 10.0 / 3.0   # measured 3.3975
