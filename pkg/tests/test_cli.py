import numpy as np
import pytest

from ippomdp.cli import (EXIT_ERROR, EXIT_MAX_ITERATIONS, EXIT_OK,
                         REPORT_HEADER, main)

from conftest import TIGER_PATH

TWO_STATE = """\
discount: 0.9
values: reward
states: s0 s1
actions: a0
observations: o0 o1

T: a0
0.5 0.5
0.5 0.5

O: a0
1.0 0.0
0.0 1.0

R: a0 : s0 : * : * 1.0
R: a0 : s1 : * : * 0.0
"""


@pytest.fixture()
def two_state_path(tmp_path):
    path = tmp_path / "two_state.POMDP"
    path.write_text(TWO_STATE)
    return path


def test_solve_hits_iteration_cap(two_state_path, tmp_path, capsys):
    code = main(["solve", str(two_state_path), "--max-iters", "1",
                 "--epsilon", "1e-9", "--output", str(tmp_path)])
    assert code == EXIT_MAX_ITERATIONS
    report = (tmp_path / "two_state.report.csv").read_text().splitlines()
    assert report[0] == REPORT_HEADER
    assert len(report) == 2  # header plus exactly one iteration row
    assert (tmp_path / "two_state.alpha").exists()
    assert "max-iterations" in capsys.readouterr().out


def test_solve_converges_exit_zero(two_state_path, tmp_path, capsys):
    code = main(["solve", str(two_state_path), "--epsilon", "0.5",
                 "--output", str(tmp_path)])
    assert code == EXIT_OK
    assert "converged" in capsys.readouterr().out


def test_report_rows_have_integer_counts(two_state_path, tmp_path):
    main(["solve", str(two_state_path), "--max-iters", "3",
          "--epsilon", "1e-9", "--output", str(tmp_path)])
    rows = (tmp_path / "two_state.report.csv").read_text().splitlines()[1:]
    for row in rows:
        fields = row.split(",")
        assert len(fields) == len(REPORT_HEADER.split(","))
        for value in fields[2:10]:  # the count columns
            assert value == str(int(value))
        float(fields[10])  # wall_time parses
        assert len(fields[11]) == 12  # model digest


def test_malformed_model_reports_line_number(tmp_path, capsys):
    bad = tmp_path / "bad.POMDP"
    bad.write_text(TWO_STATE.replace("T: a0", "T; a0", 1))
    code = main(["validate", str(bad)])
    assert code == EXIT_ERROR
    out = capsys.readouterr().out
    assert "INVALID" in out and "line" in out


def test_validate_rejects_nonstochastic_row(tmp_path, capsys):
    bad = tmp_path / "bad.POMDP"
    bad.write_text(TWO_STATE.replace("0.5 0.5", "0.5 0.4", 1))
    assert main(["validate", str(bad)]) == EXIT_ERROR
    out = capsys.readouterr().out
    assert "INVALID" in out and "sums to 0.9" in out


def test_validate_ok(capsys):
    assert main(["validate", str(TIGER_PATH)]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("ok:")
    assert "2 states" in out and "3 actions" in out


def test_validate_rejects_discount_one(tmp_path, capsys):
    bad = tmp_path / "bad.POMDP"
    bad.write_text(TWO_STATE.replace("discount: 0.9", "discount: 1.0"))
    assert main(["validate", str(bad)]) == EXIT_ERROR
    assert "INVALID" in capsys.readouterr().out


def test_missing_file_is_an_error(capsys):
    assert main(["solve", "/nonexistent.POMDP"]) == EXIT_ERROR
    assert "error:" in capsys.readouterr().err


def test_compare_single_iteration(two_state_path, tmp_path, capsys):
    code = main(["compare", str(two_state_path), "--iterations", "1",
                 "--output", str(tmp_path)])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "vector counts agree across 5 variants" in out
    rows = (tmp_path / "two_state.compare.csv").read_text().splitlines()
    assert rows[0] == REPORT_HEADER
    assert len(rows) == 1 + 5  # one row per variant
    labels = [r.split(",")[0] for r in rows[1:]]
    assert labels == ["plain_ip", "restricted_region_ip", "improved:full",
                      "improved:reduced", "improved:reformulated"]


def test_compare_unknown_variant(two_state_path, tmp_path, capsys):
    code = main(["compare", str(two_state_path), "--iterations", "1",
                 "--variants", "plain_ip,bogus", "--output", str(tmp_path)])
    assert code == EXIT_ERROR
    assert "unknown variant" in capsys.readouterr().err


def test_simulate_dimension_mismatch(two_state_path, tmp_path, capsys):
    from ippomdp.vectorset import write_alpha_file
    from conftest import make_set
    alpha = tmp_path / "wrong.alpha"
    write_alpha_file(make_set([[1.0, 0.0, 0.0]]), alpha)
    code = main(["simulate", str(two_state_path), str(alpha),
                 "--episodes", "1", "--output", str(tmp_path)])
    assert code == EXIT_ERROR
    assert "dimension" in capsys.readouterr().err


def test_simulate_is_seed_deterministic(two_state_path, tmp_path, capsys):
    main(["solve", str(two_state_path), "--epsilon", "0.01",
          "--output", str(tmp_path)])
    capsys.readouterr()
    alpha = tmp_path / "two_state.alpha"
    args = ["simulate", str(two_state_path), str(alpha), "--episodes", "5",
            "--horizon", "20", "--seed", "3", "--output", str(tmp_path)]
    assert main(args) == EXIT_OK
    first = (tmp_path / "two_state.episodes.csv").read_text()
    assert main(args) == EXIT_OK
    assert (tmp_path / "two_state.episodes.csv").read_text() == first
    out = capsys.readouterr().out
    assert "mean return" in out


def test_threads_flag_does_not_change_counts(two_state_path, tmp_path):
    main(["solve", str(two_state_path), "--max-iters", "2",
          "--epsilon", "1e-9", "--output", str(tmp_path / "a")])
    main(["solve", str(two_state_path), "--max-iters", "2",
          "--epsilon", "1e-9", "--threads", "4",
          "--output", str(tmp_path / "b")])

    def counts(path):
        rows = path.read_text().splitlines()[1:]
        return [r.split(",")[:10] for r in rows]

    assert counts(tmp_path / "a" / "two_state.report.csv") == \
        counts(tmp_path / "b" / "two_state.report.csv")
