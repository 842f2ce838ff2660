import io
from pathlib import Path

import pytest

from src.cuckooharness.cli import EXIT_INFEASIBLE, EXIT_USAGE, run
from src.cuckooharness.harness import CSV_HEADER
from src.cuckooinference.core_model import Instance, emit_instance, parse_instance


def write_instance(tmp_path: Path, inst: Instance) -> str:
    path = tmp_path / "instance.txt"
    path.write_text(emit_instance(inst), encoding="utf-8")
    return str(path)


def test_gen_writes_instance(tmp_path: Path) -> None:
    out = tmp_path / "gen.txt"

    assert run(["gen", "--n", "3", "--d", "2", "--seed", "1", "--out", str(out)]) == 0

    inst = parse_instance(out.read_text(encoding="utf-8"))
    assert (inst.n, inst.m, inst.d) == (3, 5, 2)


def test_gen_to_stdout_is_reproducible(capsys: pytest.CaptureFixture[str]) -> None:
    run(["gen", "--n", "4", "--m", "6", "--seed", "9"])
    first = capsys.readouterr().out
    run(["gen", "--n", "4", "--m", "6", "--seed", "9"])

    assert capsys.readouterr().out == first
    assert first.startswith("4 6 1\n")


def test_check_feasible(tmp_path: Path, double_collision: Instance, capsys: pytest.CaptureFixture[str]) -> None:
    assert run(["check", write_instance(tmp_path, double_collision)]) == 0
    assert capsys.readouterr().out.startswith("feasible")


def test_check_explains_bad_items(
    tmp_path: Path,
    full_collision: Instance,
    capsys: pytest.CaptureFixture[str],
) -> None:
    assert run(["check", "--explain", write_instance(tmp_path, full_collision)]) == EXIT_INFEASIBLE

    out = capsys.readouterr().out
    assert out.startswith("infeasible: 3 bad item(s): 0 1 2")
    assert out.count("basic bad path rooted at") == 6
    assert "a_0^0 -> a_1^1  (A0[0])" in out


def test_check_reads_stdin(
    monkeypatch: pytest.MonkeyPatch,
    self_duplicate: Instance,
    capsys: pytest.CaptureFixture[str],
) -> None:
    monkeypatch.setattr("sys.stdin", io.StringIO(emit_instance(self_duplicate)))

    assert run(["check"]) == 0
    assert "no bad item" in capsys.readouterr().out


def test_place_prints_item_side_and_slots(
    tmp_path: Path,
    double_collision: Instance,
    capsys: pytest.CaptureFixture[str],
) -> None:
    assert run(["place", write_instance(tmp_path, double_collision)]) == 0
    assert capsys.readouterr().out == "0 0 0\n1 1 1\n"


def test_place_reports_infeasible(
    tmp_path: Path,
    full_collision: Instance,
    capsys: pytest.CaptureFixture[str],
) -> None:
    assert run(["place", write_instance(tmp_path, full_collision)]) == EXIT_INFEASIBLE
    assert "infeasible" in capsys.readouterr().err


def test_oracle_prints_verdicts_and_witness(
    tmp_path: Path,
    chain: Instance,
    capsys: pytest.CaptureFixture[str],
) -> None:
    assert run(["oracle", write_instance(tmp_path, chain)]) == 0

    out = capsys.readouterr().out
    assert "brute_force: feasible" in out
    assert "implication_sat: feasible" in out
    assert "witness: 0 1 0" in out
    assert out.rstrip().endswith("agree")


def test_bounds_table(capsys: pytest.CaptureFixture[str]) -> None:
    assert run(["bounds", "--n", "1000", "--eps", "0.5", "--samples", "1000"]) == 0

    out = capsys.readouterr().out
    assert "1000, 1500, 1, 0.5" in out
    assert "0.036" in out
    assert "empirical edge frequency (1000 samples)" in out


def test_bounds_rejects_small_m(capsys: pytest.CaptureFixture[str]) -> None:
    assert run(["bounds", "--n", "1000", "--eps", "0.5", "--m", "1000"]) == EXIT_USAGE
    assert "violates" in capsys.readouterr().err


def test_experiment_writes_csv(tmp_path: Path) -> None:
    out = tmp_path / "sweep.csv"
    argv = ["experiment", "--n", "10", "20", "--eps", "0.5", "--trials", "5", "--seed", "4", "--out", str(out)]

    assert run(argv) == 0

    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert [line.split(",")[:2] for line in lines[1:]] == [["10", "15"], ["20", "30"]]


def test_experiment_from_preset_to_stdout(capsys: pytest.CaptureFixture[str]) -> None:
    assert run(["experiment", "--preset", "smoke", "--trials", "3"]) == 0

    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3
    assert lines[1].startswith("50,75,1,0.5,3,")


def test_experiment_needs_a_grid(capsys: pytest.CaptureFixture[str]) -> None:
    assert run(["experiment", "--trials", "3"]) == EXIT_USAGE
    assert "--preset" in capsys.readouterr().err


def test_census_prints_each_cell(capsys: pytest.CaptureFixture[str]) -> None:
    assert run(["census", "--n", "1", "--eps", "0.5", "--trials", "4"]) == 0

    out = capsys.readouterr().out
    assert "n=1 m=2 d=1 eps=0.5" in out
    assert "no failing trials" in out


def test_malformed_instance_is_a_usage_error(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    path = tmp_path / "bad.txt"
    path.write_text("1 4 1\n2 9\n", encoding="utf-8")

    assert run(["check", str(path)]) == EXIT_USAGE
    assert "index 9 ≥ m=4 at line 2" in capsys.readouterr().err


def test_missing_file_is_a_usage_error(tmp_path: Path) -> None:
    assert run(["place", str(tmp_path / "absent.txt")]) == EXIT_USAGE
