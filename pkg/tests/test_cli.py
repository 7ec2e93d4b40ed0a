import pytest

from stg2.cli import EXIT_INFEASIBLE, EXIT_INPUT, EXIT_OK, EXIT_TIMEOUT, bench_rows, main
from stg2.instance_io import fig2_instance, serialize_instance
from stg2.planner import SolverParams

from conftest import small_instance

SMALL = ["--nodes", "10", "--links", "18", "--demands", "20"]


@pytest.fixture
def fig2_file(tmp_path):
    p = tmp_path / "fig2.stg2"
    p.write_text(serialize_instance(fig2_instance()))
    return p


def test_solve_and_verify_roundtrip(fig2_file, tmp_path, capsys):
    out = tmp_path / "fig2.stg2sol"
    assert main(["solve", str(fig2_file), "--out", str(out)]) == EXIT_OK
    text = capsys.readouterr().out
    assert "status=ok" in text and "objective=7" in text
    assert main(["verify", str(fig2_file), str(out)]) == EXIT_OK
    assert "feasible=1" in capsys.readouterr().out


def test_tampered_solution_fails_verification(fig2_file, tmp_path, capsys):
    out = tmp_path / "fig2.stg2sol"
    main(["solve", str(fig2_file), "--out", str(out)])
    out.write_text(out.read_text().replace("LP 3 1 3 4", "LP 3 0 3 4"))
    capsys.readouterr()
    assert main(["verify", str(fig2_file), str(out)]) == EXIT_INFEASIBLE
    assert "kind=wavelength-assignment" in capsys.readouterr().out


def test_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.stg2"
    bad.write_text("STG2 2 1 0 2 100 500\nLINK 0 0 1 x\n")
    assert main(["solve", str(bad)]) == EXIT_INPUT
    assert "line 2" in capsys.readouterr().err
    assert main(["solve", str(tmp_path / "missing.stg2")]) == EXIT_INPUT
    assert main(["solve", str(bad), "--threads", "0"]) == EXIT_INPUT
    assert main(["generate", "--nodes", "3"]) == EXIT_INPUT


def test_infeasible_exit_code(tmp_path, capsys):
    p = tmp_path / "tight.stg2"
    p.write_text("STG2 4 4 3 1 100 1000\nLINK 0 0 1 10\nLINK 1 1 2 10\nLINK 2 2 3 10\nLINK 3 3 0 10\n"
                 "DEMAND 0 0 2 60\nDEMAND 1 1 3 60\nDEMAND 2 0 1 60\n")
    assert main(["solve", str(p)]) == EXIT_INFEASIBLE
    out = capsys.readouterr().out
    assert "status=infeasible" in out and "blocked_scenario=" in out


def test_time_limit_exit_code(tmp_path, capsys):
    p = tmp_path / "i.stg2"
    p.write_text(serialize_instance(small_instance(1)))
    assert main(["solve", str(p), "--time-limit", "0.000000001"]) == EXIT_TIMEOUT
    assert "status=timeout" in capsys.readouterr().out


def test_generate_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["generate", "--seed", "9", *SMALL, "--out", str(a)]) == EXIT_OK
    assert main(["generate", "--seed", "9", *SMALL, "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    main(["generate", "--seed", "10", *SMALL, "--out", str(b)])
    assert a.read_bytes() != b.read_bytes()


def test_generate_to_stdout(capsys):
    assert main(["generate", "--seed", "2", *SMALL, "--volumes", "10", "25", "--volume-weights", "1", "1"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("STG2 10 18 20 8 100")
    vols = {int(line.split()[4]) for line in out.splitlines() if line.startswith("DEMAND")}
    assert vols <= {10, 25}


def test_bench_rows_one_per_instance_and_thread_count():
    insts = [(f"s{s}", small_instance(s, nodes=8, links=14, demands=10)) for s in (1, 3)]
    rows = bench_rows(insts, [1, 2], SolverParams())
    assert [(r["instance"], r["M"]) for r in rows] == [("s1", 1), ("s1", 2), ("s3", 1), ("s3", 2)]
    assert all(r["status"] in ("ok", "Infeasible") for r in rows)


def test_bench_command_prints_table(capsys):
    code = main(["bench", "--instances", "1", "--seed", "1", *SMALL, "--thread-counts", "1", "2"])
    out = capsys.readouterr().out
    assert code in (EXIT_OK, EXIT_INFEASIBLE)
    assert "peak_rss_mb=" in out and out.count("seed1") >= 2
