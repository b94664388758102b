import subprocess
import sys

import pytest

from brim.cli import build_parser, main
from brim.graph import brute_force_maxcut, gen_random_graph, load_gset, save_gset


@pytest.fixture
def tiny(tmp_path):
    path = tmp_path / "tiny16.gset"
    save_gset(gen_random_graph(16, 0.4, "int:-3:3", seed=16), path)
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_emits_report_csv(capsys, tiny):
    code, out, _ = run(capsys, "solve", "--instance", tiny, "--solver", "brim", "--runs", 3,
                       "--seed", 7, "--budget", 10)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "solver,instance,seed,budget,wall_ms,cut,energy,distance"
    assert [line.split(",")[2] for line in lines[1:]] == ["7", "8", "9"]
    assert all(line.startswith("brim,tiny16,") for line in lines[1:])


def test_solve_is_deterministic(capsys, tiny, tmp_path):
    args = ["solve", "--instance", tiny, "--solver", "sa", "--runs", 4, "--seed", 3]
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert run(capsys, *args, "--out", a)[0] == 0
    assert run(capsys, *args, "--out", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_oracle_prints_exact_cut(capsys, tiny):
    code, out, _ = run(capsys, "oracle", "--instance", tiny)
    assert code == 0
    best, spins = brute_force_maxcut(load_gset(tiny))
    row = out.splitlines()[1].split(",")
    assert row[0] == "tiny16" and float(row[2]) == best
    assert row[3] == " ".join(str(int(x)) for x in spins)


def test_generate_roundtrip(capsys, tmp_path):
    out = tmp_path / "g.gset"
    code, _, _ = run(capsys, "generate", "--n", 30, "--density", 0.2, "--weights", "int:-2:2",
                     "--seed", 4, "--out", out)
    assert code == 0
    assert load_gset(out) == gen_random_graph(30, 0.2, "int:-2:2", seed=4)
    code, text, _ = run(capsys, "generate", "--kind", "toroidal", "--rows", 3, "--cols", 4)
    assert code == 0 and text.startswith("12 24\n")


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--solver", "nosuch", "--instance", "x.gset"],
        ["solve", "--instance", "x.gset", "--bogus-flag"],
        ["frobnicate"],
        [],
        ["solve"],
        ["sweep", "--instance", "x.gset"],
    ],
)
def test_usage_errors_exit_one(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1 and out == "" and "error" in err


def test_input_errors_exit_one(capsys, tiny, tmp_path):
    assert run(capsys, "solve", "--instance", tmp_path / "missing.gset")[0] == 1
    assert run(capsys, "solve", "--instance", tiny, "--set", "nosuch=1")[0] == 1
    broken = tmp_path / "broken.gset"
    broken.write_text("3 2\n1 2 1\n")
    code, _, err = run(capsys, "oracle", "--instance", broken)
    assert code == 1 and "line 2" in err
    assert run(capsys, "sweep", "--instance", tiny, "--budgets", "5,2")[0] == 1


def test_solver_fault_exits_two(capsys, tiny):
    nans = ",".join(["nan"] * 16)
    code, out, err = run(capsys, "solve", "--instance", tiny, "--set", f"init.vector={nans}")
    assert code == 2 and out == "" and "fault" in err and "seed 0" in err


def test_config_precedence(capsys, tiny, tmp_path):
    cfg = tmp_path / "sa.cfg"
    cfg.write_text("solver = sa\nsweeps = 30\nseed = 11\n")
    _, out, _ = run(capsys, "solve", "--instance", tiny, "--solver", "sa", "--config", cfg)
    assert out.splitlines()[1].split(",")[2:4] == ["11", "30"]
    _, out, _ = run(capsys, "solve", "--instance", tiny, "--solver", "sa", "--config", cfg,
                    "--set", "sweeps=40", "--seed", 2)
    assert out.splitlines()[1].split(",")[2:4] == ["2", "40"]
    _, out, _ = run(capsys, "solve", "--instance", tiny, "--solver", "sa", "--config", cfg,
                    "--set", "sweeps=40", "--budget", 50)
    assert out.splitlines()[1].split(",")[3] == "50"
    wrong = tmp_path / "brim.cfg"
    wrong.write_text("solver = brim\n")
    assert run(capsys, "solve", "--instance", tiny, "--solver", "sa", "--config", wrong)[0] == 1


def test_sweep_and_ab_and_table(capsys, tiny, tmp_path):
    code, out, _ = run(capsys, "sweep", "--instance", tiny, "--solver", "asa", "--budgets",
                       "5,50", "--runs", 3)
    assert code == 0 and out.splitlines()[0] == "budget,best_energy,median_energy,runs"
    assert len(out.splitlines()) == 3
    code, out, _ = run(capsys, "sweep", "--instance", tiny, "--solver", "asa",
                       "--budget-range", 1, 100, 3, "--runs", 2)
    assert [line.split(",")[0] for line in out.splitlines()[1:]] == ["1", "10", "100"]
    code, out, _ = run(capsys, "ab-perturb", "--instance", tiny, "--periods", "inf,2",
                       "--runs", 2, "--budget", 8)
    assert code == 0 and out.splitlines()[0].startswith("seed,best_seen@inf,best_seen@2")
    reg = tmp_path / "reg.txt"
    best, _ = brute_force_maxcut(load_gset(tiny))
    reg.write_text(f"tiny16 {best} oracle\n")
    code, out, _ = run(capsys, "table", "--instance", tiny, "--solver", "asa", "--runs", 20,
                       "--registry", reg)
    assert code == 0
    assert out.splitlines() == ["instance,best,ref,asa,registry_update", f"tiny16,{best:g},oracle,0,"]
    code, _, err = run(capsys, "table", "--instance", tiny, "--runs", 1)
    assert code == 1 and "tiny16" in err


@pytest.mark.parametrize("command", ["solve", "sweep", "oracle", "generate", "ab-perturb", "table"])
def test_help_lists_flags(command):
    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "command").choices[command]
    text = sub.format_help()
    for action in sub._actions:
        for flag in action.option_strings:
            assert flag in text
    assert "--out" in text and "--seed" in text


def test_console_entry_point(tiny):
    proc = subprocess.run([sys.executable, "-m", "brim.cli", "oracle", "--instance", str(tiny)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("instance,n,max_cut")
