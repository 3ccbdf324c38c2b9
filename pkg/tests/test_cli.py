import csv
import subprocess
import sys

import pytest

from pinsync.cli import main
from pinsync.graph import load_edge_list, write_edge_list
from pinsync.harness import SIM_HEADER, TRACE_HEADER

from _helpers import path_graph

SMALL = ["--model", "ER", "--n", "40", "--er-p", "0.2", "--connected", "--seed", "3"]


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_generate(tmp_path, capsys):
    assert main(["generate", *SMALL, "-o", str(tmp_path)]) == 0
    g = load_edge_list(tmp_path / "er.txt")
    assert g.n == 40 and g.is_connected()
    assert "N=40" in capsys.readouterr().out
    # same seed, same file
    main(["generate", *SMALL, "-o", str(tmp_path / "again")])
    assert (tmp_path / "er.txt").read_text() == (tmp_path / "again" / "er.txt").read_text()


def test_seed_changes_network(tmp_path):
    main(["generate", *SMALL, "-o", str(tmp_path / "a")])
    main(["generate", *SMALL[:-1], "4", "-o", str(tmp_path / "b")])
    assert (tmp_path / "a" / "er.txt").read_text() != (tmp_path / "b" / "er.txt").read_text()


def test_select(tmp_path, capsys):
    assert main(["select", *SMALL, "--k", "5", "--strategies", "degree,pbo", "-o", str(tmp_path)]) == 0
    r = rows(tmp_path / "trace_er.csv")
    assert tuple(r[0]) == TRACE_HEADER and len(r) == 11
    assert "lambda1=" in capsys.readouterr().out


def test_select_graph_file(tmp_path):
    write_edge_list(path_graph(4), tmp_path / "p4.txt")
    assert main(["select", "--graph", str(tmp_path / "p4.txt"), "--k", "1", "--strategies", "bfg",
                 "-o", str(tmp_path)]) == 0
    r = rows(tmp_path / "trace_p4.csv")
    # pinning node 1 leaves {0} and the edge 2-3: min(1, (3 - sqrt 5) / 2)
    assert r[1][2] == "1" and float(r[1][3]) == pytest.approx(0.3819660112501051)


def test_curve(tmp_path, capsys):
    assert main(["curve", *SMALL, "--k", "0.25", "--k-points", "3", "-o", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    for name in ("curve_er.csv", "gap_er.csv", "timing_er.csv"):
        assert name in out and (tmp_path / name).exists()


def test_robustness(tmp_path):
    assert main(["robustness", *SMALL, "--k-list", "4,8", "--ratios", "0.25,0.5", "--trials", "3",
                 "-o", str(tmp_path)]) == 0
    r = rows(tmp_path / "robustness_er.csv")
    assert len(r) == 1 + 4 * 2 * 3


def test_simulate(tmp_path, capsys):
    assert main(["simulate", *SMALL, "--k", "6", "--strategies", "degree", "--t-max", "0.2",
                 "--sim-trials", "2", "-o", str(tmp_path)]) == 0
    r = rows(tmp_path / "simulate_er.csv")
    assert tuple(r[0]) == SIM_HEADER and len(r) == 3
    assert "mean_sync_time" in capsys.readouterr().out


def test_bench(tmp_path, capsys):
    argv = ["bench", "--model", "ER", "--er-p", "0.2", "--sizes", "30,40,50", "--k", "0.1",
            "--strategies", "degree,pbo,bfg", "-o", str(tmp_path)]
    assert main(argv) == 0
    out = capsys.readouterr().out
    assert "pbo exponent" in out and "speedup" in out
    assert (tmp_path / "timing_summary.csv").exists()


def test_real(tmp_path, capsys):
    write_edge_list(path_graph(6), tmp_path / "p6.txt")
    assert main(["real", "--k-list", "1,2", "--trials", "2", "--ratios", "0.5", "-o", str(tmp_path),
                 str(tmp_path / "p6.txt")]) == 0
    assert (tmp_path / "plateau.csv").exists()


@pytest.mark.parametrize("argv, needle", [
    (["select", "--k", "3"], "no network"),
    (["select", "--graph", "/nonexistent/net.txt", "--k", "1"], "net.txt"),
    (["select", *SMALL, "--k", "40"], "budget"),
    (["select", *SMALL, "--strategies", "random"], "random"),
    (["real", "/nonexistent/celegans.txt"], "celegans"),
    (["select", "--config", "/nonexistent/exp.ini"], "exp.ini"),
])
def test_errors(argv, needle, tmp_path, capsys):
    assert main([*argv, "-o", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    assert err.startswith(f"pinsync {argv[0]}: error:") and needle in err


def test_bad_edge_list(tmp_path, capsys):
    (tmp_path / "bad.txt").write_text("0 1\n1 2 3\n")
    assert main(["select", "--graph", str(tmp_path / "bad.txt"), "--k", "1", "-o", str(tmp_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "pinsync.cli", "generate", *SMALL, "-o", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and (tmp_path / "er.txt").exists()
    proc = subprocess.run([sys.executable, "-m", "pinsync.cli", "select", "--k", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 1 and "error" in proc.stderr
