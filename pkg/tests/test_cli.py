import shutil
import subprocess
import sys

from kato_growth.cli import main
from kato_growth.harness import EXIT_AUDIT_FAILED, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_OK, run, run_lemma_suite
from kato_growth.scenario import parse_scenario, shipped_scenarios

CATALOG = {p.stem: p for p in shipped_scenarios()}

SMALL_SHELL = """
name = "small_shell"
dim = 3
L = 1
seed = 5
expect_exit = 0

[family]
kind = "shells"
r_inner = 0.5
radii = [2.0]
nu = [1.0, 4.0]

[window]
r_start = 1.0
r_end = 12.0
points = 60

[initial]
kind = "random"

[checks]
run = ["audit", "monotone-Mplus", "r2N", "right-continuity"]
"""


def test_exit_ok_and_outputs(tmp_path, capsys):
    assert main(["run", "--config", str(CATALOG["kato"]), "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "config sha256" in out and "seed" in out
    for name in ("trajectory.csv", "functionals.csv", "audit.csv", "summary.txt"):
        assert (tmp_path / name).stat().st_size > 0


def test_exit_check_failed():
    assert main(["run", "--config", str(CATALOG["forced_check_failure"])]) == EXIT_CHECK_FAILED


def test_exit_audit_failed(capsys):
    assert main(["run", "--config", str(CATALOG["decreasing_shell"])]) == EXIT_AUDIT_FAILED
    assert "skipped (hypotheses unmet)" in capsys.readouterr().out


def test_exit_config_error(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text(SMALL_SHELL.replace("[gauges]", "") + "[gauges]\nepsilon = 3.0\n")
    assert main(["run", "--config", str(bad)]) == EXIT_CONFIG
    assert "gauges.epsilon" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.toml")]) == EXIT_CONFIG
    assert main(["run", "--config", str(CATALOG["kato"]), "--tolerance", "-1"]) == EXIT_CONFIG


def test_audit_subcommand_runs_audit_only(capsys):
    assert main(["audit", "--config", str(CATALOG["potential"])]) == EXIT_OK
    out = capsys.readouterr().out
    assert "V_long-decay" in out and "threshold R* = " in out
    assert "E-monotone" not in out and "dichotomy" not in out


def test_determinism_byte_identical(tmp_path):
    cfg = tmp_path / "s.toml"
    cfg.write_text(SMALL_SHELL)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", str(cfg), "--out", str(a)]) == EXIT_OK
    assert main(["run", "--config", str(cfg), "--out", str(b)]) == EXIT_OK
    for name in ("trajectory.csv", "functionals.csv", "audit.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    c = tmp_path / "c"
    main(["run", "--config", str(cfg), "--out", str(c), "--seed", "6"])
    assert (a / "trajectory.csv").read_bytes() != (c / "trajectory.csv").read_bytes()


def test_suite_directory(tmp_path, capsys):
    d = tmp_path / "cat"
    d.mkdir()
    (d / "small.toml").write_text(SMALL_SHELL)
    shutil.copy(CATALOG["decreasing_shell"], d)
    assert main(["suite", "--config", str(d)]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("ok  ") == 2
    (d / "small.toml").write_text(SMALL_SHELL.replace("expect_exit = 0", "expect_exit = 3"))
    assert main(["suite", "--config", str(d)]) == EXIT_CHECK_FAILED


def test_suite_validates_before_running(tmp_path, capsys):
    d = tmp_path / "cat"
    d.mkdir()
    (d / "a.toml").write_text(SMALL_SHELL)
    (d / "b.toml").write_text("name = [")
    assert main(["suite", "--config", str(d)]) == EXIT_CONFIG
    assert "ok  " not in capsys.readouterr().out


def test_lemma_subcommand(tmp_path, capsys):
    assert main(["lemma-a", "--count", "10", "--seed", "3", "--out", str(tmp_path)]) == EXIT_OK
    assert "[pass]" in (tmp_path / "summary.txt").read_text()


def test_lemma_suite_results():
    res = run_lemma_suite(1, 20)
    assert res.status == "pass"
    text = "\n".join(res.lines)
    assert "20/20" in text


def test_right_continuity_report():
    sc = parse_scenario(SMALL_SHELL)
    rep = run(sc)
    rc = [c for c in rep.checks if c.name == "right-continuity"][0]
    assert rc.status == "pass" and any("r=2" in ln for ln in rc.lines)


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "kato_growth.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "0.1.0" in r.stdout
