"""Command line: ``kato-growth {audit,run,suite,lemma-a}``.

Exit codes: 0 all requested checks passed, 2 a check failed, 3 the audit
failed (downstream checks skipped), 4 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .harness import EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_OK, RunReport, emit, run, run_lemma_suite
from .scenario import DEFAULT_SEED, Scenario, ScenarioError, load_scenario, shipped_scenarios


def _common(p: argparse.ArgumentParser, config_required: bool = True) -> None:
    p.add_argument("--config", required=config_required, help="scenario TOML file")
    p.add_argument("--out", help="output directory for CSVs and summary.txt")
    p.add_argument("--tolerance", type=float, help="integrator relative tolerance")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--grid", type=int, help="number of grid points on the window")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kato-growth", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("audit", help="audit the assumptions of a scenario's coefficient field"))
    _common(sub.add_parser("run", help="run a scenario's full pipeline"))
    s = sub.add_parser("suite", help="run a directory of scenarios (default: the shipped catalog)")
    _common(s, config_required=False)
    s.add_argument("--jobs", type=int, default=1, help="scenarios run in parallel (processes)")
    lm = sub.add_parser("lemma-a", help="randomized distributional-monotonicity suite")
    lm.add_argument("--out", help="output directory for summary.txt")
    lm.add_argument("--seed", type=int, default=DEFAULT_SEED)
    lm.add_argument("--count", type=int, default=100, help="instances per family")
    return ap


def _load(args) -> Scenario:
    sc = load_scenario(args.config)
    return sc.with_overrides(seed=args.seed, tolerance=args.tolerance, points=args.grid)


def _print(report: RunReport) -> None:
    sys.stdout.write(report.summary())


def _suite_one(path: str, out: str | None, seed, tolerance, grid) -> tuple[str, int, int | None, str]:
    sc = load_scenario(path).with_overrides(seed=seed, tolerance=tolerance, points=grid)
    rep = run(sc, None if out is None else Path(out) / sc.name)
    return sc.name, rep.exit_code, sc.expect_exit, f"{rep.wall_time:.2f}"


def cmd_suite(args) -> int:
    if args.config:
        p = Path(args.config)
        paths = sorted(p.glob("*.toml")) if p.is_dir() else [p]
    else:
        paths = shipped_scenarios()
    if not paths:
        raise ScenarioError(f"no scenario files found under {args.config}")
    for p in paths:  # validate everything before running anything
        load_scenario(p)
    jobs = [(str(p), args.out, args.seed, args.tolerance, args.grid) for p in paths]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            results = list(ex.map(_suite_one, *zip(*jobs)))
    else:
        results = [_suite_one(*j) for j in jobs]
    bad = 0
    for name, code, expect, wall in results:
        want = EXIT_OK if expect is None else expect
        ok = code == want
        bad += not ok
        print(f"{'ok  ' if ok else 'FAIL'} {name}: exit {code} (expected {want}) in {wall} s")
    return EXIT_OK if bad == 0 else EXIT_CHECK_FAILED


def cmd_lemma(args) -> int:
    res = run_lemma_suite(args.seed, args.count)
    text = "\n".join([f"lemma-a suite, seed {args.seed}", f"[{res.status}] {res.name}"]
                     + ["    " + x for x in res.lines]) + "\n"
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.txt").write_text(text)
    return EXIT_OK if res.status == "pass" else EXIT_CHECK_FAILED


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "lemma-a":
            return cmd_lemma(args)
        if args.command == "suite":
            return cmd_suite(args)
        sc = _load(args)
        if args.command == "audit":
            sc = dataclasses.replace(sc, checks=dataclasses.replace(sc.checks, run=("audit",)))
        rep = run(sc)
        if args.out:
            emit(rep, args.out)
        _print(rep)
        return rep.exit_code
    except ScenarioError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
