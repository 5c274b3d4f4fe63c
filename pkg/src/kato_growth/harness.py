"""Scenario pipeline: audit -> assemble -> integrate -> functional checks -> emit.

Checks downstream of a failed audit are recorded as skipped, never as
failures. Exit codes: 0 all requested checks passed, 2 a check failed,
3 the audit failed so checks were skipped, 4 configuration error.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .coefficients import AuditReport, audit_assumptions
from .distcalc import (
    contradiction_witness,
    derivative_sign,
    inject_negative_jump,
    is_nondecreasing,
    mollified_quotient_check,
    random_monotone,
    tight_instance,
    witness_holds,
    Bump as LemmaBump,
)
from .functionals import (
    FunctionalSeries,
    dichotomy_experiment,
    eval_Mplus,
    eval_N,
    find_m0_r0,
    functional_series,
    random_bumps,
    SmoothPath,
    verify_monotone_Mplus,
    verify_distributional_bound,
    verify_r2N,
)
from .media import check_separating_condition, check_ray_monotonicity
from .radial import InitialData, Trajectory, assemble, integrate
from .scenario import Scenario, ScenarioError, build_field, medium_of
from .sphere_basis import cached_basis

EXIT_OK, EXIT_CHECK_FAILED, EXIT_AUDIT_FAILED, EXIT_CONFIG = 0, 2, 3, 4
SKIPPED = "skipped (hypotheses unmet)"


@dataclass
class CheckResult:
    name: str
    status: str  # "pass", "fail", SKIPPED, "info"
    lines: list[str] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return self.status == "fail"

    @property
    def skipped(self) -> bool:
        return self.status == SKIPPED


@dataclass
class RunReport:
    scenario: Scenario
    checks: list[CheckResult]
    audit: AuditReport | None = None
    trajectory: Trajectory | None = None
    series: FunctionalSeries | None = None
    artifacts: dict = field(default_factory=dict)
    wall_time: float = 0.0
    status_notes: list[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        if any(c.failed for c in self.checks if c.name != "audit"):
            return EXIT_CHECK_FAILED
        if any(c.skipped or c.failed for c in self.checks):
            return EXIT_AUDIT_FAILED
        return EXIT_OK

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self) -> str:
        sc = self.scenario
        out = [f"scenario: {sc.name}", f"tool version: {__version__}", f"config sha256: {sc.config_hash}",
               f"seed: {sc.seed}", f"tolerance: {sc.tolerance:g}", f"wall time: {self.wall_time:.3f} s"]
        out += self.status_notes
        for c in self.checks:
            out.append(f"[{c.status}] {c.name}")
            out += ["    " + x for x in c.lines]
        for k, p in sorted(self.artifacts.items()):
            out.append(f"artifact {k}: {p}")
        out.append(f"exit code: {self.exit_code}")
        return "\n".join(out) + "\n"


def _initial(sc: Scenario, n_modes: int, r_start: float) -> InitialData:
    it = sc.initial
    r0 = it.r_init if it.r_init is not None else r_start + it.margin
    r0 = max(r0, r_start)
    if it.kind == "explicit":
        if len(it.v) != n_modes:
            raise ScenarioError(f"explicit initial data has {len(it.v)} modes; the basis has {n_modes}")
        return InitialData(r0, np.array(it.v), np.array(it.dv))
    if it.kind == "random":
        return InitialData.random(n_modes, r0, np.random.default_rng(sc.seed))
    return InitialData.default(n_modes, r0)


def run_lemma_suite(seed: int, count: int = 100) -> CheckResult:
    """Randomized monotonicity-lemma suite (monotone, injected jumps, tight witnesses)."""
    rng = np.random.default_rng(seed)
    grid = np.linspace(1.0, 10.0, 901)
    ok_mono = 0
    for _ in range(count):
        f = random_monotone(rng)
        ok_mono += derivative_sign(f).nonnegative and is_nondecreasing(f, grid).nondecreasing
    ok_jump = 0
    for _ in range(count):
        f, b, eta = inject_negative_jump(rng)
        cert = derivative_sign(f)
        mono = is_nondecreasing(f, grid)
        located = (not mono.nondecreasing and mono.violation[0] < b <= mono.violation[1]
                   and cert.kind == "jump" and cert.location == b and witness_holds(f, cert))
        ok_jump += bool(located)
    tight = []
    for _ in range(10):
        f, r0, h0 = tight_instance(rng)
        w = contradiction_witness(f, r0, h0)
        tight.append(w.integral / w.bound)
    tight = np.array(tight)
    ok_tight = bool(np.all((tight >= 1.0) & (tight <= 1.1)))
    quot = mollified_quotient_check(random_monotone(rng), [LemmaBump(3.0, 1.0), LemmaBump(6.0, 2.0)], [0.1, 0.01])
    passed = ok_mono == count and ok_jump == count and ok_tight and quot.ok
    lines = [f"monotone certificates -> nondecreasing: {ok_mono}/{count}",
             f"injected negative jumps flagged at the breakpoint: {ok_jump}/{count}",
             f"tight witnesses integral / (-eta0/3) in [1, 1.1]: {ok_tight} (range {tight.min():.4f}..{tight.max():.4f})",
             f"quotient integrals on a monotone instance >= -1e-9: {quot.ok} (min {quot.min_value:.3e})"]
    return CheckResult("lemmaA-suite", "pass" if passed else "fail", lines)


def run(sc: Scenario, out_dir: str | Path | None = None) -> RunReport:
    t0 = time.perf_counter()
    report = RunReport(sc, [])
    requested = sc.checks.run
    if "lemmaA-suite" in requested:
        report.checks.append(run_lemma_suite(sc.seed, sc.checks.lemma_count))
    if not sc.needs_field:
        report.wall_time = time.perf_counter() - t0
        if out_dir is not None:
            emit(report, out_dir)
        return report

    fld, gauges = build_field(sc)
    grid = sc.window.grid()
    audit = audit_assumptions(fld, gauges, grid)
    report.audit = audit
    strict = sc.checks.threshold == "strict"
    core_ok = audit.passed("core", strict)
    full_ok = audit.passed("full", strict)
    alines = audit.summary_lines()
    alines.append(f"threshold R* = {audit.threshold}; c0 = {audit.c0}; c1 = {audit.c1}; beta = {audit.beta}")
    med = medium_of(sc)
    if med is not None:
        sep = check_separating_condition(med)
        ray = check_ray_monotonicity(med, r_max=sc.window.r_end)
        alines.append(f"separating condition: {'pass' if sep else 'fail'}"
                      + ("" if sep else f" at interface {sep.interface} (level {sep.level:g})"))
        alines.append(f"ray monotonicity over {ray.n_rays} rays: {'pass' if ray else 'fail'}"
                      + ("" if ray else f" witness {ray.witness}"))
    if "audit" in requested:
        report.checks.append(CheckResult("audit", "pass" if full_ok else "fail", alines))
    g = audit.gauges(gauges)

    downstream = [c for c in requested if c not in ("audit", "lemmaA-suite")]
    if not downstream:
        report.wall_time = time.perf_counter() - t0
        if out_dir is not None:
            emit(report, out_dir)
        return report

    need_full = {"classify", "dichotomy"}
    if not core_ok:
        for c in downstream:
            report.checks.append(CheckResult(c, SKIPPED, ["core assumptions not certified on the window"]))
        report.wall_time = time.perf_counter() - t0
        if out_dir is not None:
            emit(report, out_dir)
        return report

    start = audit.start(strict)
    basis = cached_basis(sc.dim, sc.L)
    system = assemble(basis, fld, (sc.window.r_start, sc.window.r_end))
    init = _initial(sc, basis.n_modes, start)
    tgrid = grid[grid >= init.r_init]
    if tgrid.size == 0 or tgrid[0] != init.r_init:
        tgrid = np.concatenate([[init.r_init], tgrid])
    traj = integrate(system, init, tgrid, tol=sc.tolerance)
    report.trajectory = traj
    if traj.status != "ok":
        report.status_notes.append(f"integrator status: {traj.status} at r={traj.r[-1]:.6g} (informational)")
    R1 = float(traj.r[0])
    m0r = find_m0_r0(traj, g, audit.c0, audit.c1) if audit.c0 is not None and audit.c1 is not None else None
    m_ser = m0r.m0() if (m0r is not None and m0r.m0() is not None) else 1.0
    series = functional_series(traj, g, m=m_ser, R1=R1, r_ref=R1)
    report.series = series
    slack = sc.checks.monotone_slack

    for c in downstream:
        if c in need_full and not full_ok:
            report.checks.append(CheckResult(c, SKIPPED, ["full assumption set not certified on the window"]))
            continue
        if c == "monotone-Mplus":
            rep = verify_monotone_Mplus(series, g, R1, audit, slack=slack)
            report.checks.append(CheckResult(c, _st(rep), [rep.line()]))
        elif c == "r2N":
            if m0r is None or m0r.r0 is None or m0r.m0() is None:
                report.checks.append(CheckResult(c, "fail", ["r0 not reached on this grid"]))
                continue
            lines = [f"r0 = {m0r.r0:.10g}; c2 = sqrt(2 c0) + sqrt(2) = {m0r.c2_gauge:.10g}; "
                     f"analytic m0 = {m0r.m0_analytic:.10g}; empirical m0 = {m0r.m0_empirical}"]
            st = "pass"
            for m in (m0r.m0(), 2 * m0r.m0()):
                rep = verify_r2N(traj, g, m, m0r.r0, audit, slack=slack)
                lines.append(rep.line())
                st = "fail" if not rep.ok else st
            report.checks.append(CheckResult(c, st, lines))
        elif c == "right-continuity":
            report.checks.append(_right_continuity(traj, g, m_ser, sc.checks.continuity_slack))
        elif c in ("classify", "dichotomy"):
            if m0r is None or m0r.r0 is None:
                report.checks.append(CheckResult(c, "fail", ["r0 not reached on this grid"]))
                continue
            d = dichotomy_experiment(traj, g, audit, series, m0r.m0(), m0r.r0)
            if c == "classify":
                ok = d.verdict.case in ("I", "II")
                report.checks.append(CheckResult(c, "pass" if ok else "fail", d.verdict.lines()))
            else:
                report.checks.append(CheckResult(c, "pass" if d.ok else "fail", d.lines()))
        elif c == "distributional-bound":
            rng = np.random.default_rng(sc.seed)
            a, b = sc.window.r_start, sc.window.r_end
            mid = 0.5 * (a + b)
            paths = [SmoothPath.random(basis.n_modes, rng, mid) for _ in range(5)]
            bumps = random_bumps(rng, (a, min(b, a + 10)), 5, must_cover=system.jump_radii)
            rep = verify_distributional_bound(system, paths, bumps)
            report.checks.append(CheckResult(c, "pass" if rep.ok else "fail",
                                             [f"exact pairing: worst margin {rep.margins.min():.3e} over "
                                              f"{len(rep.margins)} (path, bump) pairs",
                                              f"difference quotient extrapolated to h -> 0: worst margin "
                                              f"{rep.extrapolated.min():.3e}",
                                              "finite-h quotient margins (informational): "
                                              + ", ".join(f"h={h:g}: {v:.3e}" for h, v in rep.quotient_gaps.items())]))
    report.wall_time = time.perf_counter() - t0
    if out_dir is not None:
        emit(report, out_dir)
    return report


def _st(rep) -> str:
    return "pass" if rep.ok else (SKIPPED if not rep.applicable else "fail")


def _right_continuity(traj: Trajectory, gauges, m: float, slack: float) -> CheckResult:
    """M+ and N at restart radii against their dense values just above."""
    jumps = [float(x) for x in traj.r[traj.restart]]
    if not jumps:
        return CheckResult("right-continuity", "pass", ["no restart radius inside the trajectory"])
    scale = max(1e-300, float(np.max(np.abs([eval_Mplus(traj, x) for x in traj.r]))))
    worst = 0.0
    lines = []
    for rj in jumps:
        at = eval_Mplus(traj, rj)
        nat = eval_N(traj, gauges, m, rj, r_ref=traj.r[0])
        d = 1e-12 * rj
        up = eval_Mplus(traj, rj + d)
        nup = eval_N(traj, gauges, m, rj + d, r_ref=traj.r[0])
        below = eval_Mplus(traj, rj, side="below")
        gap = max(abs(up - at) / scale, abs(nup - nat) / max(1e-300, abs(nat)))
        worst = max(worst, gap)
        lines.append(f"r={rj:.10g}: M+ {at:.12g} (from above {up:.12g}, left limit {below:.12g}); rel gap {gap:.3e}")
    ok = worst <= slack
    lines.append(f"worst relative gap {worst:.3e} vs slack {slack:g}")
    return CheckResult("right-continuity", "pass" if ok else "fail", lines)


def emit(report: RunReport, out_dir: str | Path) -> dict:
    """Write CSVs and the summary; returns the artifact map."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if report.trajectory is not None:
        report.artifacts["trajectory"] = str(report.trajectory.to_csv(out / "trajectory.csv"))
    if report.series is not None:
        report.artifacts["functionals"] = str(report.series.to_csv(out / "functionals.csv"))
    if report.audit is not None:
        report.artifacts["audit"] = str(_audit_csv(report.audit, out / "audit.csv"))
    report.artifacts["summary"] = str(out / "summary.txt")
    (out / "summary.txt").write_text(report.summary())
    return report.artifacts


def _audit_csv(audit: AuditReport, path: Path) -> Path:
    s = audit.samples
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "a", "b", "p", "h"])
        for k in range(len(s["r"])):
            w.writerow([repr(float(s[x][k])) for x in ("r", "a", "b", "p", "h")])
    return path

