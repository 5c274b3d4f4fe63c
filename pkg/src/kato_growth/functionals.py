"""Growth functionals along trajectories and the checks built on them.

Notation: (G v, v) is the quadratic form of a Gram matrix (or diagonal) on a
mode vector, always real-parted. With w = r^m v:

    M+(v, r)   = |v'|^2 - (C0 v, v) - (B v, v)
    M(v, r)    = |v'|^2 - (C_R v, v),          C_R = Gram(Q0 + Re Q1)
    N(v, m, r) = M+(w, r) + (m(m+1) - F(r)) r^-2 |w|^2
    S(r)       = int_{|x|=r} |du/dr|^2 - Re q |u|^2 dS
    E(r)       = exp(int_{R1}^r h) M+(v, r)

Every monotone check uses one slack policy: a step may decrease by at most
MONOTONE_SLACK times the largest magnitude of the quantity on the checked tail.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import integrate as spi

from .coefficients import AuditReport, RadialGauges, p_of_r
from .radial import Trajectory

MONOTONE_SLACK = 1e-8
CHAIN_SLACK = 1e-10
BOUND_SLACK = 1e-9
M_SCAN = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)
CASE_I_MIN_WITNESSES = 10


def qform(G: np.ndarray, v: np.ndarray) -> float:
    """Re (G v, v) for a matrix or a diagonal vector."""
    if G.ndim == 1:
        return float(np.real(np.sum(G * np.abs(v) ** 2)))
    return float(np.real(np.vdot(v, G @ v)))


# ---------------------------------------------------------------------------
# Pointwise evaluators


def _state(traj: Trajectory, r: float):
    i = int(np.searchsorted(traj.r, r))
    if i < len(traj.r) and traj.r[i] == r:
        return traj.v[i], traj.dv[i]
    return traj.at(r)


def eval_Mplus(traj: Trajectory, r: float, side: str = "above") -> float:
    v, dv = _state(traj, r)
    s = traj.system
    return float(np.vdot(dv, dv).real) - qform(s.C0(r, side), v) - qform(s.B(r), v)


def eval_M(traj: Trajectory, r: float, side: str = "above") -> float:
    v, dv = _state(traj, r)
    return float(np.vdot(dv, dv).real) - qform(traj.system.CR(r, side), v)


def eval_N(traj: Trajectory, gauges: RadialGauges, m: float, r: float, side: str = "above",
           r_ref: float = 1.0) -> float:
    """N(v, m, r) computed through w = r^m v, times the constant r_ref^(-2m)."""
    if not m > 0:
        raise ValueError(f"m must be positive, got {m}")
    v, dv = _state(traj, r)
    s = traj.system
    fac = (r / r_ref) ** m
    w = fac * v
    dw = fac * dv + (m / r) * w
    Mp = float(np.vdot(dw, dw).real) - qform(s.C0(r, side), w) - qform(s.B(r), w)
    return Mp + (m * (m + 1) - float(gauges.F(r))) / r**2 * float(np.vdot(w, w).real)


def eval_surface(traj: Trajectory, r: float, side: str = "above") -> float:
    """S(r) by synthesizing u, du/dr on a sphere quadrature (split at angular jumps)."""
    v, dv = _state(traj, r)
    s = traj.system
    basis = s.basis
    N = basis.dim
    levels = s.field.levels_at(r)
    if levels:
        nodes, weights, Y = basis.split_quadrature(levels)
    else:
        nodes, weights, Y = basis.nodes, basis.weights, basis.values
    if s.field.radial:
        e = np.zeros((1, N))
        e[0, -1] = 1
        req = np.full(len(nodes), float(np.real(s.field.q(r, e, side=side)[0])))
    else:
        req = np.real(s.field.q(r, nodes, side=side))
    sv = Y @ v
    sdv = Y @ dv
    scale = r ** (-(N - 1) / 2)
    u = scale * sv
    du = scale * (sdv - (N - 1) / (2 * r) * sv)
    return float(r ** (N - 1) * np.sum(weights * (np.abs(du) ** 2 - req * np.abs(u) ** 2)))


def dMplus_dr(traj: Trajectory, r: float) -> float:
    """Exact derivative of M+ between jumps: 2Re(C1 v, v') - (C0r v, v) + (2/r)(B v, v)."""
    v, dv = _state(traj, r)
    s = traj.system
    C1 = s.C1(r)
    c1v = C1 * v if C1.ndim == 1 else C1 @ v
    return 2 * float(np.real(np.vdot(dv, c1v))) - qform(s.C0r(r), v) + 2 / r * qform(s.B(r), v)


# ---------------------------------------------------------------------------
# Series


@dataclass
class FunctionalSeries:
    r: np.ndarray
    Mplus: np.ndarray
    M: np.ndarray
    N: np.ndarray
    absV2: np.ndarray
    twoReVpV: np.ndarray
    S: np.ndarray
    E: np.ndarray
    m: float
    R1: float
    r_ref: float
    flags: dict = field(default_factory=dict)

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        flag_names = sorted(self.flags)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["r", "Mplus", "M", "N_m", "absV2", "twoReVpV", "S", "E", *flag_names])
            for k in range(len(self.r)):
                row = [repr(float(x[k])) for x in
                       (self.r, self.Mplus, self.M, self.N, self.absV2, self.twoReVpV, self.S, self.E)]
                row += [str(int(bool(self.flags[f][k]))) for f in flag_names]
                w.writerow(row)
        return path


def functional_series(traj: Trajectory, gauges: RadialGauges, m: float = 1.0,
                      R1: float | None = None, r_ref: float | None = None) -> FunctionalSeries:
    r = traj.r
    R1 = float(r[0]) if R1 is None else float(R1)
    r_ref = float(r[0]) if r_ref is None else r_ref
    Mp = np.array([eval_Mplus(traj, x) for x in r])
    M = np.array([eval_M(traj, x) for x in r])
    N = np.array([eval_N(traj, gauges, m, x, r_ref=r_ref) for x in r])
    S = np.array([eval_surface(traj, x) for x in r])
    a2 = np.real(np.einsum("ij,ij->i", traj.v.conj(), traj.v))
    rv = 2 * np.real(np.einsum("ij,ij->i", traj.v.conj(), traj.dv))
    weight = np.array([math.exp(gauges.h_integral(R1, x)) if x >= R1 else np.nan for x in r])
    E = weight * Mp
    if not (np.all(np.isfinite(Mp)) and np.all(np.isfinite(M)) and np.all(np.isfinite(S))):
        raise FloatingPointError("non-finite functional values; shorten the window or rescale the seed")
    return FunctionalSeries(r, Mp, M, N, a2, rv, S, E, m, R1, r_ref, {"restart": traj.restart.copy()})


# ---------------------------------------------------------------------------
# Monotone checks


@dataclass
class MonotoneReport:
    name: str
    status: str  # "pass", "fail", "not applicable"
    worst_step: float = 0.0
    scale: float = 0.0
    slack: float = MONOTONE_SLACK
    r_worst: float | None = None
    r_range: tuple[float, float] | None = None
    note: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "pass"

    @property
    def applicable(self) -> bool:
        return self.status != "not applicable"

    def line(self) -> str:
        if not self.applicable:
            return f"{self.name}: not applicable - {self.note}"
        rng = "" if self.r_range is None else f" on [{self.r_range[0]:.6g}, {self.r_range[1]:.6g}]"
        return (f"{self.name}: {self.status}{rng} worst step {self.worst_step:.3e} "
                f"vs -{self.slack:g}*{self.scale:.3e}" + (f" ({self.note})" if self.note else ""))


def monotone_report(name: str, r: np.ndarray, values: np.ndarray, *, slack: float = MONOTONE_SLACK,
                    start: float | None = None, note: str = "") -> MonotoneReport:
    """Check that values are nondecreasing over r >= start (shared slack policy)."""
    r = np.asarray(r, float)
    values = np.asarray(values, float)
    sel = np.ones(len(r), bool) if start is None else r >= start
    rr, vv = r[sel], values[sel]
    if len(rr) < 2:
        return MonotoneReport(name, "not applicable", note="fewer than two radii on the checked tail")
    steps = np.diff(vv)
    scale = float(np.max(np.abs(vv)))
    i = int(np.argmin(steps))
    ok = bool(steps[i] >= -slack * scale)
    return MonotoneReport(name, "pass" if ok else "fail", float(steps[i]), scale, slack,
                          float(rr[i + 1]), (float(rr[0]), float(rr[-1])), note)


def not_applicable(name: str, why: str = "hypotheses unmet") -> MonotoneReport:
    return MonotoneReport(name, "not applicable", note=why)


def verify_monotone_Mplus(series: FunctionalSeries, gauges: RadialGauges, R1: float | None = None,
                          audit: AuditReport | None = None, slack: float = MONOTONE_SLACK) -> MonotoneReport:
    """E(r) = exp(int_{R1}^r h) M+ must not decrease beyond R1."""
    if audit is not None and not audit.passed("core"):
        return not_applicable("E-monotone")
    R1 = series.R1 if R1 is None else R1
    r = series.r
    E = np.array([math.exp(gauges.h_integral(R1, x)) * mp if x >= R1 else np.nan
                  for x, mp in zip(r, series.Mplus)])
    return monotone_report("E-monotone", r, E, slack=slack, start=R1)


# ---------------------------------------------------------------------------
# m0 / r0


@dataclass
class M0Result:
    r0: float | None
    m0_analytic: float | None
    c2_gauge: float | None
    m0_empirical: float | None
    scan: dict
    refused: bool
    reports: dict = field(default_factory=dict)

    def m0(self) -> float | None:
        """The value used downstream: the certified analytic threshold."""
        return self.m0_analytic


def r2N_series(traj: Trajectory, gauges: RadialGauges, m: float, r_ref: float) -> np.ndarray:
    return np.array([x * x * eval_N(traj, gauges, m, x, r_ref=r_ref) for x in traj.r])


def find_r0(traj: Trajectory, c1: float, directions=None) -> float | None:
    """Smallest grid radius from which r^2 p(r) >= 2 c1 at every later grid radius."""
    fld = traj.system.field
    ok = np.array([x * x * p_of_r(fld, x, directions) >= 2 * c1 for x in traj.r])
    if not ok[-1]:
        return None
    bad = np.nonzero(~ok)[0]
    return float(traj.r[0] if bad.size == 0 else traj.r[bad[-1] + 1])


def find_m0_r0(traj: Trajectory, gauges: RadialGauges, c0: float, c1: float,
               m_scan: Sequence[float] = M_SCAN, slack: float = MONOTONE_SLACK) -> M0Result:
    """r0 from r^2 p >= 2 c1; m0 both from the discriminant bound and by scanning."""
    r0 = find_r0(traj, c1)
    c2 = math.sqrt(2 * c0) + math.sqrt(2) if c0 is not None else None
    m_an = max((c2 * c2 - 1) / 2, 0.0) if c2 is not None else None
    if m_an is not None and m_an == 0.0:
        m_an = min(m_scan)
    scan, reports = {}, {}
    emp = None
    if r0 is not None:
        for m in m_scan:
            rep = monotone_report(f"r2N-monotone(m={m:g})", traj.r, r2N_series(traj, gauges, m, r0),
                                  slack=slack, start=r0)
            scan[m] = rep.worst_step / rep.scale if rep.scale else 0.0
            reports[m] = rep
            if rep.ok and emp is None:
                emp = m
                break
    return M0Result(r0, m_an, c2, emp, scan, emp is None, reports)


def verify_r2N(traj: Trajectory, gauges: RadialGauges, m: float, r0: float,
               audit: AuditReport | None = None, slack: float = MONOTONE_SLACK) -> MonotoneReport:
    name = f"r2N-monotone(m={m:.6g})"
    if audit is not None and not audit.passed("core"):
        return not_applicable(name)
    return monotone_report(name, traj.r, r2N_series(traj, gauges, m, r0), slack=slack, start=r0)


# ---------------------------------------------------------------------------
# Dichotomy


@dataclass
class DichotomyVerdict:
    case: str  # "I", "II", "inconclusive", "inconclusive (trivial tail)"
    m1: float | None = None
    r1: float | None = None
    r2: float | None = None
    witnesses: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    r3: float | None = None
    c2_bound: float | None = None
    c3_prime: float | None = None
    R2_prime: float | None = None
    c3: float | None = None
    R2: float | None = None
    compact_support_triggered: bool = False
    note: str = ""

    def lines(self) -> list[str]:
        out = [f"case: {self.case}" + (f" ({self.note})" if self.note else "")]
        for k in ("m1", "r1", "r2", "r3", "c2_bound", "R2_prime", "c3_prime", "c3", "R2"):
            val = getattr(self, k)
            if val is not None:
                out.append(f"  {k} = {val:.10g}")
        out.append(f"  witnesses: {len(self.witnesses)}")
        for k, v in self.checks.items():
            out.append(f"  {k}: {v}")
        out.append(f"  compact-support criterion triggered: {self.compact_support_triggered}")
        return out


def choose_m1(traj: Trajectory, gauges: RadialGauges, m0: float, r0: float,
              max_doublings: int = 30) -> tuple[float | None, float | None]:
    """Smallest m = m0 * 2^k with r1^2 N(v, m, r1) > 0 at the first r1 >= r0 where v != 0."""
    a2 = np.real(np.einsum("ij,ij->i", traj.v.conj(), traj.v))
    idx = np.nonzero((traj.r >= r0) & (a2 > 0))[0]
    if idx.size == 0:
        return None, None
    r1 = float(traj.r[idx[0]])
    m = m0
    for _ in range(max_doublings):
        if eval_N(traj, gauges, m, r1, r_ref=r1) > 0:
            return m, r1
        m *= 2
    return None, r1


def classify_case(traj: Trajectory, gauges: RadialGauges, m1: float, r1: float | None = None,
                  re_Q_nonpositive: bool | None = None) -> DichotomyVerdict:
    """Case I / Case II on the finite grid, with the follow-up chains checked."""
    r = traj.r
    r1 = float(r[0]) if r1 is None else r1
    a2 = np.real(np.einsum("ij,ij->i", traj.v.conj(), traj.v))
    lhs = 2 * np.real(np.einsum("ij,ij->i", traj.v.conj(), traj.dv))
    F = np.array([float(gauges.F(x)) for x in r])
    rhs = F * a2 / (2 * m1 * r)
    third = r >= r[0] + 2 * (r[-1] - r[0]) / 3
    if a2[third].max() <= 1e-300 * max(1.0, a2.max()):
        return DichotomyVerdict("inconclusive (trivial tail)", m1, r1, note="|v| vanishes on the final third")
    hold_I = (lhs <= rhs) & (r >= r1)
    wit = r[hold_I & third]
    span = r[-1] - r[0]
    if wit.size >= CASE_I_MIN_WITNESSES:
        out = DichotomyVerdict("I", m1, r1, witnesses=wit.tolist())
        _case_I_followup(traj, gauges, out, r[hold_I])
        return out
    if wit.size == 0:
        bad = np.nonzero(lhs <= rhs)[0]
        r2 = float(r[0] if bad.size == 0 else r[bad[-1] + 1])
        r2 = max(r2, r1)
        out = DichotomyVerdict("II", m1, r1, r2=r2)
        _case_II_followup(traj, gauges, out, re_Q_nonpositive)
        return out
    return DichotomyVerdict("inconclusive", m1, r1, witnesses=wit.tolist(),
                            note=f"{wit.size} Case I radii in the final third; extend the window "
                                 f"by at least {span:.6g} to r={r[-1] + span:.6g}")


def _case_I_followup(traj, gauges, out: DichotomyVerdict, radii: np.ndarray):
    m1 = out.m1
    worst_chain, applicable, positive = np.inf, 0, 0
    for x in radii:
        v, dv = _state(traj, x)
        a2 = float(np.vdot(v, v).real)
        Fx = float(gauges.F(x))
        # r^-2m |w'|^2 <= |v'|^2 + (F/2 + m1^2) r^-2 |v|^2 at Case I radii
        lhs = float(np.linalg.norm(dv + (m1 / x) * v) ** 2)
        bound = float(np.vdot(dv, dv).real) + (Fx / 2 + m1 * m1) / x**2 * a2
        worst_chain = min(worst_chain, bound - lhs + 1e-12 * max(1.0, bound))
        if m1 * (2 * m1 + 1) - Fx / 2 < 0:
            applicable += 1
            positive += eval_Mplus(traj, x) > 0
    out.checks["w'-bound at Case I radii"] = "pass" if worst_chain >= 0 else f"fail (margin {worst_chain:.3e})"
    if applicable:
        out.checks["M+>0 beyond F-threshold"] = f"{positive}/{applicable} radii"
    else:
        thr = math.exp(2 * m1 * (2 * m1 + 1)) if gauges.F_kind == "log" else None
        out.checks["M+>0 beyond F-threshold"] = ("no Case I radius beyond the threshold on this grid"
                                                 + (f" (needs r > {thr:.4g})" if thr else ""))


def _case_II_followup(traj, gauges, out: DichotomyVerdict, re_Q_nonpositive):
    r = traj.r
    m1 = out.m1
    F = np.array([float(gauges.F(x)) for x in r])
    ok4 = F / (2 * m1) >= 2
    tail = np.nonzero(ok4 & (r >= out.r2))[0]
    if tail.size == 0 or not ok4[tail[0]:].all():
        out.checks["growth chain"] = "threshold F/(2 m1) >= 2 not reached on this grid"
        return
    i3 = tail[0]
    a2 = np.real(np.einsum("ij,ij->i", traj.v.conj(), traj.v))
    while i3 < len(r) and a2[i3] == 0:
        i3 += 1
    if i3 >= len(r):
        out.checks["growth chain"] = "v vanishes beyond the threshold"
        return
    r3 = float(r[i3])
    sl = slice(i3, None)
    rr = r[sl]
    d2 = 2 * np.real(np.einsum("ij,ij->i", traj.v[sl].conj(), traj.dv[sl]))
    nv = np.sqrt(a2[sl])
    ndv = np.linalg.norm(traj.dv[sl], axis=1)
    tol = 1e-10 * np.maximum(1.0, a2[sl])
    c15 = bool(np.all(d2 - 2 * a2[sl] / rr >= -tol))
    c2 = a2[i3] / r3**2
    c17 = bool(np.all(a2[sl] / rr**2 - c2 >= -1e-10 * np.maximum(1.0, a2[sl] / rr**2)))
    c19 = bool(np.all(ndv - nv / rr >= -1e-10 * np.maximum(1.0, ndv)))
    out.r3, out.c2_bound = r3, float(c2)
    out.checks["d|v|^2/dr >= 2|v|^2/r"] = "pass" if c15 else "fail"
    out.checks["r^-2|v|^2 >= c2"] = "pass" if c17 else "fail"
    out.checks["|v|/r <= |v'|"] = "pass" if c19 else "fail"
    if re_Q_nonpositive:
        M = np.array([eval_M(traj, x) for x in rr])
        out.checks["M >= c2"] = "pass" if np.all(M - c2 >= -1e-10 * np.maximum(1, np.abs(M))) else "fail"
    else:
        out.checks["M >= c2"] = "not applicable (Re Q <= 0 not established)"


@dataclass
class DichotomyReport:
    verdict: DichotomyVerdict
    tail_inf_M: float
    M_start: float
    tail_ratio_ok: bool
    R3: float | None
    bound_M_le_2S: MonotoneReport
    chain_beta: MonotoneReport
    lower_bound_c3: str
    status: str
    lines_extra: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "pass"

    def lines(self) -> list[str]:
        out = [f"dichotomy: {self.status}",
               f"  tail inf M over final half = {self.tail_inf_M:.10g} (start value {self.M_start:.10g})",
               f"  R3 = {self.R3}",
               f"  {self.bound_M_le_2S.line()}",
               f"  {self.chain_beta.line()}",
               f"  lower bound M >= c3: {self.lower_bound_c3}"]
        out += ["  " + x for x in self.verdict.lines()]
        out += ["  " + x for x in self.lines_extra]
        return out


def find_R3(traj: Trajectory, directions=None) -> float | None:
    """Smallest grid radius from which r^2 inf Re(-q) > (N^2 - 1)/4 at every later grid radius."""
    fld = traj.system.field
    d = fld.directions() if directions is None else directions
    N = fld.dim
    ok = np.array([x * x * float(np.min(-np.real(fld.q(x, d)))) - (N * N - 1) / 4 > 0 for x in traj.r])
    if not ok[-1]:
        return None
    bad = np.nonzero(~ok)[0]
    return float(traj.r[0] if bad.size == 0 else traj.r[bad[-1] + 1])


def bound_report(name, r, lower, upper, start, slack) -> MonotoneReport:
    """upper - lower >= -slack * scale on r >= start."""
    sel = r >= start
    if not sel.any():
        return not_applicable(name, "no grid radius beyond the threshold")
    gap = upper[sel] - lower[sel]
    scale = float(max(np.max(np.abs(upper[sel])), np.max(np.abs(lower[sel])), 1e-300))
    i = int(np.argmin(gap))
    return MonotoneReport(name, "pass" if gap[i] >= -slack * scale else "fail", float(gap[i]), scale, slack,
                          float(r[sel][i]), (float(r[sel][0]), float(r[-1])))


def dichotomy_experiment(traj: Trajectory, gauges: RadialGauges, audit: AuditReport,
                         series: FunctionalSeries | None = None, m0: float | None = None,
                         r0: float | None = None) -> DichotomyReport:
    """Tail lower bound of M, the M <= 2S bound and the case classification."""
    if not audit.passed("full"):
        raise ValueError("the dichotomy experiment needs a passing full audit")
    series = functional_series(traj, gauges, R1=float(traj.r[0])) if series is None else series
    r = series.r
    half = r >= r[0] + (r[-1] - r[0]) / 2
    tail_inf = float(np.min(series.M[half]))
    M0 = float(series.M[0])
    ratio_ok = tail_inf >= 1e-6 * M0 and tail_inf > 0
    R3 = find_R3(traj)
    bnd = (bound_report("M<=2S", r, series.M, 2 * series.S, R3, BOUND_SLACK) if R3 is not None
           else not_applicable("M<=2S", "R3 not reached on this grid"))
    beta = audit.beta
    if beta is None:
        chain = not_applicable("M>=beta*M+", "no admissible beta")
    else:
        chain = bound_report(f"M>=beta*M+(beta={beta:g})", r, beta * series.Mplus, series.M, r[0], CHAIN_SLACK)

    if m0 is None or r0 is None:
        verdict = DichotomyVerdict("inconclusive", note="m0/r0 unavailable")
    else:
        m1, r1 = choose_m1(traj, gauges, m0, r0)
        if m1 is None:
            verdict = DichotomyVerdict("inconclusive", r1=r1, note="no m1 with N > 0 found")
        else:
            re_Q = bool(np.all(np.array([np.max(np.real(traj.system.field.Q(x, traj.system.field.directions())))
                                         for x in r]) <= 0))
            verdict = classify_case(traj, gauges, m1, r1, re_Q_nonpositive=re_Q)

    # constants of the lower bound M >= c3
    lb = "not evaluated"
    if verdict.case == "I" and gauges.h_integrable() and beta is not None:
        pos = np.nonzero((r >= (verdict.r1 or r[0])) & (series.Mplus > 0))[0]
        if pos.size:
            R2p = float(r[pos[0]])
            c3p = beta * math.exp(-gauges.h_integral(R2p, math.inf)) * float(series.Mplus[pos[0]])
            verdict.R2_prime, verdict.c3_prime = R2p, c3p
            verdict.c3, verdict.R2 = c3p, R2p
    elif verdict.case == "II" and verdict.c2_bound is not None:
        verdict.c3, verdict.R2 = verdict.c2_bound, verdict.r3
    if verdict.c3 is not None:
        sel = r >= verdict.R2
        gap = series.M[sel] - verdict.c3
        lb = ("pass" if np.all(gap >= -CHAIN_SLACK * max(1.0, float(np.max(np.abs(series.M[sel])))))
              else f"fail (min gap {gap.min():.3e})") + f" with c3={verdict.c3:.6g} beyond R2={verdict.R2:.6g}"
    verdict.compact_support_triggered = not tail_inf > 0
    extra = []
    if R3 is not None and bnd.ok:
        extra.append(f"S(r) >= {tail_inf / 2:.6g} for r >= {R3:.6g} on the grid: the liminf condition fails")
    status = "pass" if (ratio_ok and bnd.status in ("pass",) and chain.status in ("pass", "not applicable")
                        and not lb.startswith("fail")) else "fail"
    return DichotomyReport(verdict, tail_inf, M0, ratio_ok, R3, bnd, chain, lb, status, extra)


# ---------------------------------------------------------------------------
# Distributional inequality for (C0 eta, eta)


@dataclass(frozen=True)
class SmoothPath:
    """eta(r) = a + b (r - r_c) + c sin(k (r - r_c)) with complex mode vectors a, b, c."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    k: float
    r_c: float

    def __call__(self, r):
        return self.a + self.b * (r - self.r_c) + self.c * math.sin(self.k * (r - self.r_c))

    def d(self, r):
        return self.b + self.c * self.k * math.cos(self.k * (r - self.r_c))

    @classmethod
    def random(cls, n_modes: int, rng: np.random.Generator, r_c: float) -> "SmoothPath":
        z = rng.standard_normal((6, n_modes))
        return cls(z[0] + 1j * z[1], 0.3 * (z[2] + 1j * z[3]), z[4] + 1j * z[5], float(rng.uniform(0.5, 3)), r_c)


@dataclass(frozen=True)
class Bump:
    """Smooth nonnegative bump exp(-1/(1-s^2)), s = (r - center)/width."""

    center: float
    width: float

    def __call__(self, r):
        s = (r - self.center) / self.width
        return math.exp(-1.0 / (1.0 - s * s)) if abs(s) < 1 else 0.0

    def d(self, r):
        s = (r - self.center) / self.width
        if abs(s) >= 1:
            return 0.0
        return math.exp(-1.0 / (1.0 - s * s)) * (-2 * s / (1 - s * s) ** 2) / self.width

    @property
    def support(self) -> tuple[float, float]:
        return self.center - self.width, self.center + self.width


def random_bumps(rng: np.random.Generator, window: tuple[float, float], n: int,
                 must_cover: Sequence[float] = ()) -> list[Bump]:
    a, b = window
    out = []
    for i in range(n):
        if i < len(must_cover):
            c = float(must_cover[i]) + float(rng.uniform(-0.2, 0.2))
        else:
            c = float(rng.uniform(a + 0.3, b - 0.3))
        w = float(rng.uniform(0.25, min(1.5, c - a, b - c)))
        out.append(Bump(c, w))
    return out


@dataclass
class DistributionalReport:
    margins: np.ndarray  # rhs - lhs for every (path, bump), lhs = -int f phi'
    extrapolated: np.ndarray  # rhs - quotient extrapolated to h -> 0
    quotient_gaps: dict  # h -> min over pairings of rhs - quotient(h)
    tol: float

    @property
    def ok(self) -> bool:
        return bool(np.all(self.margins >= -self.tol) and np.all(self.extrapolated >= -self.tol))

    @property
    def worst(self) -> float:
        return float(min(np.min(self.margins), np.min(self.extrapolated)))


def richardson(hs: Sequence[float], values: Sequence[float]) -> float:
    """Neville extrapolation to h = 0 of values assumed polynomial in h."""
    hs = list(hs)
    t = list(values)
    for k in range(1, len(t)):
        for i in range(len(t) - 1, k - 1, -1):
            t[i] = (hs[i - k] * t[i] - hs[i] * t[i - 1]) / (hs[i - k] - hs[i])
    return t[-1]


def verify_distributional_bound(system, paths: Sequence[SmoothPath], bumps: Sequence[Bump], *, tol: float = 1e-8,
                                quotient_h: Sequence[float] = (0.008, 0.004, 0.002, 0.001, 0.0005),
                                ) -> DistributionalReport:
    """Mollified difference quotient of f = (C0 eta, eta) against int g0 phi.

    g0 = (C0r eta, eta) + 2Re(C0 eta, eta'). The quotient
    (1/h) int (f(r+h) - f(r)) phi dr = int f(r) (phi(r-h) - phi(r))/h dr is
    smooth in h, so its h -> 0 limit is obtained by Richardson extrapolation
    over ``quotient_h``; the exact limit -int f phi' is checked as well.
    Integrals are split at the field's jump radii.
    """
    jumps = list(system.field.jump_radii)

    def f(eta, r):
        return qform(system.C0(r), eta(r))

    def g0(eta, r):
        e = eta(r)
        C0 = system.C0(r)
        c0e = C0 * e if C0.ndim == 1 else C0 @ e
        return qform(system.C0r(r), e) + 2 * float(np.real(np.vdot(eta.d(r), c0e)))

    def quad(fun, lo, hi):
        pts = [j for j in jumps if lo < j < hi]
        val, _ = spi.quad(fun, lo, hi, points=pts or None, epsabs=1e-11, epsrel=1e-10, limit=400)
        return val

    margins, extrap = [], []
    qgaps: dict = {h: [] for h in quotient_h}
    for eta in paths:
        for phi in bumps:
            lo, hi = phi.support
            lhs = -quad(lambda r: f(eta, r) * phi.d(r), lo, hi)
            rhs = quad(lambda r: g0(eta, r) * phi(r), lo, hi)
            margins.append(rhs - lhs)
            if quotient_h:
                qs = [quad(lambda r: f(eta, r) * (phi(r - h) - phi(r)) / h, lo, hi + h) for h in quotient_h]
                for h, qv in zip(quotient_h, qs):
                    qgaps[h].append(rhs - qv)
                extrap.append(rhs - richardson(quotient_h, qs))
    gaps = {h: float(np.min(v)) for h, v in qgaps.items()}
    return DistributionalReport(np.asarray(margins), np.asarray(extrap), gaps, tol)


def finite_difference_order(traj: Trajectory, r: float, deltas=(1e-2, 5e-3, 2.5e-3)) -> float:
    """Observed order of the centered difference of M+ against its exact derivative."""
    exact = dMplus_dr(traj, r)
    errs = []
    for d in deltas:
        fd = (eval_Mplus(traj, r + d) - eval_Mplus(traj, r - d)) / (2 * d)
        errs.append(abs(fd - exact))
    orders = [math.log(errs[i] / errs[i + 1]) / math.log(deltas[i] / deltas[i + 1])
              for i in range(len(errs) - 1) if errs[i + 1] > 0 and errs[i] > 0]
    return min(orders) if orders else math.inf

