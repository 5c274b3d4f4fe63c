"""Coefficient fields q(x), their Q0/Q1 split, the radial quantities a, b, p, and the assumption audit.

Every evaluator has the signature ``f(r, omega, side="above") -> ndarray`` where
``omega`` is an (n, N) array of unit vectors. ``side="above"`` returns the limit
from larger radii, which is also the value at a declared jump radius, so all
radial profiles are right-continuous by construction.

Sups and infs over a sphere |x| = r are sampled extrema over a finite direction
set (quadrature nodes plus a dense probe set). They carry no interval guarantee.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate

from .sphere_basis import probe_directions

Evaluator = Callable[..., np.ndarray]

BETA_CANDIDATES = (0.9, 0.5, 0.1)
CONSTANT_MARGIN = 1.1


def kato_shift(dim: int, r: float | np.ndarray) -> float | np.ndarray:
    """(N-1)(N-3)/(4 r^2): the term added to q to form Q."""
    return (dim - 1) * (dim - 3) / (4.0 * np.asarray(r) ** 2)


def shift_to_Q(q: Evaluator, dim: int) -> Evaluator:
    """Q(x) = q(x) + (N-1)(N-3)/(4 r^2)."""
    if dim < 2:
        raise ValueError(f"dimension must be >= 2, got {dim}")

    def Q(r, omega, side="above"):
        if not r > 0:
            raise ValueError(f"Q is undefined at r={r}")
        return q(r, omega, side=side) + kato_shift(dim, r)

    return Q


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """A coefficient q with decomposition q + (N-1)(N-3)/(4r^2) = Q0 + Q1.

    ``Q0r_h(r, omega, h)`` is the difference-quotient dominator and ``Q0r`` its
    h -> 0 limit. ``jump_radii`` are radii where an evaluator jumps in r along
    rays; ``kink_radii`` are radii where the angular Gram matrices stop being
    smooth in r (e.g. a slab cut first meets the sphere). ``levels(r)`` returns
    omega_N-levels at which the angular profile at radius r is discontinuous.
    """

    dim: int
    r_inner: float
    Q0: Evaluator
    Q1: Evaluator
    Q0r: Evaluator
    Q0r_h: Callable[[float, np.ndarray, float], np.ndarray]
    jump_radii: tuple[float, ...] = ()
    kink_radii: tuple[float, ...] = ()
    h0: float = 1e-4
    radial: bool = False
    zonal: bool = False
    levels: Callable[[float], tuple[float, ...]] | None = None
    name: str = "field"
    checks: tuple[Callable[[np.ndarray], "ClauseVerdict"], ...] = ()
    params: dict = field(default_factory=dict)

    def Q(self, r, omega, side="above"):
        return self.Q0(r, omega, side=side) + self.Q1(r, omega, side=side)

    def q(self, r, omega, side="above"):
        return self.Q(r, omega, side=side) - kato_shift(self.dim, r)

    def restart_radii(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.jump_radii) | set(self.kink_radii)))

    def levels_at(self, r: float) -> tuple[float, ...]:
        return () if self.levels is None else tuple(self.levels(r))

    def directions(self, extra: np.ndarray | None = None) -> np.ndarray:
        """Direction set for sampled sup/inf over a sphere."""
        if self.radial:
            e = np.zeros((1, self.dim))
            e[0, -1] = 1.0
            return e
        pts = probe_directions(self.dim)
        return pts if extra is None else np.vstack([pts, extra])


def potential_field(
    dim: int,
    r_inner: float,
    lam: Evaluator,
    V_long: Evaluator,
    dV_long: Evaluator,
    V_short: Evaluator,
    *,
    jump_radii: Sequence[float] = (),
    kink_radii: Sequence[float] = (),
    radial: bool = False,
    zonal: bool = False,
    levels: Callable[[float], tuple[float, ...]] | None = None,
    h0: float = 1e-4,
    name: str = "potential",
    checks: tuple = (),
    params: dict | None = None,
) -> CoefficientField:
    """Field for q = -lam + V_long + V_short with the long-range/step recipe.

    Q0 = -lam + V_long, Q1 = V_short + (N-1)(N-3)/(4r^2), and the dominator is
    the integral mean of dV_long/dr over [r, r+h], which by the fundamental
    theorem of calculus is the difference quotient of V_long alone. The step
    part lam contributes nothing; this is admissible exactly when lam is
    nondecreasing along rays.
    """

    def Q0(r, omega, side="above"):
        return -lam(r, omega, side=side) + V_long(r, omega, side=side)

    def Q1(r, omega, side="above"):
        return V_short(r, omega, side=side) + kato_shift(dim, r)

    def Q0r(r, omega, side="above"):
        return dV_long(r, omega, side=side)

    def Q0r_h(r, omega, h):
        return (V_long(r + h, omega) - V_long(r, omega)) / h

    return CoefficientField(
        dim=dim,
        r_inner=r_inner,
        Q0=Q0,
        Q1=Q1,
        Q0r=Q0r,
        Q0r_h=Q0r_h,
        jump_radii=tuple(sorted(jump_radii)),
        kink_radii=tuple(sorted(kink_radii)),
        h0=h0,
        radial=radial,
        zonal=zonal,
        levels=levels,
        name=name,
        checks=tuple(checks),
        params=dict(params or {}),
    )


def constant(value: float) -> Evaluator:
    def ev(r, omega, side="above"):
        return np.full(len(omega), value, dtype=complex if isinstance(value, complex) else float)

    return ev


def power_law(coef: complex, power: float) -> tuple[Evaluator, Evaluator]:
    """coef * r^{-power} and its radial derivative."""
    real = not isinstance(coef, complex) or coef.imag == 0
    c = coef.real if real else coef

    def ev(r, omega, side="above"):
        return np.full(len(omega), c * r ** (-power))

    def dev(r, omega, side="above"):
        return np.full(len(omega), -power * c * r ** (-power - 1))

    return ev, dev


def tabulated_field(
    dim: int,
    r_inner: float,
    radii: Sequence[float],
    lam_values: Sequence[float],
    *,
    name: str = "tabulated",
    h0: float = 1e-4,
) -> CoefficientField:
    """Radial field q = -lam(r) from samples, piecewise linear between samples.

    A radius listed twice marks a jump: the first value is the limit from
    below, the second the value from above. The dominator is the difference
    quotient of the continuous part only, so the audit accepts exactly the
    upward jumps of lam.
    """
    r = np.asarray(radii, dtype=float)
    y = np.asarray(lam_values, dtype=float)
    if r.shape != y.shape or len(r) < 2:
        raise ValueError("tabulated radii and values must have equal length >= 2")
    if np.any(np.diff(r) < 0):
        raise ValueError("tabulated radii must be nondecreasing")
    dup = np.nonzero(np.diff(r) == 0)[0]
    jumps = [float(r[i]) for i in dup]
    jump_sizes = [float(y[i + 1] - y[i]) for i in dup]
    keep = np.ones(len(r), bool)
    keep[dup] = False  # drop the below-values; the continuous part is rebuilt below
    rc = r[keep]
    yc = y[keep].copy()
    cum = np.array([sum(s for j, s in zip(jumps, jump_sizes) if j <= x) for x in rc])
    cont = yc - cum

    def cont_at(x):
        return np.interp(x, rc, cont, left=cont[0], right=cont[-1])

    def jump_part(x, side):
        if side == "above":
            return sum(s for j, s in zip(jumps, jump_sizes) if j <= x)
        return sum(s for j, s in zip(jumps, jump_sizes) if j < x)

    def zero(rr, omega, side="above"):
        return np.zeros(len(omega))

    def dcont(rr, omega, side="above"):
        i = np.searchsorted(rc, rr, side="right") - 1
        i = min(max(i, 0), len(rc) - 2)
        return np.full(len(omega), -(cont[i + 1] - cont[i]) / (rc[i + 1] - rc[i]))

    def V_long(rr, omega, side="above"):
        return np.full(len(omega), -cont_at(rr))

    def lam_jumps(rr, omega, side="above"):
        return np.full(len(omega), float(jump_part(rr, side)))

    return potential_field(
        dim, r_inner, lam_jumps, V_long, dcont, zero, jump_radii=jumps, radial=True, h0=h0, name=name,
        params={"radii": r.tolist(), "lam": y.tolist()},
    )


# ---------------------------------------------------------------------------
# Gauges


@dataclass(frozen=True, eq=False)
class RadialGauges:
    """h(r), F(r), F_r(r) plus the audited constants c0, c1, beta."""

    h: Callable[[float], float]
    F: Callable[[float], float]
    F_r: Callable[[float], float]
    kind: str = "custom"
    epsilon: float | None = None
    F_kind: str = "custom"
    c0: float | None = None
    c1: float | None = None
    beta: float | None = None

    def h_integral(self, a: float, b: float) -> float:
        """int_a^b h(t) dt; b may be inf."""
        if self.kind == "power":
            e = self.epsilon / 2
            hi = 0.0 if math.isinf(b) else b ** (-e)
            return (a ** (-e) - hi) / e
        if self.kind == "kato":
            return math.inf if math.isinf(b) else 2.0 * math.log(b / a)
        val, _ = integrate.quad(self.h, a, b, epsabs=1e-12, epsrel=1e-10, limit=200)
        return val

    def h_integrable(self) -> bool | None:
        """True / False when known analytically, None if not decidable here."""
        return {"power": True, "kato": False}.get(self.kind)

    def F_diverges(self) -> bool | None:
        return True if self.F_kind == "log" else None


def _log(r):
    return np.log(r)


def _inv(r):
    return 1.0 / np.asarray(r, dtype=float)


def power_gauges(epsilon: float) -> RadialGauges:
    """h(r) = r^{-1-epsilon/2} with F(r) = log r."""
    if not 0 < epsilon < 2:
        raise ValueError(f"epsilon must lie in (0, 2), got {epsilon}")
    p = 1 + epsilon / 2
    return RadialGauges(
        h=lambda r: np.asarray(r, dtype=float) ** (-p), F=_log, F_r=_inv,
        kind="power", epsilon=epsilon, F_kind="log",
    )


def kato_gauges() -> RadialGauges:
    """h(r) = 2/r with F(r) = log r (not integrable at infinity)."""
    return RadialGauges(h=lambda r: 2.0 / np.asarray(r, dtype=float), F=_log, F_r=_inv, kind="kato", F_kind="log")


# ---------------------------------------------------------------------------
# Radial quantities


def _dirs(fld: CoefficientField, directions):
    return fld.directions() if directions is None else directions


def a_of_r(fld: CoefficientField, gauges: RadialGauges, r: float, directions=None) -> float:
    """a(r) = sup_{|x|=r} |Q1(x)| / h(r) (sampled sup)."""
    vals = fld.Q1(r, _dirs(fld, directions))
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"non-finite Q1 sample at r={r}")
    return float(np.max(np.abs(vals)) / gauges.h(r))


def b_of_r(fld: CoefficientField, gauges: RadialGauges, r: float, directions=None) -> float:
    """b(r) = inf_{|x|=r} -(Q0 + Q0r / h(r)) (sampled inf)."""
    d = _dirs(fld, directions)
    vals = -(fld.Q0(r, d) + fld.Q0r(r, d) / gauges.h(r))
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"non-finite Q0 sample at r={r}")
    return float(np.min(vals))


def p_of_r(fld: CoefficientField, r: float, directions=None) -> float:
    """p(r) = inf_{|x|=r} -(2 Q0 + r Q0r) (sampled inf)."""
    d = _dirs(fld, directions)
    vals = -(2 * fld.Q0(r, d) + r * fld.Q0r(r, d))
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"non-finite Q0 sample at r={r}")
    return float(np.min(vals))


# ---------------------------------------------------------------------------
# Audit


@dataclass
class ClauseVerdict:
    """Verdict for one assumption clause over a radius grid.

    ``verdict`` is one of "pass", "pass-beyond-threshold", "fail" or
    "inconclusive". ``threshold`` is the smallest sampled radius beyond which
    the clause holds at every sample. A failing clause carries a witness.
    """

    name: str
    verdict: str
    r_range: tuple[float, float]
    threshold: float | None
    worst_margin: float
    witness: dict | None = None
    note: str = ""
    level: str = "core"

    @property
    def ok(self) -> bool:
        return self.verdict in ("pass", "pass-beyond-threshold")


def per_radius_verdict(
    name: str,
    radii: np.ndarray,
    margins: np.ndarray,
    witnesses: Sequence[dict | None] | None = None,
    *,
    tol: float | np.ndarray = 0.0,
    note: str = "",
    level: str = "core",
) -> ClauseVerdict:
    """Threshold a per-radius margin (>= -tol means the clause holds).

    A clause that only holds on a tail is accepted when the tail covers at
    least the upper half of the sampled radius window; refining the grid can
    only move the threshold outward.
    """
    radii = np.asarray(radii, float)
    margins = np.asarray(margins, float)
    order = np.argsort(radii, kind="stable")
    radii, margins = radii[order], margins[order]
    tol = np.broadcast_to(np.asarray(tol, float), margins.shape)[order]
    bad = ~(margins >= -tol)
    lo, hi = float(radii[0]), float(radii[-1])
    worst = int(np.argmin(np.where(np.isfinite(margins), margins, -np.inf)))
    witness = None
    if bad.any():
        i = int(np.nonzero(bad)[0][0])
        witness = {"r": float(radii[i]), "margin": float(margins[i])}
        if witnesses is not None:
            extra = witnesses[order[i]]
            if extra:
                witness.update(extra)
    if not bad.any():
        return ClauseVerdict(name, "pass", (lo, hi), lo, float(margins[worst]), None, note, level)
    last = int(np.nonzero(bad)[0][-1])
    if last == len(radii) - 1:
        return ClauseVerdict(name, "fail", (lo, hi), None, float(margins[worst]), witness, note, level)
    thr = float(radii[last + 1])
    verdict = "pass-beyond-threshold" if thr <= 0.5 * (lo + hi) else "fail"
    return ClauseVerdict(name, verdict, (lo, hi), thr if verdict != "fail" else None,
                         float(margins[worst]), witness, note, level)


def global_verdict(name, passed, r_range, margin=0.0, witness=None, note="", level="core", inconclusive=False):
    if inconclusive:
        return ClauseVerdict(name, "inconclusive", r_range, None, margin, witness, note, level)
    return ClauseVerdict(name, "pass" if passed else "fail", r_range,
                         r_range[0] if passed else None, margin, None if passed else witness, note, level)


@dataclass
class AuditReport:
    """Per-clause verdicts of the combined assumption set, with witness constants."""

    clauses: dict[str, ClauseVerdict]
    grid: np.ndarray
    threshold: float | None
    c0: float | None
    c1: float | None
    beta: float | None
    samples: dict = field(default_factory=dict)

    def passed(self, level: str = "full", strict: bool = False) -> bool:
        levels = ("core",) if level == "core" else ("core", "full")
        for c in self.clauses.values():
            if c.level not in levels:
                continue
            if strict and c.verdict != "pass":
                return False
            if not c.ok:
                return False
        return True

    def failures(self, level: str = "full", strict: bool = False) -> list[ClauseVerdict]:
        levels = ("core",) if level == "core" else ("core", "full")
        return [c for c in self.clauses.values()
                if c.level in levels and (not c.ok or (strict and c.verdict != "pass"))]

    def start(self, strict: bool = False) -> float:
        """First audited radius of the usable tail."""
        if strict or self.threshold is None:
            return float(self.grid[0])
        return float(self.threshold)

    def gauges(self, g: RadialGauges) -> RadialGauges:
        return replace(g, c0=self.c0, c1=self.c1, beta=self.beta)

    def summary_lines(self) -> list[str]:
        out = []
        for c in self.clauses.values():
            thr = "-" if c.threshold is None else f"{c.threshold:.6g}"
            line = f"{c.name:<24s} {c.verdict:<22s} R*={thr:<10s} worst={c.worst_margin:.3e}"
            if c.witness:
                line += f" witness={c.witness}"
            if c.note:
                line += f" ({c.note})"
            out.append(line)
        return out


def _rtol(x):
    return 1e-12 * (1.0 + np.abs(x))


def audit_assumptions(
    fld: CoefficientField,
    gauges: RadialGauges,
    grid: Iterable[float],
    directions: np.ndarray | None = None,
) -> AuditReport:
    """Audit every clause of the combined assumption set on a radius grid."""
    grid = np.asarray(sorted(set(float(r) for r in grid)))
    if grid.size == 0:
        raise ValueError("audit grid is empty")
    if grid[0] <= fld.r_inner:
        raise ValueError(f"audit grid starts at {grid[0]} <= R0 = {fld.r_inner}")
    d = _dirs(fld, directions)
    rr = (float(grid[0]), float(grid[-1]))
    clauses: dict[str, ClauseVerdict] = {}

    Q0 = np.array([np.real(fld.Q0(r, d)) for r in grid])
    Q1 = np.array([fld.Q1(r, d) for r in grid])
    Q0r = np.array([np.real(fld.Q0r(r, d)) for r in grid])
    h = np.array([float(gauges.h(r)) for r in grid])
    ReQ = Q0 + Q1.real
    q_re = ReQ - kato_shift(fld.dim, grid)[:, None]

    def argwit(k, vals, label):
        j = int(np.argmin(vals))
        return {"omega": d[j].round(6).tolist(), label: float(vals[j])}

    # Q0 <= 0
    m = -Q0.max(axis=1)
    wit = []
    for k in range(len(grid)):
        j = int(np.argmax(Q0[k]))
        wit.append({"omega": d[j].round(6).tolist(), "Q0": float(Q0[k, j])})
    clauses["Q0<=0"] = per_radius_verdict("Q0<=0", grid, m, wit, tol=_rtol(m))

    # beta Q0 >= Re Q, choose the largest admissible beta
    best = None
    for beta in BETA_CANDIDATES:
        mb = (beta * Q0 - ReQ).min(axis=1)
        wit = [argwit(k, beta * Q0[k] - ReQ[k], "betaQ0-ReQ") for k in range(len(grid))]
        v = per_radius_verdict("beta-bound", grid, mb, wit, tol=_rtol(mb), level="full",
                               note=f"beta={beta}")
        rank = {"pass": 0, "pass-beyond-threshold": 1}.get(v.verdict, 2)
        if best is None or rank < best[0]:
            best = (rank, beta, v)
        if rank == 0:
            break
    beta = best[1] if best[0] < 2 else None
    clauses["beta-bound"] = best[2]

    # right limits at declared jumps
    jumps = [j for j in fld.jump_radii if rr[0] <= j <= rr[1]]
    worst_rl, wit_rl = 0.0, None
    for j in jumps:
        for delta in (1e-9, 1e-11):
            diff = np.abs(fld.Q0(j + delta, d) - fld.Q0(j, d)).max()
            if diff > worst_rl:
                worst_rl, wit_rl = diff, {"r": j, "delta": delta, "gap": float(diff)}
    clauses["right-limit"] = global_verdict(
        "right-limit", worst_rl <= 1e-6, rr, -worst_rl, wit_rl,
        note=f"{len(jumps)} declared jump(s) probed")

    # dominance, boundedness, limit
    hs = (fld.h0 / 2, fld.h0 / 4, fld.h0 / 8)
    dom_r = list(grid) + [j - hs[-1] / 2 for j in jumps] + [j - hs[0] / 2 for j in jumps]
    dom_r = np.array([r for r in dom_r if r > fld.r_inner])
    dom_m, dom_w, bnd, lim_m = [], [], [], []
    for r in dom_r:
        worst, wit = np.inf, None
        q0 = fld.Q0(r, d)
        bound = 0.0
        for hh in hs:
            quot = (fld.Q0(r + hh, d) - q0) / hh
            dom = fld.Q0r_h(r, d, hh)
            bound = max(bound, float(np.max(np.abs(dom))))
            gap = dom - quot
            scale = 1e-10 * (1 + np.abs(q0)) / hh
            j = int(np.argmin(gap + scale))
            if gap[j] + scale[j] < worst:
                worst = float(gap[j] + scale[j])
                wit = {"h": hh, "omega": d[j].round(6).tolist(), "quotient": float(quot[j]), "dominator": float(dom[j])}
        dom_m.append(worst)
        dom_w.append(wit)
        bnd.append(bound)
        near_jump = any(abs(r - j) <= fld.h0 for j in fld.jump_radii)
        if near_jump:
            lim_m.append(np.inf)
        else:
            seq = [fld.Q0r_h(r, d, hh) for hh in hs]
            cauchy = max(float(np.max(np.abs(a - b))) for a, b in zip(seq[:-1], seq[1:]))
            lim_m.append(1e-6 - cauchy)
    clauses["jump-dominance"] = per_radius_verdict("jump-dominance", dom_r, np.array(dom_m), dom_w,
                                                  note=f"h in {[float(f'{x:.3g}') for x in hs]}")
    bnd = np.array(bnd)
    clauses["Q0r-bounded"] = global_verdict(
        "Q0r-bounded", bool(np.all(np.isfinite(bnd)) and bnd.max() < 1e8), rr, -float(np.nanmax(bnd)),
        {"sup": float(np.nanmax(bnd))})
    clauses["Q0r-limit"] = per_radius_verdict("Q0r-limit", dom_r, np.array(lim_m), note="Cauchy <= 1e-6")

    # h bound and a^2 <= b
    clauses["h<=2/r"] = per_radius_verdict("h<=2/r", grid, 2 / grid - h,
                                               [{"h": float(x)} for x in h], tol=_rtol(2 / grid))
    a = np.abs(Q1).max(axis=1) / h
    bvals = -(Q0 + Q0r / h[:, None])
    b = bvals.min(axis=1)
    clauses["a^2<=b"] = per_radius_verdict(
        "a^2<=b", grid, b - a * a,
        [{"a": float(x), "b": float(y)} for x, y in zip(a, b)], tol=_rtol(b))

    # h integrable
    integrable = gauges.h_integrable()
    mid = 0.5 * (rr[0] + rr[1])
    h_wit = {"gauge": gauges.kind, "int_h_window": gauges.h_integral(rr[0], rr[1]),
             "int_h_upper_half": gauges.h_integral(mid, rr[1])}
    clauses["h-in-L1"] = global_verdict(
        "h-in-L1", bool(integrable), rr, 0.0, h_wit,
        note={"power": "r^(-1-eps/2) integrable", "kato": "2/r not integrable"}.get(gauges.kind, "not decidable numerically"),
        level="full", inconclusive=integrable is None)

    # (1) r^2 inf Re(-q) -> infinity
    g = grid**2 * (-q_re).min(axis=1)
    running = np.maximum.accumulate(g)
    div_mono = per_radius_verdict("q-divergence", grid, g - running, tol=_rtol(g), level="full")
    r_mid = 0.5 * (rr[0] + rr[1])
    g_mid = r_mid**2 * float(np.min(-(np.real(fld.q(r_mid, d)))))
    g_end = float(g[-1])
    slope = (math.log(g_end / g_mid) / math.log(rr[1] / r_mid)
             if g_mid > 0 and g_end > 0 and rr[1] > r_mid else -math.inf)
    grows = slope >= 1.0 and div_mono.ok
    w = div_mono.witness or {"r_mid": r_mid, "g_mid": g_mid, "r_end": rr[1], "g_end": g_end, "loglog_slope": slope}
    clauses["q-divergence"] = ClauseVerdict(
        "q-divergence", div_mono.verdict if grows else "fail", rr,
        div_mono.threshold if grows else None, slope, None if grows else w,
        note=f"log-log slope of r^2 inf Re(-q) over upper half = {slope:.3f} (>= 1 required)", level="full")

    for chk in fld.checks:
        v = chk(grid)
        clauses[v.name] = v

    # thresholds before the F-clauses so c0, c1 come from the usable tail
    pre = [c.threshold for c in clauses.values() if c.ok and c.threshold is not None]
    r_pre = max(pre) if pre else rr[0]
    tail = grid >= r_pre

    Fv = np.array([float(gauges.F(r)) for r in grid])
    Frv = np.array([float(gauges.F_r(r)) for r in grid])
    clauses["F>0"] = per_radius_verdict("F>0", grid, Fv, [{"F": float(x)} for x in Fv], tol=-1e-300)

    ratio = np.where(b > 0, Fv**2 / (grid**4 * h**2 * np.where(b > 0, b, 1.0)), np.inf)
    c0 = CONSTANT_MARGIN * float(np.max(ratio[tail])) if np.all(np.isfinite(ratio[tail])) else None
    c0_eff = c0 if c0 else 0.0
    m45 = c0_eff * grid**4 * h**2 * b - Fv**2
    clauses["F^2<=c0r^4h^2b"] = per_radius_verdict(
        "F^2<=c0r^4h^2b", grid, m45, [{"F": float(x), "b": float(y)} for x, y in zip(Fv, b)],
        tol=_rtol(Fv**2), note=f"c0={c0_eff:.4g}")
    if gauges.F_diverges() is None:
        Fmid = float(gauges.F(r_mid))
        ok = Fv[-1] > Fmid and np.all(np.diff(Fv[grid >= r_mid]) >= 0)
        clauses["F->inf"] = global_verdict("F->inf", ok, rr, float(Fv[-1] - Fmid),
                                                   {"F_mid": Fmid, "F_end": float(Fv[-1])}, note="sampled trend")
    else:
        clauses["F->inf"] = global_verdict("F->inf", gauges.F_diverges(), rr, note="log r")
    rf = grid * Frv
    c1 = CONSTANT_MARGIN * max(float(np.max(rf[tail])), 1e-300) if np.all(np.isfinite(rf)) else None
    clauses["F_r<=c1/r"] = per_radius_verdict(
        "F_r<=c1/r", grid, (c1 or 0.0) / grid - Frv, tol=_rtol(Frv), note=f"c1={(c1 or 0):.4g}")

    thresholds = [c.threshold for c in clauses.values() if c.ok and c.threshold is not None]
    all_ok = all(c.ok for c in clauses.values() if c.level in ("core", "full"))
    threshold = max(thresholds) if (thresholds and all_ok) else (max(thresholds) if thresholds else None)

    p = (-(2 * Q0 + grid[:, None] * Q0r)).min(axis=1)
    samples = {"r": grid, "a": a, "b": b, "p": p, "h": h}
    return AuditReport(clauses, grid, threshold, c0, c1, beta, samples)


def check_gauge_consistency(fld: CoefficientField, gauges: RadialGauges, grid,
                            audit: AuditReport | None = None, directions=None) -> dict[str, ClauseVerdict]:
    """Consistency checks of the three inequalities implied by the audit.

    r^2 h^2 b <= 2p, (r sup|Q1|)^2 <= 2p and r^{-2} F^2 <= 2 c0 p, evaluated at
    every grid radius beyond the audit threshold.
    """
    grid = np.asarray(sorted(grid), float)
    if audit is not None and audit.threshold is not None:
        grid = grid[grid >= audit.threshold]
    c0 = gauges.c0 if gauges.c0 is not None else (audit.c0 if audit else None)
    d = _dirs(fld, directions)
    out = {}
    m47, m48, m49 = [], [], []
    for r in grid:
        b = b_of_r(fld, gauges, r, d)
        p = p_of_r(fld, r, d)
        h = float(gauges.h(r))
        s1 = float(np.max(np.abs(fld.Q1(r, d))))
        F = float(gauges.F(r))
        tol = 1e-12 * (1 + abs(p))
        m47.append(2 * p - r * r * h * h * b + tol)
        m48.append(2 * p - (r * s1) ** 2 + tol)
        m49.append(2 * (c0 or 0.0) * p - F * F / (r * r) + tol)
    note = "consistency check"
    out["r^2h^2b<=2p"] = per_radius_verdict("r^2h^2b<=2p", grid, np.array(m47), note=note)
    out["(r sup|Q1|)^2<=2p"] = per_radius_verdict("(r sup|Q1|)^2<=2p", grid, np.array(m48), note=note)
    out["F^2/r^2<=2c0p"] = per_radius_verdict("F^2/r^2<=2c0p", grid, np.array(m49), note=note)
    return out


def sample_decomposition_error(fld: CoefficientField, q: Evaluator, points: np.ndarray) -> float:
    """max |Q0 + Q1 - (q + shift)| at Cartesian sample points (n, N)."""
    worst = 0.0
    for x in points:
        r = float(np.linalg.norm(x))
        om = (x / r)[None, :]
        lhs = fld.Q0(r, om) + fld.Q1(r, om)
        rhs = q(r, om) + kato_shift(fld.dim, r)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst
