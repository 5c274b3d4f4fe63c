"""Concrete coefficient families: long/short-range potentials and layered media.

A layered medium stores its piecewise-constant profile as ascending ``levels``
with ``values`` (one more value than levels). For shells the levels are radii;
for planar slabs they are heights of cut planes x_N = c.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .coefficients import (
    CoefficientField,
    RadialGauges,
    constant,
    global_verdict,
    per_radius_verdict,
    potential_field,
    power_gauges,
    power_law,
)
from .sphere_basis import probe_directions

DECAY_MARGIN = 1.1


@dataclass(frozen=True)
class PotentialModel:
    """q = -lam + V_long + V_short with power-law V_long = a r^-p, V_short = s r^-ps."""

    dim: int = 3
    r_inner: float = 1.0
    lam: float = 1.0
    long_coef: float = 0.0
    long_power: float = 0.5
    short_coef: complex = 0.0
    short_power: float = 1.5
    epsilon: float = 0.5
    m0: float | None = None

    def __post_init__(self):
        if not 0 < self.epsilon < 2:
            raise ValueError(f"epsilon must lie in (0, 2), got {self.epsilon}")
        if self.m0 is not None and not self.m0 > 0:
            raise ValueError(f"m0 must be positive, got {self.m0}")


@dataclass(frozen=True)
class LayeredMedium:
    """Piecewise-constant mu0 on shells (levels = radii) or slabs (levels = cut heights)."""

    kind: str
    levels: tuple[float, ...]
    values: tuple[float, ...]
    lam: float = 1.0
    dim: int = 3
    long_coef: float = 0.0
    long_power: float = 0.5
    short_coef: complex = 0.0
    short_power: float = 1.5
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.kind not in ("shells", "slabs"):
            raise ValueError(f"unknown geometry kind {self.kind!r}; expected 'shells' or 'slabs'")
        if len(self.values) != len(self.levels) + 1:
            raise ValueError("a layered medium needs exactly one more value than interfaces")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ValueError("interface levels must be strictly increasing")
        if not all(np.isfinite(self.values)):
            raise ValueError("layer values must be finite")
        if self.kind == "shells" and self.levels and self.levels[0] <= 0:
            raise ValueError("shell radii must be positive")
        if self.kind == "slabs" and any(c == 0 for c in self.levels):
            raise ValueError("slab cuts must avoid x_N = 0")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")

    # -- constructors -------------------------------------------------------

    @classmethod
    def shells(cls, radii: Sequence[float], nu: Sequence[float], lam: float = 1.0, dim: int = 3, **kw):
        labels = tuple(f"{k}->{k + 1}" for k in range(len(radii)))
        return cls("shells", tuple(map(float, radii)), tuple(map(float, nu)), lam, dim, labels=labels, **kw)

    @classmethod
    def slabs(
        cls,
        cuts_neg: Sequence[float],
        cuts_pos: Sequence[float],
        nu_neg: Sequence[float],
        nu0: float,
        nu_pos: Sequence[float],
        lam: float = 1.0,
        dim: int = 3,
        **kw,
    ):
        """Slabs cut at x_N = c_k; ``cuts_neg`` = [c_-1, c_-2, ...], ``cuts_pos`` = [c_1, c_2, ...].

        nu_neg[j] is the value beyond cuts_neg[j] (further from the origin),
        nu_pos[j] the value beyond cuts_pos[j].
        """
        if len(cuts_neg) != len(nu_neg) or len(cuts_pos) != len(nu_pos):
            raise ValueError("each cut needs the value of the slab beyond it")
        if any(c >= 0 for c in cuts_neg) or any(c <= 0 for c in cuts_pos):
            raise ValueError("need c_-k < 0 < c_k for all cuts")
        neg = list(cuts_neg)
        if any(b >= a for a, b in zip(neg, neg[1:])):
            raise ValueError("negative cuts must move away from the origin")
        levels = tuple(float(c) for c in reversed(neg)) + tuple(float(c) for c in cuts_pos)
        values = tuple(float(v) for v in reversed(nu_neg)) + (float(nu0),) + tuple(float(v) for v in nu_pos)
        labels = tuple(f"{-k - 1}->{-k}" for k in reversed(range(len(neg)))) + tuple(
            f"{k}->{k + 1}" for k in range(len(cuts_pos)))
        return cls("slabs", levels, values, lam, dim, labels=labels, **kw)

    # -- evaluation ---------------------------------------------------------

    def index(self, r: float, omega: np.ndarray, side: str = "above") -> np.ndarray:
        """Layer index at r*omega; on an interface the outer layer wins for side='above'."""
        lv = np.asarray(self.levels)
        n = len(omega)
        if self.kind == "shells":
            s = "right" if side == "above" else "left"
            return np.full(n, np.searchsorted(lv, r, side=s))
        xN = r * np.asarray(omega)[:, -1]
        up = np.searchsorted(lv, xN, side="right" if side == "above" else "left")
        down = np.searchsorted(lv, xN, side="left" if side == "above" else "right")
        return np.where(xN >= 0, up, down)

    def mu0(self, r: float, omega: np.ndarray, side: str = "above") -> np.ndarray:
        return np.asarray(self.values)[self.index(r, omega, side)]

    def kink_radii(self) -> tuple[float, ...]:
        return tuple(sorted({abs(c) for c in self.levels}))

    def zonal_levels(self, r: float) -> tuple[float, ...]:
        """omega_N-levels where the sphere of radius r crosses a cut plane."""
        if self.kind != "slabs":
            return ()
        return tuple(sorted(c / r for c in self.levels if abs(c) < r))


# ---------------------------------------------------------------------------
# Family checks


def _decay_checks(long_coef, long_power, short_coef, short_power, epsilon, lam_min, m0):
    """Hypotheses of the long/short-range recipe, as grid verdicts."""

    def lam_check(grid):
        m = lam_min - (m0 if m0 is not None else lam_min)
        return global_verdict("lambda>=m0", lam_min > 0 and m >= 0, (grid[0], grid[-1]), m,
                              {"lambda_min": lam_min, "m0": m0}, level="full")

    def long_decay(grid):
        V = np.abs(long_coef) * grid ** (-long_power)
        dV = np.abs(long_coef * long_power) * grid ** (-long_power - 1)
        K = float(np.max(grid ** (1 + epsilon) * dV))
        bound = DECAY_MARGIN * (K / epsilon) * grid ** (-epsilon)
        return per_radius_verdict("V_long-decay", grid, bound - V,
                                  [{"V_long": float(v), "bound": float(b)} for v, b in zip(V, bound)],
                                  tol=1e-14, level="full",
                                  note="|V| <= 1.1 (K/eps) r^-eps with K = sup r^(1+eps)|dV/dr|")

    def long_deriv(grid):
        dV = np.abs(long_coef * long_power) * grid ** (-long_power - 1)
        w = grid ** (1 + epsilon) * dV
        # bounded on the window iff the weighted derivative does not grow at the far end
        ok = long_coef == 0 or long_power + 1 >= 1 + epsilon
        return global_verdict("dV_long-bound", ok, (grid[0], grid[-1]), -float(w.max()),
                              {"sup_r^(1+eps)|dV|": float(w.max()), "power": long_power + 1}, level="full")

    def short_range(grid):
        ok = short_coef == 0 or short_power >= 1 + epsilon
        w = np.abs(short_coef) * grid ** (1 + epsilon - short_power)
        return global_verdict("V_short-range", ok, (grid[0], grid[-1]), -float(w.max()),
                              {"sup_r^(1+eps)|Vs|": float(w.max()), "power": short_power}, level="full")

    return (lam_check, long_decay, long_deriv, short_range)


def build_potential_model(model: PotentialModel) -> tuple[CoefficientField, RadialGauges]:
    """Field and gauges for constant lam with power-law long- and short-range parts."""
    Vl, dVl = power_law(model.long_coef, model.long_power)
    Vs, _ = power_law(model.short_coef, model.short_power)
    checks = _decay_checks(model.long_coef, model.long_power, model.short_coef, model.short_power,
                           model.epsilon, model.lam, model.m0)
    fld = potential_field(
        model.dim, model.r_inner, constant(model.lam), Vl, dVl, Vs,
        radial=True, name="potential", checks=checks,
        params={"lam": model.lam, "epsilon": model.epsilon},
    )
    return fld, power_gauges(model.epsilon)


def build_layered_medium(medium: LayeredMedium, r_inner: float, epsilon: float = 0.5,
                         ray_count: int = 64) -> tuple[CoefficientField, RadialGauges]:
    """Field lam*mu0 + lam*mu_long + lam*mu_short for a layered medium."""
    m_min = min(medium.values)
    if not m_min > 0:
        raise ValueError(f"mu0 must be bounded below by a positive constant; min layer value is {m_min}")
    lam = medium.lam

    def lam_x(r, omega, side="above"):
        return lam * medium.mu0(r, omega, side)

    Vl, dVl = power_law(lam * medium.long_coef, medium.long_power)
    Vs, _ = power_law(lam * medium.short_coef, medium.short_power)
    checks = list(_decay_checks(lam * medium.long_coef, medium.long_power, lam * medium.short_coef,
                                medium.short_power, epsilon, lam * m_min, None))

    def ray_check(grid):
        v = check_ray_monotonicity(medium, n_rays=ray_count, r_max=float(grid[-1]))
        return global_verdict("ray-monotone", v.passed, (grid[0], grid[-1]), 0.0 if v.passed else -1.0,
                              v.witness, note=f"{v.n_rays} sampled rays", level="full")

    checks.append(ray_check)
    shells = medium.kind == "shells"
    fld = potential_field(
        medium.dim, r_inner, lam_x, Vl, dVl, Vs,
        jump_radii=medium.levels if shells else (),
        kink_radii=() if shells else medium.kink_radii(),
        radial=shells,
        zonal=not shells,
        levels=None if shells else medium.zonal_levels,
        name=f"layered-{medium.kind}",
        checks=tuple(checks),
        params={"levels": list(medium.levels), "values": list(medium.values), "lam": lam},
    )
    return fld, power_gauges(epsilon)


# ---------------------------------------------------------------------------
# Geometry checkers


@dataclass
class GeometryVerdict:
    passed: bool
    interface: str | None = None
    level: float | None = None
    witness: dict | None = None
    n_rays: int = 0

    def __bool__(self):
        return self.passed


def check_separating_condition(medium: LayeredMedium) -> GeometryVerdict:
    """Jump sign against the radial component of the interface normal.

    A shell interface has n.x = |x| > 0, so the outer value must not be
    smaller. A cut plane x_N = c has n.x = c with n = +e_N, so the value above
    the plane minus the value below must have the sign of c.
    """
    for j, lv in enumerate(medium.levels):
        jump = medium.values[j + 1] - medium.values[j]
        ndotx = lv
        if jump * ndotx < 0:
            return GeometryVerdict(False, medium.labels[j] if medium.labels else str(j), lv,
                                   {"inner_value": medium.values[j], "outer_value": medium.values[j + 1],
                                    "n.x": ndotx})
    return GeometryVerdict(True)


def default_rays(dim: int, n: int = 64) -> np.ndarray:
    return probe_directions(dim, n)


def check_ray_monotonicity(medium: LayeredMedium, rays: np.ndarray | None = None, *,
                               n_rays: int = 64, r_max: float | None = None,
                               density: int = 400) -> GeometryVerdict:
    """Sampled check that mu0(r omega) is nondecreasing in r along every ray."""
    rays = default_rays(medium.dim, n_rays) if rays is None else np.asarray(rays, float)
    top = max([abs(c) for c in medium.levels] + [1.0])
    r_max = 2 * top + 1 if r_max is None else max(r_max, 2 * top + 1)
    base = np.linspace(r_max / density, r_max, density)
    for om in rays:
        if medium.kind == "shells":
            cross = [c for c in medium.levels]
        else:
            cross = [c / om[-1] for c in medium.levels if om[-1] != 0 and c / om[-1] > 0]
        grid = np.unique(np.concatenate([base, cross])) if cross else base
        vals = np.array([medium.mu0(r, om[None, :])[0] for r in grid])
        drop = np.nonzero(np.diff(vals) < 0)[0]
        if drop.size:
            i = int(drop[0]) + 1
            return GeometryVerdict(False, None, float(grid[i]),
                                   {"omega": om.round(6).tolist(), "r": float(grid[i]),
                                    "before": float(vals[i - 1]), "after": float(vals[i])}, len(rays))
    return GeometryVerdict(True, n_rays=len(rays))


def normal_cone_condition(points: np.ndarray, normals: np.ndarray, tol: float = 0.0) -> GeometryVerdict:
    """n(x).x >= 0 on user-supplied surface samples (point, outward normal)."""
    points = np.asarray(points, float)
    normals = np.asarray(normals, float)
    dots = np.einsum("ij,ij->i", points, normals)
    bad = np.nonzero(dots < -tol)[0]
    if bad.size:
        i = int(bad[0])
        return GeometryVerdict(False, str(i), float(np.linalg.norm(points[i])),
                               {"point": points[i].tolist(), "normal": normals[i].tolist(), "n.x": float(dots[i])})
    return GeometryVerdict(True)


def load_surface_samples(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read rows x_1..x_N, n_1..n_N from a CSV (header optional)."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                rows.append([float(x) for x in row])
            except ValueError:
                continue  # header
    arr = np.asarray(rows)
    if arr.ndim != 2 or arr.shape[1] % 2:
        raise ValueError("surface samples need 2N columns: point then normal")
    n = arr.shape[1] // 2
    return arr[:, :n], arr[:, n:]


def inverse_square_field(dim: int, r_inner: float, c: float) -> CoefficientField:
    """q = -c / r^2: the divergence clause fails since r^2 inf Re(-q) stays at c."""
    zero = constant(0.0)

    def Vl(r, omega, side="above"):
        return np.full(len(omega), -c / r**2)

    def dVl(r, omega, side="above"):
        return np.full(len(omega), 2 * c / r**3)

    return potential_field(dim, r_inner, zero, Vl, dVl, zero, radial=True, name="inverse-square",
                           params={"c": c})


def kato_field(dim: int, r_inner: float, k: float = 1.0) -> CoefficientField:
    """q = -k^2."""
    zero = constant(0.0)
    return potential_field(dim, r_inner, constant(k * k), zero, zero, zero, radial=True,
                           name="constant-k", params={"k": k})


def isclose_fields(a: CoefficientField, b: CoefficientField, radii, omega) -> float:
    """max |Q0_a - Q0_b| + |Q1_a - Q1_b| over the given radii."""
    worst = 0.0
    for r in radii:
        worst = max(worst, float(np.max(np.abs(a.Q0(r, omega) - b.Q0(r, omega)))),
                    float(np.max(np.abs(a.Q1(r, omega) - b.Q1(r, omega)))))
    return worst


__all__ = [
    "PotentialModel", "LayeredMedium", "GeometryVerdict", "build_potential_model", "build_layered_medium",
    "check_separating_condition", "check_ray_monotonicity", "normal_cone_condition",
    "load_surface_samples", "inverse_square_field", "kato_field", "isclose_fields",
]
