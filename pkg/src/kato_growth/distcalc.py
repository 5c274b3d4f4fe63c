"""Right-continuous piecewise-smooth functions and the monotonicity lemma.

A ``PiecewiseFunction`` is its smooth part plus point masses: the
distributional derivative is f' on each open piece plus a Dirac mass of size
(f(b) - f(b-)) at each breakpoint b. Nonnegativity is therefore decidable
constructively; the test-function (duality) form is kept as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as spi
from scipy.interpolate import PchipInterpolator

SLOPE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PiecewiseFunction:
    """f on [lo, hi]; piece j lives on [b_{j-1}, b_j) so values at breakpoints come from the right."""

    breakpoints: tuple[float, ...]
    pieces: tuple[Callable[[float], float], ...]
    derivatives: tuple[Callable[[float], float], ...]
    domain: tuple[float, float]

    def __post_init__(self):
        b = self.breakpoints
        if any(y <= x for x, y in zip(b, b[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if len(self.pieces) != len(b) + 1 or len(self.derivatives) != len(b) + 1:
            raise ValueError("need one smooth piece (and derivative) per interval")
        lo, hi = self.domain
        if not all(lo < x < hi for x in b):
            raise ValueError("breakpoints must lie inside the domain")

    def piece_index(self, r: float) -> int:
        return int(np.searchsorted(self.breakpoints, r, side="right"))

    def __call__(self, r: float) -> float:
        return float(self.pieces[self.piece_index(r)](r))

    def left_limit(self, r: float) -> float:
        j = int(np.searchsorted(self.breakpoints, r, side="left"))
        return float(self.pieces[j](r))

    def derivative(self, r: float) -> float:
        return float(self.derivatives[self.piece_index(r)](r))

    def jumps(self) -> np.ndarray:
        return np.array([self(b) - self.left_limit(b) for b in self.breakpoints])

    def intervals(self) -> list[tuple[float, float]]:
        edges = [self.domain[0], *self.breakpoints, self.domain[1]]
        return list(zip(edges[:-1], edges[1:]))

    def values(self, grid: np.ndarray) -> np.ndarray:
        return np.array([self(x) for x in grid])


@dataclass
class DerivativeSignCertificate:
    verdict: str  # "nonnegative" or "indefinite"
    kind: str | None = None  # "slope" or "jump"
    location: tuple[float, float] | float | None = None
    value: float | None = None

    @property
    def nonnegative(self) -> bool:
        return self.verdict == "nonnegative"


def derivative_sign(f: PiecewiseFunction, density: int = 200) -> DerivativeSignCertificate:
    """Sampled smooth slope >= -1e-12 on every piece and every jump >= 0."""
    for b, jmp in zip(f.breakpoints, f.jumps()):
        if jmp < 0:
            return DerivativeSignCertificate("indefinite", "jump", float(b), float(jmp))
    for j, (a, b) in enumerate(f.intervals()):
        n = max(8, int(math.ceil(density * (b - a))))
        # interior samples keep us off the breakpoints
        xs = a + (b - a) * (np.arange(n) + 0.5) / n
        ds = np.array([f.derivatives[j](x) for x in xs])
        k = int(np.argmin(ds))
        if ds[k] < -SLOPE_TOL:
            h = (b - a) / (2 * n)
            return DerivativeSignCertificate("indefinite", "slope", (float(xs[k] - h), float(xs[k] + h)),
                                             float(ds[k]))
    return DerivativeSignCertificate("nonnegative")


def witness_holds(f: PiecewiseFunction, cert: DerivativeSignCertificate) -> bool:
    """Re-evaluate a certificate's witness; True when it still shows a negative value."""
    if cert.nonnegative:
        return False
    if cert.kind == "jump":
        b = cert.location
        return f(b) - f.left_limit(b) < 0
    lo, hi = cert.location
    return f.derivative(0.5 * (lo + hi)) < -SLOPE_TOL


@dataclass
class MonotoneVerdict:
    nondecreasing: bool
    violation: tuple[float, float] | None = None
    drop: float | None = None


def is_nondecreasing(f: PiecewiseFunction, grid: Sequence[float], probe: float = 1e-9) -> MonotoneVerdict:
    """Pointwise check on the grid, with breakpoints and their left neighbours added."""
    extra = []
    for b in f.breakpoints:
        extra += [b, b - probe * (1 + abs(b))]
    g = np.unique(np.concatenate([np.asarray(grid, float), extra]))
    g = g[(g >= f.domain[0]) & (g <= f.domain[1])]
    vals = f.values(g)
    steps = np.diff(vals)
    bad = np.nonzero(steps < 0)[0]
    if bad.size == 0:
        return MonotoneVerdict(True)
    i = int(bad[0])
    return MonotoneVerdict(False, (float(g[i]), float(g[i + 1])), float(steps[i]))


@dataclass(frozen=True)
class Bump:
    """exp(-1/(1-s^2)) on |s| < 1 with s = (r - center)/width, optionally scaled."""

    center: float
    width: float
    scale: float = 1.0

    def __call__(self, r: float) -> float:
        s = (r - self.center) / self.width
        return self.scale * math.exp(-1.0 / (1.0 - s * s)) if abs(s) < 1 else 0.0

    @property
    def support(self) -> tuple[float, float]:
        return self.center - self.width, self.center + self.width

    def mass(self) -> float:
        lo, hi = self.support
        return spi.quad(self, lo, hi, epsabs=1e-14, epsrel=1e-12)[0]

    def normalized(self) -> "Bump":
        return Bump(self.center, self.width, self.scale / self.mass())


def quotient_integral(f: PiecewiseFunction, phi: Bump, h: float) -> float:
    """int (f(r + h) - f(r)) phi(r) dr, split at every kink of the integrand."""
    lo, hi = phi.support
    pts = sorted({x for b in f.breakpoints for x in (b, b - h) if lo < x < hi})
    val, _ = spi.quad(lambda r: (f(r + h) - f(r)) * phi(r), lo, hi, points=pts or None,
                      epsabs=1e-12, epsrel=1e-10, limit=400)
    return val


@dataclass
class QuotientReport:
    values: np.ndarray  # (n_bumps, n_h)
    masses: np.ndarray
    tol: float

    @property
    def min_value(self) -> float:
        return float(self.values.min())

    @property
    def ok(self) -> bool:
        return bool(np.all(self.values >= -self.tol))


def mollified_quotient_check(f: PiecewiseFunction, bumps: Sequence[Bump], hs: Sequence[float],
                             tol: float = 1e-9) -> QuotientReport:
    vals = np.array([[quotient_integral(f, phi, h) for h in hs] for phi in bumps])
    masses = np.array([phi.mass() for phi in bumps])
    return QuotientReport(vals, masses, tol)


@dataclass
class ContradictionWitness:
    r0: float
    r1: float
    h0: float
    eta0: float
    bump: Bump
    integral: float

    @property
    def bound(self) -> float:
        return -self.eta0 / 3


def contradiction_witness(f: PiecewiseFunction, r0: float, h0: float, *, samples: int = 2000,
                          tail_fraction: float = 0.05) -> ContradictionWitness:
    """Rebuild the proof's test function for a drop f(r0 + h0) - f(r0) = -eta0 < 0.

    r1 is the largest sampled radius keeping both f(r) and f(r + h0) within
    eta0/3 of their values at r0; the normalized bump sits at the end of
    [r0, r1] and occupies ``tail_fraction`` of it.
    """
    eta0 = -(f(r0 + h0) - f(r0))
    if not eta0 > 0:
        raise ValueError("no drop at (r0, h0)")
    xs = np.linspace(r0, r0 + h0, samples + 1)[1:]
    a0, b0 = f(r0), f(r0 + h0)
    r1 = r0
    for x in xs:
        if abs(f(x) - a0) < eta0 / 3 and abs(f(x + h0) - b0) < eta0 / 3:
            r1 = float(x)
        else:
            break
    if r1 == r0:
        raise ValueError("right-continuity window not resolved; increase samples")
    w = tail_fraction * (r1 - r0) / 2
    phi = Bump(r1 - w, w).normalized()
    return ContradictionWitness(r0, r1, h0, eta0, phi, quotient_integral(f, phi, h0))


# ---------------------------------------------------------------------------
# Random instances


def random_monotone(rng: np.random.Generator, domain=(1.0, 10.0), n_breaks: int | None = None,
                    n_knots: int = 8) -> PiecewiseFunction:
    """Monotone PCHIP smooth part plus random positive jumps."""
    lo, hi = domain
    n_breaks = int(rng.integers(1, 6)) if n_breaks is None else n_breaks
    knots = np.linspace(lo, hi, n_knots)
    vals = np.cumsum(rng.uniform(0, 1, n_knots))
    smooth = PchipInterpolator(knots, vals)
    dsmooth = smooth.derivative()
    breaks = np.sort(rng.uniform(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo), n_breaks))
    breaks = np.unique(breaks.round(9))
    jumps = rng.uniform(0.01, 1.0, len(breaks))
    return _assemble(smooth, dsmooth, breaks, jumps, domain)


def inject_negative_jump(rng: np.random.Generator, f: PiecewiseFunction | None = None,
                         domain=(1.0, 10.0), eta0: float | None = None) -> tuple[PiecewiseFunction, float, float]:
    """A monotone instance with one breakpoint's jump replaced by -eta0; returns (f, b, eta0)."""
    lo, hi = domain
    knots = np.linspace(lo, hi, 8)
    vals = np.cumsum(rng.uniform(0, 1, 8))
    smooth = PchipInterpolator(knots, vals)
    breaks = np.unique(np.sort(rng.uniform(lo + 1, hi - 1, int(rng.integers(1, 5)))).round(9))
    jumps = rng.uniform(0.01, 1.0, len(breaks))
    k = int(rng.integers(len(breaks)))
    eta0 = float(rng.uniform(0.05, 2.0)) if eta0 is None else eta0
    jumps[k] = -eta0
    return _assemble(smooth, smooth.derivative(), breaks, jumps, domain), float(breaks[k]), eta0


def _assemble(smooth, dsmooth, breaks, jumps, domain) -> PiecewiseFunction:
    offsets = np.concatenate([[0.0], np.cumsum(jumps)])
    pieces = tuple((lambda r, c=c: float(smooth(r)) + c) for c in offsets)
    ders = tuple((lambda r: float(dsmooth(r))) for _ in offsets)
    return PiecewiseFunction(tuple(float(b) for b in breaks), pieces, ders, tuple(domain))


def step(at: float, size: float, domain=(0.0, 10.0), base: float = 0.0) -> PiecewiseFunction:
    return PiecewiseFunction((at,), (lambda r: base, lambda r: base + size), (lambda r: 0.0, lambda r: 0.0),
                             domain)


def smooth(fn: Callable[[float], float], dfn: Callable[[float], float], domain=(0.0, 10.0)) -> PiecewiseFunction:
    return PiecewiseFunction((), (fn,), (dfn,), domain)


def tight_instance(rng: np.random.Generator, tau: float = 0.02) -> tuple[PiecewiseFunction, float, float]:
    """A function for which the eta0/3 bound is nearly attained; returns (f, r0, h0).

    On [r0, r1] f falls by (1 - tau) eta0/3 while on [r0 + h0, r1 + h0] it
    rises by the same amount, with a drop in between so that
    f(r0 + h0) - f(r0) = -eta0.
    """
    eta0 = float(rng.uniform(0.2, 3.0))
    r0 = float(rng.uniform(2.0, 4.0))
    h0 = float(rng.uniform(0.5, 1.5))
    r1 = r0 + float(rng.uniform(0.2, 0.4)) * h0
    kappa = (1 - tau) * eta0 / 3
    b = 0.5 * (r1 + r0 + h0)  # drop position between the two ramps
    span = r1 - r0

    def ramp_down(r):
        return -kappa * (r - r0) / span

    def ramp_up(r):
        return -eta0 + kappa * (r - r0 - h0) / span

    pieces = (lambda r: 0.0, ramp_down, lambda r: -kappa, lambda r: -eta0, ramp_up, lambda r: -eta0 + kappa)
    ders = (lambda r: 0.0, lambda r: -kappa / span, lambda r: 0.0, lambda r: 0.0, lambda r: kappa / span,
            lambda r: 0.0)
    f = PiecewiseFunction((r0, r1, b, r0 + h0, r1 + h0), pieces, ders, (0.0, r1 + h0 + 5.0))
    return f, r0, h0
