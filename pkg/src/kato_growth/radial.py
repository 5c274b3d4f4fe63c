"""The truncated radial system -v'' + (B + C0 + C1) v = 0 and its integration.

The state is complex y = [v, v'] over the basis modes. Integration runs
piecewise between restart radii (coefficient jumps and points where the
angular Gram matrices lose smoothness) so no step ever straddles a
discontinuity; (v, v') is carried over unchanged at each restart.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .coefficients import CoefficientField
from .sphere_basis import SphereBasis, b_operator_eigenvalues, gram_of

OVERFLOW = 1e100
_CACHE_LIMIT = 8192


class IntegrationError(RuntimeError):
    """Raised when the adaptive step collapses; carries the radius reached."""

    def __init__(self, message: str, radius: float):
        super().__init__(f"{message} (at r={radius:.17g})")
        self.radius = radius


@dataclass(frozen=True, eq=False)
class RadialSystem:
    """A(r) = B(r) + C0(r) + C1(r) on a fixed basis over [r_start, r_end].

    For radial fields the Gram matrices are multiples of the identity and are
    returned as length-n_modes diagonals.
    """

    basis: SphereBasis
    field: CoefficientField
    r_start: float
    r_end: float
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_modes(self) -> int:
        return self.basis.n_modes

    @property
    def diagonal(self) -> bool:
        return self.field.radial

    @property
    def restart_radii(self) -> tuple[float, ...]:
        return tuple(r for r in self.field.restart_radii() if self.r_start < r < self.r_end)

    @property
    def jump_radii(self) -> tuple[float, ...]:
        return tuple(r for r in self.field.jump_radii if self.r_start < r < self.r_end)

    def _pole(self) -> np.ndarray:
        e = np.zeros((1, self.basis.dim))
        e[0, -1] = 1.0
        return e

    def _gram(self, key: str, fn, r: float, side: str) -> np.ndarray:
        ck = (key, float(r), side)
        hit = self._cache.get(ck)
        if hit is not None:
            return hit
        if self.diagonal:
            val = complex(fn(r, self._pole(), side=side)[0])
            out = np.full(self.n_modes, val.real if val.imag == 0 else val)
        else:
            out = gram_of(self.basis, lambda om: fn(r, om, side=side),
                          levels=self.field.levels_at(r), zonal=self.field.zonal)
        if len(self._cache) > _CACHE_LIMIT:
            self._cache.clear()
        self._cache[ck] = out
        return out

    def C0(self, r: float, side: str = "above") -> np.ndarray:
        return self._gram("Q0", self.field.Q0, r, side)

    def C1(self, r: float, side: str = "above") -> np.ndarray:
        return self._gram("Q1", self.field.Q1, r, side)

    def C0r(self, r: float, side: str = "above") -> np.ndarray:
        return self._gram("Q0r", self.field.Q0r, r, side)

    def CR(self, r: float, side: str = "above") -> np.ndarray:
        """Gram of Q0 + Re Q1."""
        q1 = self.field.Q1
        return self.C0(r, side) + self._gram("ReQ1", lambda rr, om, side="above": np.real(q1(rr, om, side=side)),
                                             r, side)

    def Cq_re(self, r: float, side: str = "above") -> np.ndarray:
        """Gram of Re q (used by the surface functional)."""
        q = self.field.q
        return self._gram("Req", lambda rr, om, side="above": np.real(q(rr, om, side=side)), r, side)

    def B(self, r: float) -> np.ndarray:
        return b_operator_eigenvalues(self.basis, r)

    def A(self, r: float, side: str = "above") -> np.ndarray:
        """System matrix; a diagonal vector for radial fields."""
        if self.diagonal:
            return self.B(r) + self.C0(r, side) + self.C1(r, side)
        return np.diag(self.B(r)) + self.C0(r, side) + self.C1(r, side)

    def apply(self, r: float, v: np.ndarray, side: str = "above") -> np.ndarray:
        Ar = self.A(r, side)
        return Ar * v if Ar.ndim == 1 else Ar @ v


def assemble(basis: SphereBasis, fld: CoefficientField, interval: tuple[float, float]) -> RadialSystem:
    """Bind a basis and a field on an interval strictly outside R0."""
    a, b = map(float, interval)
    if basis.dim != fld.dim:
        raise ValueError(f"basis dimension {basis.dim} differs from field dimension {fld.dim}")
    if not a > fld.r_inner:
        raise ValueError(f"interval start {a} must lie strictly beyond R0 = {fld.r_inner}")
    if not b > a:
        raise ValueError(f"empty interval [{a}, {b}]")
    return RadialSystem(basis, fld, a, b)


@dataclass(frozen=True)
class InitialData:
    r_init: float
    v: np.ndarray
    dv: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=complex)
        dv = np.asarray(self.dv, dtype=complex)
        if v.shape != dv.shape or v.ndim != 1:
            raise ValueError("v and v' must be vectors of equal length")
        if not (np.any(v != 0) or np.any(dv != 0)):
            raise ValueError("initial data must be nontrivial")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "dv", dv)

    @classmethod
    def default(cls, n_modes: int, r_init: float) -> "InitialData":
        """v = 0, v' = first basis vector."""
        dv = np.zeros(n_modes, complex)
        dv[0] = 1.0
        return cls(r_init, np.zeros(n_modes, complex), dv)

    @classmethod
    def random(cls, n_modes: int, r_init: float, rng: np.random.Generator) -> "InitialData":
        z = rng.standard_normal((4, n_modes))
        return cls(r_init, z[0] + 1j * z[1], z[2] + 1j * z[3])


@dataclass(eq=False)
class Trajectory:
    """(v, v') sampled on a radius grid, with dense pieces for off-grid evaluation."""

    r: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    restart: np.ndarray
    system: RadialSystem | None = None
    status: str = "ok"
    pieces: list = field(default_factory=list, repr=False)
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_arrays(cls, r, v, dv, system: RadialSystem | None = None, restart=None) -> "Trajectory":
        """Wrap sampled arrays (e.g. a synthetic path) as a trajectory."""
        r = np.asarray(r, float)
        v = np.asarray(v, complex)
        dv = np.asarray(dv, complex)
        if v.ndim == 1:
            v, dv = v[:, None], dv[:, None]
        restart = np.zeros(len(r), bool) if restart is None else np.asarray(restart, bool)
        return cls(r, v, dv, restart, system, meta={"synthetic": True})

    def __len__(self) -> int:
        return len(self.r)

    @property
    def n_modes(self) -> int:
        return self.v.shape[1]

    def scaled(self, alpha: complex) -> "Trajectory":
        pieces = [(a, b, (lambda s, f=f: alpha * f(s))) for a, b, f in self.pieces]
        return Trajectory(self.r, alpha * self.v, alpha * self.dv, self.restart, self.system,
                          self.status, pieces, dict(self.meta))

    def at(self, r: float) -> tuple[np.ndarray, np.ndarray]:
        """Dense (v, v') at an arbitrary radius inside the integrated range."""
        for a, b, f in self.pieces:
            if a <= r <= b:
                y = f(r)
                n = len(y) // 2
                return y[:n], y[n:]
        raise ValueError(f"r={r} outside the integrated range")

    def index_of(self, r: float) -> int:
        i = int(np.searchsorted(self.r, r))
        if i >= len(self.r) or self.r[i] != r:
            raise ValueError(f"r={r} is not a trajectory grid radius")
        return i

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        n = self.n_modes
        head = ["r"]
        for i in range(n):
            head += [f"v{i}_re", f"v{i}_im"]
        for i in range(n):
            head += [f"dv{i}_re", f"dv{i}_im"]
        head.append("restart")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(head)
            for k in range(len(self.r)):
                row = [repr(float(self.r[k]))]
                for z in self.v[k]:
                    row += [repr(float(z.real)), repr(float(z.imag))]
                for z in self.dv[k]:
                    row += [repr(float(z.real)), repr(float(z.imag))]
                row.append(str(int(self.restart[k])))
                w.writerow(row)
        return path


def integrate(
    system: RadialSystem,
    init: InitialData,
    grid: Sequence[float],
    *,
    tol: float = 1e-9,
    atol: float | None = None,
    max_step: float = np.inf,
) -> Trajectory:
    """Integrate v'' = A(r) v from init.r_init across the requested grid.

    Uses an adaptive 8(5,3) Runge-Kutta pair with dense output, restarting at
    every declared restart radius. A |v| beyond 1e100 stops with status
    'growth overflow' and the partial trajectory.
    """
    n = system.n_modes
    if init.v.shape != (n,):
        raise ValueError(f"initial data has {init.v.shape[0]} modes, system has {n}")
    r0 = float(init.r_init)
    req = np.asarray(sorted(set(float(x) for x in grid)))
    if req.size == 0:
        raise ValueError("empty grid request")
    if r0 < system.r_start or req[-1] > system.r_end or req[0] < r0:
        raise ValueError(f"grid [{req[0]}, {req[-1]}] and r_init {r0} must lie in "
                         f"[{system.r_start}, {system.r_end}] with r_init first")
    r_end = float(req[-1])
    cuts = [c for c in system.restart_radii if r0 < c < r_end]
    bounds = [r0] + cuts + [r_end]
    full = np.asarray(sorted(set(req.tolist()) | set(cuts) | {r0}))
    full = full[full >= req[0]] if req[0] > r0 else full
    scale = max(1.0, float(np.max(np.abs(np.concatenate([init.v, init.dv])))))
    atol = tol * 1e-3 * scale if atol is None else atol

    y = np.concatenate([init.v, init.dv]).astype(complex)
    vs, dvs, rs = [], [], []
    pieces = []
    stats = {"nfev": 0, "steps": 0}
    status = "ok"

    def overflow(t, yy):
        return OVERFLOW - np.max(np.abs(yy[:n]))

    overflow.terminal = True

    for a, b in zip(bounds[:-1], bounds[1:]):
        def rhs(t, yy, b=b):
            side = "below" if t >= b else "above"
            return np.concatenate([yy[n:], system.apply(t, yy[:n], side)])

        sol = solve_ivp(rhs, (a, b), y, method="DOP853", rtol=tol, atol=atol, dense_output=True,
                        events=overflow, max_step=max_step)
        stats["nfev"] += sol.nfev
        stats["steps"] += len(sol.t) - 1
        if sol.status == -1:
            raise IntegrationError(sol.message, float(sol.t[-1]))
        stop = float(sol.t[-1])
        pieces.append((a, stop, sol.sol))
        sel = full[(full >= a) & (full <= stop)]
        if rs and sel.size and sel[0] == rs[-1]:
            sel = sel[1:]
        if sel.size:
            Y = sol.sol(sel)
            if sel[-1] == stop:
                Y[:, -1] = sol.y[:, -1]
            rs.extend(sel.tolist())
            vs.append(Y[:n].T)
            dvs.append(Y[n:].T)
        if sol.status == 1:
            status = "growth overflow"
            break
        y = sol.y[:, -1]

    r_arr = np.asarray(rs)
    keep = r_arr >= req[0]
    V = np.vstack(vs)[keep]
    dV = np.vstack(dvs)[keep]
    r_arr = r_arr[keep]
    restart = np.isin(r_arr, np.asarray(cuts))
    meta = {"tol": tol, "atol": atol, "restart_radii": cuts, "method": "DOP853", **stats}
    return Trajectory(r_arr, V, dV, restart, system, status, pieces, meta)


def ode_residual(traj: Trajectory, r: float, delta: float = 1e-5) -> float:
    """|v'' - A v| at r via a centered difference of the dense v'."""
    sysm = traj.system
    _, dp = traj.at(r + delta)
    _, dm = traj.at(r - delta)
    v, _ = traj.at(r)
    d2 = (dp - dm) / (2 * delta)
    return float(np.linalg.norm(d2 - sysm.apply(r, v)))


def u_from_v(traj: Trajectory, basis: SphereBasis, nodes: np.ndarray | None = None
             ) -> tuple[np.ndarray, np.ndarray]:
    """u and du/dr on each grid sphere from v = r^{(N-1)/2} u(r .).

    Returns arrays (n_radii, n_nodes) sampled at ``nodes`` (default: the
    basis quadrature nodes).
    """
    Y = basis.values if nodes is None else basis.evaluate(nodes)
    N = basis.dim
    r = traj.r[:, None]
    sv = traj.v @ Y.T
    sdv = traj.dv @ Y.T
    w = r ** (-(N - 1) / 2)
    return w * sv, w * (sdv - (N - 1) / (2 * r) * sv)
