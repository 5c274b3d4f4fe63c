"""Truncated Laplace-Beltrami eigenbasis on S^{N-1} with quadrature and Gram matrices.

The basis is real and orthonormal in L2(S^{N-1}):

* N = 2: 1/sqrt(2 pi), cos(k theta)/sqrt(pi), sin(k theta)/sqrt(pi) for k <= L.
* N = 3: real spherical harmonics Y_lm = Theta_lm(cos theta) Phi_m(phi), l <= L,
  with Theta_lm normalized on [-1, 1] and Phi_m the same trigonometric system
  as for N = 2.

Mode coefficients are complex numpy vectors; with a real orthonormal basis the
X-inner product of two expansions is the Euclidean product of coefficients.
The eigenvalue of -Lambda_N on the degree-l eigenspace is l(l + N - 2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

SUPPORTED_DIMENSIONS = (2, 3)


def sphere_area(dim: int) -> float:
    return {2: 2 * np.pi, 3: 4 * np.pi}[dim]


def inner(a: np.ndarray, b: np.ndarray) -> complex:
    """X-inner product (a, b) = sum a_i conj(b_i), linear in the first slot."""
    return complex(np.vdot(b, a))


def form(G: np.ndarray, a: np.ndarray, b: np.ndarray | None = None) -> complex:
    """(G a, b) for a Gram matrix or a diagonal given as a vector."""
    b = a if b is None else b
    Ga = G * a if G.ndim == 1 else G @ a
    return inner(Ga, b)


def normalized_legendre(L: int, t: np.ndarray) -> np.ndarray:
    """Theta_lm(t) for 0 <= m <= l <= L, normalized so that int_{-1}^{1} Theta^2 dt = 1.

    Returns an array of shape (L+1, L+1, len(t)) indexed [l, m]. Uses the
    standard three-term recurrence in l for fixed m.
    """
    t = np.asarray(t, dtype=float)
    s = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    P = np.zeros((L + 1, L + 1) + t.shape)
    P[0, 0] = 1.0 / np.sqrt(2.0)
    for m in range(1, L + 1):
        P[m, m] = -np.sqrt((2 * m + 1) / (2.0 * m)) * s * P[m - 1, m - 1]
    for m in range(0, L):
        P[m + 1, m] = np.sqrt(2 * m + 3.0) * t * P[m, m]
    for m in range(0, L + 1):
        for l in range(m + 2, L + 1):
            a = np.sqrt((4.0 * l * l - 1) / (l * l - m * m))
            b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1))
            P[l, m] = a * (t * P[l - 1, m] - b * P[l - 2, m])
    return P


def _azimuthal(orders: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Phi_m(phi) for signed orders; shape (len(phi), len(orders))."""
    phi = np.asarray(phi, dtype=float)[:, None]
    m = orders[None, :]
    return np.where(
        m == 0,
        1.0 / np.sqrt(2 * np.pi),
        np.where(m > 0, np.cos(m * phi), np.sin(-m * phi)) / np.sqrt(np.pi),
    )


def _gauss_legendre(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


@dataclass(frozen=True, eq=False)
class SphereBasis:
    """Finite realization of X = L2(S^{N-1}) up to degree L."""

    dim: int
    L: int
    degrees: np.ndarray
    orders: np.ndarray
    eigenvalues: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray  # basis functions at nodes, shape (n_nodes, n_modes)
    quad_degree: int
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_modes(self) -> int:
        return len(self.degrees)

    @property
    def area(self) -> float:
        return sphere_area(self.dim)

    # -- evaluation -------------------------------------------------------
    def evaluate(self, omega: np.ndarray) -> np.ndarray:
        """Basis functions at unit vectors omega (n, N); returns (n, n_modes)."""
        omega = np.atleast_2d(np.asarray(omega, dtype=float))
        if self.dim == 2:
            theta = np.arctan2(omega[:, 1], omega[:, 0])
            return _azimuthal(self.orders, theta)
        t = np.clip(omega[:, 2], -1.0, 1.0)
        phi = np.arctan2(omega[:, 1], omega[:, 0])
        return self._zonal_values(t) * _azimuthal(self.orders, phi)

    def _zonal_values(self, t: np.ndarray) -> np.ndarray:
        """Theta_{l,|m|}(t) per mode (N = 3 only); shape (len(t), n_modes)."""
        P = normalized_legendre(self.L, t)
        return P[self.degrees, np.abs(self.orders)].T

    def synthesize(self, coeffs: np.ndarray, values: np.ndarray | None = None) -> np.ndarray:
        """Function values at nodes from mode coefficients (last axis = modes)."""
        V = self.values if values is None else values
        return np.asarray(coeffs) @ V.T

    def analyze(self, samples: np.ndarray) -> np.ndarray:
        """Mode coefficients of a function sampled at the quadrature nodes."""
        return (self.weights * np.asarray(samples)) @ self.values

    # -- quadrature -------------------------------------------------------
    def split_quadrature(self, levels: Sequence[float] = ()) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Quadrature split at the given levels of omega_N.

        For N = 3 the polar variable t = omega_3 is split at every level in
        (-1, 1) and Gauss-Legendre is used on each band, so zonal functions
        that are polynomial on each band are integrated exactly. For N = 2
        the circle is split at the angles where omega_2 equals a level.
        Returns (nodes, weights, basis values).
        """
        key = tuple(sorted(float(c) for c in levels if -1.0 < c < 1.0))
        hit = self._cache.get(("split", key))
        if hit is not None:
            return hit
        if self.dim == 3:
            n_t = (self.quad_degree + 2) // 2
            n_phi = self.quad_degree + 1
            edges = (-1.0, *key, 1.0)
            ts, wts = [], []
            for a, b in zip(edges[:-1], edges[1:]):
                x, w = _gauss_legendre(n_t, a, b)
                ts.append(x)
                wts.append(w)
            t = np.concatenate(ts)
            wt = np.concatenate(wts)
            phi = 2 * np.pi * np.arange(n_phi) / n_phi
            T, PH = np.meshgrid(t, phi, indexing="ij")
            S = np.sqrt(np.clip(1 - T * T, 0, None))
            nodes = np.stack([S * np.cos(PH), S * np.sin(PH), T], axis=-1).reshape(-1, 3)
            weights = (wt[:, None] * np.full(n_phi, 2 * np.pi / n_phi)[None, :]).reshape(-1)
        else:
            cuts = []
            for c in key:
                a = np.arcsin(c)
                cuts.extend([a % (2 * np.pi), (np.pi - a) % (2 * np.pi)])
            cuts = sorted(set(cuts))
            if not cuts:
                return self.nodes, self.weights, self.values
            edges = cuts + [cuts[0] + 2 * np.pi]
            n_arc = max(16, 2 * self.quad_degree + 2)
            th, wt = [], []
            for a, b in zip(edges[:-1], edges[1:]):
                x, w = _gauss_legendre(n_arc, a, b)
                th.append(x)
                wt.append(w)
            theta = np.concatenate(th)
            weights = np.concatenate(wt)
            nodes = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        out = (nodes, weights, self.evaluate(nodes))
        self._cache[("split", key)] = out
        return out

    def zonal_quadrature(self, levels: Sequence[float] = ()) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Polar-only quadrature for zonal integrands on S^2.

        Returns (t nodes, t weights, Theta values per mode). A zonal f gives
        Gram entries delta_{m m'} int f Theta_i Theta_j dt.
        """
        if self.dim != 3:
            raise ValueError("zonal quadrature is defined for N = 3 only")
        key = tuple(sorted(float(c) for c in levels if -1.0 < c < 1.0))
        hit = self._cache.get(("zonal", key))
        if hit is not None:
            return hit
        n_t = (self.quad_degree + 2) // 2
        edges = (-1.0, *key, 1.0)
        parts = [_gauss_legendre(n_t, a, b) for a, b in zip(edges[:-1], edges[1:])]
        t = np.concatenate([p[0] for p in parts])
        w = np.concatenate([p[1] for p in parts])
        out = (t, w, self._zonal_values(t))
        self._cache[("zonal", key)] = out
        return out

    @property
    def same_order(self) -> np.ndarray:
        hit = self._cache.get("same_order")
        if hit is None:
            hit = (self.orders[:, None] == self.orders[None, :]).astype(float)
            self._cache["same_order"] = hit
        return hit


def build_basis(dim: int, L: int, quad_degree: int | None = None) -> SphereBasis:
    """Build the degree-L basis on S^{dim-1}.

    The default quadrature is exact for trigonometric/spherical polynomials of
    total degree 4L, so Gram matrices of smooth weights up to degree 2L are
    exact as well.
    """
    if dim not in SUPPORTED_DIMENSIONS:
        raise ValueError(f"unsupported dimension N={dim}; supported dimensions are {SUPPORTED_DIMENSIONS}")
    if L < 0:
        raise ValueError(f"cutoff degree must be >= 0, got {L}")
    qd = max(4 * L, 2) if quad_degree is None else int(quad_degree)
    if qd < 2 * L:
        raise ValueError(f"quadrature degree {qd} cannot integrate degree-{2 * L} products")
    if dim == 2:
        degrees = [0]
        orders = [0]
        for k in range(1, L + 1):
            degrees += [k, k]
            orders += [k, -k]
        degrees = np.array(degrees)
        orders = np.array(orders)
        eig = degrees.astype(float) ** 2
        n = qd + 1
        theta = 2 * np.pi * np.arange(n) / n
        nodes = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        weights = np.full(n, 2 * np.pi / n)
        values = _azimuthal(orders, theta)
    else:
        pairs = [(l, m) for l in range(L + 1) for m in range(-l, l + 1)]
        degrees = np.array([p[0] for p in pairs])
        orders = np.array([p[1] for p in pairs])
        eig = (degrees * (degrees + 1)).astype(float)
        n_t = (qd + 2) // 2
        n_phi = qd + 1
        t, wt = np.polynomial.legendre.leggauss(n_t)
        phi = 2 * np.pi * np.arange(n_phi) / n_phi
        T, PH = np.meshgrid(t, phi, indexing="ij")
        S = np.sqrt(1 - T * T)
        nodes = np.stack([S * np.cos(PH), S * np.sin(PH), T], axis=-1).reshape(-1, 3)
        weights = (wt[:, None] * np.full(n_phi, 2 * np.pi / n_phi)[None, :]).reshape(-1)
        values = None
    basis = SphereBasis(
        dim=dim,
        L=L,
        degrees=degrees,
        orders=orders,
        eigenvalues=eig,
        nodes=nodes,
        weights=weights,
        values=values if values is not None else np.empty((0, 0)),
        quad_degree=qd,
    )
    if dim == 3:
        object.__setattr__(basis, "values", basis.evaluate(nodes))
    return basis


@lru_cache(maxsize=32)
def cached_basis(dim: int, L: int) -> SphereBasis:
    return build_basis(dim, L)


def b_operator_eigenvalues(basis: SphereBasis, r: float) -> np.ndarray:
    """Eigenvalues of B(r) = -r^{-2} Lambda_N per mode."""
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    return basis.eigenvalues / (r * r)


def gram_of(
    basis: SphereBasis,
    f: Callable[[np.ndarray], np.ndarray] | float | complex,
    *,
    levels: Sequence[float] | None = None,
    zonal: bool = False,
) -> np.ndarray:
    """Gram matrix G_ij = int f Y_i Y_j dS of multiplication by f.

    ``f`` maps unit vectors (n, N) to values (n,); a scalar is a constant.
    ``levels`` are omega_N-levels where f jumps (split quadrature). With
    ``zonal=True`` on S^2, f is assumed to depend on omega_3 only and is
    integrated in the polar variable alone; then the matrix couples only
    modes of equal azimuthal order.
    """
    if np.isscalar(f):
        c = complex(f)
        G = np.eye(basis.n_modes) * (c.real if c.imag == 0 else c)
        return G
    levels = () if levels is None else tuple(levels)
    if zonal and basis.dim == 3:
        t, w, Th = basis.zonal_quadrature(levels)
        pts = np.stack([np.sqrt(np.clip(1 - t * t, 0, None)), np.zeros_like(t), t], axis=-1)
        vals = np.asarray(f(pts))
        _check_finite(vals)
        G = (Th.T * (w * vals)) @ Th
        return G * basis.same_order
    if levels:
        nodes, weights, V = basis.split_quadrature(levels)
    else:
        nodes, weights, V = basis.nodes, basis.weights, basis.values
    vals = np.asarray(f(nodes))
    _check_finite(vals)
    return (V.T * (weights * vals)) @ V


def _check_finite(vals: np.ndarray) -> None:
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite sample values in multiplication weight")


def is_hermitian(G: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.allclose(G, G.conj().T, atol=tol * max(1.0, np.abs(G).max())))


def probe_directions(dim: int, n: int = 256) -> np.ndarray:
    """Deterministic dense probe set on S^{N-1}, including the +-e_N poles."""
    if dim == 2:
        theta = 2 * np.pi * (np.arange(n) + 0.5) / n
        pts = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        return np.vstack([pts, [[0.0, 1.0], [0.0, -1.0], [1.0, 0.0], [-1.0, 0.0]]])
    k = np.arange(n) + 0.5
    t = 1 - 2 * k / n
    phi = np.pi * (1 + 5**0.5) * k
    s = np.sqrt(1 - t * t)
    pts = np.stack([s * np.cos(phi), s * np.sin(phi), t], axis=-1)
    return np.vstack([pts, [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]])
