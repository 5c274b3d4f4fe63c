"""Independent reference implementations used as test oracles.

Nothing here imports the integrator or the basis machinery under test.
"""

from __future__ import annotations

import numpy as np


def bessel_j(n: int, x: float, points: int = 256) -> float:
    """J_n(x) = (1/2pi) int_0^{2pi} cos(n t - x sin t) dt by the periodic trapezoid rule.

    The integrand is smooth and periodic, so the rule converges
    geometrically once ``points`` exceeds |x| + a few dozen.
    """
    t = 2 * np.pi * np.arange(points) / points
    return float(np.mean(np.cos(n * t - x * np.sin(t))))


def sqrt_r_j0(r: float) -> tuple[float, float]:
    """v = sqrt(r) J0(r) and v' = J0/(2 sqrt r) - sqrt(r) J1(r)."""
    j0, j1 = bessel_j(0, r), bessel_j(1, r)
    return np.sqrt(r) * j0, j0 / (2 * np.sqrt(r)) - np.sqrt(r) * j1


def rk4_modes(coef, r0: float, r1: float, v0, dv0, breaks=(), h: float = 2e-3, out=None):
    """Fixed-step RK4 for decoupled v_i'' = coef(r)_i v_i, restarting at ``breaks``.

    ``coef(r, side)`` returns the per-mode coefficient vector; each piece
    between breaks uses the right-continuous value at its left end and the
    left limit at its right end. Returns the states at the radii in ``out``
    (which must lie on piece boundaries or be reached by whole steps) as a
    dict r -> (v, dv); when ``out`` is None only the end state is returned.
    """
    v = np.asarray(v0, complex).copy()
    dv = np.asarray(dv0, complex).copy()
    edges = [r0] + sorted(b for b in breaks if r0 < b < r1) + [r1]
    want = sorted(out) if out is not None else [r1]
    res = {}
    for a, b in zip(edges[:-1], edges[1:]):
        stops = [a] + [x for x in want if a < x < b] + [b]
        for s0, s1 in zip(stops[:-1], stops[1:]):
            n = max(1, int(np.ceil((s1 - s0) / h)))
            dh = (s1 - s0) / n
            r = s0
            for k in range(n):
                side_end = "below" if (k == n - 1 and s1 == b) else "above"

                def f(rr, side, v_, dv_):
                    return dv_, coef(rr, side) * v_

                k1 = f(r, "above", v, dv)
                k2 = f(r + dh / 2, "above", v + dh / 2 * k1[0], dv + dh / 2 * k1[1])
                k3 = f(r + dh / 2, "above", v + dh / 2 * k2[0], dv + dh / 2 * k2[1])
                k4 = f(r + dh, side_end, v + dh * k3[0], dv + dh * k3[1])
                v = v + dh / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
                dv = dv + dh / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
                r = s0 + (k + 1) * dh
            if s1 in want:
                res[s1] = (v.copy(), dv.copy())
    return res


def piecewise_sine(r: float, jump: float, k_in: float, k_out: float, r0: float = 1.0) -> tuple[float, float]:
    """Solution of v'' = -k^2 v with v(r0) = 0, v'(r0) = 1 and k switching at ``jump``."""
    if r < jump:
        return np.sin(k_in * (r - r0)) / k_in, np.cos(k_in * (r - r0))
    vj, dvj = np.sin(k_in * (jump - r0)) / k_in, np.cos(k_in * (jump - r0))
    s = r - jump
    return vj * np.cos(k_out * s) + dvj / k_out * np.sin(k_out * s), -vj * k_out * np.sin(k_out * s) + dvj * np.cos(k_out * s)


def riccati_bessel(l: int, k: float, r):
    """Solutions x j_l(x), x y_l(x) at x = k r of v'' = (l(l+1)/r^2 - k^2) v, with r-derivatives."""
    from scipy.special import spherical_jn, spherical_yn

    x = k * np.asarray(r, float)
    j, dj = spherical_jn(l, x), spherical_jn(l, x, derivative=True)
    y, dy = spherical_yn(l, x), spherical_yn(l, x, derivative=True)
    return (x * j, x * y), (k * (j + x * dj), k * (y + x * dy))


def shell_mode(l: int, ks, radii, r0: float, v0: complex, dv0: complex, r):
    """One N = 3 mode through concentric shells with wavenumber ks[i] on the i-th layer.

    The solution is a Riccati-Bessel combination on every layer, matched so
    that v and v' are continuous across each radius in ``radii``.
    """
    r = np.atleast_1d(np.asarray(r, float))
    coefs = []
    va, dva, ra = complex(v0), complex(dv0), r0
    for i, k in enumerate(ks):
        (p, q), (dp, dq) = riccati_bessel(l, k, ra)
        a, b = np.linalg.solve(np.array([[p, q], [dp, dq]]), np.array([va, dva]))
        coefs.append((a, b))
        if i < len(radii):
            rb = radii[i]
            (p, q), (dp, dq) = riccati_bessel(l, k, rb)
            va, dva, ra = a * p + b * q, a * dp + b * dq, rb
    layer = np.searchsorted(np.asarray(radii, float), r, side="right")
    out = np.empty(len(r), complex)
    for i, k in enumerate(ks):
        sel = layer == i
        if sel.any():
            (p, q), _ = riccati_bessel(l, k, r[sel])
            a, b = coefs[i]
            out[sel] = a * p + b * q
    return out
