import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import piecewise_sine, rk4_modes, sqrt_r_j0
from kato_growth.coefficients import constant, potential_field
from kato_growth.media import LayeredMedium, build_layered_medium, kato_field
from kato_growth.radial import InitialData, IntegrationError, Trajectory, assemble, integrate, ode_residual, u_from_v
from kato_growth.sphere_basis import build_basis, cached_basis, gram_of


def kato_system(dim=3, L=0, r_end=50.0):
    return assemble(cached_basis(dim, L), kato_field(dim, 0.5), (1.0, r_end))


def two_shell_system(L=0, r_end=20.0):
    f, _ = build_layered_medium(LayeredMedium.shells([2.0], [1.0, 4.0]), 0.5)
    return assemble(cached_basis(3, L), f, (1.0, r_end))


def test_system_matrix_examples():
    s = kato_system()
    assert np.allclose(s.A(3.0), [-1.0])
    s1 = kato_system(L=1)
    assert np.allclose(s1.A(2.0), [-1.0, 2 / 4 - 1, 2 / 4 - 1, 2 / 4 - 1])


def test_dense_assembly_matches_gram():
    step = lambda om: np.where(om[:, 2] > 0, -2.0, -1.0)
    z = constant(0.0)
    fld = potential_field(3, 0.5, lambda r, om, side="above": -step(om), z, z, z,
                          zonal=True, levels=lambda r: (0.0,))
    b = build_basis(3, 2)
    s = assemble(b, fld, (1.0, 5.0))
    G = gram_of(b, step, levels=[0.0])
    assert np.allclose(s.A(2.0), np.diag(b.eigenvalues / 4) + G, atol=1e-13)


def test_assemble_errors():
    with pytest.raises(ValueError, match="beyond R0"):
        assemble(cached_basis(3, 0), kato_field(3, 1.0), (1.0, 5.0))
    with pytest.raises(ValueError, match="dimension"):
        assemble(cached_basis(2, 0), kato_field(3, 0.5), (1.0, 5.0))


def test_initial_data_validation():
    with pytest.raises(ValueError, match="nontrivial"):
        InitialData(1.0, np.zeros(2), np.zeros(2))
    with pytest.raises(ValueError):
        InitialData(1.0, np.zeros(2), np.zeros(3))


def test_kato_sine_oracle():
    s = kato_system()
    grid = np.linspace(1, 30, 300)
    t = integrate(s, InitialData.default(1, 1.0), grid)
    assert np.max(np.abs(t.v[:, 0] - np.sin(grid - 1))) < 1e-8
    assert np.max(np.abs(t.dv[:, 0] - np.cos(grid - 1))) < 1e-8


def test_bessel_oracle_n2():
    s = kato_system(dim=2, r_end=20.0)
    v0, dv0 = sqrt_r_j0(1.0)
    grid = np.linspace(1, 20, 200)
    t = integrate(s, InitialData(1.0, np.array([v0]), np.array([dv0])), grid)
    ref = np.array([sqrt_r_j0(r)[0] for r in grid])
    assert np.max(np.abs(t.v[:, 0] - ref)) < 1e-6


def test_two_shell_piecewise_sine():
    s = two_shell_system()
    grid = np.linspace(1, 20, 191)
    t = integrate(s, InitialData.default(1, 1.0), grid)
    assert 2.0 in t.r and t.restart[t.index_of(2.0)]
    ref = np.array([piecewise_sine(r, 2.0, 1.0, 2.0) for r in t.r])
    assert np.max(np.abs(t.v[:, 0] - ref[:, 0])) < 1e-8
    assert np.max(np.abs(t.dv[:, 0] - ref[:, 1])) < 1e-8


def test_grid_contains_jumps_and_values_are_continuous():
    s = two_shell_system(L=1)
    t = integrate(s, InitialData.random(4, 1.0, np.random.default_rng(0)), [1.0, 5.0])
    assert list(t.r) == [1.0, 2.0, 5.0]
    left = t.pieces[0][2](2.0)
    right = t.pieces[1][2](2.0)
    assert np.allclose(left, right, rtol=1e-10, atol=0)


def test_ode_residual_small_between_jumps():
    s = two_shell_system(L=2)
    t = integrate(s, InitialData.random(9, 1.0, np.random.default_rng(1)), np.linspace(1, 10, 50))
    scale = np.max(np.abs(t.v))
    for r in (1.5, 3.3, 7.7):
        assert ode_residual(t, r) < 1e-5 * scale


def test_mode_decoupling_matches_rk4_oracle():
    s = two_shell_system(L=2, r_end=8.0)
    b = s.basis
    coef = lambda r, side: b.eigenvalues / r**2 + (-1.0 if (r < 2 or (r == 2 and side == "below")) else -4.0)
    rng = np.random.default_rng(7)
    init = InitialData.random(9, 1.0, rng)
    t = integrate(s, init, [1.0, 3.0, 8.0])
    ref = rk4_modes(coef, 1.0, 8.0, init.v, init.dv, breaks=[2.0], out=[3.0, 8.0], h=1e-3)
    for r in (3.0, 8.0):
        v, _ = ref[r]
        i = t.index_of(r)
        assert np.max(np.abs(t.v[i] - v)) < 1e-8 * np.max(np.abs(v))


def test_linearity():
    s = two_shell_system(L=1, r_end=10.0)
    rng = np.random.default_rng(2)
    i1, i2 = InitialData.random(4, 1.0, rng), InitialData.random(4, 1.0, rng)
    a, b = 0.7 - 0.2j, -1.3 + 0.5j
    grid = np.linspace(1, 10, 40)
    t1, t2 = integrate(s, i1, grid), integrate(s, i2, grid)
    t3 = integrate(s, InitialData(1.0, a * i1.v + b * i2.v, a * i1.dv + b * i2.dv), grid)
    scale = np.max(np.abs(t3.v))
    assert np.max(np.abs(t3.v - (a * t1.v + b * t2.v))) < 1e-8 * scale


def test_wronskian_conserved_across_jump():
    s = two_shell_system()
    t = integrate(s, InitialData(1.0, np.array([1.0 + 0.5j]), np.array([0.3 - 1.0j])), np.linspace(1, 20, 200))
    W = np.imag(np.conj(t.v[:, 0]) * t.dv[:, 0])
    assert np.max(np.abs(W - W[0])) < 1e-9 * (t.r[-1] - t.r[0])


def test_tolerance_halving_converges():
    s = two_shell_system(L=1)
    init = InitialData.random(4, 1.0, np.random.default_rng(3))
    ends = []
    for tol in (1e-8, 5e-9):
        t = integrate(s, init, [1.0, 20.0], tol=tol)
        ends.append(t.v[-1])
    scale = np.max(np.abs(ends[1]))
    assert np.max(np.abs(ends[0] - ends[1])) < 10 * 1e-8 * scale


def test_growth_overflow_status():
    fld = potential_field(3, 0.5, constant(-4.0), constant(0.0), constant(0.0), constant(0.0), radial=True)
    s = assemble(cached_basis(3, 0), fld, (1.0, 200.0))
    t = integrate(s, InitialData.default(1, 1.0), np.linspace(1, 200, 100))
    assert t.status == "growth overflow"
    assert t.r[-1] < 200 and np.all(np.isfinite(t.v))


def test_integrate_request_errors():
    s = kato_system(r_end=5.0)
    with pytest.raises(ValueError):
        integrate(s, InitialData.default(1, 1.0), [1.0, 6.0])
    with pytest.raises(ValueError):
        integrate(s, InitialData.default(2, 1.0), [1.0, 2.0])
    assert issubclass(IntegrationError, RuntimeError)


def test_u_from_v_examples():
    b = cached_basis(3, 0)
    r = np.linspace(1, 5, 9)
    t = Trajectory.from_arrays(r, np.sin(r - 1), np.cos(r - 1))
    u, du = u_from_v(t, b)
    assert np.allclose(u, (np.sin(r - 1) / (r * np.sqrt(4 * np.pi)))[:, None])
    assert np.allclose(du, ((np.cos(r - 1) - np.sin(r - 1) / r) / (r * np.sqrt(4 * np.pi)))[:, None])
    b2 = cached_basis(2, 0)
    t2 = Trajectory.from_arrays(r, np.ones_like(r), np.zeros_like(r))
    u2, _ = u_from_v(t2, b2)
    assert np.allclose(u2, (r**-0.5 / np.sqrt(2 * np.pi))[:, None])
    t0 = Trajectory.from_arrays(r, np.zeros_like(r), np.zeros_like(r))
    assert np.all(u_from_v(t0, b)[0] == 0)


def test_csv_roundtrip(tmp_path):
    s = two_shell_system(L=1, r_end=5.0)
    t = integrate(s, InitialData.random(4, 1.0, np.random.default_rng(4)), np.linspace(1, 5, 11))
    p = t.to_csv(tmp_path / "t.csv")
    rows = list(csv.reader(open(p)))
    assert rows[0][:3] == ["r", "v0_re", "v0_im"] and rows[0][-1] == "restart"
    back = np.array([[float(x) for x in row[1:3]] for row in rows[1:]])
    assert np.array_equal(back[:, 0], t.v[:, 0].real)
    assert sum(int(row[-1]) for row in rows[1:]) == 1


@settings(max_examples=10, deadline=None)
@given(st.floats(0.5, 3.0), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
def test_constant_k_closed_form(k, a, c):
    """v'' = -k^2 v from (a, c) at r = 1 gives a cos(k s) + (c/k) sin(k s)."""
    fld = kato_field(3, 0.5, k)
    if a == 0 and c == 0:
        return
    s = assemble(cached_basis(3, 0), fld, (1.0, 10.0))
    grid = np.linspace(1, 10, 30)
    t = integrate(s, InitialData(1.0, np.array([a]), np.array([c])), grid)
    ref = a * np.cos(k * (grid - 1)) + c / k * np.sin(k * (grid - 1))
    assert np.max(np.abs(t.v[:, 0] - ref)) < 1e-7 * max(1, abs(a), abs(c) / k)
