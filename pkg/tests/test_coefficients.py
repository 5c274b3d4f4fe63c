import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kato_growth.coefficients import (
    a_of_r,
    audit_assumptions,
    b_of_r,
    check_gauge_consistency,
    constant,
    kato_gauges,
    kato_shift,
    p_of_r,
    per_radius_verdict,
    potential_field,
    power_gauges,
    power_law,
    sample_decomposition_error,
    shift_to_Q,
    tabulated_field,
)
from kato_growth.media import PotentialModel, build_potential_model, inverse_square_field, kato_field

E3 = np.array([[0.0, 0.0, 1.0]])


def test_kato_shift_values():
    assert kato_shift(3, 2.0) == 0.0
    assert kato_shift(2, 2.0) == pytest.approx(-1 / 16)
    Q = shift_to_Q(lambda r, om, side="above": np.full(len(om), -1.0), 2)
    assert Q(1.0, E3[:, :2])[0] == pytest.approx(-1.25)
    with pytest.raises(ValueError):
        Q(0.0, E3[:, :2])
    with pytest.raises(ValueError):
        shift_to_Q(lambda r, om, side="above": 0, 1)


def test_kato_field_decomposition():
    f = kato_field(3, 0.5)
    assert f.Q0(2.0, E3)[0] == -1.0
    assert f.Q1(2.0, E3)[0] == 0.0
    assert f.q(2.0, E3)[0] == -1.0
    f2 = kato_field(2, 0.5)
    assert f2.Q1(2.0, E3[:, :2])[0] == pytest.approx(-1 / 16)


def test_potential_decomposition_matches_q():
    fld, _ = build_potential_model(PotentialModel(long_coef=1.0, short_coef=1j))
    q = lambda r, om, side="above": np.full(len(om), -1.0 + r**-0.5 + 1j * r**-1.5)
    pts = np.random.default_rng(0).uniform(-10, 10, (50, 3))
    pts = pts[np.linalg.norm(pts, axis=1) > 1.5]
    assert sample_decomposition_error(fld, q, pts) < 1e-14


def test_power_gauges():
    g = power_gauges(0.5)
    assert float(g.h(16.0)) == pytest.approx(16.0**-1.25)
    assert g.h_integral(1.0, math.inf) == pytest.approx(4.0)
    from scipy.integrate import quad

    assert g.h_integral(2.0, 9.0) == pytest.approx(quad(g.h, 2.0, 9.0)[0], rel=1e-12)
    for bad in (0.0, 2.0, 3.0, -1.0):
        with pytest.raises(ValueError, match="epsilon"):
            power_gauges(bad)
    k = kato_gauges()
    assert k.h_integral(1.0, math.e) == pytest.approx(2.0)
    assert k.h_integrable() is False


def test_radial_quantities_kato():
    f, g = kato_field(3, 0.5), power_gauges(0.5)
    assert a_of_r(f, g, 3.0) == 0.0
    assert b_of_r(f, g, 3.0) == 1.0
    assert p_of_r(f, 3.0) == 2.0


def test_nonfinite_sample_raises():
    bad = potential_field(3, 0.5, constant(np.nan), constant(0.0), constant(0.0), constant(0.0), radial=True)
    with pytest.raises(ValueError, match="non-finite"):
        b_of_r(bad, power_gauges(0.5), 2.0)


def test_audit_kato_passes_everything():
    a = audit_assumptions(kato_field(3, 0.5), power_gauges(0.5), np.linspace(1, 40, 300))
    assert a.passed("full")
    assert a.beta == 0.9
    assert a.c1 == pytest.approx(1.1)


def test_audit_example_potential_finite_threshold():
    fld, g = build_potential_model(PotentialModel(long_coef=1.0, short_coef=1j))
    a = audit_assumptions(fld, g, np.linspace(1.5, 40, 400))
    assert a.passed("full")
    assert a.threshold is not None and 1.5 < a.threshold < 10
    assert not a.passed("full", strict=True)


def test_kato_gauge_fails_only_integrability():
    a = audit_assumptions(kato_field(3, 0.5), kato_gauges(), np.linspace(1, 40, 200))
    fails = [c.name for c in a.failures("full")]
    assert fails == ["h-in-L1"]
    assert a.passed("core")
    w = a.clauses["h-in-L1"].witness
    assert w["int_h_upper_half"] == pytest.approx(2 * math.log(40 / 20.5))


def test_inverse_square_fails_divergence():
    a = audit_assumptions(inverse_square_field(3, 0.5, 1.0), power_gauges(0.5), np.linspace(1, 40, 200))
    c = a.clauses["q-divergence"]
    assert c.verdict == "fail"
    assert c.witness["loglog_slope"] == pytest.approx(0.0, abs=1e-9)


def test_per_radius_threshold_rule():
    r = np.linspace(1, 10, 10)
    assert per_radius_verdict("x", r, np.ones(10)).verdict == "pass"
    m = np.ones(10)
    m[:3] = -1
    v = per_radius_verdict("x", r, m)
    assert v.verdict == "pass-beyond-threshold" and v.threshold == 4.0 and v.witness["r"] == 1.0
    m = np.ones(10)
    m[:7] = -1  # threshold past the window midpoint
    assert per_radius_verdict("x", r, m).verdict == "fail"
    m = np.ones(10)
    m[-1] = -1
    v = per_radius_verdict("x", r, m)
    assert v.verdict == "fail" and v.witness["r"] == 10.0


def test_gauge_consistency_beyond_threshold():
    for fld, g in [(kato_field(3, 0.5), power_gauges(0.5)),
                   build_potential_model(PotentialModel(long_coef=1.0, short_coef=1j))]:
        grid = np.linspace(1.5, 40, 200)
        a = audit_assumptions(fld, g, grid)
        out = check_gauge_consistency(fld, a.gauges(g), grid, a)
        assert all(v.ok for v in out.values()), out


def test_tabulated_field_jump_bookkeeping():
    f = tabulated_field(3, 0.5, [1, 2, 2, 5], [1, 1, 3, 3])
    assert f.jump_radii == (2.0,)
    assert f.Q0(2.0, E3)[0] == pytest.approx(-3.0)
    assert f.Q0(2.0, E3, side="below")[0] == pytest.approx(-1.0)
    assert f.Q0(1.5, E3)[0] == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        tabulated_field(3, 0.5, [1, 3, 2], [1, 1, 1])


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(0.05, 2.0), min_size=1, max_size=4), st.booleans())
def test_monotone_dominance_property(steps, invert):
    """Upward steps of lam pass jump dominance with a zero dominator; a downward step fails."""
    radii, vals = [1.0], [1.0]
    lam = 1.0
    for k, s in enumerate(steps):
        rj = 2.0 + 1.5 * k
        sign = -1 if (invert and k == 0) else 1
        radii += [rj, rj]
        vals += [lam, lam + sign * s]
        lam += sign * s
    if lam <= 0:
        return
    radii.append(40.0)
    vals.append(lam)
    f = tabulated_field(3, 0.5, radii, vals)
    a = audit_assumptions(f, power_gauges(0.5), np.linspace(1.0, 12.0, 120))
    c = a.clauses["jump-dominance"]
    if invert:
        assert c.verdict != "pass" and c.witness["r"] < 2.0
    else:
        assert c.verdict == "pass"


def test_power_law_derivative():
    ev, dev = power_law(2.0, 0.5)
    r, h = 3.0, 1e-6
    fd = (ev(r + h, E3)[0] - ev(r - h, E3)[0]) / (2 * h)
    assert dev(r, E3)[0] == pytest.approx(fd, rel=1e-8)
