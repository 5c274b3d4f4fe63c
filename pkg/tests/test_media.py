import numpy as np
import pytest

from kato_growth.coefficients import audit_assumptions
from kato_growth.media import (
    LayeredMedium,
    PotentialModel,
    build_layered_medium,
    build_potential_model,
    check_ray_monotonicity,
    check_separating_condition,
    isclose_fields,
    kato_field,
    load_surface_samples,
    normal_cone_condition,
)
from kato_growth.sphere_basis import probe_directions

E3 = np.array([[0.0, 0.0, 1.0]])


def planar_slabs():
    return LayeredMedium.slabs([-2.0, -5.0], [3.0, 6.0], [1.5, 2.5], 1.0, [2.0, 3.0])


def test_potential_model_validation():
    with pytest.raises(ValueError, match="epsilon"):
        PotentialModel(epsilon=2.0)
    with pytest.raises(ValueError, match="m0"):
        PotentialModel(m0=0.0)


def test_trivial_potential_is_kato():
    fld, g = build_potential_model(PotentialModel())
    assert fld.Q0(3.0, E3)[0] == -1.0 and fld.Q1(3.0, E3)[0] == 0.0
    assert float(g.h(16.0)) == pytest.approx(16**-1.25)


def test_nondecaying_long_range_fails_decay_clause():
    fld, g = build_potential_model(PotentialModel(long_coef=2.0, long_power=0.0))
    a = audit_assumptions(fld, g, np.linspace(1.5, 40, 100))
    c = a.clauses["V_long-decay"]
    assert c.verdict == "fail" and c.witness["V_long"] == 2.0


def test_constant_medium_matches_constant_lambda():
    med = LayeredMedium.shells([], [1.0], lam=1.0)
    f1, _ = build_layered_medium(med, 0.5)
    f2 = kato_field(3, 0.5)
    assert isclose_fields(f1, f2, np.linspace(0.6, 30, 50), probe_directions(3, 64)) == 0.0


def test_shell_field_steps():
    med = LayeredMedium.shells([2.0, 5.0], [1.0, 2.0, 4.0])
    f, _ = build_layered_medium(med, 0.5)
    assert f.jump_radii == (2.0, 5.0)
    assert f.Q0(2.0, E3)[0] == -2.0 and f.Q0(2.0, E3, side="below")[0] == -1.0
    assert f.Q0(6.0, E3)[0] == -4.0
    assert f.Q0r(3.0, E3)[0] == 0.0
    a = audit_assumptions(f, _, np.linspace(1.0, 30, 200))
    assert a.clauses["jump-dominance"].verdict == "pass"


def test_layered_medium_invariants():
    with pytest.raises(ValueError):
        LayeredMedium.shells([2.0, 1.0], [1, 2, 3])
    with pytest.raises(ValueError):
        LayeredMedium.shells([2.0], [1.0])
    with pytest.raises(ValueError):
        LayeredMedium.slabs([1.0], [2.0], [1.0], 1.0, [1.0])
    with pytest.raises(ValueError, match="positive"):
        build_layered_medium(LayeredMedium.shells([2.0], [1.0, 0.0]), 0.5)


def test_slab_mu0_geometry():
    med = planar_slabs()
    om = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]])
    assert list(med.mu0(4.0, om)) == [2.0, 1.5, 1.0]
    assert list(med.mu0(7.0, om)) == [3.0, 2.5, 1.0]
    # x_N = 3 lies on a cut: the outer layer wins from above
    assert list(med.mu0(3.0, om)) == [2.0, 1.5, 1.0]
    assert list(med.mu0(3.0, om, side="below")) == [1.0, 1.5, 1.0]
    assert med.kink_radii() == (2.0, 3.0, 5.0, 6.0)
    assert med.zonal_levels(4.0) == (-0.5, 0.75)


def test_separating_condition():
    assert check_separating_condition(LayeredMedium.shells([2, 5], [1, 2, 4]))
    bad = check_separating_condition(LayeredMedium.shells([2], [1, 0.5]))
    assert not bad and bad.interface == "0->1"
    assert check_separating_condition(planar_slabs())
    inv = LayeredMedium.slabs([-2.0, -5.0], [3.0], [2.5, 1.5], 1.0, [2.0])
    v = check_separating_condition(inv)
    assert not v and v.level == -5.0


def test_ray_monotonicity():
    assert check_ray_monotonicity(LayeredMedium.shells([2, 5], [1, 2, 4]))
    v = check_ray_monotonicity(LayeredMedium.shells([2, 5], [1, 4, 2]))
    assert not v and v.witness["r"] == 5.0
    assert check_ray_monotonicity(planar_slabs())
    assert check_ray_monotonicity(planar_slabs()).n_rays >= 64


def test_slab_field_audits():
    f, g = build_layered_medium(planar_slabs(), 0.5)
    assert not f.radial and f.zonal
    a = audit_assumptions(f, g, np.linspace(1.0, 30, 150))
    assert a.passed("full"), a.failures()


def test_normal_cone_predicate(tmp_path):
    pts = np.array([[1.0, 0, 0], [0, 2.0, 0]])
    good = np.array([[1.0, 0, 0], [0.3, 1.0, 0]])
    assert normal_cone_condition(pts, good)
    v = normal_cone_condition(pts, -good)
    assert not v
    p = tmp_path / "surf.csv"
    np.savetxt(p, np.hstack([pts, good]), delimiter=",")
    P, Nn = load_surface_samples(p)
    assert np.allclose(P, pts) and np.allclose(Nn, good)
