import pytest

from kato_growth.scenario import (
    Scenario,
    ScenarioError,
    build_field,
    load_scenario,
    medium_of,
    parse_scenario,
    shipped_scenarios,
)

BASE = """
name = "t"
dim = 3
L = 0

[family]
kind = "constant-k"
k = 1.0
r_inner = 0.5

[window]
r_start = 1.0
r_end = 10.0
points = 20
"""


def test_minimal_scenario_defaults():
    sc = parse_scenario(BASE)
    assert isinstance(sc, Scenario)
    assert sc.window.grid()[0] == 1.0 and len(sc.window.grid()) == 20
    assert sc.gauges == {"h": "power", "epsilon": 0.5}
    assert sc.checks.run[0] == "audit"
    assert len(sc.config_hash) == 64


@pytest.mark.parametrize("text, where", [
    (BASE + "bogus = 1\n", "bogus: unknown key"),
    (BASE.replace("k = 1.0", "k = 1.0\nradii = [2.0]"), "not a parameter"),
    (BASE + "[gauges]\nepsilon = 3.0\n", "gauges.epsilon"),
    (BASE + "[gauges]\nepsilon = 0.0\n", "gauges.epsilon"),
    (BASE.replace("dim = 3", "dim = 4"), "dim"),
    (BASE.replace("r_start = 1.0", "r_start = 0.2"), "window.r_start"),
    (BASE.replace("r_end = 10.0", "r_end = 0.9"), "r_end"),
    (BASE.replace("points = 20", "points = 3"), "points"),
    (BASE + '[checks]\nrun = ["audit", "nope"]\n', "unknown check"),
    (BASE.replace('kind = "constant-k"', 'kind = "mystery"'), "unknown family"),
    (BASE + "[initial]\nkind = \"explicit\"\nv_re = [0.0]\ndv_re = [0.0]\n", "nontrivial"),
    ("name = [", "malformed"),
])
def test_rejections_name_the_key(text, where):
    with pytest.raises(ScenarioError, match=where):
        parse_scenario(text)


def test_error_reports_line_number():
    with pytest.raises(ScenarioError, match=r"^line 5: bogus"):
        parse_scenario(BASE.replace('L = 0', 'L = 0\nbogus = 2'))


def test_family_parameter_errors_become_config_errors():
    text = BASE.replace('kind = "constant-k"\nk = 1.0',
                        'kind = "shells"\nradii = [2.0, 1.0]\nnu = [1.0, 2.0, 3.0]')
    with pytest.raises(ScenarioError, match="family.shells"):
        parse_scenario(text)


def test_overrides():
    sc = parse_scenario(BASE).with_overrides(seed=7, tolerance=1e-10, points=50)
    assert sc.seed == 7 and sc.tolerance == 1e-10 and sc.window.points == 50
    with pytest.raises(ScenarioError):
        sc.with_overrides(tolerance=-1.0)
    with pytest.raises(ScenarioError):
        sc.with_overrides(points=2)


def test_load_missing_file(tmp_path):
    with pytest.raises(ScenarioError, match="cannot read"):
        load_scenario(tmp_path / "nope.toml")


def test_shipped_catalog_parses():
    names = {p.stem for p in shipped_scenarios()}
    assert {"kato", "potential", "two_shell", "four_shell", "planar_slabs", "decreasing_shell",
            "lemma_a", "forced_check_failure"} <= names
    for p in shipped_scenarios():
        sc = load_scenario(p)
        assert sc.expect_exit in (0, 2, 3)
        if sc.needs_field:
            fld, g = build_field(sc)
            assert fld.dim == sc.dim


def test_medium_of():
    sc = load_scenario([p for p in shipped_scenarios() if p.stem == "planar_slabs"][0])
    med = medium_of(sc)
    assert med is not None and med.kink_radii() == (2.0, 3.0, 5.0, 6.0)
    assert medium_of(parse_scenario(BASE)) is None
