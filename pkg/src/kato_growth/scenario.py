"""Scenario files: strict TOML schema, validation and field construction.

Unknown keys are rejected so that a scenario file doubles as a faithful
record of what was run.
"""

from __future__ import annotations

import hashlib
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

from .coefficients import CoefficientField, RadialGauges, kato_gauges, power_gauges, tabulated_field
from .media import LayeredMedium, PotentialModel, build_potential_model, build_layered_medium, inverse_square_field, kato_field

DEFAULT_SEED = 20240611
CHECKS = ("audit", "monotone-Mplus", "r2N", "right-continuity", "classify", "dichotomy", "distributional-bound",
          "lemmaA-suite")
FAMILY_KEYS = {
    "constant-k": {"k"},
    "potential": {"lam", "long_coef", "long_power", "short_re", "short_im", "short_power", "m0"},
    "shells": {"radii", "nu", "lam"},
    "slabs": {"cuts_neg", "cuts_pos", "nu_neg", "nu0", "nu_pos", "lam"},
    "inverse-square": {"c"},
    "tabulated": {"radii", "lam"},
}
TOP_KEYS = {"name", "dim", "L", "seed", "tolerance", "expect_exit", "family", "gauges", "window", "initial",
            "checks"}
TABLE_KEYS = {
    "family": {"kind", "r_inner"},
    "gauges": {"h", "epsilon"},
    "window": {"r_start", "r_end", "points"},
    "initial": {"kind", "r_init", "margin", "v_re", "v_im", "dv_re", "dv_im"},
    "checks": {"run", "threshold", "monotone_slack", "continuity_slack", "lemma_count"},
}


class ScenarioError(ValueError):
    """Configuration problem; the message names the key and, when known, its line."""


def _line_of(text: str, key: str, table: str | None = None) -> int | None:
    lines = text.splitlines()
    start = 0
    if table is not None:
        for i, ln in enumerate(lines):
            if re.match(rf"^\s*\[\s*{re.escape(table)}\s*\]", ln):
                start = i + 1
                break
    for i in range(start, len(lines)):
        if table is not None and i > start and re.match(r"^\s*\[", lines[i]):
            break
        if re.match(rf"^\s*{re.escape(key)}\s*=", lines[i]) or re.match(rf"^\s*\[\s*{re.escape(key)}\s*\]", lines[i]):
            return i + 1
    return None


def _fail(text: str, key: str, msg: str, table: str | None = None):
    ln = _line_of(text, key, table)
    where = f"{table + '.' if table else ''}{key}"
    raise ScenarioError(f"{'line ' + str(ln) + ': ' if ln else ''}{where}: {msg}")


@dataclass(frozen=True)
class Window:
    r_start: float
    r_end: float
    points: int = 400

    def grid(self) -> np.ndarray:
        return np.linspace(self.r_start, self.r_end, self.points)


@dataclass(frozen=True)
class InitialSpec:
    kind: str = "default"
    r_init: float | None = None
    margin: float = 0.0
    v: tuple = ()
    dv: tuple = ()


@dataclass(frozen=True)
class ChecksSpec:
    run: tuple[str, ...] = ("audit", "monotone-Mplus", "r2N", "right-continuity", "dichotomy")
    threshold: str = "auto"
    monotone_slack: float = 1e-8
    continuity_slack: float = 1e-10
    lemma_count: int = 100


@dataclass(frozen=True)
class Scenario:
    name: str
    dim: int
    L: int
    family: dict
    gauges: dict
    window: Window
    initial: InitialSpec = InitialSpec()
    checks: ChecksSpec = ChecksSpec()
    seed: int = DEFAULT_SEED
    tolerance: float = 1e-9
    expect_exit: int | None = None
    source: str = field(default="", repr=False)

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.source.encode()).hexdigest()

    def with_overrides(self, *, seed=None, tolerance=None, points=None) -> "Scenario":
        from dataclasses import replace

        out = self
        if seed is not None:
            out = replace(out, seed=int(seed))
        if tolerance is not None:
            if not tolerance > 0:
                raise ScenarioError(f"--tolerance must be positive, got {tolerance}")
            out = replace(out, tolerance=float(tolerance))
        if points is not None:
            if points < 8:
                raise ScenarioError(f"--grid needs at least 8 points, got {points}")
            out = replace(out, window=replace(out.window, points=int(points)))
        return out

    @property
    def needs_field(self) -> bool:
        return any(c != "lemmaA-suite" for c in self.checks.run)


def _num(text, table, key, val, *, positive=False, integer=False, lo=None, hi=None, open_hi=False):
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        _fail(text, key, f"expected a number, got {val!r}", table)
    if integer and not isinstance(val, int):
        _fail(text, key, f"expected an integer, got {val!r}", table)
    if positive and not val > 0:
        _fail(text, key, f"must be positive, got {val}", table)
    if lo is not None and val <= lo:
        _fail(text, key, f"must exceed {lo}, got {val}", table)
    if hi is not None and (val >= hi if open_hi else val > hi):
        _fail(text, key, f"must be {'below' if open_hi else 'at most'} {hi}, got {val}", table)
    return val


def _numlist(text, table, key, val):
    if not isinstance(val, list) or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in val):
        _fail(text, key, "expected a list of numbers", table)
    return [float(x) for x in val]


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario; raises ScenarioError on any problem."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"malformed config: {exc}") from None
    for k in data:
        if k not in TOP_KEYS:
            _fail(text, k, "unknown key")
    for t, allowed in TABLE_KEYS.items():
        if t in data:
            if not isinstance(data[t], dict):
                _fail(text, t, "expected a table")
            for k in data[t]:
                if k not in allowed and not (t == "family" and k in set().union(*FAMILY_KEYS.values())):
                    _fail(text, k, "unknown key", t)

    name = data.get("name", "scenario")
    if not isinstance(name, str) or not re.fullmatch(r"[A-Za-z0-9_.-]+", name):
        _fail(text, "name", "must be a plain identifier")
    checks_t = data.get("checks", {})
    run = tuple(checks_t.get("run", ChecksSpec.run))
    for c in run:
        if c not in CHECKS:
            _fail(text, "run", f"unknown check {c!r}; known: {', '.join(CHECKS)}", "checks")
    threshold = checks_t.get("threshold", "auto")
    if threshold not in ("auto", "strict"):
        _fail(text, "threshold", "must be 'auto' or 'strict'", "checks")
    checks = ChecksSpec(
        run=run,
        threshold=threshold,
        monotone_slack=float(_num(text, "checks", "monotone_slack", checks_t.get("monotone_slack", 1e-8), lo=None)),
        continuity_slack=float(_num(text, "checks", "continuity_slack", checks_t.get("continuity_slack", 1e-10))),
        lemma_count=int(_num(text, "checks", "lemma_count", checks_t.get("lemma_count", 100), integer=True,
                             positive=True)),
    )
    if checks.monotone_slack < 0 or checks.continuity_slack < 0:
        _fail(text, "monotone_slack" if checks.monotone_slack < 0 else "continuity_slack",
              "slack must be nonnegative", "checks")
    seed = int(_num(text, None, "seed", data.get("seed", DEFAULT_SEED), integer=True))
    tol = float(_num(text, None, "tolerance", data.get("tolerance", 1e-9), positive=True))
    expect = data.get("expect_exit")
    if expect is not None and expect not in (0, 2, 3, 4):
        _fail(text, "expect_exit", "must be one of 0, 2, 3, 4")

    only_lemma = all(c == "lemmaA-suite" for c in run)
    if only_lemma and "family" not in data:
        return Scenario(name, 1, 0, {}, {}, Window(1.0, 2.0, 8), InitialSpec(), checks, seed, tol, expect, text)

    for t in ("family", "window"):
        if t not in data:
            _fail(text, t, "required table missing")
    dim = _num(text, None, "dim", data.get("dim", 3), integer=True)
    if dim not in (2, 3):
        _fail(text, "dim", "supported dimensions are 2 and 3")
    L = _num(text, None, "L", data.get("L", 0), integer=True)
    if L < 0 or L > 16:
        _fail(text, "L", "must lie in 0..16")

    fam = dict(data["family"])
    kind = fam.get("kind")
    if kind not in FAMILY_KEYS:
        _fail(text, "kind", f"unknown family {kind!r}; known: {', '.join(FAMILY_KEYS)}", "family")
    for k in fam:
        if k not in FAMILY_KEYS[kind] | {"kind", "r_inner"}:
            _fail(text, k, f"not a parameter of family {kind!r}", "family")
    fam["r_inner"] = float(_num(text, "family", "r_inner", fam.get("r_inner", 1.0), lo=0))

    g = dict(data.get("gauges", {}))
    g.setdefault("h", "power")
    if g["h"] not in ("power", "kato"):
        _fail(text, "h", "must be 'power' or 'kato'", "gauges")
    g["epsilon"] = float(_num(text, "gauges", "epsilon", g.get("epsilon", 0.5), lo=0, hi=2, open_hi=True))

    w = data["window"]
    for k in ("r_start", "r_end"):
        if k not in w:
            _fail(text, k, "required", "window")
    window = Window(float(_num(text, "window", "r_start", w["r_start"], lo=fam["r_inner"])),
                    float(_num(text, "window", "r_end", w["r_end"], positive=True)),
                    int(_num(text, "window", "points", w.get("points", 400), integer=True, positive=True)))
    if window.r_end <= window.r_start:
        _fail(text, "r_end", "must exceed r_start", "window")
    if window.points < 8:
        _fail(text, "points", "need at least 8 grid points", "window")

    it = data.get("initial", {})
    ikind = it.get("kind", "default")
    if ikind not in ("default", "random", "explicit"):
        _fail(text, "kind", "must be 'default', 'random' or 'explicit'", "initial")
    r_init = it.get("r_init")
    if r_init is not None:
        r_init = float(_num(text, "initial", "r_init", r_init, lo=fam["r_inner"]))
        if not window.r_start <= r_init < window.r_end:
            _fail(text, "r_init", "must lie inside the window", "initial")
    margin = float(_num(text, "initial", "margin", it.get("margin", 0.0)))
    v = dv = ()
    if ikind == "explicit":
        for k in ("v_re", "dv_re"):
            if k not in it:
                _fail(text, k, "required for explicit initial data", "initial")
        vr = _numlist(text, "initial", "v_re", it["v_re"])
        vi = _numlist(text, "initial", "v_im", it.get("v_im", [0.0] * len(vr)))
        dr = _numlist(text, "initial", "dv_re", it["dv_re"])
        di = _numlist(text, "initial", "dv_im", it.get("dv_im", [0.0] * len(dr)))
        if not (len(vr) == len(vi) == len(dr) == len(di)):
            _fail(text, "v_re", "initial vectors must have equal lengths", "initial")
        v = tuple(complex(a, b) for a, b in zip(vr, vi))
        dv = tuple(complex(a, b) for a, b in zip(dr, di))
        if not any(v) and not any(dv):
            _fail(text, "v_re", "initial data must be nontrivial", "initial")
    sc = Scenario(name, dim, L, fam, g, window, InitialSpec(ikind, r_init, margin, v, dv), checks, seed, tol,
                  expect, text)
    try:
        build_field(sc)
    except ValueError as exc:
        raise ScenarioError(f"family.{kind}: {exc}") from None
    return sc


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from None
    except UnicodeDecodeError:
        raise ScenarioError(f"{path} is not UTF-8") from None
    return parse_scenario(text)


def build_field(sc: Scenario) -> tuple[CoefficientField, RadialGauges]:
    """Coefficient field and gauges of a scenario's family."""
    f = sc.family
    kind = f["kind"]
    eps = sc.gauges.get("epsilon", 0.5)
    r_in = f["r_inner"]
    if kind == "constant-k":
        fld, g = kato_field(sc.dim, r_in, float(f.get("k", 1.0))), power_gauges(eps)
    elif kind == "potential":
        model = PotentialModel(
            dim=sc.dim, r_inner=r_in, lam=float(f.get("lam", 1.0)),
            long_coef=float(f.get("long_coef", 1.0)), long_power=float(f.get("long_power", 0.5)),
            short_coef=complex(f.get("short_re", 0.0), f.get("short_im", 1.0)),
            short_power=float(f.get("short_power", 1.5)), epsilon=eps,
            m0=None if f.get("m0") is None else float(f["m0"]),
        )
        fld, g = build_potential_model(model)
    elif kind == "shells":
        med = LayeredMedium.shells(f["radii"], f["nu"], float(f.get("lam", 1.0)), sc.dim)
        fld, g = build_layered_medium(med, r_in, eps)
    elif kind == "slabs":
        med = LayeredMedium.slabs(f["cuts_neg"], f["cuts_pos"], f["nu_neg"], float(f["nu0"]), f["nu_pos"],
                                  float(f.get("lam", 1.0)), sc.dim)
        fld, g = build_layered_medium(med, r_in, eps)
    elif kind == "inverse-square":
        fld, g = inverse_square_field(sc.dim, r_in, float(f["c"])), power_gauges(eps)
    elif kind == "tabulated":
        fld, g = tabulated_field(sc.dim, r_in, f["radii"], f["lam"]), power_gauges(eps)
    else:  # pragma: no cover - rejected by the parser
        raise ValueError(kind)
    if sc.gauges.get("h") == "kato":
        g = kato_gauges()
    return fld, g


def medium_of(sc: Scenario) -> LayeredMedium | None:
    f = sc.family
    if f.get("kind") == "shells":
        return LayeredMedium.shells(f["radii"], f["nu"], float(f.get("lam", 1.0)), sc.dim)
    if f.get("kind") == "slabs":
        return LayeredMedium.slabs(f["cuts_neg"], f["cuts_pos"], f["nu_neg"], float(f["nu0"]), f["nu_pos"],
                                   float(f.get("lam", 1.0)), sc.dim)
    return None


def shipped_scenarios() -> list[Path]:
    return sorted((Path(__file__).parent / "scenarios").glob("*.toml"))
