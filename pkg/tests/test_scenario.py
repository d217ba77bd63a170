import json
from pathlib import Path

import numpy as np
import pytest

from sfield.errors import ScenarioParseError, ValidationError
from sfield.scenario import (
    CHECKS,
    FAIL,
    INFO,
    PASS,
    classify,
    convergence_study,
    dumps,
    fitted_order,
    load_scenario,
    parse_scenario,
    run_all_checks,
)

SCEN = Path(__file__).resolve().parent.parent / "scenarios"

MINIMAL = """
[gravity]
diagonal = ["1", "1", "1", "1"]
[sfield]
phi = "{phi}"
lambda = 0.0
[connection]
mode = "levi-civita"
[dirac]
{dirac}
[sample]
count = 2
"""


def _text(phi="0", dirac="mass = 1.0"):
    return MINIMAL.format(phi=phi, dirac=dirac)


def _by_name(report):
    return {c.name: c for c in report.checks}


def test_minimal_parses_with_defaults():
    s = parse_scenario(_text())
    assert s.sample.count == 2
    assert s.connection_mode == "levi-civita"
    assert s.tolerance("metric_inverse") == 1e-10


def test_unknown_coordinate_names_field():
    with pytest.raises(ScenarioParseError) as exc:
        parse_scenario(_text(phi="x9 + 1"))
    assert exc.value.location == "sfield.phi"


def test_syntax_error_names_field():
    with pytest.raises(ScenarioParseError) as exc:
        parse_scenario(_text(phi="sin x0"))
    assert "sfield.phi" in str(exc.value)


def test_missing_mass():
    with pytest.raises(ValidationError) as exc:
        parse_scenario(_text(dirac='psi = [["1", "0"], ["0", "0"], ["0", "0"], ["0", "0"]]'))
    assert exc.value.field == "dirac.mass"


def test_bad_toml_is_parse_error():
    with pytest.raises(ScenarioParseError):
        parse_scenario("[gravity\n")


def test_flat_scenario_passes_with_tiny_residuals():
    r = run_all_checks(load_scenario(SCEN / "flat.toml"))
    assert r.passed
    for c in r.checks:
        if c.status == PASS:
            assert c.max_residual < 1e-12, c.name
    names = {c.name for c in r.checks}
    assert {"metric_inverse", "dirac_equation", "bianchi", "current_divergence"} <= names


def test_report_json_fields():
    r = run_all_checks(load_scenario(SCEN / "flat.toml"))
    d = json.loads(r.to_json())
    assert d["status"] == PASS
    assert {"version", "seed", "points", "fd_steps", "adjoint_sign"} <= set(d["environment"])
    assert "timestamp" in d
    assert "timestamp" not in json.loads(r.to_json(include_timestamp=False))
    for c in d["checks"]:
        assert {"name", "equation", "max_residual", "tolerance", "status"} <= set(c)


def test_reproducible_across_thread_counts(monkeypatch):
    s = load_scenario(SCEN / "frw_levi_civita.toml").with_overrides(points=6)
    monkeypatch.setenv("SFIELD_THREADS", "1")
    a = run_all_checks(s).to_json(include_timestamp=False)
    monkeypatch.setenv("SFIELD_THREADS", "4")
    b = run_all_checks(s).to_json(include_timestamp=False)
    assert a == b


def test_seed_override_changes_points():
    s = load_scenario(SCEN / "flat.toml")
    p1 = s.with_overrides(seed=1).sample.points()
    p2 = s.with_overrides(seed=2).sample.points()
    assert not np.array_equal(p1, p2)
    assert np.array_equal(p1, s.with_overrides(seed=1).sample.points())


def test_tolerance_override_fails_check():
    s = load_scenario(SCEN / "frw_levi_civita.toml").with_overrides({"bianchi": 1e-30}, points=2)
    r = run_all_checks(s)
    assert not r.passed
    assert _by_name(r)["bianchi"].status == FAIL
    with pytest.raises(ValidationError):
        s.with_overrides({"no_such_check": 1.0})


def test_fail_scenario_fails():
    r = run_all_checks(load_scenario(SCEN / "fail_frw_vacuum.toml"))
    assert not r.passed
    assert _by_name(r)["field_eq_h"].status == FAIL


def test_rank_one_is_informational():
    r = run_all_checks(load_scenario(SCEN / "sfield_rank1.toml"))
    vol = _by_name(r)["volume_element"]
    assert vol.status == INFO
    assert vol.detail["equal_volumes_possible"] is False
    assert r.passed


def test_torsion_makes_bianchi_informational():
    r = run_all_checks(load_scenario(SCEN / "torsion_direct.toml"))
    c = _by_name(r)
    assert c["bianchi"].status == INFO
    assert c["bianchi"].detail["max_torsion"] > 1e-9


def test_every_check_has_a_tag():
    for chk in CHECKS:
        assert chk.equation.startswith("Eq. ")


def test_convergence_study_orders():
    s = load_scenario(SCEN / "frw_levi_civita.toml").with_overrides(points=2)
    rows = {r.name: r for r in convergence_study(s, [4e-3, 2e-3, 1e-3])}
    assert rows["commutator"].label in ("converging", "saturated")
    assert rows["bianchi"].label == "converging"
    assert rows["bianchi"].order == pytest.approx(2.0, abs=0.2)


def test_convergence_saturated_on_flat():
    rows = convergence_study(load_scenario(SCEN / "flat.toml"), [1e-2, 1e-3, 1e-4])
    assert all(r.label == "saturated" for r in rows)


@pytest.mark.parametrize("steps", [[1e-3], [1e-3, 1e-4], [1e-3, 1e-3, 1e-4], [1e-3, 1e-4, 0.0]])
def test_convergence_precondition(steps):
    with pytest.raises(ValidationError):
        convergence_study(load_scenario(SCEN / "flat.toml"), steps)


def test_classify_and_fit():
    steps = [1e-2, 5e-3, 2.5e-3]
    assert fitted_order(steps, [s**2 for s in steps]) == pytest.approx(2.0)
    assert classify(steps, [s**2 for s in steps])[1] == "converging"
    assert classify(steps, [s for s in steps])[1] == "slow"
    assert classify(steps, [1e-13, 1e-14, 1e-15])[1] == "saturated"
    assert classify(steps, [1, 1, 1], expect_zero=False)[1] == "informational"


def test_dumps_round_trips_floats():
    x = 0.1 + 0.2
    text = dumps({"a": [x, 1e-300, -2.5], "b": None, "c": "s"})
    assert json.loads(text)["a"][0] == x
