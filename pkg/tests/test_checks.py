import numpy as np
import pytest

from geodisc.checks import SUITES, CheckResult, convergence_suite, run_all, sphere_lift_suite

EXPECTED_SUITES = {
    "closed-form",
    "second-lift",
    "axioms",
    "symplectomorphism",
    "step-symplecticity",
    "free-spline",
    "convergence",
    "sphere-lift",
}


def test_suite_registry():
    assert set(SUITES) == EXPECTED_SUITES


def test_check_result_failed_flag():
    assert CheckResult("s", "c", "fail", 1.0, 0.5).failed
    assert not CheckResult("s", "c", "pass", 0.1, 0.5).failed
    assert not CheckResult("s", "c", "info", 2.0, 0.5).failed


def test_as_dict_schema():
    d = CheckResult("s", "c", "pass", 0.1, 0.5).as_dict()
    assert set(d) == {"suite", "case", "status", "defect", "tolerance"}


def test_selected_suite_only():
    results = run_all(suites=["axioms"])
    assert results and all(r.suite == "axioms" for r in results)
    assert not any(r.failed for r in results)


def test_unknown_suite_rejected():
    with pytest.raises(ValueError):
        run_all(suites=["bogus"])


def test_same_seed_same_defects():
    a = run_all(seed=5, suites=["symplectomorphism"])
    b = run_all(seed=5, suites=["symplectomorphism"])
    assert [r.defect for r in a] == [r.defect for r in b]


def test_convergence_pairs():
    results = convergence_suite(h_values=(0.1, 0.05, 0.025))
    assert len(results) == 2
    for r in results:
        assert "order" in r.case and not r.failed


def test_sphere_lift_reports_both_variants():
    results = sphere_lift_suite(np.random.default_rng(3))
    infos = [r for r in results if r.status == "info"]
    assert len(infos) == 2
    assert not any(r.failed for r in infos)  # informational by construction
    checked = [r for r in results if r.status != "info"]
    assert checked and all(r.status == "pass" for r in checked)
