"""The invariant suite itself: all checks pass, and checks can actually fail."""

import pytest

from phasekin import verify
from phasekin.analytic import InitialGaussian
from phasekin.forces import Free


@pytest.fixture(scope="module")
def results():
    return verify.run_checks()


def test_every_registered_check_passes(results):
    failed = [r["name"] for r in results if not r["passed"]]
    assert failed == []


def test_results_are_machine_readable(results):
    assert len(results) == len(verify.ALL_CHECKS)
    for rec in results:
        assert set(rec) == {"name", "passed", "measured", "tolerance", "detail"}
        assert isinstance(rec["measured"], float)


def test_sign_dichotomy_reports_both_fits(results):
    rec = next(r for r in results if r["name"] == "sign_dichotomy")
    detail = rec["detail"]
    assert detail["frictionless_fit"] > 0
    assert detail["smoluchowski_fit"] < 0


def test_check_detects_mutated_pressure_coefficient():
    # a 1% perturbation of the free-case formula must trip the determinant check;
    # guards against a vacuous comparison
    from phasekin.analytic import d2_coefficient

    def mutated(force, t, init, q):
        return 1.01 * d2_coefficient(force, t, init, q)

    rec = verify.check_d2_free_equals_det(d2_fn=mutated)
    assert not rec["passed"]


def test_check_detects_gross_mutation():
    def broken(force, t, init, q):
        del force, init, q
        return 1.0 + t

    rec = verify.check_d2_free_equals_det(d2_fn=broken)
    assert not rec["passed"]
