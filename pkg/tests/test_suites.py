import math

import numpy as np
import pytest

from eaplab.checks import (DEGENERATE, FAIL, PASS, Check, SuiteReport, Tolerances, compare, mask_checks,
                           resolve_samples, vanishes)
from eaplab.spaces import CATALOG_NAMES, builtin_space
from eaplab.suites import GENERAL, SUITE_NAMES, general_suite, jet_oracle_residual, regime_suite, regimes_for, run_suite


def test_check_status():
    assert Check("a", "x", 1e-13, 1e-12).status == PASS
    assert Check("a", "x", 1e-11, 1e-12).status == FAIL
    assert Check("a", "x", math.nan, 1.0).status == FAIL
    assert Check("a", "x", 0.0, 1e-12, degenerate=True).status == DEGENERATE


def test_merge_keeps_worst_residual_in_any_order():
    a, b = Check("a", "x", 1e-13, 1e-12, True), Check("a", "x", 1e-11, 1e-12, False)
    for m in (a.merge(b), b.merge(a)):
        assert m.residual == 1e-11 and not m.degenerate


def test_compare_flags_vanishing_sides():
    assert compare("c", "x", np.zeros(3), np.zeros(3), 1e-10).status == DEGENERATE
    assert compare("c", "x", np.ones(3), np.ones(3), 1e-10).status == PASS
    assert vanishes("v", "x", np.zeros(3), 1e-10).status == PASS


def test_report_counts_and_dict():
    rep = SuiteReport("s", "flat")
    rep.extend([Check("a", "x", 0.0, 1.0), Check("b", "x", 2.0, 1.0), Check("c", "x", 0.0, 1.0, True)])
    assert rep.counts() == {PASS: 1, FAIL: 1, DEGENERATE: 1}
    assert not rep.passed
    assert [c.name for c in rep.failures()] == ["b"]
    d = rep.as_dict()
    assert [c["check"] for c in d["checks"]] == ["a", "b", "c"]


def test_mask_checks():
    obs = {"k1": 1.0, "k2": 0.0, "k3": 0.5}
    z, nz = mask_checks("m", "x", obs, ("k1", "k2"))
    assert z.residual == 1.0 and "k3" in z.note
    assert nz.residual == 1.0 and "1 of 2" in nz.note
    z, nz = mask_checks("m", "x", {"k1": 0.0}, ("k1",))
    assert nz.status == DEGENERATE


def test_tolerances_validate():
    with pytest.raises(ValueError):
        Tolerances(d1=0.0)
    assert Tolerances().tier("d2") == 1e-8


def test_resolve_samples():
    sp = builtin_space("flat")
    assert len(resolve_samples(sp, 4)) == 4
    with pytest.raises(ValueError):
        resolve_samples(sp, 0)
    with pytest.raises(ValueError):
        resolve_samples(sp, [])


@pytest.mark.parametrize("suite", GENERAL)
@pytest.mark.parametrize("name", CATALOG_NAMES + ("generic3",))
def test_general_suites_pass(name, suite):
    rep = general_suite(suite, builtin_space(name), 6)
    assert rep.passed, [c.as_dict() for c in rep.failures()]


def test_suite_names():
    assert SUITE_NAMES == GENERAL + ("cartan", "berwald", "cb", "all")
    with pytest.raises(KeyError):
        run_suite("nonsense", builtin_space("flat"))


def test_regimes_for_labels():
    assert regimes_for("cb") == ("cb",)
    assert regimes_for("generic") == ()


def test_regime_suite_records_failed_precondition():
    rep = regime_suite("berwald", builtin_space("cartan2"), 3)
    assert list(rep.checks) == ["precondition"]
    assert rep.checks["precondition"].status == FAIL


def test_all_runs_general_and_regime_suites():
    reps = run_suite("all", builtin_space("cartan2"), 4)
    assert [r.suite for r in reps] == list(GENERAL) + ["cartan"]
    assert all(r.passed for r in reps)


def test_jet_oracle(space):
    assert jet_oracle_residual(space, space.sample(5, seed=4)) < 1e-8
