import numpy as np
import pytest

from eaplab.calculus import at
from eaplab.checks import FAIL
from eaplab.classify import (BERWALD_NONZERO, CARTAN_NONZERO, CB_NONZERO, PreconditionNotBerwald,
                             PreconditionNotCartan, PreconditionNotCB, berwald_consequence_suite, berwald_residual,
                             cartan_consequence_suite, cartan_residual, cb_consequence_suite, classify, induced_nlc)
from eaplab.curvature import _parts, curvature_direct
from eaplab.spaces import berwald_offset, builtin_space, evaluate_nlc, generic
from eaplab.wtensor import w_via_commutator

from conftest import maxabs, points

EXPECTED = {"flat": "cb", "generic2": "generic", "cartan2": "cartan", "berwald2": "berwald", "cb2": "cb"}


@pytest.mark.parametrize("name,label", sorted(EXPECTED.items()))
def test_catalog_labels(name, label):
    sp = builtin_space(name)
    rep = classify(sp, 50, seed=42)
    assert rep.label == label
    assert rep.label == sp.claims
    assert rep.consistent


def test_label_stable_when_samples_double():
    for name, label in EXPECTED.items():
        assert classify(builtin_space(name), 100, seed=9).label == label


def test_generic3_is_generic():
    assert classify(builtin_space("generic3"), 10).label == "generic"


def test_cartan2_residuals():
    sp = builtin_space("cartan2")
    for p in points(sp, 10):
        assert max(cartan_residual(sp, p)) < 1e-10


def test_berwald2_is_berwald_but_not_cartan():
    sp = builtin_space("berwald2")
    for p in points(sp, 10):
        assert max(berwald_residual(sp, p)) < 1e-10
        assert max(cartan_residual(sp, p)) > 0.01


def test_tight_tolerance_makes_label_indeterminate():
    rep = classify(builtin_space("cb2"), 5, tol=1e-30)
    assert rep.label == "indeterminate"


def test_report_dict_is_sorted_and_complete():
    d = classify(builtin_space("cartan2"), 5).as_dict()
    assert list(d["residuals"]) == sorted(d["residuals"])
    assert d["label"] == "cartan" and d["samples"] == 5


def test_induced_nlc_reproduces_cartan2():
    sp = builtin_space("cartan2")
    for p in points(sp, 5):
        np.testing.assert_allclose(induced_nlc(sp, p), evaluate_nlc(sp, p), atol=1e-12)


def test_berwald2_differs_from_induced_nlc_by_its_offset():
    sp = builtin_space("berwald2")
    for p in points(sp, 5):
        np.testing.assert_allclose(evaluate_nlc(sp, p) - induced_nlc(sp, p), berwald_offset(p.x), atol=1e-12)


def test_cartan_with_vanishing_mixed_coefficients_is_berwald():
    """Cartan type together with ``C^alpha_{mu c} = 0`` forces the Berwald condition."""
    for name in ("cb2", "flat"):
        sp = builtin_space(name)
        for p in points(sp, 5):
            c = cartan_residual(sp, p)
            b_nlc, b_c = berwald_residual(sp, p)
            assert max(c) < 1e-10 and b_c < 1e-10
            assert b_nlc < 1e-10


def test_precondition_errors():
    with pytest.raises(PreconditionNotCartan):
        cartan_consequence_suite(builtin_space("berwald2"), 3)
    with pytest.raises(PreconditionNotBerwald):
        berwald_consequence_suite(builtin_space("cartan2"), 3)
    with pytest.raises(PreconditionNotCB):
        cb_consequence_suite(builtin_space("generic2"), 3)
    with pytest.raises(PreconditionNotCB) as info:
        cb_consequence_suite(builtin_space("berwald2"), 3)
    assert info.value.residual > 0.01


def test_cartan_suite_passes_on_cartan2():
    rep = cartan_consequence_suite(builtin_space("cartan2"), 20)
    assert rep.passed, [c.as_dict() for c in rep.failures()]
    assert rep.checks["mask.cartan.nonzeros"].status == "pass"
    assert rep.max_residual("homogeneity") < 1e-10


def test_cb_suite_passes_on_cb2_and_flat():
    rep = cb_consequence_suite(builtin_space("cb2"), 20)
    assert rep.passed and rep.checks["mask.cb.nonzeros"].status == "pass"
    flat = cb_consequence_suite(builtin_space("flat"), 5)
    assert flat.passed
    assert flat.checks["mask.cb.nonzeros"].status == "degenerate"
    assert any("degenerate" in n for n in flat.notes)


def test_berwald_suite_on_berwald2_fails_only_the_p_v_mask():
    rep = berwald_consequence_suite(builtin_space("berwald2"), 20)
    failing = [c.name for c in rep.failures()]
    assert failing == ["mask.berwald.nonzeros"]
    chk = rep.checks["mask.berwald.nonzeros"]
    assert chk.residual == 3.0 and chk.status == FAIL
    assert "9 of 12" in chk.note
    assert rep.checks["mask.berwald.zeros"].residual == 0.0


def test_torsion_h_derivative_vanishes_under_berwald_condition():
    """With ``dot-d_b N^a_mu = Gamma^a_{b mu}`` the h-derivative of ``T^a_{bc}`` is zero, so
    every ``P^a_{b nu c}`` and the matching W-blocks vanish."""
    sp = builtin_space("berwald2")
    for p in points(sp, 5):
        t = _parts(at(sp, p))
        assert maxabs(t.T) > 1e-3
        assert maxabs(t.T_h) < 1e-10
        for which in ("natural", "dual", "symmetric"):
            assert maxabs(curvature_direct(which, sp, p).P_v) < 1e-9
        for which in ("natural", "dual"):
            assert maxabs(w_via_commutator(which, sp, p).W_vhv) < 1e-9


def test_torsion_h_derivative_is_nonzero_without_berwald_condition():
    sp = builtin_space("generic2")
    assert maxabs(_parts(at(sp, points(sp, 1)[0])).T_h) > 1e-3


def test_expected_masks():
    assert len(CARTAN_NONZERO) == 7
    assert len(BERWALD_NONZERO) == 12
    assert CB_NONZERO == ("natural:R_hh", "dual:R_hh", "symmetric:R_hh")


def test_integrable_generic_variant_still_generic():
    assert classify(generic(2, twist=0.0), 5).label == "generic"
