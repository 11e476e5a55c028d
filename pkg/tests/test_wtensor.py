import numpy as np
import pytest

from eaplab.calculus import at
from eaplab.connections import CONNECTIONS
from eaplab.curvature import curvature_direct
from eaplab.spaces import builtin_space, generic
from eaplab.wtensor import (HALF_PAIRS, W_BLOCKS, W_FORMULAS, w_census, w_covariant, w_cyclic_report,
                            w_cyclic_residual, w_jets, w_via_commutator)

from conftest import maxabs, points

NONCANONICAL = ("natural", "dual", "symmetric")
ALL = ["flat", "generic2", "cartan2", "berwald2", "cb2", "generic3"]


@pytest.mark.parametrize("name", ALL)
def test_canonical_w_vanishes(name):
    sp = builtin_space(name)
    for p in points(sp, 4):
        assert w_via_commutator("canonical", sp, p).max_abs() < 1e-8


@pytest.mark.parametrize("which", NONCANONICAL)
@pytest.mark.parametrize("name", ALL)
def test_w_formulas_match_commutators(name, which):
    sp = builtin_space(name)
    for p in points(sp, 3):
        pd = at(sp, p)
        assert (w_jets(pd, which) - W_FORMULAS[which](pd)).max_abs() < 1e-8


@pytest.mark.parametrize("which", list(CONNECTIONS))
def test_coframe_route_is_minus_frame_route(which):
    sp = builtin_space("generic2")
    for p in points(sp, 2):
        pd = at(sp, p)
        W = w_jets(pd, which)
        assert (w_covariant(pd, CONNECTIONS[which](pd)).scaled(-1.0) - W).max_abs() < 1e-10


def test_w_of_callable_matches_named():
    sp = builtin_space("generic2")
    p = sp.sample(1)[0]
    a, b = w_via_commutator("dual", sp, p), w_via_commutator(CONNECTIONS["dual"], sp, p)
    assert (a - b).max_abs() == 0.0


def test_symmetric_half_pairs(space):
    for p in points(space, 3):
        pd = at(space, p)
        for (a, ka), (b, kb) in HALF_PAIRS:
            np.testing.assert_allclose(getattr(w_jets(pd, a), ka), 0.5 * getattr(w_jets(pd, b), kb), atol=1e-10)


@pytest.mark.parametrize("name", ["generic2", "cartan2", "berwald2", "generic3"])
def test_cyclic_identities(name):
    sp = builtin_space(name)
    for p in points(sp, 3):
        r = w_cyclic_report(sp, p)
        assert r["natural"] < 1e-8 and r["symmetric"] < 1e-8 and r["dual"] < 1e-8


def test_two_rc_form_of_dual_cyclic_identity_needs_quadratic_term():
    """In dimension 3 the cyclic sum of the quadratic torsion term survives."""
    sp = builtin_space("generic3")
    p = points(sp, 1)[0]
    r = w_cyclic_report(sp, p)
    assert r["cyclic_LL"] > 1e-3
    assert r["dual_2RC"] > 1e-3
    assert r["dual"] < 1e-8


def test_quadratic_cyclic_term_vanishes_in_dimension_two(space):
    for p in points(space, 3):
        r = w_cyclic_report(space, p)
        assert r["cyclic_LL"] < 1e-15
        assert w_cyclic_residual(space, p)[1] < 1e-8


def test_census_of_generic2():
    sp = builtin_space("generic2")
    rep = w_census(sp, sp.sample(6, seed=1))
    assert rep.summary() == {"zero": 4, "curvature": 4, "half": 2, "independent": 8}
    assert rep.nonzero() == 14
    assert max(rep.half_residuals.values()) < 1e-10
    zeros = sorted(k for k, v in rep.labels.items() if v == "zero")
    assert zeros == ["dual:W_hhv", "dual:W_vvh", "symmetric:W_hhv", "symmetric:W_vvh"]


def test_census_with_integrable_nlc_has_more_curvature_equal_blocks():
    sp = generic(2, twist=0.0)
    rep = w_census(sp, sp.sample(6, seed=1))
    assert rep.summary() == {"zero": 4, "curvature": 6, "half": 2, "independent": 6}
    assert rep.labels["natural:W_hhh"] == "curvature"
    assert rep.labels["natural:W_hhv"] == "curvature"


def test_census_of_flat_is_degenerate():
    sp = builtin_space("flat")
    rep = w_census(sp, sp.sample(3))
    assert rep.degenerate and rep.count("zero") == 18


def test_census_of_cb2_has_a_single_independent_block():
    sp = builtin_space("cb2")
    rep = w_census(sp, sp.sample(6, seed=1))
    assert [k for k, v in rep.labels.items() if v == "independent"] == ["dual:W_hhh"]
    assert rep.count("curvature") == 2


def test_natural_w_equals_its_curvature_partner_where_torsion_free():
    """``W^a_{b c d}`` of the natural connection is its vertical curvature: the
    vertical natural torsion vanishes, so the commutator carries no torsion term."""
    sp = builtin_space("generic2")
    for p in points(sp, 2):
        W = w_via_commutator("natural", sp, p)
        K = curvature_direct("natural", sp, p)
        assert min(maxabs(W.W_vvv - K.S_v), maxabs(W.W_vvv + K.S_v),
                   maxabs(W.W_vvv - K.S_v.transpose(0, 1, 3, 2))) < 1e-8


def test_block_names():
    assert W_BLOCKS == ("W_hhh", "W_hhv", "W_vhh", "W_vhv", "W_vvh", "W_vvv")
