import numpy as np
import pytest

from eaplab.calculus import at
from eaplab.connections import CONNECTIONS, torsion
from eaplab.curvature import (CURVATURE_BLOCKS, FORMULAS, UnknownConnectionTag, bianchi_residuals, contract,
                              contractions, curvature_direct, curvature_jets, cyclic, trace)
from eaplab.metric import natural_connection
from eaplab.spaces import SpacePoint, builtin_space, evaluate_nlc

from conftest import maxabs, points

NONCANONICAL = ("natural", "dual", "symmetric")


def test_cyclic_sum_of_antisymmetric_part():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(2, 3, 3, 3))
    c = cyclic(a)
    # invariant under cyclic permutation of the three summed slots
    np.testing.assert_allclose(c, c.transpose(0, 2, 3, 1), atol=1e-14)
    # cyclic sum of a tensor symmetric in two slots of a 3-form vanishes after antisymmetrising
    s = a + a.transpose(0, 2, 1, 3)
    assert maxabs(cyclic(s - s.transpose(0, 1, 3, 2)) - 2 * cyclic(s) + 2 * cyclic(s.transpose(0, 1, 3, 2))) < 1e-12


@pytest.mark.parametrize("name", ["flat", "generic2", "cartan2", "berwald2", "cb2", "generic3"])
def test_canonical_curvature_vanishes(name):
    sp = builtin_space(name)
    for p in points(sp, 5):
        assert curvature_direct("canonical", sp, p).max_abs() < 1e-9


@pytest.mark.parametrize("which", NONCANONICAL)
@pytest.mark.parametrize("name", ["generic2", "cartan2", "berwald2", "cb2", "generic3"])
def test_formulas_match_direct_curvature(name, which):
    sp = builtin_space(name)
    for p in points(sp, 3):
        pd = at(sp, p)
        assert (curvature_jets(pd, which) - FORMULAS[which](pd)).max_abs() < 1e-8


def test_generic2_curvature_is_nontrivial():
    sp = builtin_space("generic2")
    p = points(sp, 1)[0]
    for which in NONCANONICAL:
        K = curvature_direct(which, sp, p)
        assert all(maxabs(v) > 1e-4 for k, v in K.blocks().items() if k != "S_h"), which
    # the dual and symmetric connections share the canonical C^alpha_{mu c}, whose S-curvature is zero
    assert maxabs(curvature_direct("natural", sp, p).S_h) > 1e-4
    assert maxabs(curvature_direct("dual", sp, p).S_h) < 1e-12


def test_curvature_antisymmetry(space):
    for p in points(space, 3):
        for which in CONNECTIONS:
            K = curvature_direct(which, space, p)
            for k in ("R_hh", "R_vh", "S_h", "S_v"):
                v = getattr(K, k)
                assert maxabs(v + v.transpose(0, 1, 3, 2)) < 1e-10


def test_symmetric_connection_halves():
    sp = builtin_space("generic3")
    for p in points(sp, 2):
        Kd, Ks = curvature_direct("dual", sp, p), curvature_direct("symmetric", sp, p)
        for k in ("R_vh", "P_h", "P_v"):
            np.testing.assert_allclose(getattr(Ks, k), 0.5 * getattr(Kd, k), atol=1e-8)


def test_natural_horizontal_curvature_by_differences():
    """``R^a_{b m n} = delta_m G^a_{b n} - delta_n G^a_{b m} + GG - GG + C^a_{b d} R^d_{n m}``
    with the adapted derivatives of the natural coefficients taken by central differences."""
    sp = builtin_space("generic2")
    p = SpacePoint([0.2, -0.3], [0.6, 0.7])
    h = 1e-5
    N = evaluate_nlc(sp, p)

    def coeffs(z):
        D = natural_connection(sp, SpacePoint(z[:2], z[2:]))
        return D.G_hh

    z0 = np.concatenate([p.x, p.y])
    part = []
    for k in range(4):
        e = np.zeros(4)
        e[k] = h
        part.append((coeffs(z0 + e) - coeffs(z0 - e)) / (2 * h))
    dG = [part[m] - sum(N[a, m] * part[2 + a] for a in range(2)) for m in range(2)]
    D = natural_connection(sp, p)
    G, C = D.G_hh, D.C_hh_v
    R = torsion("natural", sp, p).Rnl
    K = np.zeros((2, 2, 2, 2))
    for a in range(2):
        for b in range(2):
            for m in range(2):
                for n in range(2):
                    K[a, b, m, n] = (dG[m][a, b, n] - dG[n][a, b, m]
                                     + sum(G[e, b, n] * G[a, e, m] - G[e, b, m] * G[a, e, n] for e in range(2))
                                     + sum(C[a, b, d] * R[d, n, m] for d in range(2)))
    np.testing.assert_allclose(curvature_direct("natural", sp, p).R_hh, K, atol=1e-8)


@pytest.mark.parametrize("which", NONCANONICAL)
@pytest.mark.parametrize("name", ["generic2", "cartan2", "berwald2", "generic3"])
def test_contractions_two_routes(name, which):
    sp = builtin_space(name)
    for p in points(sp, 3):
        assert max(contractions(which, sp, p).residuals().values()) < 1e-8


def test_contraction_of_scaled_bundle_is_linear():
    sp = builtin_space("generic2")
    p = points(sp, 1)[0]
    K = curvature_direct("dual", sp, p)
    rep = contract(K, "dual", sp, p)
    pd = at(sp, p)
    from eaplab.metric import hv_metric
    m = hv_metric(pd)
    doubled = trace(K.scaled(2.0), m.g_h_inv, m.g_v_inv)
    for k, v in doubled.max_diff(rep.direct.scaled(2.0)).items():
        assert v < 1e-12, k


def test_unknown_connection_tag():
    sp = builtin_space("flat")
    with pytest.raises(UnknownConnectionTag):
        contractions("canonical", sp, sp.sample(1)[0])


@pytest.mark.parametrize("name", ["generic2", "cartan2", "berwald2", "generic3"])
def test_bianchi_identities(name):
    sp = builtin_space(name)
    for p in points(sp, 3):
        assert bianchi_residuals(sp, p).max() < 1e-8


def test_bianchi_identities_are_nontrivial_on_generic3():
    sp = builtin_space("generic3")
    rep = bianchi_residuals(sp, points(sp, 1)[0])
    assert not any(rep.trivial.values())


def test_bianchi_flags_trivial_cases_on_flat():
    sp = builtin_space("flat")
    rep = bianchi_residuals(sp, sp.sample(1)[0])
    assert all(rep.trivial.values())
    assert rep.max() == 0.0


def test_block_names():
    assert CURVATURE_BLOCKS == ("R_hh", "R_vh", "P_h", "P_v", "S_h", "S_v")
