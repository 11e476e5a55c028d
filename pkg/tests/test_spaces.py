import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eaplab.jets import PointOutsideDomain, fd_partial
from eaplab.spaces import (CATALOG_NAMES, Domain, FramePair, SingularFrame, SpacePoint, UnknownSpace,
                           berwald_offset, builtin_space, catalog, descriptors_json, evaluate_frame,
                           evaluate_nlc, invert_frame, kronecker_residual)


def test_catalog_names():
    assert CATALOG_NAMES == ("flat", "generic2", "cartan2", "berwald2", "cb2")
    assert all(sp.n == 2 for sp in catalog().values())


def test_unknown_space():
    with pytest.raises(UnknownSpace):
        builtin_space("hyperbolic7")
    with pytest.raises(UnknownSpace):
        builtin_space("generic0")


def test_higher_dimensional_variants():
    assert builtin_space("flat3").n == 3
    assert builtin_space("generic3").n == 3


def test_point_parse_round_trip():
    p = SpacePoint.parse("0.3,-0.2;0.7,0.9")
    np.testing.assert_array_equal(p.x, [0.3, -0.2])
    np.testing.assert_array_equal(p.y, [0.7, 0.9])
    q = SpacePoint.parse(str(p))
    np.testing.assert_array_equal(q.x, p.x)
    np.testing.assert_array_equal(q.y, p.y)


@pytest.mark.parametrize("text", ["0.3,0.2", "a,b;c,d", "0.1;0.2,0.3"])
def test_point_parse_rejects_garbage(text):
    with pytest.raises(ValueError):
        SpacePoint.parse(text)


def test_zero_section_is_rejected():
    with pytest.raises(ValueError, match="zero section"):
        SpacePoint([0.0, 0.0], [0.0, 0.0])


def test_domain_checks():
    sp = builtin_space("flat")
    with pytest.raises(PointOutsideDomain):
        evaluate_frame(sp, SpacePoint([1.5, 0.0], [1.0, 0.0]))
    with pytest.raises(PointOutsideDomain):
        evaluate_frame(sp, SpacePoint([0.0, 0.0], [0.1, 0.0]))
    with pytest.raises(ValueError, match="dimension"):
        evaluate_frame(sp, SpacePoint([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]))


def test_samples_lie_in_domain_and_are_seeded(space):
    pts = space.sample(50, seed=3)
    d = Domain()
    assert all(d.contains(p.x, p.y) for p in pts)
    again = space.sample(50, seed=3)
    assert all(np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y) for a, b in zip(pts, again))


def test_flat_frames_are_identity(p2):
    f = evaluate_frame(builtin_space("flat"), p2)
    np.testing.assert_array_equal(f.Lh, np.eye(2))
    np.testing.assert_array_equal(f.Lv, np.eye(2))
    assert not evaluate_nlc(builtin_space("flat"), p2).any()


def test_generic2_matches_hand_evaluation(p2):
    x, y = p2.x, p2.y
    Lh = np.array([[(i == k) + 0.1 * math.sin((i + 1) * x[k] + 0.5 * y[(i + k) % 2] + 0.3 * i)
                    for k in range(2)] for i in range(2)])
    Lv = np.array([[(i == k) + 0.1 * math.cos(x[(i + k) % 2] - 0.7 * y[k] + 0.5 * i)
                    for k in range(2)] for i in range(2)])
    N = np.array([[0.1 * y[a] * math.cos(x[m]) + 0.15 * y[(a + m) % 2] * math.sin(x[(m + 1) % 2] + 0.3 * a)
                   for m in range(2)] for a in range(2)])
    f = evaluate_frame(builtin_space("generic2"), p2)
    np.testing.assert_allclose(f.Lh, Lh, atol=1e-15)
    np.testing.assert_allclose(f.Lv, Lv, atol=1e-15)
    np.testing.assert_allclose(evaluate_nlc(builtin_space("generic2"), p2), N, atol=1e-15)


def test_inverse_of_identity_and_diagonal():
    cf = invert_frame(FramePair(np.eye(2), np.diag([2.0, 4.0])))
    np.testing.assert_array_equal(cf.Ch, np.eye(2))
    np.testing.assert_allclose(cf.Cv, np.diag([0.5, 0.25]))


def test_singular_frame_names_the_block():
    with pytest.raises(SingularFrame, match="vertical"):
        invert_frame(FramePair(np.eye(2), np.array([[1.0, 2.0], [2.0, 4.0]])))


def test_kronecker_relations_on_catalog(space):
    for p in space.sample(50, seed=11):
        f = evaluate_frame(space, p)
        assert kronecker_residual(f, invert_frame(f)) < 1e-12


@pytest.mark.parametrize("name", ["cb2", "berwald2"])
def test_horizontal_frame_is_y_invariant(name):
    sp = builtin_space(name)
    for p in sp.sample(10, seed=5):
        a = sp.lambda_eval(list(p.x), list(p.y))
        b = sp.lambda_eval(list(p.x), list(2 * p.y))
        np.testing.assert_array_equal(np.array(a[0], float), np.array(b[0], float))


def test_cb2_vertical_frame_is_y_invariant():
    sp = builtin_space("cb2")
    for p in sp.sample(10, seed=5):
        a = np.array(sp.lambda_eval(list(p.x), list(p.y))[1], float)
        b = np.array(sp.lambda_eval(list(p.x), list(2 * p.y))[1], float)
        np.testing.assert_array_equal(a, b)


def test_berwald2_vertical_frame_depends_on_y():
    sp = builtin_space("berwald2")
    p = sp.sample(1, seed=5)[0]
    a = np.array(sp.lambda_eval(list(p.x), list(p.y))[1], float)
    b = np.array(sp.lambda_eval(list(p.x), list(p.y + [0.3, 0.0]))[1], float)
    assert np.abs(a - b).max() > 1e-3


def test_generic2_determinants_within_margin():
    sp = builtin_space("generic2")
    for p in sp.sample(200, seed=1):
        f = evaluate_frame(sp, p)
        for m in (f.Lh, f.Lv):
            assert 0.5 <= abs(np.linalg.det(m)) <= 2.0


def _induced_by_differences(sp, p):
    """``y^b lambda_i^a d_mu lambda_i_b`` with the x-derivative by central differences."""
    n = sp.n
    Lv = evaluate_frame(sp, p).Lv
    cof = lambda x, y: list(np.linalg.inv(np.array(sp.lambda_eval(x, y)[1], float)).T.ravel())
    dC = np.stack([fd_partial(cof, p.x, p.y, m, 1e-6).reshape(n, n) for m in range(n)], axis=-1)
    return np.einsum("b,ia,ibm->am", p.y, Lv, dC)


@pytest.mark.parametrize("name", ["cartan2", "cb2"])
def test_nlc_is_induced_by_vertical_frame(name):
    sp = builtin_space(name)
    for p in sp.sample(5, seed=2):
        np.testing.assert_allclose(evaluate_nlc(sp, p), _induced_by_differences(sp, p), atol=1e-8)


def test_berwald2_nlc_is_cb2_plus_offset():
    bw, cb = builtin_space("berwald2"), builtin_space("cb2")
    for p in bw.sample(5, seed=2):
        np.testing.assert_allclose(evaluate_nlc(bw, p) - berwald_offset(p.x), evaluate_nlc(cb, p), atol=1e-15)
    assert np.abs(berwald_offset([0.2, 0.4])).max() > 0.01


def test_descriptors_json():
    docs = json.loads(descriptors_json())
    assert [d["name"] for d in docs] == list(CATALOG_NAMES)
    assert {d["classification"] for d in docs} == {"cb", "generic", "cartan", "berwald"}
    assert docs[0]["domain"] == {"x_box": [-1.0, 1.0], "y_radius": [0.5, 1.5]}


@given(st.lists(st.floats(-1, 1), min_size=2, max_size=2),
       st.floats(0.501, 1.499), st.floats(0, 2 * math.pi))
def test_frames_invertible_across_domain(x, r, phi):
    p = SpacePoint(x, [r * math.cos(phi), r * math.sin(phi)])
    for sp in catalog().values():
        f = evaluate_frame(sp, p)
        assert kronecker_residual(f, invert_frame(f)) < 1e-12
