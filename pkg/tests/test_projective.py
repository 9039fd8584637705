import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liouville.errors import DegenerateBox, DegenerateQuadruple, DegenerateTriple, NonPositiveMass
from liouville.projective import (INF, GeodesicBox, MobiusTransform, SpherePoint, angle_distance, apply,
                                  as_point, cr_minus_one, cross_ratio, cross_ratio_h, in_positive_order,
                                  log1p_complex, log_cross_ratio, mobius_through, normalize_quadruple)

finite = st.floats(-50, 50, allow_nan=False)
cplx = st.builds(complex, finite, finite)


def distinct4(pts, tol=1e-3):
    return all(abs(pts[i] - pts[j]) > tol for i in range(4) for j in range(i + 1, 4))


# ------------------------------------------------------------------ points

def test_as_point_parsing():
    assert as_point("inf").is_infinity
    assert as_point("∞").is_infinity
    assert as_point(math.inf).is_infinity
    assert as_point("1+2i").value() == 1 + 2j
    assert as_point((2.0, 1.0)).value() == 2
    with pytest.raises(ValueError):
        as_point(math.nan)


def test_sphere_point_same_projectively():
    assert SpherePoint(2, 1).same(SpherePoint(4, 2))
    assert not SpherePoint(2, 1).same(INF)


# ------------------------------------------------------------------ cross-ratio

@pytest.mark.parametrize("q, expected", [
    ((1, 0.3, "inf", 0), 0.3),
    ((-1, 0, 0.5, 1), 1.5),
    ((0, 1, 2, 3), 4 / 3),
])
def test_cross_ratio_examples(q, expected):
    assert cross_ratio(*q) == pytest.approx(expected, rel=1e-15)


def test_cross_ratio_degenerate():
    with pytest.raises(DegenerateQuadruple):
        cross_ratio(0, 0, 1, 2)
    with pytest.raises(DegenerateQuadruple):
        cross_ratio(1, (2.0, 2.0), 3, 4)


def test_cr_minus_one_no_cancellation():
    s = 1e-13
    assert cr_minus_one(1, 1 + s, INF, 0) == pytest.approx(s, rel=1e-12)
    assert log_cross_ratio(1, 1 + s, INF, 0) == pytest.approx(s, rel=1e-12)


def test_log1p_complex_matches_log():
    u = np.array([0.3 + 0.2j, -0.5 + 1j, 2 - 3j])
    assert np.allclose(log1p_complex(u), np.log(1 + u), rtol=1e-15, atol=1e-15)
    assert log1p_complex(1e-20j) == pytest.approx(1e-20j, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(cplx, min_size=4, max_size=4))
def test_cross_ratio_pair_symmetry(q):
    if not distinct4(q):
        return
    a, b, c, d = q
    assert cross_ratio(a, b, c, d) == pytest.approx(cross_ratio(b, a, d, c), rel=1e-9)
    assert cross_ratio(a, b, c, d) == pytest.approx(cross_ratio(c, d, a, b), rel=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.lists(cplx, min_size=4, max_size=4), st.lists(cplx, min_size=4, max_size=4))
def test_mobius_invariance(q, m):
    if not distinct4(q) or abs(m[0] * m[3] - m[1] * m[2]) < 1e-2:
        return
    g = MobiusTransform(*m)
    mq = [apply(g, p) for p in q]
    c0 = cross_ratio(*q)
    assert abs(cross_ratio(*mq) - c0) <= 1e-8 * (1 + abs(c0)) * max(1.0, np.abs(g.matrix).max() ** 4)


def test_vectorised_cross_ratio_matches_scalar():
    rng = np.random.default_rng(1)
    Z = rng.normal(size=(50, 4)) + 1j * rng.normal(size=(50, 4))
    W = np.ones_like(Z)
    v = cross_ratio_h(Z, W)
    for k in range(50):
        assert v[k] == pytest.approx(cross_ratio(*Z[k]), rel=1e-12)


# ------------------------------------------------------------------ transforms

def test_apply_examples():
    assert apply(MobiusTransform.identity(), 5).value() == 5
    inv = MobiusTransform(0, 1, 1, 0)
    assert apply(inv, INF).value() == 0
    assert apply(inv, 0).is_infinity
    assert apply(MobiusTransform.scaling(2), 3).value() == pytest.approx(6)


def test_mobius_through_examples():
    assert mobius_through(0, 1, INF, 0, 1, INF).allclose(MobiusTransform.identity())
    assert mobius_through(0, 1, INF, INF, 1, 0).allclose(MobiusTransform(0, 1, 1, 0))
    g = mobius_through(1, 2, 3, 0, 1, INF)
    for p, q in ((1, 0), (2, 1)):
        assert apply(g, p).value() == pytest.approx(q, abs=1e-12)
    assert apply(g, 3).is_infinity
    assert cross_ratio(1, 2, 3, 7) == pytest.approx(cross_ratio(*(apply(g, p) for p in (1, 2, 3, 7))))
    with pytest.raises(DegenerateTriple):
        mobius_through(0, 0, 1, 0, 1, 2)


@settings(max_examples=100, deadline=None)
@given(st.lists(cplx, min_size=6, max_size=6))
def test_mobius_through_reapplication(pts):
    src, dst = pts[:3], pts[3:]
    if not all(abs(src[i] - src[j]) > 1e-2 and abs(dst[i] - dst[j]) > 1e-2
               for i in range(3) for j in range(i + 1, 3)):
        return
    g = mobius_through(*src, *dst)
    for p, q in zip(src, dst):
        r = apply(g, p)
        assert r.same(as_point(q), tol=1e-9)


def test_normalized_matrix_and_composition():
    a = MobiusTransform(2, 1, 1, 3)
    b = MobiusTransform(1, -1, 2, 1)
    assert abs(a.det - 1) < 1e-14
    assert (a @ b).allclose(a.compose(b))
    assert (a @ a.inverse()).allclose(MobiusTransform.identity())
    assert a.is_real() and a.preserves_orientation()
    assert not MobiusTransform(0, 1, 1, 0).preserves_orientation()   # z -> 1/z reverses R
    assert MobiusTransform(1, 0, 0, 1j).is_real() is False


def test_normalize_quadruple_examples():
    g, cr = normalize_quadruple(1, 1.5, INF, 0)
    assert g.allclose(MobiusTransform.identity())
    assert cr == pytest.approx(1.5)
    g, cr = normalize_quadruple(0, 1, 2, 3)
    assert cr == pytest.approx(4 / 3)
    assert apply(g, 1).value() == pytest.approx(4 / 3)
    assert apply(g, 0).value() == pytest.approx(1)


# ------------------------------------------------------------------ angles

def test_angle_distance_examples():
    assert angle_distance(0, INF) == pytest.approx(math.pi)
    assert angle_distance(0, 1) == pytest.approx(math.pi / 2)
    assert angle_distance(2.5, 2.5) == 0


def test_angle_distance_reference_points_bilipschitz():
    rng = np.random.default_rng(3)
    x = np.tan(rng.uniform(-1.5, 1.5, (500, 2)))
    ratios = [angle_distance(a, b, 1j) / angle_distance(a, b, 0.7 + 2j) for a, b in x if abs(a - b) > 1e-9]
    assert 0.1 < min(ratios) and max(ratios) < 10


def test_positive_order():
    assert in_positive_order(0, 1, 2, 3)
    assert in_positive_order(1, 2, 3, 0)
    assert not in_positive_order(3, 2, 1, 0)


# ------------------------------------------------------------------ boxes

def test_box_measure_and_errors():
    assert GeodesicBox(0, 1, 2, 3).measure == pytest.approx(math.log(4 / 3), rel=1e-15)
    assert GeodesicBox(-1, 0, 0.5, 1).measure == pytest.approx(math.log(1.5), rel=1e-15)
    with pytest.raises(NonPositiveMass):
        GeodesicBox(3, 2, 1, 0)
    with pytest.raises(DegenerateBox):
        GeodesicBox(0, 1, 1j, 3)
    with pytest.raises(DegenerateBox):
        GeodesicBox(0, 0, 2, 3)


def test_box_transpose_symmetry():
    b = GeodesicBox(-2, 0.5, 1, "inf")
    assert b.transpose().measure == b.measure


def test_box_moved_invariance():
    rng = np.random.default_rng(7)
    b = GeodesicBox(0, 1, 2, 3)
    for _ in range(50):
        m = rng.normal(size=4)
        if m[0] * m[3] - m[1] * m[2] < 0:
            m[:2] *= -1
        g = MobiusTransform(*m)
        assert b.moved(g).measure == pytest.approx(b.measure, rel=1e-11)
    with pytest.raises(DegenerateBox):
        b.moved(MobiusTransform(0, 1, 1, 0))


def test_cmath_agreement_log_cross_ratio():
    v = log_cross_ratio(0, 1, 2 ** (1 + 0.1j), 3 ** (1 + 0.1j))
    assert v == pytest.approx(cmath.log(cross_ratio(0, 1, 2 ** (1 + 0.1j), 3 ** (1 + 0.1j))), rel=1e-14)
