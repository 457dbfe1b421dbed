import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from necklace.geometry import (AffineMap, Ball, NotContractive, Point, SingularMap, apply,
                               compose, contraction_factor, fixed_point, inverse)

shift = st.floats(-5, 5, allow_nan=False)


@st.composite
def contractions(draw):
    """A = R(θ)·diag(s1, ±s2)·R(φ) with singular values s1 ≥ s2 in (0.05, 0.9)."""
    s1 = draw(st.floats(0.05, 0.9))
    s2 = draw(st.floats(0.05, s1))
    th, ph = draw(st.floats(0, 2 * math.pi)), draw(st.floats(0, 2 * math.pi))
    sign = draw(st.sampled_from((1.0, -1.0)))
    rot = lambda a: np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
    A = rot(th) @ np.diag([s1, sign * s2]) @ rot(ph)
    return AffineMap.from_arrays(A, (draw(shift), draw(shift)))


points = st.tuples(st.floats(-10, 10), st.floats(-10, 10))


def test_apply_ex23L_f2():
    f2 = AffineMap.from_complex(1 / 3, 1 / 3)
    assert apply(f2, (0, 0)) == pytest.approx((1 / 3, 0))


def test_apply_ex23L_f1_at_one():
    # e^{iπ/6}·conj(1)/√3 = (cos(π/6), sin(π/6))/√3
    f1 = AffineMap.from_complex(cmath.exp(1j * math.pi / 6) / math.sqrt(3), conjugate=True)
    p = apply(f1, (1, 0))
    assert p.x == pytest.approx(0.5)
    assert p.y == pytest.approx(0.5 / math.sqrt(3))


def test_conjugation_is_a_reflection():
    f1 = AffineMap.from_complex(cmath.exp(1j * math.pi / 6) / math.sqrt(3), conjugate=True)
    assert f1.det < 0
    assert contraction_factor(f1) == pytest.approx(1 / math.sqrt(3))
    z = 0.3 - 0.7j
    w = cmath.exp(1j * math.pi / 6) * z.conjugate() / math.sqrt(3)
    assert f1(Point.from_complex(z)) == pytest.approx((w.real, w.imag))


def test_compose_inverse_identity():
    f = AffineMap.similitude(0.4, 1.1, (0.3, -2.0))
    assert compose(f, inverse(f)).close_to(AffineMap.identity(), 1e-12)
    assert compose(inverse(f), f).close_to(AffineMap.identity(), 1e-12)


def test_compose_ratios_multiply():
    f = AffineMap.similitude(1 / 3, 0.7, (1, 2))
    g = AffineMap.similitude(1 / 3, -0.2, (0, 5), reflect=True)
    assert contraction_factor(compose(f, g)) == pytest.approx(1 / 9)


def test_compose_order():
    f = AffineMap.from_complex(0.5, 1)
    g = AffineMap.from_complex(0.5j, 0)
    p = Point(0.2, 0.4)
    assert (f @ g)(p) == pytest.approx(f(g(p)))


def test_inverse_examples():
    f = AffineMap.from_complex(1 / 3, 1 / 3)
    assert inverse(f)(Point(1 / 3, 0)) == pytest.approx((0, 0))
    g = AffineMap.similitude(0.25, 0.9)
    assert inverse(g).norm == pytest.approx(4.0)


def test_singular_inverse_raises():
    with pytest.raises(SingularMap):
        inverse(AffineMap(0.5, 0.5, 0.25, 0.25))


def test_contraction_factor_examples():
    assert contraction_factor(AffineMap.from_complex(1 / 15, 0.3 + 0.1j)) == pytest.approx(1 / 15)
    alpha = 0.2
    assert contraction_factor(AffineMap(0.5, 0, 0, alpha / 2)) == pytest.approx(0.5)


def test_not_contractive():
    with pytest.raises(NotContractive):
        contraction_factor(AffineMap.similitude(1.0, 0.3))


def test_fixed_points():
    assert fixed_point(AffineMap.from_complex(1 / 3, 1 / 3)) == pytest.approx((0.5, 0))
    assert fixed_point(AffineMap.from_complex(0.5)) == pytest.approx((0, 0))
    assert fixed_point(AffineMap.similitude(0.7, 2.0)) == pytest.approx((0, 0))


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        AffineMap(float("nan"), 0, 0, 0.5)


def test_ball_image_and_containment():
    b = Ball(Point(0, 0), 1.0)
    f = AffineMap.from_complex(0.5, 0.5)
    img = b.image(f)
    assert img.radius == pytest.approx(0.5)
    assert b.contains_ball(img)
    assert not b.contains_point((2, 0))
    with pytest.raises(ValueError):
        Ball(Point(0, 0), -1.0)


@given(contractions(), points, points)
def test_lipschitz_bound(m, p, q):
    lhs = Point(*apply(m, p)).dist(apply(m, q))
    assert lhs <= contraction_factor(m) * Point(*p).dist(q) + 1e-9


@given(contractions(), contractions(), contractions())
def test_compose_associative(f, g, h):
    assert compose(compose(f, g), h).close_to(compose(f, compose(g, h)), 1e-12)


@given(contractions())
def test_fixed_point_of_square(m):
    p = fixed_point(m)
    assert apply(m, p) == pytest.approx(p, abs=1e-9)
    assert fixed_point(compose(m, m)) == pytest.approx(p, abs=1e-9)


@given(contractions())
def test_inverse_round_trip_many_points(m):
    rng = np.random.default_rng(0)
    pts = rng.uniform(-10, 10, size=(1000, 2))
    back = inverse(m).apply_array(m.apply_array(pts))
    assert np.abs(back - pts).max() <= 1e-9


@given(contractions())
def test_norm_matches_svd(m):
    ref = np.linalg.norm(np.array([[m.a, m.b], [m.c, m.d]]), 2)
    assert m.norm == pytest.approx(ref, rel=1e-14, abs=1e-300)


def test_similitude_norm_full_precision():
    # equal singular values used to lose half the digits
    r = 1 / math.sqrt(3)
    m = AffineMap.from_complex(r * cmath.exp(1j * math.pi / 6), 0, conjugate=True)
    w = m
    for _ in range(6):
        w = w @ m
    assert w.norm == pytest.approx(r ** 7, rel=1e-14)
