import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heismoeb import algebra as alg
from heismoeb.heisenberg import (
    INF,
    HPoint,
    conjugate,
    dilate,
    gauge_argument,
    h_inv,
    h_mul,
    h_split,
    koranyi_dist,
    koranyi_gauge,
    koranyi_gauge_via_A,
    origin,
    point,
    stack,
    unit_horizontal,
    unit_vertical,
)

from conftest import FIELD_N, points


def test_complex_product_example():
    p = point("C", [[1, 0]])
    q = point("C", [[0, 1]])
    r = h_mul(p, q)
    assert np.allclose(r.zeta, [[1, 1]]) and np.allclose(r.v, [0, -2])


def test_gauge_of_one_plus_i():
    # (1, i): ||zeta||^4 + |v|^2 = 2
    assert koranyi_gauge(point("C", [[1, 0]], [0, 1])) == pytest.approx(2**0.25, rel=1e-15)


def test_real_case_is_euclidean(rng):
    p = point("R", rng.normal(size=(3, 1)))
    q = point("R", rng.normal(size=(3, 1)))
    assert koranyi_dist(p, q) == pytest.approx(np.linalg.norm(p.zeta - q.zeta))


def test_infinity_conventions():
    p = unit_horizontal("C", 2)
    assert koranyi_dist(p, INF) == math.inf
    assert koranyi_dist(INF, p) == math.inf
    assert koranyi_dist(INF, INF) == 0.0


def test_point_validation():
    with pytest.raises(ValueError):
        point("C", [[1, 0]], [1, 0])
    with pytest.raises(alg.ShapeMismatchError):
        HPoint("C", np.zeros((1, 3)), np.zeros(2))
    with pytest.raises(alg.FieldMismatchError):
        h_mul(origin("C", 2), origin("H", 2))
    with pytest.raises(alg.ShapeMismatchError):
        h_mul(origin("C", 2), origin("C", 3))
    with pytest.raises(ValueError):
        unit_vertical("R", 2)


@pytest.mark.parametrize("field,n", FIELD_N)
@given(data=st.data())
def test_group_axioms(field, n, data):
    p, q, r = (data.draw(points(field, n)) for _ in range(3))
    assert h_mul(h_mul(p, q), r).allclose(h_mul(p, h_mul(q, r)), atol=1e-9)
    assert h_mul(p, h_inv(p)).allclose(origin(field, n), atol=1e-12)
    assert h_mul(p, origin(field, n)).allclose(p)


@pytest.mark.parametrize("field,n", FIELD_N)
@given(data=st.data(), delta=st.floats(0.1, 10))
def test_dilations_are_automorphisms(field, n, data, delta):
    p, q = data.draw(points(field, n)), data.draw(points(field, n))
    assert dilate(h_mul(p, q), delta).allclose(h_mul(dilate(p, delta), dilate(q, delta)), atol=1e-8)


@pytest.mark.parametrize("field,n", FIELD_N)
@given(data=st.data())
def test_gauge_two_ways_and_split(field, n, data):
    p = data.draw(points(field, n))
    assert koranyi_gauge(p) == pytest.approx(koranyi_gauge_via_A(p), rel=1e-12, abs=1e-12)
    h, v = h_split(p)
    assert h_mul(h, v).allclose(p)
    assert koranyi_gauge(p) ** 4 == pytest.approx(
        koranyi_gauge(h) ** 4 + koranyi_gauge(v) ** 4, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("field,n", FIELD_N)
@given(data=st.data())
def test_metric_basics(field, n, data):
    p, q, r = (data.draw(points(field, n)) for _ in range(3))
    assert koranyi_dist(p, p) == 0.0
    assert koranyi_dist(p, q) == pytest.approx(koranyi_dist(q, p), rel=1e-12, abs=1e-12)
    assert koranyi_dist(p, r) <= koranyi_dist(p, q) + koranyi_dist(q, r) + 1e-9


@pytest.mark.parametrize("field,n", [("C", 2), ("H", 2), ("O", 2)])
def test_right_translation_is_not_isometric(field, n):
    p = unit_horizontal(field, n)
    q = origin(field, n)
    a = HPoint(field, np.eye(alg.DIMS[field])[1][None, :], np.zeros(alg.DIMS[field]))
    assert koranyi_dist(h_mul(p, a), h_mul(q, a)) != pytest.approx(koranyi_dist(p, q))


def test_conjugation_in_complex_case():
    p = point("C", [[1, 2]], [0, 3])
    j = conjugate(p)
    assert np.allclose(j.zeta, [[1, -2]]) and np.allclose(j.v, [0, -3])
    assert conjugate(j).allclose(p)


def test_gauge_argument():
    p = point("C", [[1, 0]], [0, 1])
    assert np.allclose(gauge_argument(p), [-1, 1])


def test_batches():
    b = stack([unit_horizontal("H", 3), unit_vertical("H", 3)])
    assert b.batch_shape == (2,) and len(b) == 2
    assert np.allclose(koranyi_gauge(b), [1, 1])
    assert b[1].allclose(unit_vertical("H", 3))
