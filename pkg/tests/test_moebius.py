import math
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heismoeb import algebra as alg
from heismoeb.heisenberg import (
    INF,
    dilate,
    is_inf,
    koranyi_dist,
    koranyi_gauge,
    origin,
    point,
    unit_horizontal,
)
from heismoeb.metrics import KoranyiPower, Scaled
from heismoeb.moebius import (
    SIX_PERMUTATIONS,
    SYMMETRIES,
    Conjugate,
    DegenerateInputError,
    Dilate,
    Invert,
    MoebiusMap,
    NotASimilarity,
    Rotate,
    RotateOct,
    RotateQuat,
    Translate,
    apply_map,
    compose,
    cross_ratio,
    cross_ratio_pair,
    fixes_infinity,
    is_unitary,
    normalizing_word,
    random_rotation,
    random_word,
    similarity_factor,
    six_values,
    verify_inversion_decomposition,
    verify_inversion_identities,
)
from heismoeb.sampling import random_points

from conftest import FIELD_N, points


def test_inversion_of_one_plus_i():
    # A = -1 + i, zeta A^-1 = (-1 - i)/2, conj(v)/|A|^2 = -i/2
    img = Invert()(point("C", [[1, 0]], [0, 1]))
    assert np.allclose(img.zeta, [[-0.5, -0.5]]) and np.allclose(img.v, [0, -0.5])


def test_inversion_swaps_origin_and_infinity():
    assert is_inf(Invert()(origin("H", 2)))
    assert Invert()(INF, field="H", n=2).allclose(origin("H", 2))
    with pytest.raises(DegenerateInputError):
        Invert()(origin("C", 2, (3,)))


@pytest.mark.parametrize("field,n", FIELD_N)
@given(data=st.data())
def test_inversion_is_an_involution(field, n, data):
    p = data.draw(points(field, n))
    if koranyi_gauge(p) < 1e-3:
        return
    assert Invert()(Invert()(p)).allclose(p, atol=1e-8 * max(1.0, koranyi_gauge(p) ** 2))


@pytest.mark.parametrize("field,n", FIELD_N)
def test_inversion_identities_all_fields(field, n):
    rep = verify_inversion_identities(field=field, n=n, samples=500)
    assert rep.passed and rep.beta_squared == pytest.approx(1.0)


def test_scaled_metric_constant():
    rep = verify_inversion_identities(Scaled(KoranyiPower(), 2.0), field="H", n=2, samples=200)
    assert rep.beta_squared == pytest.approx(4.0) and rep.passed


@pytest.mark.parametrize("field,n", FIELD_N)
def test_inversion_decomposition(field, n, rng):
    pts = random_points(rng, field, n, 30)
    assert max(verify_inversion_decomposition(pts[i]) for i in range(30)) < 1e-12


def test_rotations_are_unitary():
    for field in ("R", "C", "H"):
        u = random_rotation(field, 4, seed=1)
        assert is_unitary(u)
    with pytest.raises(ValueError):
        random_rotation("O", 2)
    with pytest.raises(ValueError):
        Rotate(np.ones((2, 2, 2)))


@pytest.mark.parametrize("field,n", FIELD_N)
def test_generators_are_koranyi_isometries(field, n, rng):
    p, q = random_points(rng, field, n, 200), random_points(rng, field, n, 200)
    gens = [Translate(random_points(rng, field, n, None))]
    if field != "O":
        gens.append(Rotate(random_rotation(field, n, rng)))
    if field == "H":
        gens.append(RotateQuat(np.array([0.5, 0.5, 0.5, 0.5])))
    if field == "O":
        mu = np.zeros(8)
        mu[3] = 1.0
        gens.append(RotateOct(mu))
    if field in ("R", "C"):
        gens.append(Conjugate())
    base = koranyi_dist(p, q)
    for g in gens:
        assert np.allclose(koranyi_dist(g(p), g(q)), base, rtol=1e-12)


def test_similarity_factor():
    assert similarity_factor(MoebiusMap.of(Dilate(3.0)), field="H", n=2) == pytest.approx(3.0)
    assert similarity_factor(MoebiusMap.of(Translate(unit_horizontal("C", 2)))) == pytest.approx(1.0)
    bad = similarity_factor(MoebiusMap.of(Invert()))
    assert isinstance(bad, NotASimilarity) and not bad


def test_compose_order():
    d2 = MoebiusMap.of(Dilate(2.0))
    t = MoebiusMap.of(Translate(unit_horizontal("C", 2)))
    p = origin("C", 2)
    # translate first, then dilate
    assert apply_map(compose(d2, t), p).allclose(unit_horizontal("C", 2, scale=2.0))
    assert fixes_infinity(compose(d2, t), "C", 2)
    assert not fixes_infinity(MoebiusMap.of(Invert()), "C", 2)


def test_normalizing_word(rng):
    a, b = random_points(rng, "H", 2, None), random_points(rng, "H", 2, None)
    w = normalizing_word(a, b, "H", 2)
    assert koranyi_gauge(apply_map(w, a)) < 1e-12
    assert is_inf(apply_map(w, b))
    assert is_inf(apply_map(normalizing_word(a, INF, "H", 2), INF))


def test_real_cross_ratio_example():
    quad = [point("R", [[2.0]]), point("R", [[1.0]]), INF, point("R", [[0.0]])]
    cr = cross_ratio_pair(None, quad)
    assert cr.x1 == pytest.approx(0.5) and cr.x2 == pytest.approx(0.5)


def test_cross_ratio_degenerate():
    p = unit_horizontal("C", 2)
    with pytest.raises(DegenerateInputError):
        cross_ratio(None, p, p, origin("C", 2), INF)
    with pytest.raises(DegenerateInputError):
        cross_ratio(None, p, INF, origin("C", 2), INF)


@pytest.mark.parametrize("field,n", FIELD_N)
def test_cross_ratio_invariance_under_words(field, n, rng):
    for _ in range(40):
        quad = random_points(rng, field, n, 4)
        w = random_word(rng, field, n)
        before = cross_ratio_pair(None, [quad[i] for i in range(4)])
        img = apply_map(w, quad)
        after = cross_ratio_pair(None, [img[i] for i in range(4)])
        assert after.x1 == pytest.approx(before.x1, rel=1e-9)
        assert after.x2 == pytest.approx(before.x2, rel=1e-9)


def test_six_value_table_and_symmetries(rng):
    quad = [random_points(rng, "H", 2, None) for _ in range(4)]
    cr = cross_ratio_pair(None, quad)
    for perm, val in zip(SIX_PERMUTATIONS, six_values(cr)):
        assert cross_ratio(None, *(quad[i] for i in perm)) == pytest.approx(val, rel=1e-12)
    base = cross_ratio(None, *quad)
    for perm in SYMMETRIES:
        assert cross_ratio(None, *(quad[i] for i in perm)) == pytest.approx(base, rel=1e-12)
    values = six_values(cr)
    for perm in permutations(range(4)):
        x = cross_ratio(None, *(quad[i] for i in perm))
        assert min(abs(x - v) / v for v in values) < 1e-12


def test_cross_ratio_with_infinity_matches_limit():
    # sending the third point far out along a line approaches the INF convention
    quad = [point("C", [[1, 0]]), point("C", [[0, 1]], [0, 0.5]), INF, origin("C", 2)]
    far = dilate(point("C", [[1, 0]]), 1e8)
    exact = cross_ratio(None, *quad)
    approx = cross_ratio(None, quad[0], quad[1], far, quad[3])
    assert approx == pytest.approx(exact, rel=1e-6)
