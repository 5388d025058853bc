import math

import numpy as np
import pytest

from heismoeb.conditions import (
    AUDIT_RULES,
    CONDITIONS,
    DEFAULT_ZOO,
    ConditionReport,
    chain_links,
    check_alpha_holder,
    check_biLip,
    check_eq,
    check_G,
    check_inv,
    check_PL,
    check_ptolemaean,
    check_ptolemaean_circle,
    check_sim_invariance,
    check_top_heuristic,
    fit_alpha_met,
    ptolemy_slack,
    run_classification,
    triangle_argument_residual,
    verify_theorem12_chain,
)
from heismoeb.heisenberg import INF, koranyi_dist, point, unit_horizontal
from heismoeb.jsonio import dumps
from heismoeb.metrics import (
    CCH1,
    CustomGauge,
    EuclideanR,
    KoranyiPower,
    discontinuous,
    rotation_broken,
    weighted_koranyi,
)
from heismoeb.sampling import random_points

from conftest import FIELD_N


def test_report_requires_witness_on_fail():
    with pytest.raises(ValueError):
        ConditionReport("Sim", "fail", "m", "C", 2, 1, 0)
    with pytest.raises(ValueError):
        ConditionReport("Sim", "maybe", "m", "C", 2, 1, 0)


@pytest.mark.parametrize("field,n", FIELD_N)
def test_koranyi_satisfies_geometric_conditions(field, n):
    m = KoranyiPower()
    for rep in (check_sim_invariance(m, field=field, n=n, samples=64),
                check_top_heuristic(m, field=field, n=n, samples=8),
                check_inv(m, field=field, n=n, samples=64),
                check_G(m, 1.0, field=field, n=n, samples=64),
                check_PL(m, 1.0, field=field, n=n, samples=64),
                check_eq(m, field=field, n=n)):
        assert rep.passed, rep.condition


def test_sim_detects_broken_rotation():
    rep = check_sim_invariance(rotation_broken(0.1))
    assert rep.verdict == "fail" and rep.witness


def test_top_detects_jump():
    rep = check_top_heuristic(discontinuous())
    assert rep.verdict == "fail"


def test_weighted_gauge_satisfies_G_but_not_Eq():
    m = weighted_koranyi(0.5)
    assert check_G(m, 1.0).passed
    assert check_PL(m, 1.0).passed
    assert check_eq(m).verdict == "fail"
    assert check_inv(m).verdict == "fail"


def test_cc_fails_inversion_and_eq():
    m = CCH1()
    assert check_sim_invariance(m, samples=32).passed
    assert check_inv(m, samples=32).verdict == "fail"
    assert check_eq(m).verdict == "fail"


def test_alpha_holder():
    assert check_alpha_holder(KoranyiPower(0.5), 0.5).passed
    rep = check_alpha_holder(KoranyiPower(), 0.5)
    # d_H is not 1/2-Hoelder against itself uniformly in scale
    assert rep.verdict == "fail" and rep.constants["non_uniform"]
    with pytest.raises(ValueError):
        check_alpha_holder(KoranyiPower(), 1.5)


def test_bilip():
    assert check_biLip(KoranyiPower(0.5, 3), 0.5).passed
    assert check_biLip(KoranyiPower(), 0.5).verdict == "fail"


def test_real_line_conditions_are_vacuous():
    m = EuclideanR()
    assert check_G(m, 1.0, field="R").passed
    assert check_eq(m, field="R").notes


@pytest.mark.parametrize("alpha,beta", [(1.0, 1.0), (0.5, 2.0), (0.3, 1.0)])
def test_fit_alpha_met(alpha, beta):
    rep = fit_alpha_met(KoranyiPower(alpha, beta), field="H", n=2)
    assert rep.passed
    assert rep.constants["alpha"] == pytest.approx(alpha, abs=1e-12)
    assert rep.constants["beta"] == pytest.approx(beta)


def test_ptolemy_slack_hand_example():
    # four collinear points on the real line: Ptolemy holds with equality
    pts = [point("R", [[x]]) for x in (0.0, 1.0, 3.0, 7.0)]
    assert float(ptolemy_slack(KoranyiPower(), *pts)) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8, 1.0])
def test_powers_are_ptolemaean(alpha):
    assert check_ptolemaean(KoranyiPower(alpha), field="H", n=2, samples=128).passed


def test_circle_equality_only_for_alpha_one():
    assert check_ptolemaean_circle(KoranyiPower()).passed
    rep = check_ptolemaean_circle(KoranyiPower(0.5))
    assert rep.verdict == "fail" and rep.witness


def test_triangle_argument_residual_on_line():
    m = KoranyiPower()
    p, q, r, s = (point("C", [[x, 0]]) for x in (0.0, 1.0, 2.0, 4.0))
    assert abs(float(triangle_argument_residual(m, p, q, r, s, "C", 2))) < 1e-12


@pytest.mark.parametrize("field,n", [("C", 2), ("H", 3), ("O", 2)])
def test_chain(field, n):
    rep = verify_theorem12_chain(KoranyiPower(0.5, 3), field=field, n=n, samples=64)
    assert rep.passed and rep.decomposition_residual < 1e-10
    links = chain_links(KoranyiPower(), unit_horizontal(field, n))
    assert set(links) >= {"explicit", "inverse", "normalized"}


def test_classification_matrix_default_zoo():
    mat = run_classification(DEFAULT_ZOO, samples=64)
    assert mat.violations == []
    assert mat.columns == CONDITIONS
    k = "koranyi_power(alpha=1,beta=1) [C, n=2]"
    assert all(mat.verdict(k, c) == "pass" for c in CONDITIONS)
    h = "koranyi_power(alpha=0.5,beta=1) [C, n=2]"
    assert mat.verdict(h, "Circ") == "fail" and mat.verdict(h, "AlphaMet") == "pass"
    cc = "cc_h1 [C, n=2]"
    assert mat.verdict(cc, "Inv") == "fail" and mat.verdict(cc, "Sim") == "pass"
    assert "audit violations: 0" in mat.to_text()


def test_classification_skips_non_metrics():
    mat = run_classification([KoranyiPower(1.4)], samples=64)
    row = mat.rows[0]
    assert row in mat.not_metric and mat.violations == []


def test_false_left_invariance_declaration_is_flagged():
    def dist(p, q):
        return np.asarray(koranyi_dist(p, q)) * (1 + 0.1 * np.tanh(p.zeta[..., 0, 0]) ** 2)

    m = CustomGauge("fake", distance=dist, left_invariant=True)
    mat = run_classification([m], samples=32)
    assert any(v["rule"] == "declared_left_invariant" for v in mat.violations)


def test_classification_is_deterministic_and_parallel_safe():
    a = dumps(run_classification(DEFAULT_ZOO[:2], fields=("C", "H"), samples=32, seed=7).to_dict())
    b = dumps(run_classification(DEFAULT_ZOO[:2], fields=("C", "H"), samples=32, seed=7).to_dict())
    c = dumps(run_classification(DEFAULT_ZOO[:2], fields=("C", "H"), samples=32, seed=7,
                                 workers=4).to_dict())
    assert a == b == c
    d = dumps(run_classification(DEFAULT_ZOO[:2], fields=("C", "H"), samples=32, seed=8).to_dict())
    assert d != a


def test_audit_rules_reference_known_conditions():
    for _, hyps, concl, _ in AUDIT_RULES:
        assert set(hyps) | {concl} <= set(CONDITIONS)
