import pytest

from heismoeb.metrics import KoranyiPower
from heismoeb.verify import SUITES, run_suite

from conftest import FIELD_N

QUICK = {"algebra": 200, "group": 200, "metric-axioms": 500, "moebius-invariance": 100,
         "inversion": 200, "theorem12": 50, "ptolemaean": 200, "cc": 200}


@pytest.mark.parametrize("field,n", FIELD_N)
@pytest.mark.parametrize("name", [s for s in SUITES if s != "cc"])
def test_suites_pass_quickly(name, field, n):
    rep = run_suite(name, field=field, n=n, samples=QUICK[name], seed=3)
    assert rep.passed, rep.witness


def test_cc_suite():
    rep = run_suite("cc", samples=QUICK["cc"])
    assert rep.passed, rep.witness


def test_ptolemaean_suite_fails_above_one():
    rep = run_suite("ptolemaean", field="C", n=2, samples=200, metric=KoranyiPower(1.4))
    assert rep.verdict == "fail" and rep.witness


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("nope")


def test_suites_are_deterministic():
    a = run_suite("moebius-invariance", field="H", n=2, samples=50, seed=11).to_dict()
    b = run_suite("moebius-invariance", field="H", n=2, samples=50, seed=11).to_dict()
    assert a == b
