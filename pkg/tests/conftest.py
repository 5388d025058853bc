import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from heismoeb.algebra import DIMS
from heismoeb.heisenberg import HPoint

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

FIELD_N = [("R", 2), ("R", 3), ("C", 2), ("C", 3), ("H", 2), ("H", 3), ("O", 2)]

coef = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)


def knums(field, imaginary=False):
    d = DIMS[field]
    return st.lists(coef, min_size=d, max_size=d).map(
        lambda c: np.array(([0.0] + c[1:]) if imaginary else c, dtype=float)
    )


@st.composite
def points(draw, field, n):
    zeta = np.stack([draw(knums(field)) for _ in range(n - 1)])
    v = draw(knums(field, imaginary=True)) if field != "R" else np.zeros(1)
    return HPoint(field, zeta, v)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
