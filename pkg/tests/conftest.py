import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from starform.scalars import GaussianRational, TauScalar
from starform.symbols import Symbol

settings.register_profile("starform", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("starform")

F = Fraction
HALF = Fraction(1, 2)

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)
small_rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)
gaussians = st.builds(GaussianRational, small_rationals, small_rationals)
tau_scalars = st.dictionaries(st.integers(0, 2), gaussians, max_size=3).map(TauScalar)


def rng_of(seed):
    return random.Random(seed)


def e(dim, *k):
    return Symbol.fourier(dim, tuple(k))


@pytest.fixture
def x():
    return Symbol.q(2, 0)


@pytest.fixture
def y():
    return Symbol.q(2, 1)


# acceptance criterion -> (passed, detail); filled by test_acceptance, echoed in the summary
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
