import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import betainc

from sgboost.special import reg_incomplete_beta


def test_power_closed_form():
    assert reg_incomplete_beta(0.5, 1.0, 1 / 3) == pytest.approx(3 ** -0.5, abs=1e-12)


def test_arcsine_midpoint():
    assert reg_incomplete_beta(0.5, 0.5, 0.5) == pytest.approx(0.5, abs=1e-12)


def test_endpoints():
    assert reg_incomplete_beta(2.0, 3.0, 0.0) == 0.0
    assert reg_incomplete_beta(2.0, 3.0, 1.0) == 1.0


def test_domain_errors():
    from sgboost import ValidationError
    for args in ((0.0, 1.0, 0.5), (1.0, -1.0, 0.5), (1.0, 1.0, 1.5)):
        with pytest.raises(ValidationError):
            reg_incomplete_beta(*args)


def test_against_quadrature():
    from scipy.integrate import quad
    from scipy.special import beta
    a, b, x = 2.5, 0.7, 0.8
    val = quad(lambda t: t ** (a - 1) * (1 - t) ** (b - 1), 0, x)[0] / beta(a, b)
    assert reg_incomplete_beta(a, b, x) == pytest.approx(val, rel=1e-9)


@settings(max_examples=300, deadline=None)
@given(st.floats(0.05, 60.0), st.floats(0.05, 60.0), st.floats(0.0, 1.0))
def test_matches_reference_and_reflection(a, b, x):
    x = 1.0 - (1.0 - x)  # make x and 1 - x exact complements
    v = reg_incomplete_beta(a, b, x)
    assert v == pytest.approx(betainc(a, b, x), abs=1e-12)
    assert v + reg_incomplete_beta(b, a, 1 - x) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 20.0), st.floats(0.1, 20.0), st.floats(0.0, 0.99), st.floats(0.001, 0.01))
def test_monotone_in_x(a, b, x, dx):
    assert reg_incomplete_beta(a, b, x) <= reg_incomplete_beta(a, b, x + dx) + 1e-14
