"""Window function hypotheses, exact moments, and the sandwich property."""

import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from powcorr import DomainError
from powcorr.mollify import (CenteredMollifier, Mollifier, centered,
                             make_inner, make_outer, verify_hypotheses,
                             window_fraction)


def chi_indicator(t: float, s: float, N: int) -> float:
    """The raw window indicator 1[|t mod 1, centered| <= s/N]."""
    u = t - math.floor(t)
    d = min(u, 1.0 - u)
    return 1.0 if d <= s / N else 0.0


def test_integral_is_exactly_two_p_plus_delta():
    for N in (10, 100, 1000):
        for s in (0.5, 1.0, 2.0):
            for maker in (make_inner, make_outer):
                F = maker(s, N)
                assert F.integral == 2 * F.p + F.delta


def test_outer_dominates_indicator_and_inner_is_dominated():
    rng = random.Random(12)
    for N in (50, 500):
        s = 1.0
        Fi = make_inner(s, N)
        Fo = make_outer(s, N)
        for _ in range(2000):
            t = rng.random()
            chi = chi_indicator(t, s, N)
            assert Fi.eval(t) <= chi + 1e-15
            assert chi <= Fo.eval(t) + 1e-15


def test_eval_array_matches_scalar_eval():
    F = make_outer(1.0, 64)
    ts = np.linspace(-0.5, 1.5, 701)
    vec = F.eval_array(ts)
    scal = np.array([F.eval(float(t)) for t in ts])
    assert np.array_equal(vec, scal)


def test_plateau_and_support_edges():
    F = make_outer(1.0, 100)
    assert F.eval(float(F.p_f) * 0.999) == 1.0
    assert F.eval(float(F.edge_f) * 1.001) == 0.0


def test_derivative_bound_holds_on_ramp():
    F = make_outer(2.0, 250)
    ts = np.linspace(float(F.p_f), float(F.edge_f), 4001)[1:-1]
    slopes = np.abs(np.diff(F.eval_array(ts)) / np.diff(ts))
    assert slopes.max() <= F.deriv_sup * (1.0 + 1e-9)


def test_hypotheses_pass_for_both_flavors():
    for N in (10, 100, 1000):
        for maker in (make_inner, make_outer):
            report = verify_hypotheses(maker(1.0, N))
            assert report.all_pass, [c for c in report.checks if not c.passed]


def test_centered_mean_is_the_integral():
    F = make_outer(1.0, 128)
    G = centered(F)
    assert G.mean == F.integral
    # quadrature of G over one period vanishes to rounding
    ts = np.linspace(0.0, 1.0, 200001)[:-1]
    assert abs(G.eval_array(ts).mean()) < 1e-6


def test_integral_sq_matches_dense_quadrature():
    F = make_outer(1.0, 128)
    ts = np.linspace(-0.5, 0.5, 400001)
    riemann = float((F.eval_array(ts) ** 2).sum() / (len(ts) - 1))
    assert abs(float(F.integral_sq) - riemann) < 1e-6


def test_window_fraction_exactness():
    assert window_fraction(0.5) == Fraction(1, 2)
    assert window_fraction(Fraction(3, 4)) == Fraction(3, 4)
    with pytest.raises(DomainError):
        window_fraction(-1.0)


def test_small_n_is_rejected_when_window_cannot_fit():
    with pytest.raises(DomainError):
        make_outer(2.0, 4)


@given(st.floats(min_value=0.1, max_value=3.0),
       st.integers(min_value=20, max_value=2000))
@settings(max_examples=100, deadline=None)
def test_sandwich_property_random_windows(s, N):
    Fi = make_inner(s, N)
    Fo = make_outer(s, N)
    rng = random.Random(int(s * 1000) + N)
    for _ in range(50):
        t = rng.uniform(-0.6, 0.6)
        chi = chi_indicator(t, s, N)
        assert Fi.eval(t) - 1e-15 <= chi <= Fo.eval(t) + 1e-15
