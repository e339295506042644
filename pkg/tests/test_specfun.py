import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraccount.specfun import (
    SeriesControl,
    SeriesConvergenceError,
    WrightSpec,
    digamma,
    gen_binomial,
    gen_binomial_array,
    mittag_leffler_3p,
    wright_pq,
)

mp.mp.dps = 40


def mp_wright(upper, lower, z, start=0, n=400):
    """Direct high-precision partial sum, used as an oracle."""
    s = mp.mpf(0)
    z = mp.mpf(z)
    for k in range(start, start + n):
        t = z ** k / mp.factorial(k)
        for a, b in upper:
            t *= mp.gamma(mp.mpf(a) + mp.mpf(b) * k)
        for a, b in lower:
            t *= mp.rgamma(mp.mpf(a) + mp.mpf(b) * k)
        s += t
    return float(s)


def mp_ml3(a, b, g, z):
    return float(mp.nsum(lambda k: mp.rf(a, k) * mp.mpf(z) ** k / (mp.factorial(k) * mp.gamma(g + b * k)),
                         [0, mp.inf]))


@pytest.mark.parametrize("z", np.linspace(-5, 5, 11))
def test_ml_reduces_to_exp(z):
    assert abs(mittag_leffler_3p(1, 1, 1, z) - math.exp(z)) < 1e-10 * max(1, math.exp(z))


@pytest.mark.parametrize("a,b,g,z", [
    (1.0, 0.5, 1.0, -2.0),
    (0.7, 0.3, 1.2, 1.5),
    (2.5, 0.8, 0.9, -4.0),
    (1.0, 2.0, 1.0, 3.0),
])
def test_ml_against_mpmath(a, b, g, z):
    res = mittag_leffler_3p(a, b, g, z, full_output=True)
    ref = mp_ml3(a, b, g, z)
    assert abs(res.value - ref) <= res.abs_error_bound + 1e-14 * abs(ref)
    assert res.abs_error_bound < 1e-10


def test_ml_half_is_erfc_form():
    # E_{1/2}(-x) = exp(x^2) erfc(x)
    for x in (0.1, 0.5, 1.0, 2.0):
        want = float(mp.exp(x * x) * mp.erfc(x))
        assert mittag_leffler_3p(1, 0.5, 1, -x) == pytest.approx(want, rel=1e-11)


@pytest.mark.parametrize("upper,lower,z,start", [
    ([(1, 1), (0.5, 0.5)], [(1.5, 1.2)], 0.8, 0),
    ([(0.3, 0.3)], [(1.0, 0.5)], -1.7, 1),
    ([(2.0, 1.0)], [(1.0, 1.0), (1.0, 0.2)], 2.0, 0),
    ([(-0.5, 1.0)], [(1.0, 1.0)], 0.6, 1),
])
def test_wright_against_direct_sum(upper, lower, z, start):
    res = wright_pq(WrightSpec(upper, lower), z, start=start, full_output=True)
    ref = mp_wright(upper, lower, z, start)
    assert abs(res.value - ref) <= res.abs_error_bound + 1e-15
    assert res.diagnostics["tail_bound"] >= 0


def test_wright_finite_radius_binomial():
    # 1Psi0[(a,1)](z) = Gamma(a) (1 - z)^-a, radius 1
    a = 1.7
    spec = WrightSpec([(a, 1)], [])
    assert spec.delta == -1
    assert spec.radius == pytest.approx(1.0)
    for z in (-0.9, -0.3, 0.2, 0.6):
        assert wright_pq(spec, z) == pytest.approx(math.gamma(a) * (1 - z) ** -a, rel=1e-10)
    with pytest.raises(SeriesConvergenceError):
        wright_pq(spec, 1.0)


def test_wright_rejects_divergent_spec():
    with pytest.raises(ValueError, match="convergence"):
        WrightSpec([(1, 1), (1, 1)], [])


def test_wright_singular_upper_gamma():
    with pytest.raises(ValueError, match="singular"):
        wright_pq(WrightSpec([(-1.0, 1.0)], [(1, 1)]), 0.5)
    # skipping the pole with start
    assert math.isfinite(wright_pq(WrightSpec([(-1.0, 1.0)], [(1, 1)]), 0.5, start=2))


def test_reciprocal_gamma_pole_gives_zero_term():
    # 1/Gamma(0 + k) vanishes at k = 0, so the series starts effectively at k = 1
    spec = WrightSpec([(1, 1)], [(0, 1)])
    direct = wright_pq(spec, 0.4, start=1)
    assert wright_pq(spec, 0.4) == pytest.approx(direct, rel=1e-14)


def test_max_terms_raises():
    with pytest.raises(SeriesConvergenceError) as ei:
        wright_pq(WrightSpec([(1, 1)], [(1, 1)]), 40.0, SeriesControl(max_terms=20))
    assert ei.value.terms_used == 20


def test_series_control_validation():
    with pytest.raises(ValueError):
        SeriesControl(max_terms=0)
    with pytest.raises(ValueError):
        SeriesControl(abs_tol=0, rel_tol=0)


@settings(max_examples=60, deadline=None)
@given(st.floats(-6, 6), st.floats(0.05, 3), st.floats(0.1, 4))
def test_cancelling_pairs_give_exp(z, b, a):
    v = wright_pq(WrightSpec([(a, b)], [(a, b)]), z, full_output=True)
    assert abs(v.value - math.exp(z)) <= v.abs_error_bound + 1e-13 * math.exp(abs(z))


@settings(max_examples=60, deadline=None)
@given(st.floats(0.3, 1.0), st.floats(0.2, 3.0), st.floats(-3, 3))
def test_ml_error_bound_is_honest(beta, gamma, z):
    res = mittag_leffler_3p(1.0, beta, gamma, z, full_output=True)
    ref = float(mp.nsum(lambda k: mp.mpf(z) ** k * mp.rgamma(gamma + beta * k), [0, mp.inf]))
    assert abs(res.value - ref) <= res.abs_error_bound + 4e-16 * abs(ref)


@pytest.mark.parametrize("x", [1e-3, 0.25, 0.5, 1.0, 3.3, 9.99, 10.0, 57.0, 1e4])
def test_digamma_against_mpmath(x):
    assert digamma(x) == pytest.approx(float(mp.digamma(x)), rel=1e-13, abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 200))
def test_digamma_recurrence(x):
    assert digamma(x + 1) - digamma(x) == pytest.approx(1 / x, rel=1e-11, abs=1e-12)


def test_digamma_domain():
    with pytest.raises(ValueError):
        digamma(0.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3), st.integers(0, 30))
def test_gen_binomial_matches_mpmath(alpha, j):
    a = mp.mpf(alpha)  # exact product; mp.binomial loses digits for tiny alpha
    want = float(mp.fprod([(a - i) / (i + 1) for i in range(j)]))
    assert gen_binomial(alpha, j) == pytest.approx(want, rel=1e-12, abs=1e-300)


def test_gen_binomial_array_and_alternating_sum():
    a = 0.37
    arr = gen_binomial_array(a, 25)
    assert np.allclose(arr, [gen_binomial(a, j) for j in range(25)], rtol=1e-14)
    # sum_j (a choose j) x^j = (1 + x)^a for |x| < 1
    x = 0.3
    full = gen_binomial_array(a, 200)
    assert math.fsum(full * x ** np.arange(200)) == pytest.approx((1 + x) ** a, rel=1e-13)
    with pytest.raises(ValueError):
        gen_binomial(a, -1)
