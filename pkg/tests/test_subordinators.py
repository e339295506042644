import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from fraccount.subordinators import (
    GammaParams,
    MixtureParams,
    RngStream,
    TssParams,
    as_generator,
    laplace_exponent_composed,
    laplace_exponent_gamma,
    laplace_exponent_mixture,
    laplace_exponent_stable,
    laplace_exponent_tss,
    psi_derivatives,
    sample_composed_increment,
    sample_gamma_increment,
    sample_inverse_mixture_tss,
    sample_mixture_tss_increment,
    sample_stable_increment,
    sample_tss_increment,
)

TSS = TssParams(0.5, 1.0)
GAM = GammaParams(2.0, 1.0)


def lt_z(draws, u, exponent, dt):
    v = np.exp(-u * draws)
    return abs(v.mean() - math.exp(-dt * exponent)) / (v.std(ddof=1) / math.sqrt(v.size))


def test_exponent_examples():
    assert laplace_exponent_tss(0.0, TSS) == 0.0
    assert laplace_exponent_tss(1.0, TssParams(0.5, 0.0)) == pytest.approx(1.0)
    assert laplace_exponent_tss(2.0, TSS) == pytest.approx(math.sqrt(3) - 1, rel=1e-15)
    assert laplace_exponent_gamma(math.sqrt(3) - 1, GAM) == pytest.approx(math.log(1.3660254037844386))
    assert laplace_exponent_stable(4.0, 0.5) == pytest.approx(2.0)
    assert isinstance(laplace_exponent_tss(1.0, TSS), float)
    assert laplace_exponent_tss(np.array([0.0, 2.0]), TSS).shape == (2,)


def test_exponent_domain_and_params():
    with pytest.raises(ValueError):
        laplace_exponent_tss(-1.0, TSS)
    with pytest.raises(ValueError):
        TssParams(0.0, 1.0)
    with pytest.raises(ValueError):
        TssParams(0.5, -1.0)
    with pytest.raises(ValueError):
        GammaParams(0.0, 1.0)
    with pytest.raises(ValueError):
        MixtureParams(0.0, 0.0, TSS, TSS)
    with pytest.raises(ValueError):
        laplace_exponent_composed(1.0, TSS, GAM, form="other")


def test_composed_is_composition():
    for u in (0.1, 1.0, 7.0):
        direct = laplace_exponent_gamma(laplace_exponent_tss(u, TSS), GAM)
        assert laplace_exponent_composed(u, TSS, GAM) == pytest.approx(direct, rel=1e-14)
    # the printed variant differs by rho*log(mu/alpha) at every u, including u = 0
    gap = laplace_exponent_composed(0.0, TSS, GAM, "printed")
    assert gap == pytest.approx(GAM.rho * math.log(GAM.mu / TSS.alpha))


@settings(max_examples=80, deadline=None)
@given(st.floats(0.05, 0.99), st.floats(0, 5), st.floats(0, 50), st.floats(0, 50))
def test_tss_exponent_monotone_concave(alpha, theta, u1, u2):
    p = TssParams(alpha, theta)
    lo, hi = sorted((u1, u2))
    f = lambda u: laplace_exponent_tss(u, p)
    assert f(lo) <= f(hi) + 1e-12
    assert f(0.5 * (lo + hi)) >= 0.5 * (f(lo) + f(hi)) - 1e-12
    assert f(lo) >= 0


def test_mixture_exponent_is_weighted_sum():
    m = MixtureParams(1.0, 0.5, TSS, TssParams(0.7, 2.0))
    u = 3.0
    want = laplace_exponent_tss(u, TSS) + 0.5 * laplace_exponent_tss(u, TssParams(0.7, 2.0))
    assert laplace_exponent_mixture(u, m) == pytest.approx(want)


def test_psi_derivatives_against_finite_differences():
    u, h = 0.8, 1e-3
    d = psi_derivatives(u, 3, TSS, GAM)
    f = lambda x: laplace_exponent_composed(x, TSS, GAM)
    assert d[0] == pytest.approx((f(u + h) - f(u - h)) / (2 * h), rel=1e-6)
    assert d[1] == pytest.approx((f(u + h) - 2 * f(u) + f(u - h)) / h ** 2, rel=1e-5)
    assert d[2] == pytest.approx((f(u + 2 * h) - 2 * f(u + h) + 2 * f(u - h) - f(u - 2 * h)) / (2 * h ** 3),
                                 rel=1e-3)
    # signs alternate for a Bernstein function
    d = psi_derivatives(u, 10, TSS, GAM)
    assert np.all(np.sign(d) == (-1.0) ** np.arange(10))
    with pytest.raises(ValueError):
        psi_derivatives(u, 31, TSS, GAM)


def test_rng_stream_determinism():
    a = RngStream(5, 3).generator().random(4)
    b = RngStream(5, 3).generator().random(4)
    c = RngStream(5, 4).generator().random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(RngStream(5, 3).substream(0).generator().random(4), a)
    assert isinstance(as_generator(None), np.random.Generator)
    with pytest.raises(TypeError):
        as_generator("seed")


def test_stable_sampler_laplace_transform():
    x = sample_stable_increment(0.6, 1.3, RngStream(1, 1), size=200_000)
    for u in (0.5, 2.0):
        assert lt_z(x, u, laplace_exponent_stable(u, 0.6), 1.3) < 4


def test_stable_sampler_half_is_levy():
    # S_{1/2}(1) with exponent sqrt(u) is Levy with scale 1/2
    x = sample_stable_increment(0.5, 1.0, RngStream(2, 1), size=20_000)
    assert stats.kstest(x, stats.levy(scale=0.5).cdf).pvalue > 1e-3


@pytest.mark.parametrize("p,dt", [(TssParams(0.5, 1.0), 1.0), (TssParams(0.3, 2.0), 0.2),
                                  (TssParams(0.8, 0.5), 3.0), (TssParams(0.5, 0.0), 1.0)])
def test_tss_sampler_laplace_transform(p, dt):
    x = sample_tss_increment(p, dt, RngStream(3, 1), size=200_000)
    assert np.all(x >= 0)
    for u in (0.5, 2.0):
        assert lt_z(x, u, laplace_exponent_tss(u, p), dt) < 4


def test_tss_alpha_one_is_drift():
    assert np.all(sample_tss_increment(TssParams(1.0, 0.0), 2.5, RngStream(0), size=5) == 2.5)


def test_tss_mean_and_variance():
    x = sample_tss_increment(TSS, 2.0, RngStream(4, 2), size=400_000)
    se = x.std() / math.sqrt(x.size)
    assert abs(x.mean() - 2.0 * TSS.mean_rate) < 4 * se
    assert x.var() == pytest.approx(2.0 * TSS.var_rate, rel=0.03)


def test_gamma_and_composed_samplers():
    g = sample_gamma_increment(GAM, 1.5, RngStream(5, 1), size=200_000)
    assert lt_z(g, 1.0, laplace_exponent_gamma(1.0, GAM), 1.5) < 4
    c = sample_composed_increment(TSS, GAM, 1.0, RngStream(5, 2), size=200_000)
    assert lt_z(c, 1.0, laplace_exponent_composed(1.0, TSS, GAM), 1.0) < 4
    assert lt_z(c, 1.0, laplace_exponent_composed(1.0, TSS, GAM, "printed"), 1.0) > 10


def test_mixture_sampler():
    m = MixtureParams(1.0, 0.5, TSS, TssParams(0.7, 2.0))
    x = sample_mixture_tss_increment(m, 0.7, RngStream(6, 1), size=200_000)
    assert lt_z(x, 1.0, laplace_exponent_mixture(1.0, m), 0.7) < 4


def test_sampler_shapes_and_array_dt():
    x = sample_tss_increment(TSS, np.array([0.1, 1.0, 10.0]), RngStream(7))
    assert x.shape == (3,)
    assert isinstance(sample_tss_increment(TSS, 1.0, RngStream(7)), float)
    assert sample_gamma_increment(GAM, 1.0, RngStream(7), size=(4, 2)).shape == (4, 2)
    with pytest.raises(ValueError):
        sample_tss_increment(TSS, -1.0, RngStream(7))


def test_inverse_mixture_is_monotone_and_matches_mean():
    m = MixtureParams(1.0, 0.0, TSS, TSS)
    levels = np.array([0.5, 1.0, 2.0, 4.0])
    e, meta = sample_inverse_mixture_tss(m, levels, 0.005, RngStream(8), size=4000, full_output=True)
    assert e.shape == (4000, 4)
    assert np.all(np.diff(e, axis=1) >= 0)
    assert meta["grid_dt"] == 0.005
    # first passage of a process with mean rate 1/2: E[E(t)] ~ t / (1/2) for large t
    assert e[:, -1].mean() == pytest.approx(2 * 4.0, rel=0.1)
    with pytest.raises(ValueError):
        sample_inverse_mixture_tss(m, [2.0, 1.0], 0.01)


def test_inverse_mixture_event_identity():
    # P(E(t) <= s) = P(S(s) >= t)
    m = MixtureParams(1.0, 0.0, TSS, TSS)
    e = sample_inverse_mixture_tss(m, 1.0, 0.002, RngStream(9), size=20_000)
    s = sample_tss_increment(TSS, 1.5, RngStream(9, 1), size=20_000)
    p1, p2 = np.mean(e <= 1.5), np.mean(s >= 1.0)
    assert abs(p1 - p2) < 4 * math.sqrt(p1 * (1 - p1) / 20_000 * 2) + 0.01
