import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraccount.risk import (
    ClaimDistribution,
    ShockModelConfig,
    bcp_moments,
    classical_ruin_probability,
    estimate_ruin_mc,
    j0y_formula,
    joint_lt_claims,
    lrd_check,
    p0_formula,
    pgf_bcp,
    pgf_total_claims,
    premium_loading,
    risk_correlation,
    risk_covariance,
    sample_bcp,
    sample_claims_pair,
    sample_thinned_bcp,
    solve_joint_ruin_ode,
    solve_ruin_ode,
    sum_cdf,
)
from fraccount.risk.model import check_net_profit
from fraccount.subordinators import GammaParams, RngStream, TssParams
from fraccount.verify import reference_model, ruin_reference_model

E = ClaimDistribution.exponential
U = ClaimDistribution.uniform
D = ClaimDistribution.deterministic
EMP = ClaimDistribution.empirical


@pytest.mark.parametrize("dist,mean,var", [
    (E(2.0), 2.0, 4.0),
    (D(1.5), 1.5, 0.0),
    (U(1.0, 3.0), 2.0, 4 / 12),
    (EMP([1.0, 2.0, 6.0]), 3.0, 14 / 3),
])
def test_claim_moments_and_sampling(dist, mean, var):
    assert dist.mean == pytest.approx(mean)
    assert dist.var == pytest.approx(var)
    assert dist.second_moment == pytest.approx(var + mean ** 2)
    x = dist.sample(RngStream(1).generator(), 200_000)
    assert x.mean() == pytest.approx(mean, abs=5 * math.sqrt(var / 2e5) + 1e-12)
    assert dist.laplace(0.0) == pytest.approx(1.0)
    assert dist.laplace(0.7) == pytest.approx(np.mean(np.exp(-0.7 * x)), abs=0.01)
    assert ClaimDistribution.from_record(dist.to_record()) == dist


def test_claim_validation():
    with pytest.raises(ValueError):
        E(0.0)
    with pytest.raises(ValueError):
        U(2.0, 1.0)
    with pytest.raises(ValueError):
        D(-1.0)
    with pytest.raises(ValueError):
        ClaimDistribution("pareto", (1.0,))


@pytest.mark.parametrize("d1,d2", [
    (E(1.0), E(1.0)), (E(1.0), E(0.5)), (E(1.0), D(0.3)), (U(0.0, 2.0), E(1.0)),
    (U(0.5, 1.0), U(0.0, 3.0)), (EMP([0.2, 1.1]), E(2.0)),
])
def test_sum_cdf_against_simulation(d1, d2):
    gen = RngStream(2).generator()
    s = d1.sample(gen, 400_000) + d2.sample(gen, 400_000)
    for x in (0.5, 1.0, 2.5):
        assert sum_cdf(d1, d2, x) == pytest.approx(np.mean(s <= x), abs=0.004)
    assert sum_cdf(d1, d2, -1.0) == 0.0


def test_pgf_and_transforms():
    cfg = reference_model()
    assert pgf_bcp(1.0, 1.0, 2.0, cfg) == pytest.approx(1.0)
    assert joint_lt_claims(0.0, 0.0, 2.0, cfg) == pytest.approx(1.0)
    # P(N1 = N2 = 0) from the pgf at the origin vs simulation
    x = sample_bcp(1.0, cfg, RngStream(3), size=100_000)
    p0 = np.mean(np.all(x == 0, axis=1))
    assert abs(p0 - pgf_bcp(0.0, 0.0, 1.0, cfg).real) < 4 * math.sqrt(p0 * (1 - p0) / 1e5)
    with pytest.raises(ValueError):
        pgf_bcp(1.5, 0.0, 1.0, cfg)


def test_total_claims_pgf_integer_claims():
    cfg = reference_model(claims=(D(1.0), D(1.0), D(1.0), D(1.0)))
    # S1 + S2 = N1 + N2 with unit claims
    x = sample_bcp(1.0, cfg, RngStream(4), size=50_000).sum(axis=1)
    u = 0.6
    assert pgf_total_claims(u, 1.0, cfg).real == pytest.approx(np.mean(u ** x), abs=0.01)


def test_moment_formulas():
    cfg = reference_model()
    means, var_p = bcp_moments(1.0, cfg, "printed")
    _, var_e = bcp_moments(1.0, cfg, "exact")
    assert means == pytest.approx([0.5, 0.5])
    assert var_p == pytest.approx([0.875, 0.875])
    assert var_e == pytest.approx([1.25, 1.25])
    x = sample_bcp(1.0, cfg, RngStream(5), size=400_000)
    assert x[:, 0].var() == pytest.approx(1.25, rel=0.03)


def test_thinning_matches_direct_counts():
    cfg = reference_model(lambda0=0.5, lambda1=1.5, lambda2=0.2)
    a = sample_bcp(1.0, cfg, RngStream(6), size=200_000)
    b = sample_thinned_bcp(1.0, cfg, RngStream(7), size=200_000)
    assert a.mean(axis=0) == pytest.approx(b.mean(axis=0), abs=0.02)
    assert np.cov(a.T)[0, 1] == pytest.approx(np.cov(b.T)[0, 1], abs=0.05)
    c = sample_claims_pair(1.0, cfg, RngStream(8), "thinned", size=1000)
    assert c.shape == (1000, 2)


def test_premium_loading_and_net_profit():
    cfg = reference_model()
    rep = premium_loading(cfg)
    # E[Q(1)] = 3 * 0.25, E[phi] = 1
    assert rep.fair_premium == pytest.approx(0.75 * 4 / 3)
    assert rep.net_profit
    bad = cfg.replace(omega=0.1)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        assert not check_net_profit(bad)
    assert any(issubclass(x.category, RuntimeWarning) for x in w)


def test_covariance_forms_and_lrd():
    cfg = reference_model()
    assert risk_correlation(1, 4, cfg) == pytest.approx(0.5, abs=1e-12)
    assert risk_correlation(1, 4, cfg, "exact") == pytest.approx(0.5, abs=1e-12)
    assert risk_covariance(2.0, 1.0, cfg) == risk_covariance(1.0, 2.0, cfg)
    rep = lrd_check(cfg, 1.0, [1, 10, 100, 1000])
    assert rep.slope == pytest.approx(-0.5) and rep.is_lrd
    assert rep.limit_ratio == pytest.approx(1.0)
    with pytest.raises(ValueError):
        lrd_check(cfg, 1.0, [1, 10])


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.1, 100))
def test_correlation_is_sqrt_ratio(s, t):
    cfg = reference_model()
    lo, hi = min(s, t), max(s, t)
    assert risk_correlation(s, t, cfg) == pytest.approx(math.sqrt(lo / hi), rel=1e-12)


def test_classical_ruin_reproduced():
    cfg = reference_model(claims=(E(1.0), E(1.0), E(1.0), D(0.0)))
    g = solve_ruin_ode(cfg, 15.0, event_rate=1.0)
    want = classical_ruin_probability(g.u, 1.0, 1.0, cfg.omega)
    assert np.max(np.abs(g.values - want)) < 1e-4
    assert g.values[0] == pytest.approx(1 / 1.2, abs=1e-12)


def test_ruin_p0_and_joint():
    cfg = ruin_reference_model()
    g = solve_ruin_ode(cfg, 10.0)
    assert g.values[0] == pytest.approx(p0_formula(cfg), abs=1e-10)
    assert p0_formula(cfg) == pytest.approx(math.log(1.3660254037844386) / 1.2, rel=1e-12)
    assert np.all(np.diff(g.values) <= 1e-12)
    res = g.diagnostics["printed_form_residual"]
    assert res["classical"] < res["printed"]
    j = solve_joint_ruin_ode(cfg, 1.0, 10.0)
    assert j.values[0] == pytest.approx(j0y_formula(cfg, 1.0), abs=1e-6)
    assert np.all(j.values <= g.values + 1e-9)
    with pytest.raises(ValueError):
        solve_ruin_ode(cfg, 10.0, h_u=1.0)


def test_ruin_mc_small_run_is_deterministic_and_batch_consistent():
    cfg = ruin_reference_model()
    a = estimate_ruin_mc(cfg, 100.0, 20_000, rng=RngStream(9, 1))
    b = estimate_ruin_mc(cfg, 100.0, 20_000, rng=RngStream(9, 1), threads=2)
    assert a.ruin_prob == b.ruin_prob
    batch = solve_ruin_ode(cfg, 5.0, claims_per_event="batch").values[0]
    assert abs(a.ruin_prob - batch) < 4 * a.ci_halfwidth / 1.96 + 0.005
    assert a.deficit_quantiles[0.5] <= a.deficit_quantiles[0.99]


def test_model_validation():
    with pytest.raises(ValueError):
        ShockModelConfig(1, 1, 1, TssParams(0.5, 1), GammaParams(2, 1), (E(1.0),) * 3, omega=1.0)
    with pytest.raises(ValueError):
        ShockModelConfig(-1, 1, 1, TssParams(0.5, 1), GammaParams(2, 1), (E(1.0),) * 4, omega=1.0)
