"""Bivariate common-shock claim model on a negative binomial clock.

Three Poisson streams Q0, Q1, Q2 (rates lambda0, lambda1, lambda2) share one
clock T(t) = S^{alpha,theta}(Gamma(t)).  Line 1 counts N1 = Q1 + Q0 and line 2
counts N2 = Q2 + Q0.  Q1 events carry claims xi1, Q2 events xi2, and a
common-shock event carries xi3 on line 1 and xi4 on line 2.

Notation: theta is the tempering rate; the premium safety margin is called
the loading (theta_L in formulas), omega is the premium rate and nu the
initial capital.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..counting.params import NumericDomainError, ProcessParams
from ..subordinators import (
    GammaParams,
    RngLike,
    TssParams,
    as_generator,
    laplace_exponent_composed,
    sample_composed_increment,
)
from .claims import ClaimDistribution, sum_cdf


@dataclass(frozen=True)
class ShockModelConfig:
    lambda0: float
    lambda1: float
    lambda2: float
    tss: TssParams
    gamma: GammaParams
    claims: tuple
    omega: float
    nu: float = 0.0

    def __post_init__(self):
        for name in ("lambda0", "lambda1", "lambda2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not self.lam > 0:
            raise ValueError("lambda0 + lambda1 + lambda2 must be > 0")
        if len(self.claims) != 4 or not all(isinstance(c, ClaimDistribution) for c in self.claims):
            raise ValueError("claims must be four ClaimDistribution objects (xi1..xi4)")
        if not self.omega > 0:
            raise ValueError("premium rate omega must be > 0")
        if self.nu < 0:
            raise ValueError("initial capital nu must be >= 0")

    @property
    def lam(self) -> float:
        return self.lambda0 + self.lambda1 + self.lambda2

    @property
    def mark_probs(self) -> np.ndarray:
        """(p1, p2, p0): probabilities that a unit of the superposed count is of each type."""
        return np.array([self.lambda1, self.lambda2, self.lambda0]) / self.lam

    def superposed(self) -> ProcessParams:
        """The one-dimensional negative binomial count with rate lambda."""
        return ProcessParams([self.lam], self.tss, self.gamma)

    @property
    def psi_lambda(self) -> float:
        """psi(lambda): rate of jump events of the superposed count."""
        return float(laplace_exponent_composed(self.lam, self.tss, self.gamma))

    @property
    def clock_rate(self) -> float:
        """E[T(1)] = alpha theta^(alpha-1) rho / mu."""
        return self.tss.mean_rate * self.gamma.rho / self.gamma.mu

    @property
    def clock_var_rate(self) -> float:
        g = self.gamma
        return (g.rho / g.mu) * self.tss.var_rate + (g.rho / g.mu ** 2) * self.tss.mean_rate ** 2

    @property
    def mean_count_rate(self) -> float:
        """E[Q(1)] for the superposed count."""
        return self.lam * self.clock_rate

    # the per-unit claim phi: xi1, xi2 or xi3 + xi4 by mark

    @property
    def phi_mean(self) -> float:
        x1, x2, x3, x4 = self.claims
        p1, p2, p0 = self.mark_probs
        return p1 * x1.mean + p2 * x2.mean + p0 * (x3.mean + x4.mean)

    @property
    def phi_second_moment(self) -> float:
        x1, x2, x3, x4 = self.claims
        p1, p2, p0 = self.mark_probs
        m34 = x3.second_moment + x4.second_moment + 2 * x3.mean * x4.mean
        return p1 * x1.second_moment + p2 * x2.second_moment + p0 * m34

    @property
    def phi_var(self) -> float:
        return self.phi_second_moment - self.phi_mean ** 2

    def phi_cdf(self, x):
        x1, x2, x3, x4 = self.claims
        p1, p2, p0 = self.mark_probs
        out = p1 * np.asarray(x1.cdf(x)) + p2 * np.asarray(x2.cdf(x))
        if p0 > 0:
            out = out + p0 * np.asarray(sum_cdf(x3, x4, x))
        return out

    def phi_sf(self, x):
        return 1.0 - self.phi_cdf(x)

    def sample_phi(self, gen: np.random.Generator, n: int) -> np.ndarray:
        x1, x2, x3, x4 = self.claims
        marks = gen.choice(3, size=n, p=self.mark_probs)
        out = np.empty(n)
        for j, draw in enumerate((lambda k: x1.sample(gen, k), lambda k: x2.sample(gen, k),
                                  lambda k: x3.sample(gen, k) + x4.sample(gen, k))):
            sel = marks == j
            out[sel] = draw(int(sel.sum()))
        return out

    def to_record(self) -> dict:
        return {
            "lambda0": self.lambda0,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "alpha": self.tss.alpha,
            "theta": self.tss.theta,
            "mu": self.gamma.mu,
            "rho": self.gamma.rho,
            "claims": [c.to_record() for c in self.claims],
            "omega": self.omega,
            "nu": self.nu,
        }

    def replace(self, **kw) -> "ShockModelConfig":
        fields = dict(lambda0=self.lambda0, lambda1=self.lambda1, lambda2=self.lambda2,
                      tss=self.tss, gamma=self.gamma, claims=self.claims, omega=self.omega,
                      nu=self.nu)
        fields.update(kw)
        return ShockModelConfig(**fields)


# ------------------------------------------------------------------ transforms

def _nb_transform(x, t: float, cfg: ShockModelConfig):
    a, th = cfg.tss.alpha, cfg.tss.theta
    base = np.asarray(x, dtype=complex) + th
    with np.errstate(invalid="ignore", divide="ignore"):
        pw = np.where(base == 0, 0.0, base ** a)
    w = 1.0 + (pw - th ** a) / cfg.gamma.mu
    if np.any((w.real <= 0) & (np.abs(w.imag) <= 1e-15 * np.abs(w.real))):
        raise NumericDomainError("transform base lies on the negative real axis")
    return w ** (-cfg.gamma.rho * t)


def pgf_bcp(u1, u2, t: float, cfg: ShockModelConfig):
    """E[u1^N1 u2^N2]."""
    u1 = np.asarray(u1, dtype=complex)
    u2 = np.asarray(u2, dtype=complex)
    if np.any(np.abs(u1) > 1 + 1e-12) or np.any(np.abs(u2) > 1 + 1e-12):
        raise ValueError("pgf arguments must satisfy |u| <= 1")
    x = cfg.lambda1 * (1 - u1) + cfg.lambda2 * (1 - u2) + cfg.lambda0 * (1 - u1 * u2)
    val = _nb_transform(x, t, cfg)
    return complex(val) if np.ndim(val) == 0 else val


def joint_lt_claims(s1, s2, t: float, cfg: ShockModelConfig):
    """E[exp(-s1 S1(t) - s2 S2(t))] for the two claim lines."""
    x1, x2, x3, x4 = cfg.claims
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    if np.any(s1 < 0) or np.any(s2 < 0):
        raise ValueError("Laplace arguments must be >= 0")
    x = (cfg.lambda1 * (1 - np.asarray(x1.laplace(s1))) + cfg.lambda2 * (1 - np.asarray(x2.laplace(s2)))
         + cfg.lambda0 * (1 - np.asarray(x3.laplace(s1)) * np.asarray(x4.laplace(s2))))
    val = _nb_transform(x, t, cfg).real
    return float(val) if np.ndim(val) == 0 else val


def lt_total_claims(s, t: float, cfg: ShockModelConfig):
    """E[exp(-s (S1(t) + S2(t)))]."""
    return joint_lt_claims(s, s, t, cfg)


def pgf_total_claims(u, t: float, cfg: ShockModelConfig):
    """E[u^(S1(t) + S2(t))] for integer-valued claims."""
    x1, x2, x3, x4 = cfg.claims
    u = np.asarray(u, dtype=complex)
    x = (cfg.lambda1 * (1 - x1.pgf(u)) + cfg.lambda2 * (1 - x2.pgf(u))
         + cfg.lambda0 * (1 - x3.pgf(u) * x4.pgf(u)))
    val = _nb_transform(x, t, cfg)
    return complex(val) if np.ndim(val) == 0 else val


# ------------------------------------------------------------------ samplers

def _clock(t: float, cfg: ShockModelConfig, gen, n: int) -> np.ndarray:
    return np.atleast_1d(sample_composed_increment(cfg.tss, cfg.gamma, t, gen, size=n))


def _stream_counts(t, cfg, gen, n):
    T = _clock(t, cfg, gen, n)
    q0 = gen.poisson(cfg.lambda0 * T)
    q1 = gen.poisson(cfg.lambda1 * T)
    q2 = gen.poisson(cfg.lambda2 * T)
    return q0, q1, q2


def sample_bcp(t: float, cfg: ShockModelConfig, rng: RngLike = None, size=None):
    """(N1, N2) = (Q1 + Q0, Q2 + Q0) with a shared clock; shape (size, 2)."""
    gen = as_generator(rng)
    n = 1 if size is None else int(size)
    q0, q1, q2 = _stream_counts(t, cfg, gen, n)
    out = np.stack([q1 + q0, q2 + q0], axis=1).astype(np.int64)
    return out[0] if size is None else out


def _thinned_marks(t, cfg, gen, n):
    T = _clock(t, cfg, gen, n)
    q = gen.poisson(cfg.lam * T)
    marks = gen.multinomial(q, cfg.mark_probs)
    return marks[:, 0], marks[:, 1], marks[:, 2]


def sample_thinned_bcp(t: float, cfg: ShockModelConfig, rng: RngLike = None, size=None):
    """(H1, H2) from one superposed count with multinomial marks."""
    gen = as_generator(rng)
    n = 1 if size is None else int(size)
    b1, b2, b0 = _thinned_marks(t, cfg, gen, n)
    out = np.stack([b1 + b0, b2 + b0], axis=1).astype(np.int64)
    return out[0] if size is None else out


def _sum_claims(counts: np.ndarray, dist: ClaimDistribution, gen) -> np.ndarray:
    total = int(counts.sum())
    owner = np.repeat(np.arange(counts.size), counts)
    return np.bincount(owner, weights=dist.sample(gen, total), minlength=counts.size)


def sample_claims_pair(t: float, cfg: ShockModelConfig, rng: RngLike = None,
                       representation: str = "direct", size=None):
    """(S1(t), S2(t)) from the three streams ("direct") or the marked single count ("thinned")."""
    gen = as_generator(rng)
    n = 1 if size is None else int(size)
    x1, x2, x3, x4 = cfg.claims
    if representation == "direct":
        q0, q1, q2 = _stream_counts(t, cfg, gen, n)
    elif representation == "thinned":
        q1, q2, q0 = _thinned_marks(t, cfg, gen, n)
    else:
        raise ValueError("representation must be 'direct' or 'thinned'")
    s1 = _sum_claims(q1, x1, gen) + _sum_claims(q0, x3, gen)
    s2 = _sum_claims(q2, x2, gen) + _sum_claims(q0, x4, gen)
    out = np.stack([s1, s2], axis=1)
    return out[0] if size is None else out


def sample_total_claims_path(times, cfg: ShockModelConfig, rng: RngLike = None, size: int = 1):
    """S1 + S2 at increasing ``times`` along one path per draw; shape (size, len(times))."""
    gen = as_generator(rng)
    ts = np.asarray(times, dtype=float)
    if np.any(np.diff(ts) <= 0) or ts[0] < 0:
        raise ValueError("times must be increasing and nonnegative")
    dts = np.diff(np.concatenate(([0.0], ts)))
    out = np.empty((size, ts.size))
    acc = np.zeros(size)
    for j, d in enumerate(dts):
        T = _clock(d, cfg, gen, size)
        q = gen.poisson(cfg.lam * T)
        owner = np.repeat(np.arange(size), q)
        acc = acc + np.bincount(owner, weights=cfg.sample_phi(gen, int(q.sum())), minlength=size)
        out[:, j] = acc
    return out


# ------------------------------------------------------------------ moments

@dataclass(frozen=True)
class LoadingReport:
    loading: float
    net_profit: bool
    fair_premium: float

    def to_record(self) -> dict:
        return {"loading": self.loading, "net_profit": self.net_profit, "fair_premium": self.fair_premium}


def premium_loading(cfg: ShockModelConfig, t: float = 1.0) -> LoadingReport:
    """Safety loading omega t / (E[Q(t)] E[phi]) - 1 and the net profit verdict.

    Net profit means omega exceeds the expected claim outflow per unit time,
    (lambda1 E xi1 + lambda2 E xi2 + lambda0 E[xi3 + xi4]) E[T(1)].
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if cfg.phi_mean <= 0:
        raise ValueError("degenerate model: mean claim is zero")
    fair = cfg.mean_count_rate * cfg.phi_mean
    loading = cfg.omega * t / (cfg.mean_count_rate * t * cfg.phi_mean) - 1.0
    return LoadingReport(float(loading), bool(cfg.omega > fair), float(fair))


def bcp_moments(t: float, cfg: ShockModelConfig, formula: str = "printed"):
    """(means, variances) of (N1(t), N2(t)).

    ``formula="printed"`` gives the published variance, which weights the clock
    variance by lambda_i^2 + lambda0^2; ``"exact"`` uses the shared clock,
    (lambda_i + lambda0)^2 Var T + (lambda_i + lambda0) E T.
    """
    a, th = cfg.tss.alpha, cfg.tss.theta
    mu, rho = cfg.gamma.mu, cfg.gamma.rho
    rates = np.array([cfg.lambda1 + cfg.lambda0, cfg.lambda2 + cfg.lambda0])
    ET = cfg.clock_rate * t
    means = rates * ET
    if formula == "printed":
        sq = np.array([cfg.lambda1 ** 2 + cfg.lambda0 ** 2, cfg.lambda2 ** 2 + cfg.lambda0 ** 2])
        var = (sq * a * th ** (a - 2) * (a * th ** a / mu + 1 - a) + a * th ** (a - 1) * rates) * rho * t / mu
    elif formula == "exact":
        var = rates ** 2 * cfg.clock_var_rate * t + rates * ET
    else:
        raise ValueError("formula must be 'printed' or 'exact'")
    return means, var


def risk_covariance(s: float, t: float, cfg: ShockModelConfig, formula: str = "printed") -> float:
    """Cov[R(s), R(t)] for 0 < s <= t (arguments are symmetrized).

    ``"printed"``: the published display.  ``"exact"``: lambda E T(s) E[phi^2]
    + lambda^2 E[phi]^2 Var T(s), which keeps the rate factors and the
    Poisson part of Var Q(s).
    """
    s, t = min(s, t), max(s, t)
    if not s > 0:
        raise ValueError("times must be positive")
    a, th = cfg.tss.alpha, cfg.tss.theta
    mu, rho = cfg.gamma.mu, cfg.gamma.rho
    if formula == "printed":
        return float(a * rho * s / mu * th ** (a - 1) * cfg.phi_var
                     + cfg.phi_mean ** 2 * (a * (1 - a) * rho / mu * th ** (a - 2)
                                            + rho / mu ** 2 * a ** 2 * th ** (2 * a - 2)) * s)
    if formula == "exact":
        return float(cfg.lam * cfg.clock_rate * s * cfg.phi_second_moment
                     + cfg.lam ** 2 * cfg.phi_mean ** 2 * cfg.clock_var_rate * s)
    raise ValueError("formula must be 'printed' or 'exact'")


def risk_correlation(s: float, t: float, cfg: ShockModelConfig, formula: str = "printed") -> float:
    """Corr[R(s), R(t)]; both covariance forms are linear in min(s, t), giving sqrt(s/t)."""
    c = risk_covariance(s, t, cfg, formula)
    return c / math.sqrt(risk_covariance(s, s, cfg, formula) * risk_covariance(t, t, cfg, formula))


@dataclass(frozen=True)
class LrdReport:
    slope: float
    d: float
    is_lrd: bool
    limit_ratio: float

    def to_record(self) -> dict:
        return {"slope": self.slope, "d": self.d, "is_lrd": self.is_lrd, "limit_ratio": self.limit_ratio}


def _slope(ts, corr):
    return float(np.polyfit(np.log(ts), np.log(corr), 1)[0])


def lrd_check(cfg: ShockModelConfig, s: float, t_list, formula: str = "printed") -> LrdReport:
    """Log-log slope of Corr(s, t) over t; d = -slope, LRD when 0 < d < 1.

    ``limit_ratio`` is Corr(s, t) t^(1/2) at the largest t, which tends to s^(1/2).
    """
    ts = np.asarray(t_list, dtype=float)
    if np.any(np.diff(ts) <= 0) or ts[0] < s:
        raise ValueError("t_list must be increasing with t >= s")
    if ts[-1] / ts[0] < 100:
        raise ValueError("t_list must span at least two decades")
    corr = np.array([risk_correlation(s, t, cfg, formula) for t in ts])
    slope = _slope(ts, corr)
    d = -slope
    return LrdReport(slope, d, bool(0 < d < 1), float(corr[-1] * math.sqrt(ts[-1])))


def lrd_slope_mc(cfg: ShockModelConfig, s: float, t_list, n_paths: int, rng: RngLike = None):
    """Monte Carlo log-log slope of Corr(S(s), S(t)) over t (S the total claims).

    Returns (slope, empirical correlations).
    """
    ts = np.asarray(t_list, dtype=float)
    grid = np.unique(np.concatenate(([s], ts)))
    paths = sample_total_claims_path(grid, cfg, rng, n_paths)
    ref = paths[:, np.searchsorted(grid, s)]
    corr = np.array([np.corrcoef(ref, paths[:, np.searchsorted(grid, t)])[0, 1] for t in ts])
    return _slope(ts, corr), corr


def check_net_profit(cfg: ShockModelConfig) -> bool:
    ok = premium_loading(cfg).net_profit
    if not ok:
        warnings.warn("net profit condition fails: ruin is certain on an infinite horizon",
                      RuntimeWarning, stacklevel=3)
    return ok
