"""Levy measure and short-time transition rates of the negative binomial vector.

The counting vector is compound Poisson: jumps arrive at total rate
psi(S(lambda)) (psi the clock exponent) and a jump of total size n is split
over the coordinates multinomially with probabilities lambda_j / S(lambda).
"""

from __future__ import annotations

import math

import numpy as np

from ..specfun import DEFAULT_CONTROL, SeriesControl, SeriesResult, WrightSpec, wright_pq
from ..subordinators import psi_derivatives
from .inversion import power_series_coefficients
from .params import NumericDomainError, ProcessParams, as_counts
from .series import _log_count_factor, _outer_sum


def _check_levy_domain(p: ProcessParams):
    if p.gamma is None:
        raise ValueError("Levy mass series is for the negative binomial vector (gamma needed)")
    a, th = p.tss.alpha, p.tss.theta
    if not p.gamma.mu > p.total_rate ** a + th ** a:
        raise ValueError("Levy mass series needs mu > S(lambda)^alpha + theta^alpha")


def levy_mass(k, p: ProcessParams, ctrl: SeriesControl | None = None, *, full_output: bool = False):
    """Jump intensity Pi({k}) of the negative binomial vector, k != 0.

    Wright series in z = -S^alpha/(mu - theta^alpha) with upper pairs
    (1, alpha), (0, 1).  The r = 0 term would hold Gamma(0); it comes from
    int s^(r-1) e^(-cs) ds, finite only for r >= 1, and 1/Gamma(1-n) kills it
    anyway, so the sum starts at r = 1.  The gamma clock's Levy density
    rho e^(-mu s)/s contributes the overall factor rho.
    """
    _check_levy_domain(p)
    ctrl = ctrl or DEFAULT_CONTROL
    kk = as_counts(k, p.m)
    n = sum(kk)
    if n == 0:
        raise ValueError("Levy mass is defined for k != 0")
    a, th = p.tss.alpha, p.tss.theta
    mu, rho = p.gamma.mu, p.gamma.rho
    S = p.total_rate
    z = -(S ** a) / (mu - th ** a)

    def inner(j):
        spec = WrightSpec([(1.0, a), (0.0, 1.0)], [(1.0 - j, a)])
        return wright_pq(spec, z, ctrl, start=1, full_output=True)

    outer = _outer_sum(n, th / S, inner, ctrl)
    scale = math.exp(_log_count_factor(kk, p.lambdas) - n * math.log(S)) * rho
    sign = (-1.0) ** n
    res = SeriesResult(sign * scale * outer.value, scale * outer.abs_error_bound,
                       outer.terms_used, diagnostics=outer.diagnostics)
    return res if full_output else res.value


def total_jump_rate(p: ProcessParams) -> float:
    """psi(S(lambda)): the rate of jumps of any size."""
    return float(p.clock_exponent(p.total_rate))


def total_levy_masses(p: ProcessParams, nmax: int, M: int | None = None) -> np.ndarray:
    """Pi_total(n), n = 0..nmax, for the superposed count (Pi_total(0) = 0).

    psi(S(1 - z)) = sum_n Pi_total(n)(1 - z^n), so Pi_total(n) is minus the
    z^n Taylor coefficient for n >= 1.
    """
    S = p.total_rate
    a, th = p.tss.alpha, p.tss.theta

    def symbol(z):
        x = S * (1.0 - z) + th
        with np.errstate(invalid="ignore", divide="ignore"):
            base = np.where(x == 0, 0.0, x ** a) - th ** a
        if p.gamma is None:
            return base
        return p.gamma.rho * np.log1p(base / p.gamma.mu)

    c = power_series_coefficients(symbol, nmax + 1, M)
    out = -c
    out[0] = 0.0
    return out


def levy_mass_by_inversion(k, p: ProcessParams) -> float:
    """Pi({k}) from Taylor coefficients of the clock exponent (independent of the series)."""
    kk = as_counts(k, p.m)
    n = sum(kk)
    if n == 0:
        raise ValueError("Levy mass is defined for k != 0")
    tot = total_levy_masses(p, n)[n]
    S = p.total_rate
    log_multi = math.lgamma(n + 1) + _log_count_factor(kk, p.lambdas) - n * math.log(S)
    return float(tot * math.exp(log_multi))


def jump_size_pmf(p: ProcessParams, tail_tol: float = 1e-14, nmax_limit: int = 1 << 20) -> np.ndarray:
    """Law of the total size of one jump, truncated where the remaining mass < tail_tol.

    Entry n is Pr{size = n}; entry 0 is 0.  Raises NumericDomainError when
    the tail is too heavy to truncate within ``nmax_limit``.
    """
    lam_total = total_jump_rate(p)
    n = 256
    while True:
        masses = total_levy_masses(p, n, M=4 * n)
        probs = np.clip(masses, 0.0, None) / lam_total
        rest = 1.0 - probs.sum()
        if rest < tail_tol:
            probs /= probs.sum()
            last = np.flatnonzero(probs > 0)[-1]
            return probs[: last + 1]
        if n >= nmax_limit:
            raise NumericDomainError(
                f"jump-size tail mass {rest:.3e} remains beyond size {n}; "
                "the law is too heavy-tailed to tabulate"
            )
        n *= 4


def transition_probability(j: int, h: float, p: ProcessParams) -> float:
    """Pr{total count moves by j in time h} to first order in h.

    j = 0: 1 - h psi(S); j >= 1: -h (-S)^j psi^(j)(S) / j!.
    """
    if p.gamma is None:
        raise ValueError("transition rates are for the negative binomial vector")
    if j < 0:
        raise ValueError("j must be nonnegative")
    if not h > 0:
        raise ValueError("h must be positive")
    S = p.total_rate
    if j == 0:
        val = 1.0 - h * total_jump_rate(p)
        if val < 0:
            raise NumericDomainError("h too large: 1 - h psi(lambda) < 0")
        return val
    d = psi_derivatives(S, j, p.tss, p.gamma)[j - 1]
    return float(-h * (-S) ** j * d / math.factorial(j))
