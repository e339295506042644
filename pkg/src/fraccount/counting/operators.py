"""Residuals of the evolution equations satisfied by the pgf and pmf.

Poisson vector:   d/dt q = -S^a [(I - Y)^a - (theta/S)^a] q
Negative binomial: mu[P(t) - P(t - 1/rho)] = -S^a [(I - Y)^a - (theta/S)^a] P
with Y = (sum_i lambda_i B_i - theta)/S and B_i the backward shift in
coordinate i.  (I - Y)^a is expanded by the generalized binomial series.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..specfun import gen_binomial_array
from .inversion import pmf_table_by_inversion
from .params import ProcessParams, as_counts
from .pgf import pgf_for, pgf_mtsfpp, tss_symbol

FD_STEP = 1e-5


@dataclass(frozen=True)
class ResidualReport:
    residual: float
    truncation_budget: float
    fd_error_estimate: float
    lhs: float
    rhs: float
    inconclusive: bool = False

    def to_record(self) -> dict:
        return {
            "residual": self.residual,
            "truncation_budget": self.truncation_budget,
            "fd_error_estimate": self.fd_error_estimate,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "inconclusive": self.inconclusive,
        }


def operator_residual_pgf(u, t: float, p: ProcessParams, step: float = FD_STEP) -> float:
    """|dG/dt + symbol(u) G| with dG/dt by a central difference."""
    if not t > 0:
        raise ValueError("t must be positive")
    plain = ProcessParams(p.lambdas, p.tss)
    uu = np.asarray(u, dtype=complex)
    h = min(step, t / 2)
    g = lambda s: pgf_mtsfpp(uu, s, plain)
    dg = (g(t + h) - g(t - h)) / (2 * h)
    return float(abs(dg + complex(tss_symbol(uu, plain)) * g(t)))


def _shift_powers(table: np.ndarray, kk: tuple, p: ProcessParams) -> np.ndarray:
    """x_s = (sum_i lambda_i B_i / S)^s q at k, s = 0..S(k)."""
    m = p.m
    n = sum(kk)
    w = np.asarray(p.lambdas) / p.total_rate
    out = np.zeros(n + 1)
    for s in range(n + 1):
        acc = 0.0
        for j in itertools.product(*(range(min(s, ki) + 1) for ki in kk)):
            if sum(j) != s:
                continue
            coef = math.exp(math.lgamma(s + 1) - sum(math.lgamma(x + 1) for x in j))
            coef *= float(np.prod(w ** np.asarray(j)))
            acc += coef * table[tuple(ki - ji for ki, ji in zip(kk, j))]
        out[s] = acc
    return out


def _operator_terms(x: np.ndarray, p: ProcessParams, R: int):
    """sum_{r<=R} C(a,r)(-1)^r Y^r applied, with Y^r = sum_s C(r,s) X^s (-theta/S)^(r-s).

    Returns (value, magnitude of the first omitted term r = R+1).
    """
    a, th = p.tss.alpha, p.tss.theta
    c = -th / p.total_rate
    binom_a = gen_binomial_array(a, R + 2)

    def term(r):
        acc = 0.0
        for s in range(min(r, x.size - 1) + 1):
            acc += math.comb(r, s) * x[s] * (c ** (r - s) if r > s else 1.0)
        return binom_a[r] * (-1.0) ** r * acc

    terms = [term(r) for r in range(R + 1)]
    return math.fsum(terms), abs(term(R + 1))


def operator_residual_pmf(k, t: float, p: ProcessParams, truncation_R: int = 40,
                          step: float = FD_STEP, M: int = 128) -> ResidualReport:
    """Residual of the fractional-difference equation for the pmf at k.

    Without gamma: the time derivative of the Poisson-vector pmf (central
    difference).  With gamma: the shift form mu[P(t) - P(t - 1/rho)], which
    needs t > 1/rho.  pmfs on the shifted lattice come from one torus
    inversion per time point.  The report's truncation budget is the
    first omitted binomial term plus a finite-difference error estimate
    (|D_h - D_2h|); the check is inconclusive when the budget exceeds 1e-6.
    """
    kk = as_counts(k, p.m)
    n = sum(kk)
    if truncation_R < n + 5:
        raise ValueError("truncation_R must be >= S(k) + 5")
    kmax = max(kk)
    pgf = pgf_for(p)
    table = lambda s: pmf_table_by_inversion(kmax, s, pgf, p.m, M)
    base = table(t)
    if p.gamma is None:
        if not t > 2 * step:
            raise ValueError("t must exceed twice the difference step")
        d1 = (table(t + step)[kk] - table(t - step)[kk]) / (2 * step)
        d2 = (table(t + 2 * step)[kk] - table(t - 2 * step)[kk]) / (4 * step)
        lhs = float(d1)
        fd_err = float(abs(d1 - d2))
    else:
        shift = 1.0 / p.gamma.rho
        if not t > shift:
            raise ValueError("shift form needs t > 1/rho")
        lhs = float(p.gamma.mu * (base[kk] - table(t - shift)[kk]))
        fd_err = 0.0
    x = _shift_powers(base, kk, p)
    val, omitted = _operator_terms(x, p, truncation_R)
    S, a, th = p.total_rate, p.tss.alpha, p.tss.theta
    rhs = -(S ** a) * (val - (th / S) ** a * base[kk])
    budget = S ** a * omitted + fd_err
    res = abs(lhs - rhs)
    return ResidualReport(float(res), float(budget), fd_err, lhs, float(rhs),
                          inconclusive=bool(budget > 1e-6))
