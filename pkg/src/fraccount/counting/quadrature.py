"""Negative binomial pmf as a gamma mixture of Poisson-vector pmfs.

P(k, t) = int_0^inf q(k, s) f_G(s, t) ds with f_G the G(mu, rho t) density.
After s = x/mu the weight is x^(rho t - 1) e^(-x) / Gamma(rho t), which is
exactly a generalized Gauss-Laguerre weight.  q is taken from torus
inversion, never from the Wright series, so this route shares nothing with
the series pmf.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import roots_genlaguerre

from ..specfun import SeriesResult
from .inversion import DEFAULT_M, default_radius
from .params import ProcessParams, as_counts
from .pgf import pgf_mtsfpp

QUAD_TOL = 1e-9


class QuadratureError(ArithmeticError):
    pass


def _mixture_table(kmax: int, t: float, p: ProcessParams, nodes: int, M: int) -> np.ndarray:
    rt = p.gamma.rho * t
    x, w = roots_genlaguerre(nodes, rt - 1.0)
    s = x / p.gamma.mu
    m = p.m
    M = max(M, 4 * kmax + 4)
    r = default_radius(M)
    z = r * np.exp(2j * np.pi * np.arange(M) / M)
    u = np.stack(np.meshgrid(*([z] * m), indexing="ij"), axis=-1)
    plain = ProcessParams(p.lambdas, p.tss)
    # pgf of the Poisson vector is exp(-s * symbol), so one symbol grid serves all nodes
    log_g = np.log(pgf_mtsfpp(u, 1.0, plain))
    mix = np.zeros(u.shape[:-1], dtype=complex)
    for si, wi in zip(s, w):
        mix += wi * np.exp(si * log_g)
    mix /= math.gamma(rt)
    coef = np.fft.fftn(mix) / M ** m
    idx = np.indices(coef.shape).sum(axis=0)
    coef = coef * r ** (-idx.astype(float))
    return coef[(slice(0, kmax + 1),) * m].real


def pmf_by_quadrature(k, t: float, p: ProcessParams, nodes: int = 64, *, M: int = DEFAULT_M,
                      check: bool = True, full_output: bool = False):
    """Gauss-Laguerre mixture of inversion pmfs over the gamma clock.

    With ``check`` the rule is repeated with twice the nodes and the two must
    agree to 1e-9.
    """
    if p.gamma is None:
        raise ValueError("quadrature route needs gamma parameters")
    if nodes < 16:
        raise ValueError("nodes must be >= 16")
    kk = as_counts(k, p.m)
    kmax = max(kk)
    val = float(_mixture_table(kmax, t, p, nodes, M)[kk])
    diag = {"nodes": nodes}
    err = 0.0
    if check:
        val2 = float(_mixture_table(kmax, t, p, 2 * nodes, M)[kk])
        err = abs(val2 - val)
        diag["doubling_change"] = err
        if err > QUAD_TOL:
            raise QuadratureError(f"node doubling changed the pmf by {err:.3e} (> {QUAD_TOL})")
    res = SeriesResult(val, err + 1e-14, nodes, method="quadrature", diagnostics=diag)
    return res if full_output else res.value


def pmf_table_by_quadrature(kmax: int, t: float, p: ProcessParams, nodes: int = 64,
                            M: int = DEFAULT_M) -> np.ndarray:
    """Quadrature pmf on {0..kmax}^m (no node-doubling check)."""
    if p.gamma is None:
        raise ValueError("quadrature route needs gamma parameters")
    return _mixture_table(kmax, t, p, nodes, M)
