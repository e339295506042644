"""Closed-form probability generating functions."""

from __future__ import annotations

import numpy as np

from .params import NumericDomainError, ProcessParams


def _as_u(u, m: int) -> np.ndarray:
    uu = np.asarray(u, dtype=complex)
    if uu.shape[-1:] != (m,):
        raise ValueError(f"u must have trailing dimension {m}, got shape {uu.shape}")
    if np.any(np.abs(uu) > 1 + 1e-12):
        raise ValueError("pgf arguments must satisfy |u_i| <= 1")
    return uu


def _cpow(x: np.ndarray, a: float) -> np.ndarray:
    """Principal power with 0^a = 0 for a > 0."""
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(x == 0, 0.0, x ** a)
    return out


def tss_symbol(u, p: ProcessParams) -> np.ndarray:
    """(sum_i lambda_i (1 - u_i) + theta)^alpha - theta^alpha, principal branch."""
    uu = _as_u(u, p.m)
    x = (np.asarray(p.lambdas) * (1.0 - uu)).sum(axis=-1) + p.tss.theta
    if p.tss.theta == 0 and np.any((x.real < 0) & (np.abs(x.imag) == 0)):
        raise NumericDomainError("base of the fractional power lies on the negative real axis")
    return _cpow(x, p.tss.alpha) - p.tss.theta ** p.tss.alpha


def pgf_mtsfpp(u, t: float, p: ProcessParams):
    """exp{-t[(sum lambda_i(1-u_i) + theta)^alpha - theta^alpha]}."""
    if t < 0:
        raise ValueError("t must be >= 0")
    val = np.exp(-t * tss_symbol(u, p))
    return complex(val) if val.ndim == 0 else val


def nb_base(u, p: ProcessParams) -> np.ndarray:
    """1 + [(...)^alpha - theta^alpha]/mu, the base of the negative binomial pgf."""
    if p.gamma is None:
        raise ValueError("negative binomial pgf needs gamma parameters")
    w = 1.0 + tss_symbol(u, p) / p.gamma.mu
    if np.any((w.real <= 0) & (np.abs(w.imag) <= 1e-15 * np.abs(w.real))):
        raise NumericDomainError("negative binomial pgf base lies on the negative real axis")
    return w


def pgf_mtsfnbp(u, t: float, p: ProcessParams):
    """(1 + mu^{-1}[(sum lambda_i(1-u_i) + theta)^alpha - theta^alpha])^{-rho t}."""
    if t < 0:
        raise ValueError("t must be >= 0")
    val = nb_base(u, p) ** (-p.gamma.rho * t)
    return complex(val) if val.ndim == 0 else val


def pgf_for(p: ProcessParams):
    """The pgf handle (u, t) -> complex matching the process type."""
    if p.is_nb:
        return lambda u, t: pgf_mtsfnbp(u, t, p)
    return lambda u, t: pgf_mtsfpp(u, t, p)
