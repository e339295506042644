"""Parameter bundles and error types shared by the counting processes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..subordinators import GammaParams, TssParams, laplace_exponent_composed, laplace_exponent_tss

MAX_DIM = 5


class NumericDomainError(ArithmeticError):
    """A closed form was evaluated off its principal-branch domain."""


class InversionError(ArithmeticError):
    """Torus inversion produced an inconsistent (complex or unstable) result."""


class ConsistencyError(ArithmeticError):
    """A computed probability falls outside [0, 1] beyond its error bound."""


@dataclass(frozen=True)
class ProcessParams:
    """Rates of the base Poisson vector plus the clock parameters.

    With ``gamma`` unset the clock is the tempered stable subordinator
    (MTSFPP); with ``gamma`` set the TSS is itself run on a gamma clock
    (MTSFNBP).
    """

    lambdas: tuple
    tss: TssParams
    gamma: Optional[GammaParams] = None

    def __init__(self, lambdas: Sequence[float], tss: TssParams, gamma: Optional[GammaParams] = None):
        lam = tuple(float(x) for x in np.atleast_1d(lambdas))
        if not 1 <= len(lam) <= MAX_DIM:
            raise ValueError(f"dimension m must be in 1..{MAX_DIM}, got {len(lam)}")
        if any(not x > 0 for x in lam):
            raise ValueError("all Poisson rates must be > 0")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "tss", tss)
        object.__setattr__(self, "gamma", gamma)

    @property
    def m(self) -> int:
        return len(self.lambdas)

    @property
    def total_rate(self) -> float:
        """S(lambda), the sum of the rates."""
        return math.fsum(self.lambdas)

    @property
    def is_nb(self) -> bool:
        return self.gamma is not None

    def clock_exponent(self, u):
        """Laplace exponent of the (possibly composed) time change."""
        if self.gamma is None:
            return laplace_exponent_tss(u, self.tss)
        return laplace_exponent_composed(u, self.tss, self.gamma)

    def clock_mean(self, t: float) -> float:
        """E[T(t)] of the time change."""
        base = self.tss.mean_rate
        if self.gamma is None:
            return base * t
        return base * self.gamma.rho * t / self.gamma.mu

    def clock_var(self, t: float) -> float:
        """Var[T(t)] of the time change."""
        if self.gamma is None:
            return self.tss.var_rate * t
        g = self.gamma
        return (g.rho * t / g.mu) * self.tss.var_rate + (g.rho * t / g.mu ** 2) * self.tss.mean_rate ** 2

    def with_lambdas(self, lambdas) -> "ProcessParams":
        return ProcessParams(lambdas, self.tss, self.gamma)


@dataclass(frozen=True)
class CountVector:
    k: tuple

    def __init__(self, k):
        kk = tuple(int(x) for x in np.atleast_1d(k))
        if any(x < 0 for x in kk):
            raise ValueError("counts must be nonnegative")
        object.__setattr__(self, "k", kk)

    @property
    def total(self) -> int:
        return sum(self.k)


def as_counts(k, m: int) -> tuple:
    """Validate a count vector against the process dimension."""
    kk = CountVector(k.k if isinstance(k, CountVector) else k).k
    if len(kk) != m:
        raise ValueError(f"count vector has length {len(kk)}, process dimension is {m}")
    return kk


def mean_counts(t: float, p: ProcessParams) -> np.ndarray:
    """E[N_i(t)] = lambda_i E[T(t)]."""
    return np.asarray(p.lambdas) * p.clock_mean(t)


def cov_counts(t: float, p: ProcessParams) -> np.ndarray:
    """Covariance matrix of N(t) under a shared time change."""
    lam = np.asarray(p.lambdas)
    return np.diag(lam) * p.clock_mean(t) + np.outer(lam, lam) * p.clock_var(t)
