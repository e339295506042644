"""Laplace exponents and samplers for the subordinators used as random clocks.

Covered: alpha-stable, tempered stable (TSS), gamma, the composition
S^{alpha,theta}(Gamma(t)), two-component TSS mixtures and the first-passage
(inverse) time of a mixture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.special import gammaln

from .specfun import gen_binomial_array


class HorizonError(RuntimeError):
    """A simulated path failed to cross its level inside the safety horizon."""


@dataclass(frozen=True)
class TssParams:
    alpha: float
    theta: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.theta >= 0.0:
            raise ValueError(f"theta must be >= 0, got {self.theta}")

    @property
    def mean_rate(self) -> float:
        """E[S(1)]; infinite for the untempered stable law with alpha < 1."""
        if self.alpha == 1.0:
            return 1.0
        if self.theta == 0.0:
            return math.inf
        return self.alpha * self.theta ** (self.alpha - 1.0)

    @property
    def var_rate(self) -> float:
        """Var[S(1)]."""
        if self.alpha == 1.0:
            return 0.0
        if self.theta == 0.0:
            return math.inf
        return self.alpha * (1.0 - self.alpha) * self.theta ** (self.alpha - 2.0)


@dataclass(frozen=True)
class GammaParams:
    mu: float
    rho: float

    def __post_init__(self):
        if not self.mu > 0 or not self.rho > 0:
            raise ValueError(f"gamma subordinator needs mu > 0 and rho > 0, got {self.mu}, {self.rho}")


@dataclass(frozen=True)
class MixtureParams:
    eta1: float
    eta2: float
    tss1: TssParams
    tss2: TssParams

    def __post_init__(self):
        if self.eta1 < 0 or self.eta2 < 0 or self.eta1 + self.eta2 <= 0:
            raise ValueError("mixture weights must be nonnegative and not both zero")

    def components(self):
        return [(e, p) for e, p in ((self.eta1, self.tss1), (self.eta2, self.tss2)) if e > 0]


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream keyed by (seed, stream_id, path).

    ``substream(j)`` derives child streams, so a Monte Carlo job split into
    blocks draws the same numbers whatever order the blocks run in.
    """

    seed: int
    stream_id: int = 0
    path: tuple = field(default=())

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.path))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, j: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id, (*self.path, int(j)))


RngLike = Union[RngStream, np.random.Generator, int, None]


def as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng)
    raise TypeError(f"cannot build a random generator from {type(rng).__name__}")


# ---------------------------------------------------------------- exponents

def _check_u(u):
    u = np.asarray(u, dtype=float)
    if np.any(u < 0) or np.any(np.isnan(u)):
        raise ValueError("Laplace exponents are defined for u >= 0")
    return u


def _scalar_or_array(x, like):
    return float(x) if np.ndim(like) == 0 else x


def laplace_exponent_tss(u, p: TssParams):
    """(u + theta)^alpha - theta^alpha."""
    uu = _check_u(u)
    val = (uu + p.theta) ** p.alpha - p.theta ** p.alpha
    return _scalar_or_array(val, u)


def laplace_exponent_stable(u, alpha: float):
    return laplace_exponent_tss(u, TssParams(alpha, 0.0))


def laplace_exponent_gamma(u, g: GammaParams):
    """rho * log(1 + u/mu)."""
    uu = _check_u(u)
    return _scalar_or_array(g.rho * np.log1p(uu / g.mu), u)


def laplace_exponent_composed(u, p: TssParams, g: GammaParams, form: str = "corrected"):
    """Exponent of S^{alpha,theta}(Gamma(t)).

    ``form="corrected"`` gives rho[log(mu - theta^alpha + (theta+u)^alpha) - log mu],
    the composition of the gamma and TSS exponents.  ``form="printed"`` subtracts
    log(alpha) instead, kept only so the two can be compared against simulation.
    """
    uu = _check_u(u)
    inner = np.log(g.mu - p.theta ** p.alpha + (p.theta + uu) ** p.alpha)
    if form == "corrected":
        val = g.rho * np.log1p(laplace_exponent_tss(uu, p) / g.mu)
    elif form == "printed":
        val = g.rho * (inner - math.log(p.alpha))
    else:
        raise ValueError(f"unknown form {form!r}")
    return _scalar_or_array(val, u)


def laplace_exponent_mixture(u, m: MixtureParams):
    uu = _check_u(u)
    val = sum(e * laplace_exponent_tss(uu, p) for e, p in m.components())
    return _scalar_or_array(np.asarray(val, dtype=float), u)


MAX_DERIVATIVE_ORDER = 30


def psi_derivatives(u: float, order: int, p: TssParams, g: GammaParams) -> np.ndarray:
    """psi', ..., psi^(J) of the composed exponent at u > 0.

    Taylor coefficients of (theta+u+x)^alpha are binomial; the log is
    propagated with the usual power-series recurrence, so no finite
    differences are involved.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if order > MAX_DERIVATIVE_ORDER:
        raise ValueError(f"derivative order {order} > {MAX_DERIVATIVE_ORDER} is not supported")
    if not u > 0:
        raise ValueError("psi_derivatives needs u > 0")
    v = p.theta + u
    n = np.arange(order + 1)
    c = v ** p.alpha * gen_binomial_array(p.alpha, order + 1) * v ** (-n.astype(float))
    a = c.copy()
    a[0] = g.mu - p.theta ** p.alpha + v ** p.alpha
    b = np.zeros(order + 1)
    for j in range(1, order + 1):
        acc = sum(k * b[k] * a[j - k] for k in range(1, j))
        b[j] = (a[j] - acc / j) / a[0]
    fact = np.exp(gammaln(n[1:] + 1.0))
    return g.rho * fact * b[1:]


# ---------------------------------------------------------------- samplers

def _size_and_dt(dt, size):
    dt = np.asarray(dt, dtype=float)
    if np.any(dt < 0):
        raise ValueError("time increments must be nonnegative")
    if size is None:
        return dt, dt.shape
    shape = (size,) if np.ndim(size) == 0 else tuple(size)
    return np.broadcast_to(dt, shape), shape


def _finish(x, shape):
    return float(x.reshape(())) if shape == () else x.reshape(shape)


def _positive_stable_unit(alpha: float, n: int, gen: np.random.Generator) -> np.ndarray:
    """Kanter's representation of a positive stable law with LT exp(-u^alpha).

    Computed in logs; the result is exp of a finite number, so underflow to 0
    only happens when the true value is below the smallest double.
    """
    U = gen.uniform(0.0, np.pi, n)
    W = gen.standard_exponential(n)
    # guard the open interval (0, pi)
    U = np.clip(U, 1e-300, np.pi * (1 - 1e-16))
    log_a = (np.log(np.sin(alpha * U)) - np.log(np.sin(U))) / (1.0 - alpha) + np.log(
        np.sin((1.0 - alpha) * U)
    ) - np.log(np.sin(alpha * U))
    return np.exp((1.0 - alpha) / alpha * (log_a - np.log(W)))


def sample_stable_increment(alpha: float, dt, rng: RngLike = None, size=None):
    """Draws of S_alpha(dt) with LT exp(-dt u^alpha); dt may be an array."""
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    gen = as_generator(rng)
    dtb, shape = _size_and_dt(dt, size)
    flat = np.ravel(dtb)
    if alpha == 1.0:
        return _finish(flat.copy(), shape)
    x = _positive_stable_unit(alpha, flat.size, gen) * flat ** (1.0 / alpha)
    return _finish(x, shape)


def sample_tss_increment(p: TssParams, dt, rng: RngLike = None, size=None):
    """Draws of S^{alpha,theta}(dt) by exponential-tilting rejection.

    Each dt is split into n = max(1, ceil(dt theta^alpha)) equal pieces; a
    stable proposal X on a piece is kept with probability exp(-theta X),
    which is at least exp(-1) on average.
    """
    gen = as_generator(rng)
    dtb, shape = _size_and_dt(dt, size)
    flat = np.ravel(dtb).astype(float)
    if p.alpha == 1.0:
        return _finish(flat.copy(), shape)
    if p.theta == 0.0:
        return _finish(sample_stable_increment(p.alpha, flat, gen), shape)
    out = np.zeros(flat.size)
    live = np.flatnonzero(flat > 0)
    if live.size == 0:
        return _finish(out, shape)
    ta = p.theta ** p.alpha
    pieces = np.maximum(1, np.ceil(flat[live] * ta)).astype(np.int64)
    owner = np.repeat(np.arange(live.size), pieces)
    piece_dt = np.repeat(flat[live] / pieces, pieces)
    vals = np.empty(piece_dt.size)
    pending = np.arange(piece_dt.size)
    while pending.size:
        x = _positive_stable_unit(p.alpha, pending.size, gen) * piece_dt[pending] ** (1.0 / p.alpha)
        keep = gen.uniform(size=pending.size) <= np.exp(-p.theta * x)
        vals[pending[keep]] = x[keep]
        pending = pending[~keep]
    out[live] = np.bincount(owner, weights=vals, minlength=live.size)
    return _finish(out, shape)


def sample_gamma_increment(g: GammaParams, dt, rng: RngLike = None, size=None):
    """Draws of Gamma(dt) ~ G(mu, rho dt) (shape rho dt, rate mu)."""
    gen = as_generator(rng)
    dtb, shape = _size_and_dt(dt, size)
    flat = np.ravel(dtb)
    x = gen.gamma(g.rho * flat, 1.0 / g.mu) if flat.size else np.zeros(0)
    return _finish(np.asarray(x, dtype=float), shape)


def sample_composed_increment(p: TssParams, g: GammaParams, dt, rng: RngLike = None, size=None):
    """Draws of S^{alpha,theta}(Gamma(dt)): gamma clock first, then the TSS."""
    gen = as_generator(rng)
    dtb, shape = _size_and_dt(dt, size)
    clock = sample_gamma_increment(g, np.ravel(dtb), gen)
    return _finish(np.asarray(sample_tss_increment(p, clock, gen)), shape)


def sample_mixture_tss_increment(m: MixtureParams, dt, rng: RngLike = None, size=None):
    """Mixture increment as the sum of independent TSS draws over eta_i * dt."""
    gen = as_generator(rng)
    dtb, shape = _size_and_dt(dt, size)
    flat = np.ravel(dtb)
    total = np.zeros(flat.size)
    for eta, p in m.components():
        total += sample_tss_increment(p, eta * flat, gen)
    return _finish(total, shape)


def _crossing_scale(m: MixtureParams, level: float) -> float:
    """Rough operational time for the mixture to pass ``level``."""
    est = []
    for eta, p in m.components():
        rate = p.mean_rate
        if math.isfinite(rate):
            est.append(level / (eta * rate))
        else:
            est.append(level ** p.alpha / (eta * math.gamma(1.0 + p.alpha)))
    return min(est)


def sample_inverse_mixture_tss(m: MixtureParams, t, grid_dt: float, rng: RngLike = None,
                               size=None, *, full_output: bool = False, max_extend: int = 1000,
                               block: int = 4096):
    """First-passage times E(t) = inf{s : S(s) > t} of a TSS mixture.

    The mixture is simulated on the operational-time grid ``grid_dt`` and the
    crossing is located by linear interpolation between the bracketing grid
    points, which biases E(t) by O(grid_dt).  ``t`` may be a scalar or an
    increasing array; all levels of one draw share one driving path.  With
    ``size`` (number of paths) the result has shape (size,) + shape(t).
    """
    if not grid_dt > 0:
        raise ValueError("grid_dt must be positive")
    gen = as_generator(rng)
    levels = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(levels <= 0):
        raise ValueError("levels must be positive")
    if np.any(np.diff(levels) < 0):
        raise ValueError("levels must be increasing")
    n_paths = 1 if size is None else int(size)
    tmax = float(levels[-1])
    h0 = max(2.0 * _crossing_scale(m, tmax), 16 * grid_dt)
    steps = int(math.ceil(h0 / grid_dt))
    out = np.empty((n_paths, levels.size))
    max_steps_seen = 0
    for start in range(0, n_paths, block):
        nb = min(block, n_paths - start)
        res = np.full((nb, levels.size), np.nan)
        base = np.zeros(nb)
        offset = 0
        rounds = 0
        while np.isnan(res).any():
            if rounds >= max_extend:
                raise HorizonError(
                    f"mixture path did not exceed level {tmax} within {offset * grid_dt:.4g} "
                    "operational time"
                )
            incr = sample_mixture_tss_increment(m, grid_dt, gen, size=(nb, steps))
            path = base[:, None] + np.cumsum(incr, axis=1)
            prev = np.concatenate([base[:, None], path[:, :-1]], axis=1)
            for li, lev in enumerate(levels):
                todo = np.isnan(res[:, li])
                if not todo.any():
                    continue
                crossed = path[todo] > lev
                hit = crossed.any(axis=1)
                idx = np.argmax(crossed, axis=1)
                rows = np.flatnonzero(todo)[hit]
                j = idx[hit]
                lo = prev[rows, j]
                hi = path[rows, j]
                frac = (lev - lo) / (hi - lo)
                res[rows, li] = (offset + j + frac) * grid_dt
            base = path[:, -1]
            offset += steps
            rounds += 1
        max_steps_seen = max(max_steps_seen, offset)
        out[start:start + nb] = res
    if np.ndim(t) == 0:
        values = out[:, 0]
    else:
        values = out
    if size is None:
        values = values[0] if np.ndim(t) else float(values[0])
    if full_output:
        meta = {
            "grid_dt": grid_dt,
            "bias": "O(grid_dt) from linear interpolation of the grid crossing",
            "horizon_used": max_steps_seen * grid_dt,
        }
        return values, meta
    return values
