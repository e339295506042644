"""Samplers for the subordinated Poisson vectors.

All coordinates share one clock draw; given the clock they are independent
Poisson counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..subordinators import (
    MixtureParams,
    RngLike,
    as_generator,
    sample_composed_increment,
    sample_inverse_mixture_tss,
    sample_mixture_tss_increment,
    sample_tss_increment,
)
from .inversion import power_series_coefficients
from .params import ProcessParams

REFINE_FACTOR = 1024


@dataclass(frozen=True)
class PathSample:
    """One counting path on [0, horizon].

    ``jumps[e]`` is the count vector added at ``times[e]``; a row can hold
    more than one unit (batch jump).
    """

    times: np.ndarray
    jumps: np.ndarray
    terminal: tuple
    horizon: float

    def count_at(self, s: float) -> np.ndarray:
        """N(s) for 0 <= s <= horizon."""
        idx = np.searchsorted(self.times, s, side="right")
        return self.jumps[:idx].sum(axis=0)

    @property
    def sizes(self) -> np.ndarray:
        return self.jumps.sum(axis=1)


def _times_and_shape(t):
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < 0) or np.any(np.diff(ts) < 0):
        raise ValueError("times must be nonnegative and increasing")
    return ts


def _terminal(t, p: ProcessParams, clock, gen, size, lambdas=None):
    ts = _times_and_shape(t)
    n = 1 if size is None else int(size)
    dts = np.diff(np.concatenate(([0.0], ts)))
    clock_inc = np.stack([clock(dts[j], gen, n) for j in range(ts.size)], axis=1)
    lam = np.asarray(p.lambdas if lambdas is None else lambdas)
    counts = gen.poisson(clock_inc[..., None] * lam).astype(np.int64)
    counts = np.cumsum(counts, axis=1)
    if np.ndim(t) == 0:
        counts = counts[:, 0]
    return counts[0] if size is None else counts


def sample_mtsfpp_terminal(t, p: ProcessParams, rng: RngLike = None, size=None):
    """N(t) for the TSS-clocked Poisson vector.

    ``t`` may be an increasing array; the draws at successive times come from
    one path, so components never decrease along t.  Output shape is
    (size?, len(t)?, m).
    """
    gen = as_generator(rng)
    return _terminal(t, p, lambda d, g, n: sample_tss_increment(p.tss, d, g, size=n), gen, size)


def sample_mtsfnbp_terminal(t, p: ProcessParams, rng: RngLike = None, size=None):
    """N(t) for the gamma-then-TSS clocked Poisson vector."""
    if p.gamma is None:
        raise ValueError("sample_mtsfnbp_terminal needs gamma parameters")
    gen = as_generator(rng)
    return _terminal(
        t, p, lambda d, g, n: sample_composed_increment(p.tss, p.gamma, d, g, size=n), gen, size
    )


def sample_terminal(t, p: ProcessParams, rng: RngLike = None, size=None):
    if p.is_nb:
        return sample_mtsfnbp_terminal(t, p, rng, size)
    return sample_mtsfpp_terminal(t, p, rng, size)


def _clock_sampler(p: ProcessParams):
    if p.is_nb:
        return lambda d, g, n: sample_composed_increment(p.tss, p.gamma, d, g, size=n)
    return lambda d, g, n: sample_tss_increment(p.tss, d, g, size=n)


@lru_cache(maxsize=512)
def total_count_pmf(p: ProcessParams, d: float, n: int) -> np.ndarray:
    """Pr{Q(d) = j}, j = 0..n-1, for the superposed count Q = sum_i N_i."""
    S = p.total_rate
    a, th = p.tss.alpha, p.tss.theta

    def pgf(z):
        x = S * (1.0 - z) + th
        with np.errstate(invalid="ignore", divide="ignore"):
            sym = np.where(x == 0, 0.0, x ** a) - th ** a
        if p.gamma is None:
            return np.exp(-d * sym)
        return (1.0 + sym / p.gamma.mu) ** (-p.gamma.rho * d)

    c = power_series_coefficients(pgf, n, M=max(64, 8 * n))
    return np.clip(c, 0.0, None)


def sample_path(t: float, p: ProcessParams, grid_dt: float, rng: RngLike = None,
                refine: int = REFINE_FACTOR) -> PathSample:
    """Event path of N on [0, t].

    Per grid cell the clock increment and the cell's total count are drawn
    exactly.  A cell holding one unit has a single jump at a uniform time.
    A cell with more units is split in halves, the left count drawn from
    its exact conditional law p_{d/2}(j) p_{d/2}(C-j) / p_d(C), until cells
    are ``grid_dt/refine`` long; a finest cell still holding several units
    becomes one batch jump at a uniform time inside it.
    """
    if not t > 0 or not grid_dt > 0:
        raise ValueError("t and grid_dt must be positive")
    gen = as_generator(rng)
    n_cells = int(math.ceil(t / grid_dt - 1e-12))
    edges = np.minimum(np.arange(n_cells + 1) * grid_dt, t)
    widths = np.diff(edges)
    clock = _clock_sampler(p)(widths, gen, None)
    totals = gen.poisson(p.total_rate * np.asarray(clock))
    min_width = grid_dt / refine
    ev_times: list[float] = []
    ev_sizes: list[int] = []
    stack = [(float(edges[i]), float(widths[i]), int(c)) for i, c in enumerate(totals) if c > 0]
    stack.reverse()
    while stack:
        a, d, c = stack.pop()
        if c == 1 or d <= min_width * (1 + 1e-9):
            ev_times.append(a + d * gen.uniform())
            ev_sizes.append(c)
            continue
        half = total_count_pmf(p, d / 2, c + 1)
        w = half * half[::-1]
        left = int(gen.choice(c + 1, p=w / w.sum()))
        # push right first so the left half is processed first
        if c - left:
            stack.append((a + d / 2, d / 2, c - left))
        if left:
            stack.append((a, d / 2, left))
    times = np.asarray(ev_times)
    order = np.argsort(times, kind="stable")
    times = times[order]
    sizes = np.asarray(ev_sizes, dtype=np.int64)[order]
    probs = np.asarray(p.lambdas) / p.total_rate
    jumps = (np.stack([gen.multinomial(s, probs) for s in sizes]) if sizes.size
             else np.zeros((0, p.m), dtype=np.int64))
    terminal = tuple(int(x) for x in jumps.sum(axis=0))
    return PathSample(times, jumps, terminal, float(t))


def mmtsfpp_terminal(t, lambdas, m: MixtureParams, rng: RngLike = None, size=None):
    """Poisson vector observed at the mixture-TSS time S_mix(t)."""
    gen = as_generator(rng)
    lam = np.asarray(lambdas, dtype=float)
    n = 1 if size is None else int(size)
    T = np.atleast_1d(sample_mixture_tss_increment(m, t, gen, size=n))
    out = gen.poisson(T[:, None] * lam).astype(np.int64)
    return out[0] if size is None else out


def mmttfpp_terminal(t, lambdas, m: MixtureParams, grid_dt: float, rng: RngLike = None, size=None):
    """Poisson vector observed at the first-passage time E(t) of the mixture."""
    gen = as_generator(rng)
    lam = np.asarray(lambdas, dtype=float)
    n = 1 if size is None else int(size)
    E = np.atleast_1d(sample_inverse_mixture_tss(m, t, grid_dt, gen, size=n))
    out = gen.poisson(E[:, None] * lam).astype(np.int64)
    return out[0] if size is None else out
