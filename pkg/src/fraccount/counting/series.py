"""pmfs of the subordinated Poisson vectors as double Wright series.

Both pmfs have the shape

    prefactor * (-1/S)^n prod(lambda_j^k_j / k_j!) * sum_i theta^i/(i! S^i) W(n + i)

with n = S(k) and W a Wright function in the time-change parameters.  The
outer i-sum converges only when theta < S(lambda) (its terms grow like
(theta/S)^i i^n), and W is an alternating series, so each evaluation carries
an explicit error bound; when the bound shows heavy cancellation or a sum
diverges the pmf is recomputed by torus inversion.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from ..specfun import (
    DEFAULT_CONTROL,
    EPS,
    SeriesControl,
    SeriesConvergenceError,
    SeriesResult,
    WrightSpec,
    wright_pq,
)
from .inversion import pmf_by_inversion
from .params import ConsistencyError, ProcessParams, as_counts
from .pgf import pgf_mtsfnbp, pgf_mtsfpp

CANCELLATION_ULPS = 1e6


def _log_count_factor(kk, lambdas) -> float:
    return math.fsum(k * math.log(l) - math.lgamma(k + 1) for k, l in zip(kk, lambdas))


def _outer_sum(n0: int, ratio: float, inner, ctrl: SeriesControl) -> SeriesResult:
    """sum_i ratio^i / i! * inner(n0 + i) with a geometric tail bound."""
    terms: list[float] = []
    errs: list[float] = []
    inner_terms: list[int] = []
    rounding = 0.0
    tail = 0.0
    if ratio == 0.0:
        w = inner(n0)
        return SeriesResult(w.value, w.abs_error_bound, w.terms_used,
                            diagnostics={"outer_terms": 1, "inner_terms_max": w.terms_used,
                                         "outer_tail_bound": 0.0,
                                         "rounding_bound": w.diagnostics.get("rounding_bound", 0.0)})
    log_ratio = math.log(ratio)
    for i in range(ctrl.max_terms):
        c = math.exp(i * log_ratio - math.lgamma(i + 1))
        w = inner(n0 + i)
        terms.append(c * w.value)
        errs.append(c * w.abs_error_bound)
        rounding += c * w.diagnostics.get("rounding_bound", 0.0)
        inner_terms.append(w.terms_used)
        if i < 6:
            continue
        a = np.abs(terms[-6:])
        if a[-1] == 0.0 and a[-2] == 0.0:
            tail = 0.0
            break
        if not np.all(np.diff(a) <= 0):
            continue
        r = a[-1] / a[-2]
        if r >= 1:
            continue
        tail = float(a[-1] * r / (1 - r))
        if tail <= max(ctrl.abs_tol, ctrl.rel_tol * abs(math.fsum(terms))):
            break
    else:
        raise SeriesConvergenceError("outer theta-series did not converge",
                                     len(terms), abs(terms[-1]) if terms else math.nan)
    value = math.fsum(terms)
    sum_abs = math.fsum(abs(x) for x in terms)
    rounding += 4 * EPS * sum_abs
    err = math.fsum(errs) + tail + 4 * EPS * sum_abs
    return SeriesResult(value, err, sum(inner_terms),
                        diagnostics={"outer_terms": len(terms), "inner_terms_max": max(inner_terms),
                                     "outer_tail_bound": tail, "rounding_bound": rounding})


@lru_cache(maxsize=4096)
def _poisson_inner(n: int, alpha: float, x: float, ctrl: SeriesControl) -> SeriesResult:
    spec = WrightSpec([(1.0, alpha)], [(1.0 - n, alpha)])
    return wright_pq(spec, -x, ctrl, full_output=True)


@lru_cache(maxsize=4096)
def _nb_inner(n: int, alpha: float, rho_t: float, z: float, ctrl: SeriesControl) -> SeriesResult:
    spec = WrightSpec([(1.0, alpha), (rho_t, 1.0)], [(1.0 - n, alpha)])
    return wright_pq(spec, z, ctrl, full_output=True)


def _scaled(res: SeriesResult, log_scale: float, sign: float) -> SeriesResult:
    s = math.exp(log_scale)
    d = dict(res.diagnostics)
    d["rounding_bound"] = d.get("rounding_bound", 0.0) * s
    return SeriesResult(sign * s * res.value, s * res.abs_error_bound, res.terms_used,
                        diagnostics=d)


def _certify(res: SeriesResult, ctrl: SeriesControl) -> str | None:
    """Reason to distrust a series value, or None."""
    v = res.value
    rnd = res.diagnostics.get("rounding_bound", 0.0)
    if rnd > CANCELLATION_ULPS * np.spacing(abs(v)) and rnd > ctrl.abs_tol:
        return "cancellation"
    return None


def _clamp(res: SeriesResult) -> SeriesResult:
    v, e = res.value, res.abs_error_bound
    if 0.0 <= v <= 1.0:
        return res
    if v + e < 0.0 or v - e > 1.0:
        raise ConsistencyError(f"pmf value {v:.6e} outside [0, 1] beyond its error bound {e:.3e}")
    d = dict(res.diagnostics)
    d["clamped_from"] = v
    return SeriesResult(min(max(v, 0.0), 1.0), e, res.terms_used, res.method, d)


def _with_fallback(series_fn, inversion_fn, ctrl, fallback: bool, certify: bool) -> SeriesResult:
    reason = None
    try:
        res = series_fn()
        if certify:
            reason = _certify(res, ctrl)
    except SeriesConvergenceError as exc:
        if not fallback:
            raise
        reason = f"non-convergence: {exc}"
    if reason is None:
        return _clamp(res)
    if not fallback:
        raise SeriesConvergenceError(f"series value not certified ({reason})",
                                     res.terms_used, res.abs_error_bound)
    inv = inversion_fn()
    d = dict(inv.diagnostics)
    d["fallback_reason"] = reason
    return _clamp(SeriesResult(inv.value, inv.abs_error_bound, inv.terms_used, "inversion", d))


def pmf_mtsfpp(k, t: float, p: ProcessParams, ctrl: SeriesControl | None = None, *,
               fallback: bool = True, certify: bool = True, full_output: bool = False):
    """Pr{N(t) = k} for the tempered space-fractional Poisson vector.

    Uses only the TSS clock of ``p`` (any gamma block is ignored).  Set
    ``fallback=False`` to get an exception instead of the inversion value
    when the series is not certified.  ``certify=False`` skips the
    cancellation test and returns the series value with its error bound,
    however wide.
    """
    ctrl = ctrl or DEFAULT_CONTROL
    kk = as_counts(k, p.m)
    n = sum(kk)
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        res = SeriesResult(1.0 if n == 0 else 0.0, 0.0, 0, method="exact")
        return res if full_output else res.value
    S = p.total_rate
    a, th = p.tss.alpha, p.tss.theta
    x = S ** a * t

    def series():
        outer = _outer_sum(n, th / S, lambda j: _poisson_inner(j, a, x, ctrl), ctrl)
        log_scale = _log_count_factor(kk, p.lambdas) - n * math.log(S) + t * th ** a
        return _scaled(outer, log_scale, (-1.0) ** n)

    plain = ProcessParams(p.lambdas, p.tss)

    def inversion():
        return pmf_by_inversion(kk, t, lambda u, tt: pgf_mtsfpp(u, tt, plain), full_output=True)

    res = _with_fallback(series, inversion, ctrl, fallback, certify)
    return res if full_output else res.value


def pmf_mtsfnbp(k, t: float, p: ProcessParams, ctrl: SeriesControl | None = None, *,
                fallback: bool = True, certify: bool = True, full_output: bool = False):
    """Pr{N(t) = k} for the tempered space-fractional negative binomial vector.

    The inner 2Psi1 series has unit radius in z = -S^alpha/(mu - theta^alpha),
    so the series route needs S(lambda)^alpha < mu - theta^alpha.
    """
    if p.gamma is None:
        raise ValueError("pmf_mtsfnbp needs gamma parameters")
    ctrl = ctrl or DEFAULT_CONTROL
    kk = as_counts(k, p.m)
    n = sum(kk)
    a, th = p.tss.alpha, p.tss.theta
    mu, rho = p.gamma.mu, p.gamma.rho
    if not mu > th ** a:
        raise ValueError("pmf_mtsfnbp requires mu > theta^alpha")
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        res = SeriesResult(1.0 if n == 0 else 0.0, 0.0, 0, method="exact")
        return res if full_output else res.value
    S = p.total_rate
    rt = rho * t
    gap = mu - th ** a
    z = -(S ** a) / gap

    def series():
        outer = _outer_sum(n, th / S, lambda j: _nb_inner(j, a, rt, z, ctrl), ctrl)
        log_scale = (_log_count_factor(kk, p.lambdas) - n * math.log(S)
                     - math.lgamma(rt) + rt * (math.log(mu) - math.log(gap)))
        return _scaled(outer, log_scale, (-1.0) ** n)

    def inversion():
        return pmf_by_inversion(kk, t, lambda u, tt: pgf_mtsfnbp(u, tt, p), full_output=True)

    res = _with_fallback(series, inversion, ctrl, fallback, certify)
    return res if full_output else res.value
