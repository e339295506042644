"""Scalar special functions with certified truncation.

Every infinite series in the package (pmfs, Levy masses) goes through
:func:`wright_pq`, so its stopping rule and error accounting live here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln

EPS = np.finfo(float).eps
_BLOCK = 64


class SeriesConvergenceError(ArithmeticError):
    """A series did not converge under its :class:`SeriesControl`."""

    def __init__(self, message: str, terms_used: int = 0, last_term: float = math.nan):
        super().__init__(f"{message} (terms_used={terms_used}, last_term={last_term:.3e})")
        self.terms_used = terms_used
        self.last_term = last_term


@dataclass(frozen=True)
class SeriesControl:
    max_terms: int = 2000
    abs_tol: float = 1e-13
    rel_tol: float = 1e-11

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise ValueError("tolerances must be nonnegative")
        if self.abs_tol == 0 and self.rel_tol == 0:
            raise ValueError("at least one of abs_tol/rel_tol must be positive")


DEFAULT_CONTROL = SeriesControl()


@dataclass(frozen=True)
class SeriesResult:
    """Value of a series together with how it was obtained."""

    value: float
    abs_error_bound: float
    terms_used: int
    method: str = "series"
    diagnostics: dict = field(default_factory=dict, compare=False)

    def to_record(self) -> dict:
        rec = {
            "value": self.value,
            "abs_error_bound": self.abs_error_bound,
            "terms_used": self.terms_used,
            "method": self.method,
        }
        if self.diagnostics:
            rec["diagnostics"] = self.diagnostics
        return rec


@dataclass(frozen=True)
class WrightSpec:
    """Parameters of the generalized Wright function pPsi_q.

    ``upper`` holds the (alpha_i, beta_i) pairs of the numerator gammas and
    ``lower`` the (a_j, b_j) pairs of the denominator gammas.
    """

    upper: tuple[tuple[float, float], ...]
    lower: tuple[tuple[float, float], ...]

    def __init__(self, upper: Sequence[Sequence[float]], lower: Sequence[Sequence[float]]):
        object.__setattr__(self, "upper", tuple((float(a), float(b)) for a, b in upper))
        object.__setattr__(self, "lower", tuple((float(a), float(b)) for a, b in lower))
        if self.delta < -1:
            raise ValueError(
                f"convergence condition violated: sum(b) - sum(beta) = {self.delta:.6g} < -1"
            )

    @property
    def delta(self) -> float:
        return sum(b for _, b in self.lower) - sum(b for _, b in self.upper)

    @property
    def radius(self) -> float:
        """Radius of convergence in z (infinite when delta > -1)."""
        if self.delta > -1 + 1e-14:
            return math.inf
        log_r = sum(-b * math.log(abs(b)) for _, b in self.upper if b != 0)
        log_r += sum(b * math.log(abs(b)) for _, b in self.lower if b != 0)
        return math.exp(log_r)


def _log_gamma_signed(x: np.ndarray, scale: np.ndarray):
    """log|Gamma(x)| and sign(Gamma(x)); sign is 0 at poles.

    Negative non-integer arguments use the reflection formula on the positive
    argument 1 - x.  ``scale`` is the magnitude of the quantities that were
    added to form ``x``; it sets the tolerance for recognising a pole.
    """
    x = np.asarray(x, dtype=float)
    logabs = np.empty_like(x)
    sign = np.ones_like(x)
    pos = x > 0
    logabs[pos] = gammaln(x[pos])
    neg = ~pos
    if np.any(neg):
        xn = x[neg]
        nearest = np.round(xn)
        pole = np.abs(xn - nearest) <= 8 * EPS * np.maximum(np.asarray(scale, float)[neg], 1.0)
        red = xn - 2.0 * np.floor(xn / 2.0)
        s = np.sin(np.pi * red)
        with np.errstate(divide="ignore"):
            la = math.log(math.pi) - np.log(np.abs(s)) - gammaln(1.0 - xn)
        sg = np.sign(s)
        la[pole] = np.inf
        sg[pole] = 0.0
        logabs[neg] = la
        sign[neg] = sg
    return logabs, sign


def _wright_terms(spec: WrightSpec, z: float, k: np.ndarray):
    """Signed magnitudes of the Wright series terms at indices ``k``.

    Returns (log|t_k|, sign, log-magnitude sum of the gamma parts) where the
    last item drives the per-term rounding estimate.
    """
    kf = k.astype(float)
    logt = -gammaln(kf + 1.0)
    sign = np.ones_like(kf)
    parts = np.abs(logt).copy()
    if z != 0:
        logt += kf * math.log(abs(z))
        parts += np.abs(kf * math.log(abs(z)))
        if z < 0:
            sign *= np.where(k % 2 == 0, 1.0, -1.0)
    for a, b in spec.upper:
        la, sg = _log_gamma_signed(a + b * kf, abs(a) + abs(b) * kf)
        if np.any(sg == 0):
            bad = int(k[np.argmax(sg == 0)])
            raise ValueError(f"upper gamma Gamma({a} + {b}*k) is singular at k={bad}")
        logt += la
        sign *= sg
        parts += np.abs(la)
    for a, b in spec.lower:
        la, sg = _log_gamma_signed(a + b * kf, abs(a) + abs(b) * kf)
        # reciprocal-gamma convention: 1/Gamma at a pole is 0
        sign *= sg
        with np.errstate(invalid="ignore"):
            logt = np.where(sg == 0, -np.inf, logt - la)
        parts += np.where(sg == 0, 0.0, np.abs(la))
    return logt, sign, parts


def _fsum(xs: list) -> float:
    try:
        return math.fsum(xs)
    except OverflowError:
        raise SeriesConvergenceError("partial sum overflow", len(xs), math.inf) from None


def wright_pq(spec: WrightSpec, z: float, ctrl: SeriesControl | None = None, *,
              start: int = 0, full_output: bool = False):
    """Generalized Wright function ``sum_k z^k/k! prod Gamma(a_i+b_i k) / prod Gamma(a_j+b_j k)``.

    Parameters
    ----------
    spec : WrightSpec
        Upper and lower gamma parameters.
    z : float
        Real argument.
    ctrl : SeriesControl, optional
        Truncation policy.
    start : int
        First summation index; indices below it are omitted (used when an
        upper gamma is singular at k = 0).
    full_output : bool
        Return a :class:`SeriesResult` instead of the bare value.

    Raises
    ------
    SeriesConvergenceError
        If |z| is outside the radius of convergence or the tail bound does not
        fall below the tolerances within ``ctrl.max_terms`` terms.

    Notes
    -----
    The sum is accumulated with :func:`math.fsum`.  The reported error bound is
    the geometric tail bound after term magnitudes are seen to decrease, plus
    a rounding term proportional to the sum of |terms| that covers
    cancellation in alternating series.
    """
    ctrl = ctrl or DEFAULT_CONTROL
    z = float(z)
    radius = spec.radius
    if math.isfinite(radius) and abs(z) >= radius:
        raise SeriesConvergenceError(
            f"|z|={abs(z):.6g} is outside the radius of convergence {radius:.6g}", 0, math.inf
        )
    limit_ratio = abs(z) / radius if math.isfinite(radius) else 0.0

    if z == 0.0:
        if start > 0:
            res = SeriesResult(0.0, 0.0, 0, diagnostics={"k_star": 0})
        else:
            logt, sign, parts = _wright_terms(spec, 0.0, np.array([0]))
            v = float(sign[0] * math.exp(logt[0])) if sign[0] != 0 else 0.0
            res = SeriesResult(v, abs(v) * EPS * (4 + parts[0]), 1, diagnostics={"k_star": 0})
        return res if full_output else res.value

    terms: list[float] = []
    abs_terms: list[float] = []
    logs: list[float] = []  # log|t_k| of the non-vanishing terms; survives underflow
    round_err = 0.0
    k0 = start
    tail_bound = math.inf
    k_star = None
    while k0 - start < ctrl.max_terms:
        n = min(_BLOCK, ctrl.max_terms - (k0 - start))
        k = np.arange(k0, k0 + n)
        logt, sign, parts = _wright_terms(spec, z, k)
        with np.errstate(over="ignore"):
            mag = np.exp(logt)
        if not np.all(np.isfinite(mag)):
            raise SeriesConvergenceError("term overflow", len(terms), math.inf)
        vals = sign * mag
        terms.extend(vals.tolist())
        abs_terms.extend(mag.tolist())
        logs.extend(logt[sign != 0].tolist())
        round_err += float(np.sum(mag * EPS * (4.0 + parts)))
        k0 += n

        if len(logs) < 4:
            if not logs and k0 - start >= 4 * _BLOCK:
                # a run of exact zeros (all lower gammas at poles)
                break
            continue
        # monotone decay over the trailing non-vanishing terms
        tail = np.asarray(logs[-8:])
        if not np.all(np.diff(tail) <= 0):
            continue
        if k_star is None:
            k_star = k0 - n
        r = max(math.exp(tail[-1] - tail[-2]), limit_ratio)
        if r >= 1:
            continue
        tail_bound = math.exp(tail[-1]) * r / (1 - r)
        s = abs(_fsum(terms))
        if tail_bound <= max(ctrl.abs_tol, ctrl.rel_tol * s):
            break
    else:
        last = abs_terms[-1] if abs_terms else math.nan
        raise SeriesConvergenceError("series did not converge within max_terms", len(terms), last)

    if not math.isfinite(tail_bound):
        tail_bound = 0.0
    value = _fsum(terms)
    err = tail_bound + round_err + EPS * abs(value)
    res = SeriesResult(
        value,
        err,
        len(terms),
        diagnostics={
            "k_star": k_star,
            "tail_bound": tail_bound,
            "rounding_bound": round_err,
            "sum_abs_terms": _fsum(abs_terms),
        },
    )
    return res if full_output else res.value


def mittag_leffler_3p(alpha: float, beta: float, gamma: float, z: float,
                      ctrl: SeriesControl | None = None, *, full_output: bool = False):
    """Three-parameter Mittag-Leffler function.

    ``sum_k z^k Gamma(alpha+k) / (k! Gamma(alpha) Gamma(gamma + beta k))``,
    evaluated as a 1Psi1 Wright series scaled by 1/Gamma(alpha).
    """
    if alpha <= 0 or beta <= 0 or gamma <= 0:
        raise ValueError("Mittag-Leffler parameters must be strictly positive")
    spec = WrightSpec([(alpha, 1.0)], [(gamma, beta)])
    res = wright_pq(spec, z, ctrl, full_output=True)
    scale = math.exp(-math.lgamma(alpha))
    out = SeriesResult(res.value * scale, res.abs_error_bound * scale, res.terms_used,
                       diagnostics=res.diagnostics)
    return out if full_output else out.value


_BERNOULLI_TAIL = (
    1.0 / 12, -1.0 / 120, 1.0 / 252, -1.0 / 240, 1.0 / 132, -691.0 / 32760, 1.0 / 12,
)


def digamma(x: float) -> float:
    """Digamma function for x > 0 (upward recurrence, then asymptotic series)."""
    x = float(x)
    if not x > 0:
        raise ValueError("digamma is only implemented for x > 0")
    shift = []
    while x < 10.0:
        shift.append(1.0 / x)
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    p = inv2
    for c in _BERNOULLI_TAIL:
        series += c * p
        p *= inv2
    return math.log(x) - 0.5 / x - series - math.fsum(shift)


def gen_binomial(alpha: float, j: int) -> float:
    """Generalized binomial coefficient (alpha choose j) by the product form."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    c = 1.0
    for i in range(1, j + 1):
        c *= (alpha - (i - 1)) / i
    return c


def gen_binomial_array(alpha: float, n: int) -> np.ndarray:
    """(alpha choose j) for j = 0..n-1."""
    j = np.arange(1, n)
    return np.concatenate(([1.0], np.cumprod((alpha - (j - 1)) / j)))
