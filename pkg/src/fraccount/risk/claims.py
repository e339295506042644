"""Claim-size distributions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

KINDS = ("exponential", "deterministic", "uniform", "empirical")


@dataclass(frozen=True)
class ClaimDistribution:
    """A nonnegative claim law.

    exponential(mean), deterministic(value), uniform(a, b) or empirical
    (equally weighted sample values).
    """

    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown claim kind {self.kind!r}")
        p = self.params
        if self.kind == "exponential" and not (len(p) == 1 and p[0] > 0):
            raise ValueError("exponential claims need one mean > 0")
        if self.kind == "deterministic" and not (len(p) == 1 and p[0] >= 0):
            raise ValueError("deterministic claims need one value >= 0")
        if self.kind == "uniform" and not (len(p) == 2 and 0 <= p[0] < p[1]):
            raise ValueError("uniform claims need 0 <= a < b")
        if self.kind == "empirical" and not (len(p) >= 1 and min(p) >= 0):
            raise ValueError("empirical claims need a nonempty list of values >= 0")

    @classmethod
    def exponential(cls, mean: float):
        return cls("exponential", (float(mean),))

    @classmethod
    def deterministic(cls, value: float):
        return cls("deterministic", (float(value),))

    @classmethod
    def uniform(cls, a: float, b: float):
        return cls("uniform", (float(a), float(b)))

    @classmethod
    def empirical(cls, values: Sequence[float]):
        return cls("empirical", tuple(sorted(float(v) for v in values)))

    @classmethod
    def from_record(cls, rec: dict):
        kind = rec["kind"]
        if kind == "exponential":
            return cls.exponential(rec["mean"])
        if kind == "deterministic":
            return cls.deterministic(rec["value"])
        if kind == "uniform":
            return cls.uniform(rec["a"], rec["b"])
        if kind == "empirical":
            return cls.empirical(rec["values"])
        raise ValueError(f"unknown claim kind {kind!r}")

    def to_record(self) -> dict:
        p = self.params
        if self.kind == "exponential":
            return {"kind": self.kind, "mean": p[0]}
        if self.kind == "deterministic":
            return {"kind": self.kind, "value": p[0]}
        if self.kind == "uniform":
            return {"kind": self.kind, "a": p[0], "b": p[1]}
        return {"kind": self.kind, "values": list(p)}

    # moments

    @property
    def mean(self) -> float:
        p = self.params
        if self.kind in ("exponential", "deterministic"):
            return p[0]
        if self.kind == "uniform":
            return 0.5 * (p[0] + p[1])
        return float(np.mean(p))

    @property
    def var(self) -> float:
        p = self.params
        if self.kind == "exponential":
            return p[0] ** 2
        if self.kind == "deterministic":
            return 0.0
        if self.kind == "uniform":
            return (p[1] - p[0]) ** 2 / 12.0
        return float(np.var(p))

    @property
    def second_moment(self) -> float:
        return self.var + self.mean ** 2

    @property
    def support_max(self) -> float:
        p = self.params
        if self.kind == "exponential":
            return math.inf
        return float(max(p))

    # distribution functions

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind == "exponential":
            out = np.where(x < 0, 0.0, -np.expm1(-np.maximum(x, 0) / p[0]))
        elif self.kind == "deterministic":
            out = (x >= p[0]).astype(float)
        elif self.kind == "uniform":
            out = np.clip((x - p[0]) / (p[1] - p[0]), 0.0, 1.0)
        else:
            out = np.searchsorted(np.asarray(p), x, side="right") / len(p)
        return float(out) if out.ndim == 0 else out

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "exponential":
            out = np.where(x < 0, 1.0, np.exp(-np.maximum(x, 0) / self.params[0]))
            return float(out) if out.ndim == 0 else out
        return 1.0 - self.cdf(x)

    def sample(self, gen: np.random.Generator, size) -> np.ndarray:
        p = self.params
        if self.kind == "exponential":
            return gen.exponential(p[0], size)
        if self.kind == "deterministic":
            return np.full(size, p[0])
        if self.kind == "uniform":
            return gen.uniform(p[0], p[1], size)
        return gen.choice(np.asarray(p), size=size)

    def laplace(self, s):
        """E[exp(-s xi)] for s >= 0."""
        s = np.asarray(s, dtype=float)
        p = self.params
        if self.kind == "exponential":
            out = 1.0 / (1.0 + s * p[0])
        elif self.kind == "deterministic":
            out = np.exp(-s * p[0])
        elif self.kind == "uniform":
            a, b = p
            with np.errstate(invalid="ignore", divide="ignore"):
                out = np.where(s == 0, 1.0, (np.exp(-s * a) - np.exp(-s * b)) / (s * (b - a)))
        else:
            out = np.mean(np.exp(-np.multiply.outer(s, np.asarray(p))), axis=-1)
        return float(out) if np.ndim(out) == 0 else out

    @property
    def is_integer_valued(self) -> bool:
        if self.kind in ("deterministic", "empirical"):
            return all(float(v).is_integer() for v in self.params)
        return False

    def pgf(self, u):
        """E[u^xi] for integer-valued laws."""
        if not self.is_integer_valued:
            raise ValueError("pgf is defined only for integer-valued claim laws")
        u = np.asarray(u, dtype=complex)
        vals = np.asarray(self.params, dtype=int)
        if self.kind == "deterministic":
            out = u ** vals[0]
        else:
            out = np.mean(u[..., None] ** vals, axis=-1)
        return complex(out) if out.ndim == 0 else out


def sum_cdf(d1: ClaimDistribution, d2: ClaimDistribution, x):
    """CDF of xi + eta for independent claims.

    Closed forms for exponential/exponential and whenever one side is
    deterministic; otherwise the convolution integral is evaluated by
    adaptive quadrature (scipy) or, for empirical laws, as a finite average.
    """
    x = np.asarray(x, dtype=float)
    if d2.kind == "deterministic":
        out = np.asarray(d1.cdf(x - d2.params[0]), dtype=float)
    elif d1.kind == "deterministic":
        out = np.asarray(d2.cdf(x - d1.params[0]), dtype=float)
    elif d1.kind == "exponential" and d2.kind == "exponential":
        b1, b2 = d1.params[0], d2.params[0]
        xp = np.maximum(x, 0.0)
        if abs(b1 - b2) <= 1e-12 * max(b1, b2):
            sfv = np.exp(-xp / b1) * (1 + xp / b1)
        else:
            sfv = (b1 * np.exp(-xp / b1) - b2 * np.exp(-xp / b2)) / (b1 - b2)
        out = np.where(x < 0, 0.0, 1.0 - sfv)
    elif d2.kind == "empirical":
        out = np.mean([d1.cdf(x - v) for v in d2.params], axis=0)
    elif d1.kind == "empirical":
        out = np.mean([d2.cdf(x - v) for v in d1.params], axis=0)
    else:
        # one of them is uniform; integrate against its density
        if d2.kind == "uniform":
            d1, d2 = d2, d1
        a, b = d1.params
        flat = np.atleast_1d(x)
        vals = [integrate.quad(lambda y: d2.cdf(xx - y), a, b, epsabs=1e-13, limit=200)[0] / (b - a)
                for xx in flat]
        out = np.asarray(vals).reshape(x.shape)
    return float(out) if np.ndim(out) == 0 else out
