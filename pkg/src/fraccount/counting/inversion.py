"""pmfs recovered from pgfs by the discrete Fourier transform on a torus.

Coefficients of a pgf G are read off from samples G(r w^j), w = exp(2 pi i/M).
Aliasing adds p(k + l M) r^{lM} for l >= 1, so a radius r < 1 damps the
contribution of heavy tails; r = 10^(-14/M) keeps it below 1e-14.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ..specfun import SeriesResult
from .params import InversionError

IMAG_TOL = 1e-10
DOUBLING_TOL = 1e-12
DEFAULT_M = 128


def default_radius(M: int) -> float:
    return 10.0 ** (-14.0 / M)


def _grid_points(m: int, M: int, radius: float) -> np.ndarray:
    z = radius * np.exp(2j * np.pi * np.arange(M) / M)
    mesh = np.meshgrid(*([z] * m), indexing="ij")
    return np.stack(mesh, axis=-1)


def pmf_grid_by_inversion(t: float, pgf: Callable, m: int, M: int = DEFAULT_M,
                          radius: float | None = 1.0, *, complex_output: bool = False):
    """All coefficients p(k), k in {0..M-1}^m, from M^m pgf samples.

    ``pgf`` is called as ``pgf(u, t)`` with ``u`` of shape (M,)*m + (m,).
    With a damped radius only the low-order corner of the grid is accurate;
    high indices are amplified by r^(-|k|).
    """
    r = default_radius(M) if radius is None else float(radius)
    vals = np.asarray(pgf(_grid_points(m, M, r), t), dtype=complex)
    coef = np.fft.fftn(vals) / M ** m
    if r != 1.0:
        idx = np.indices((M,) * m).sum(axis=0)
        coef = coef * r ** (-idx.astype(float))
    return coef if complex_output else coef.real


def pmf_by_inversion(k: Sequence[int], t: float, pgf: Callable, M: int = DEFAULT_M, *,
                     radius: float | None = None, check_doubling: bool = True,
                     full_output: bool = False):
    """pmf at ``k`` by torus inversion of ``pgf``.

    M is raised to at least 4 max(k) so the requested index is far from the
    wrap-around point.  With ``check_doubling`` the computation is repeated at
    2M and the two must agree to 1e-12.
    """
    kk = tuple(int(x) for x in np.atleast_1d(k))
    if min(kk) < 0:
        raise ValueError("k must be nonnegative")
    m = len(kk)
    M = max(int(M), 4 * max(kk) + 4)
    c = pmf_grid_by_inversion(t, pgf, m, M, radius, complex_output=True)[kk]
    value, imag = float(c.real), abs(c.imag)
    if imag >= IMAG_TOL:
        raise InversionError(f"imaginary residue {imag:.3e} exceeds {IMAG_TOL}")
    r = default_radius(M) if radius is None else radius
    err = r ** M if r < 1 else 0.0
    diag = {"M": M, "radius": r, "imag_residue": imag}
    if check_doubling:
        c2 = pmf_grid_by_inversion(t, pgf, m, 2 * M, radius, complex_output=True)[kk]
        diff, imag2 = abs(float(c2.real) - value), abs(c2.imag)
        diag["doubling_change"] = diff
        if diff >= DOUBLING_TOL or imag2 >= IMAG_TOL:
            raise InversionError(f"doubling M changed the pmf by {diff:.3e}")
        err += diff
    err += 16 * np.finfo(float).eps
    res = SeriesResult(value, err, M ** m, method="inversion", diagnostics=diag)
    return res if full_output else res.value


def pmf_table_by_inversion(kmax: int, t: float, pgf: Callable, m: int, M: int = DEFAULT_M,
                           radius: float | None = None) -> np.ndarray:
    """pmf on {0..kmax}^m from a single inversion."""
    M = max(int(M), 4 * kmax + 4)
    c = pmf_grid_by_inversion(t, pgf, m, M, radius, complex_output=True)
    c = c[(slice(0, kmax + 1),) * m]
    imag = float(np.max(np.abs(c.imag)))
    if imag >= IMAG_TOL:
        raise InversionError(f"imaginary residue {imag:.3e} exceeds {IMAG_TOL}")
    return c.real


def power_series_coefficients(f: Callable, n: int, M: int | None = None,
                              radius: float | None = None) -> np.ndarray:
    """First n Taylor coefficients at 0 of a function analytic on the closed unit disc."""
    M = max(M or 0, 4 * n, 64)
    r = default_radius(M) if radius is None else radius
    z = r * np.exp(2j * np.pi * np.arange(M) / M)
    c = np.fft.fft(np.asarray(f(z), dtype=complex)) / M
    c = c[:n] * r ** (-np.arange(n, dtype=float))
    return c.real
