"""Quadrature, root finding, Lambert W and finite-difference derivatives."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import optimize, special

from .errors import InfeasibleError, NumericalError


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_nodes(edges, n: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights over consecutive panels ``edges``.

    ``edges`` may be a 1-D array of breakpoints, or an array of shape
    ``(..., k)`` to build a batch of rules at once; output then has shape
    ``(..., (k - 1) * n)``.
    """
    edges = np.asarray(edges, dtype=float)
    t, w = gauss_legendre(n)
    lo = edges[..., :-1, None]
    half = 0.5 * (edges[..., 1:, None] - lo)
    x = lo + half * (t + 1.0)
    wt = half * w
    shape = edges.shape[:-1] + (-1,)
    return x.reshape(shape), wt.reshape(shape)


def sine_nodes(lo, hi, n: int = 24) -> tuple[np.ndarray, np.ndarray]:
    """Rule for integrands with square-root behaviour at both ends.

    Uses x = mid + half*sin(u), which turns endpoint (x - lo)^(+-1/2)
    features into smooth functions of u. Broadcasts over ``lo``/``hi``.
    """
    lo = np.asarray(lo, dtype=float)[..., None]
    hi = np.asarray(hi, dtype=float)[..., None]
    t, w = gauss_legendre(n)
    u = 0.5 * math.pi * t
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = mid + half * np.sin(u)
    wt = half * np.cos(u) * (0.5 * math.pi) * w
    return x, wt


def geometric_edges(lo, hi, panels: int, scale) -> np.ndarray:
    """Panel breakpoints uniform in log(x + scale) between ``lo`` and ``hi``."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    scale = np.asarray(scale, dtype=float)
    u0 = np.log(lo + scale)[..., None]
    u1 = np.log(hi + scale)[..., None]
    t = np.linspace(0.0, 1.0, panels + 1)
    edges = np.exp(u0 + (u1 - u0) * t) - scale[..., None]
    edges[..., 0] = lo
    edges[..., -1] = hi
    return edges


def bisect(f, lo: float, hi: float, tol: float = 1e-9, maxiter: int = 200) -> float:
    """Root of ``f`` on a sign-changing bracket [lo, hi]."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise InfeasibleError(f"no sign change on [{lo}, {hi}]: f={flo:.6g}, {fhi:.6g}")
    return optimize.bisect(f, lo, hi, xtol=tol, maxiter=maxiter, disp=False)


def scan_bracket(f, lo: float, hi: float, points: int = 256):
    """First sign change of ``f`` on a log-spaced scan of [lo, hi].

    Returns ``(a, b, values)`` where [a, b] brackets the crossing and
    ``values`` are the scanned samples (for monotonicity diagnostics).
    Raises :class:`InfeasibleError` with the scan summary if none is found.
    """
    grid = np.geomspace(lo, hi, points)
    values = np.array([f(x) for x in grid])
    sign = np.sign(values)
    change = np.nonzero(sign[:-1] * sign[1:] <= 0)[0]
    if change.size == 0:
        raise InfeasibleError(
            f"no sign change on [{lo:.6g}, {hi:.6g}]; f ranges over "
            f"[{values.min():.6g}, {values.max():.6g}]"
        )
    k = change[0]
    return grid[k], grid[k + 1], values


def lambert_w0(x: float) -> float:
    """Principal branch W0 of the Lambert W function for real x >= -1/e."""
    x = float(x)
    if x < -1.0 / math.e:
        raise ValueError(f"W0 undefined for x = {x} < -1/e")
    return float(special.lambertw(x, 0).real)


def fd_derivatives(f, s, kmax: int, rel_step: float = 1e-3) -> list[np.ndarray]:
    """Derivatives d^k f / ds^k for k = 0..kmax at positive ``s``.

    Central differences at steps h and h/2 combined by one Richardson
    extrapolation, h = rel_step * s. With the default step the relative
    error stays below 1e-6 while s times the decay scale of ``f`` lies in
    about [0.1, 50], which covers the coverage integrands. ``f`` must accept an array of shape
    ``s.shape + (5,)`` (the stencil along the last axis) and return the
    same shape; it is called once.
    """
    s = np.asarray(s, dtype=float)
    if kmax > 2:
        raise ValueError("only k <= 2 is supported")
    if kmax == 0:
        vals = np.asarray(f(s[..., None]))[..., 0]
        _check_finite(vals, s)
        return [vals]
    if np.any(s <= 0):
        raise ValueError("finite-difference derivatives need s > 0")
    h = rel_step * s
    offsets = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
    stencil = s[..., None] + h[..., None] * offsets
    v = np.asarray(f(stencil))
    _check_finite(v, stencil)
    fm1, fmh, f0, fph, fp1 = (v[..., i] for i in range(5))
    out = [f0]
    d1_h = (fp1 - fm1) / (2 * h)
    d1_h2 = (fph - fmh) / h
    out.append((4 * d1_h2 - d1_h) / 3)
    if kmax >= 2:
        d2_h = (fp1 - 2 * f0 + fm1) / h**2
        d2_h2 = (fph - 2 * f0 + fmh) / (0.25 * h**2)
        out.append((4 * d2_h2 - d2_h) / 3)
    return out


def _check_finite(values, s):
    values = np.asarray(values)
    bad = ~np.isfinite(values)
    if np.any(bad):
        where = np.broadcast_to(s, values.shape)[bad]
        raise NumericalError(f"non-finite kernel value at s = {where[:5]}")


def laplace_derivative(kernel, s, k: int, rel_step: float = 1e-3):
    """k-th derivative of a Laplace-type ``kernel`` at ``s``.

    ``kernel`` is any vectorized callable of s.
    """
    return fd_derivatives(kernel, s, k, rel_step)[k]


def series_weighted_sum(derivs, s) -> np.ndarray:
    """sum_k (-s)^k / k! * d^k f/ds^k: the Gamma-CCDF expansion term."""
    s = np.asarray(s, dtype=float)
    total = np.zeros_like(np.asarray(derivs[0], dtype=float))
    for k, d in enumerate(derivs):
        total = total + (-s) ** k / math.factorial(k) * d
    return total
