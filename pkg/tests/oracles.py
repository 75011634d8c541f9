"""Independent reference computations used by the tests.

Nothing here calls into the package's analytic layer; each oracle is a
direct simulation or a scalar formula written out from first principles.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, optimize


# ---------------------------------------------------------------- scalars

def los_prob(a, b, c, h, r):
    theta = math.pi / 2 if r == 0 else math.atan(h / r)
    return c - a * math.exp(-b * theta)


def p_harv(R, h=100.0, wTchi=0.004, p_trans=2000.0, delta_s=1e-5, alpha=1e-6, D=0.1, dtheta=3.4e-5):
    d = math.hypot(R, h)
    return (1 - delta_s) * wTchi * p_trans * math.exp(-alpha * d) / (D + d * dtheta) ** 2


def rstar_bisection(h=100.0, demand=102.0, **kw):
    """Root of p_harv(R) - demand by Brent's method on [0, 1e5]."""
    return optimize.brentq(lambda R: p_harv(R, h, **kw) - demand, 0.0, 1e5, xtol=1e-10, rtol=1e-14)


def exclusion(gain_s, alpha_s, h_s, gain_j, alpha_j, h_j, r):
    val = (gain_j / gain_s) ** (2 / alpha_j) * (h_s**2 + r**2) ** (alpha_s / alpha_j) - h_j**2
    return math.sqrt(max(0.0, val))


# ---------------------------------------------------------------- geometry

def shifted_disk_distances(r_cc, r_max, n, rng):
    """Distances from a point at offset r_cc to points uniform in a disk."""
    rad = r_max * np.sqrt(rng.random(n))
    phi = 2 * np.pi * rng.random(n)
    return np.hypot(rad * np.cos(phi) - r_cc, rad * np.sin(phi))


def empirical_cdf_sup(samples, cdf, grid):
    samples = np.sort(samples)
    emp = np.searchsorted(samples, grid, side="right") / len(samples)
    return float(np.max(np.abs(emp - cdf(grid))))


def pdf_to_cdf(pdf, grid):
    """CDF of a density on a fine grid by cumulative trapezoid."""
    vals = pdf(grid)
    return integrate.cumulative_trapezoid(vals, grid, initial=0.0)


# ---------------------------------------------------------------- Laplace MC

def simulate_interference(rng, n, classes, env, lam, r_trunc, lower, s, extra=None, batch=2000):
    """Monte Carlo E[exp(-s I)] for PPP interferers beyond class radii.

    ``classes`` maps name -> (rho*eta, alpha, h, m, is_los, base density key);
    ``lower`` maps name -> exclusion radius; ``s`` is a 1-D array. Points are
    drawn on the disk of radius r_trunc around the origin, every class from
    its own base PPP thinned by the LOS law. ``extra`` optionally holds one
    additional interference power per sample.
    """
    a, b, c = env
    s = np.asarray(s, dtype=float)
    acc = np.zeros(len(s))
    for start in range(0, n, batch):
        k = min(batch, n - start)
        total = np.zeros(k)
        for name, (gain, alpha, h, m, is_los, key) in classes.items():
            cnt = rng.poisson(lam[key] * math.pi * r_trunc**2, size=k)
            owner = np.repeat(np.arange(k), cnt)
            r = r_trunc * np.sqrt(rng.random(owner.size))
            p = np.clip(c - a * np.exp(-b * np.arctan2(h, r)), 0, 1)
            los = rng.random(owner.size) < p
            keep = (los if is_los else ~los) & (r > lower[name])
            g = rng.gamma(m, 1.0 / m, keep.sum())
            power = gain * (r[keep] ** 2 + h * h) ** (-alpha / 2) * g
            total += np.bincount(owner[keep], weights=power, minlength=k)
        if extra is not None:
            total += extra[start:start + k]
        acc += np.exp(-s[None, :] * total[:, None]).sum(axis=0)
    return acc / n


def central_uav_sample(rng, n, lam_lbd, r_star, r_max):
    """Distances from the user to its cluster's UAV after relocation.

    The parent is uniform in the disk of radius r_max around the user; the
    nearest LBD lies at a Rayleigh distance in a uniform direction from the
    parent, and the UAV is pulled onto the circle of radius r_star around it
    whenever the parent lies outside that circle.
    """
    parent = r_max * np.sqrt(rng.random(n))[:, None] * _unit(rng, n)
    r_c = np.sqrt(rng.exponential(1.0 / (math.pi * lam_lbd), n))
    lbd = parent + r_c[:, None] * _unit(rng, n)
    pos = np.where((r_c > r_star)[:, None], lbd + r_star * (parent - lbd) / r_c[:, None], parent)
    return np.hypot(pos[:, 0], pos[:, 1])


def _unit(rng, n):
    phi = 2 * np.pi * rng.random(n)
    return np.column_stack((np.cos(phi), np.sin(phi)))


def scintillation(k_wave, cn2, R):
    """Log-normal scintillation parameter sqrt(0.3 k^(7/6) cn2 R^(11/6))."""
    return math.sqrt(0.3 * k_wave ** (7 / 6) * cn2 * R ** (11 / 6))
