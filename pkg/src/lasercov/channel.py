"""Blockage, path loss and small-scale fading for the four link classes."""

from __future__ import annotations

import numpy as np

from .model import EnvironmentParams, NodeClassParams


def los_probability(env: EnvironmentParams, height, r):
    """Probability that a node at altitude ``height`` and horizontal distance
    ``r`` has a line of sight to a ground user.

    Uses the elevation-angle model ``c - a*exp(-b*arctan(h/r))``; at r = 0 the
    angle is pi/2. The result is clipped to [0, 1].
    """
    theta = np.arctan2(height, np.asarray(r, dtype=float))
    p = env.c - env.a * np.exp(-env.b * theta)
    return np.clip(p, 0.0, 1.0)


def class_probability(params: NodeClassParams, env: EnvironmentParams, r):
    """LOS probability for LOS classes, its complement for NLOS classes."""
    p = los_probability(env, params.height, r)
    return p if params.is_los else 1.0 - p


def thinned_density(params: NodeClassParams, base_density: float, env: EnvironmentParams, r):
    """Density at horizontal distance ``r`` of the class-``params`` sub-process."""
    return base_density * class_probability(params, env, r)


def mean_received_power(params: NodeClassParams, r):
    """Fading-averaged received power (W) from a node at horizontal distance r."""
    r = np.asarray(r, dtype=float)
    return params.rho * params.eta * (r * r + params.height**2) ** (-0.5 * params.alpha_pl)


def sample_power_fading(m: int, rng: np.random.Generator, size=None):
    """Unit-mean Nakagami-m power gain, Gamma(m, 1/m).

    Drawn as the mean of ``m`` standard exponentials so that integer orders
    consume a fixed amount of randomness per sample.
    """
    m = int(m)
    if m < 1:
        raise ValueError("fading order must be >= 1")
    shape = () if size is None else (size if isinstance(size, tuple) else (size,))
    draws = rng.standard_exponential((m,) + shape)
    return draws.mean(axis=0)
