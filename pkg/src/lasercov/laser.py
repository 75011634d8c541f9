"""Laser power beaming: harvested power, backhaul SNR, turbulence, and the
critical charging distance R* within which a UAV stays powered.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf, erfinv

from .errors import InfeasibleError
from .model import LaserLinkParams
from .numerics import bisect, lambert_w0, scan_bracket

log = logging.getLogger(__name__)


class Regime(enum.Enum):
    NON_TURBULENT = "NonTurbulent"
    TURBULENT = "Turbulent"


@dataclass(frozen=True)
class ChargingSolution:
    r_star: float  # m
    regime: Regime
    residual: float  # W


def _kernel(laser: LaserLinkParams, h, R):
    """Beer-Lambert attenuation over beam-spread geometry at slant range."""
    d = np.hypot(np.asarray(R, dtype=float), h)
    return laser.wTchi * laser.p_trans * np.exp(-laser.alpha_atten * d) / (laser.D + d * laser.delta_theta) ** 2


def harvested_power(laser: LaserLinkParams, h: float, R, h_t=1.0):
    """Electrical power (W) harvested by a UAV at altitude h, horizontal range R."""
    return np.asarray(h_t) * (1.0 - laser.delta_s) * _kernel(laser, h, R)


def backhaul_snr(laser: LaserLinkParams, h: float, R, h_t=1.0):
    """SNR of the on-off keyed optical backhaul carried by the split-off power."""
    num = laser.delta_s * laser.eta_det * np.asarray(h_t) * _kernel(laser, h, R)
    return num / (2.0 * laser.planck * laser.photon_frequency * laser.delta_f)


def sigma_turbulence(k_wave: float, cn2: float, R):
    """Log-normal scintillation parameter at horizontal range R (0 at R = 0)."""
    R = np.maximum(np.asarray(R, dtype=float), 0.0)
    return np.sqrt(0.3 * k_wave ** (7.0 / 6.0) * cn2 * R ** (11.0 / 6.0))


def sample_turbulence(sigma, rng: np.random.Generator, size=None):
    """Gain h_t ~ LogNormal(mean of log -2*sigma, std of log 2*sqrt(sigma))."""
    sigma = np.asarray(sigma, dtype=float)
    return np.exp(rng.normal(-2.0 * sigma, 2.0 * np.sqrt(sigma), size=size))


def energy_coverage_probability(laser: LaserLinkParams, h: float, R):
    """P(h_t * p_harv(R) >= p_prop + p_comm) under log-normal turbulence."""
    sigma = sigma_turbulence(laser.k_wave, laser.cn2, R)
    ratio = np.log(laser.demand / harvested_power(laser, h, R))
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = (ratio + 2.0 * sigma) / (2.0 * np.sqrt(2.0 * sigma))
    # sigma == 0: deterministic link
    arg = np.where(sigma > 0, arg, np.where(ratio > 0, np.inf, -np.inf))
    return 0.5 - 0.5 * erf(arg)


def critical_distance_no_turbulence(laser: LaserLinkParams, h: float) -> ChargingSolution:
    """Closed-form R* without turbulence, via the principal Lambert W branch."""
    demand = laser.demand
    if harvested_power(laser, h, 0.0) < demand:
        raise InfeasibleError(
            f"harvested power directly above the LBD ({float(harvested_power(laser, h, 0.0)):.4g} W) "
            f"is below the {demand:.4g} W demand"
        )
    ratio = laser.D / laser.delta_theta
    arg = laser.alpha_atten / (2 * laser.delta_theta) * math.sqrt(
        (1 - laser.delta_s) * laser.wTchi * laser.p_trans * math.exp(laser.alpha_atten * ratio) / demand
    )
    if laser.alpha_atten > 0:
        slant = 2.0 / laser.alpha_atten * lambert_w0(arg) - ratio
    else:
        # alpha -> 0 limit: W0(x) ~ x
        slant = math.sqrt((1 - laser.delta_s) * laser.wTchi * laser.p_trans / demand) / laser.delta_theta - ratio
    r = math.sqrt(max(slant * slant - h * h, 0.0))
    residual = float(harvested_power(laser, h, r)) - demand
    return ChargingSolution(r, Regime.NON_TURBULENT, residual)


def turbulent_balance(laser: LaserLinkParams, h: float, B: float, R):
    """Left side of the turbulent energy balance; its root is R*(B)."""
    sigma = sigma_turbulence(laser.k_wave, laser.cn2, R)
    factor = np.exp(2.0 * np.sqrt(2.0 * sigma) * erfinv(1.0 - 2.0 * B) - 2.0 * sigma)
    return harvested_power(laser, h, R) * factor - laser.demand


def critical_distance_turbulent(laser: LaserLinkParams, h: float, B: float | None = None,
                                tol: float = 1e-9) -> ChargingSolution:
    """R* such that energy coverage equals ``B`` under log-normal turbulence."""
    B = laser.B_threshold if B is None else B
    if not 0.5 < B < 1.0:
        raise ValueError(f"B must lie in (0.5, 1), got {B}")
    upper = critical_distance_no_turbulence(laser, h).r_star + 1.0

    def f(R):
        return float(turbulent_balance(laser, h, B, R))

    lo, hi, values = scan_bracket(f, 1.0, upper)
    if np.any(np.diff(values) > 1e-9 * laser.demand):
        log.warning("turbulent energy balance is not monotone on [1, %.1f] m", upper)
    r = bisect(f, lo, hi, tol=tol)
    return ChargingSolution(r, Regime.TURBULENT, f(r))


def resolve_r_star(config) -> float:
    """R* used by the deployment: the configured override, else R*(B)."""
    if config.r_star is not None:
        return float(config.r_star)
    return critical_distance_turbulent(config.laser, config.uav_height, tol=config.numerics.root_tol).r_star


__all__ = [
    "ChargingSolution", "Regime", "harvested_power", "backhaul_snr", "sigma_turbulence",
    "sample_turbulence", "energy_coverage_probability", "critical_distance_no_turbulence",
    "critical_distance_turbulent", "turbulent_balance", "resolve_r_star", "InfeasibleError",
]
