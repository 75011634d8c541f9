"""UAV relocation toward laser beam directors and the displacement law."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .pointproc import nearest_many


class Strategy(enum.Enum):
    HOVER = "r_c <= R*"  # UAV stays above its cluster centre
    SHIFT = "r_c > R*"  # UAV pulled to distance R* from its nearest LBD


@dataclass
class DeploymentOutcome:
    uav_positions: np.ndarray  # (n, 2)
    shifted: np.ndarray  # (n,) bool, True where strategy is SHIFT
    r_c: np.ndarray  # (n,) parent-to-nearest-LBD distance
    nearest_lbd: np.ndarray  # (n,) index into the LBD set
    r_star: float = 0.0

    @property
    def strategy(self) -> list[Strategy]:
        return [Strategy.SHIFT if s else Strategy.HOVER for s in self.shifted]

    @property
    def displacement(self) -> np.ndarray:
        return np.where(self.shifted, self.r_c - self.r_star, 0.0)


def relocate(parents, lbds, r_star: float) -> DeploymentOutcome:
    """Place one UAV per cluster parent.

    A parent within ``r_star`` of its nearest LBD keeps its UAV overhead;
    otherwise the UAV moves along the segment from that LBD toward the parent
    and stops at distance exactly ``r_star`` from the LBD.
    """
    parents = np.asarray(parents, dtype=float).reshape(-1, 2)
    lbds = np.asarray(lbds, dtype=float).reshape(-1, 2)
    if len(lbds) == 0:
        raise ValueError("relocate() needs at least one LBD")
    if len(parents) == 0:
        empty = np.zeros(0)
        return DeploymentOutcome(np.zeros((0, 2)), empty.astype(bool), empty, empty.astype(int), float(r_star))
    idx, r_c = nearest_many(parents, lbds)
    shifted = r_c > r_star
    pos = parents.copy()
    if np.any(shifted):
        anchor = lbds[idx[shifted]]
        direction = (parents[shifted] - anchor) / r_c[shifted, None]
        pos[shifted] = anchor + r_star * direction
    return DeploymentOutcome(pos, shifted, r_c, idx, float(r_star))


def displacement_cdf(lambda_lbd: float, r_star: float, alpha):
    """P(displacement <= alpha) for a typical UAV; includes the atom at 0."""
    alpha = np.asarray(alpha, dtype=float)
    cdf = 1.0 - np.exp(-np.pi * lambda_lbd * (r_star + alpha) ** 2)
    return np.where(alpha >= 0, cdf, 0.0)


def displacement_density_parts(lambda_lbd: float, r_star: float):
    """Split the displacement law into ``(continuous_pdf, atom)``.

    ``continuous_pdf(alpha)`` is the density on alpha >= 0 and ``atom`` the
    probability mass at alpha = 0 (UAV not moved).
    """
    atom = 1.0 - np.exp(-np.pi * lambda_lbd * r_star**2)

    def continuous(alpha):
        alpha = np.asarray(alpha, dtype=float)
        x = r_star + alpha
        pdf = 2.0 * np.pi * lambda_lbd * x * np.exp(-np.pi * lambda_lbd * x * x)
        return np.where(alpha >= 0, pdf, 0.0)

    return continuous, atom
