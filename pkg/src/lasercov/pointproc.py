"""Point-process sampling: homogeneous PPPs, Matern clusters, LOS thinning.

Points live in an axis-aligned square ``[-half_width, half_width]^2`` centred
on the reference user, which sits at the origin.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .channel import los_probability
from .model import EnvironmentParams


@dataclass
class PointSet2D:
    points: np.ndarray  # (n, 2), metres
    half_width: float

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)

    def __len__(self):
        return len(self.points)

    @property
    def radii(self) -> np.ndarray:
        """Horizontal distances to the origin."""
        return np.hypot(self.points[:, 0], self.points[:, 1])

    def inside(self) -> bool:
        return bool(np.all(np.abs(self.points) <= self.half_width))


@dataclass
class ClusterSet:
    parents: PointSet2D
    offsets: np.ndarray  # (k, 2) member offsets from their parent
    owner: np.ndarray  # (k,) parent index of each member

    def members(self, i: int) -> np.ndarray:
        return self.parents.points[i] + self.offsets[self.owner == i]


def uniform_in_disk(radius: float, n, rng: np.random.Generator) -> np.ndarray:
    r = radius * np.sqrt(rng.random(n))
    phi = 2.0 * np.pi * rng.random(n)
    return np.column_stack((r * np.cos(phi), r * np.sin(phi)))


def sample_ppp(density: float, half_width: float, rng: np.random.Generator) -> PointSet2D:
    """Homogeneous PPP of the given density on the square window."""
    if density < 0:
        raise ValueError("density must be >= 0")
    area = (2.0 * half_width) ** 2
    n = rng.poisson(density * area) if density > 0 else 0
    pts = rng.uniform(-half_width, half_width, size=(n, 2))
    return PointSet2D(pts, half_width)


def sample_mcp(lambda_cc: float, r_max: float, mean_members: float, half_width: float,
               rng: np.random.Generator) -> ClusterSet:
    """Matern cluster process: PPP parents with Poisson members uniform in a disk."""
    if r_max <= 0:
        raise ValueError("r_max must be > 0")
    parents = sample_ppp(lambda_cc, half_width, rng)
    counts = rng.poisson(mean_members, len(parents)) if len(parents) else np.zeros(0, int)
    owner = np.repeat(np.arange(len(parents)), counts)
    offsets = uniform_in_disk(r_max, owner.size, rng)
    return ClusterSet(parents, offsets, owner)


def nearest(point, points) -> tuple[int, float]:
    """Index of and distance to the member of ``points`` closest to ``point``.

    Ties go to the lowest index.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("nearest() of an empty point set")
    d = np.hypot(pts[:, 0] - point[0], pts[:, 1] - point[1])
    i = int(np.argmin(d))
    return i, float(d[i])


def nearest_many(queries, points) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`nearest` for many query points (KD-tree backed)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("nearest() of an empty point set")
    dist, idx = cKDTree(pts).query(np.asarray(queries, dtype=float).reshape(-1, 2))
    return idx, dist


def thin_by_los(points: PointSet2D, env: EnvironmentParams, height: float,
                rng: np.random.Generator) -> tuple[PointSet2D, PointSet2D]:
    """Split ``points`` into LOS and NLOS sets as seen from the origin.

    Each point is LOS independently with the probability given by its
    horizontal distance to the origin; the two outputs partition the input.
    """
    keep = rng.random(len(points)) < los_probability(env, height, points.radii)
    return (PointSet2D(points.points[keep], points.half_width),
            PointSet2D(points.points[~keep], points.half_width))


def dump_csv(path, **sets) -> None:
    """Write named point sets as ``x,y,kind`` rows for visual inspection."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x[m]", "y[m]", "kind"])
        for kind, s in sets.items():
            pts = s.points if isinstance(s, PointSet2D) else np.asarray(s).reshape(-1, 2)
            for x, y in pts:
                w.writerow([f"{x:.3f}", f"{y:.3f}", kind])
