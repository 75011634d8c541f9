"""Monte Carlo campaigns measured at a typical user at the origin.

Each realization draws LBDs, TBSs and cluster parents as PPPs on a square
window centred on the user, adds the user's own cluster parent uniformly
within ``r_max`` of the origin, relocates every UAV toward its nearest LBD,
splits nodes into LOS/NLOS classes and evaluates the SINR under
strongest-mean-power association with Nakagami fading.

Realization ``k`` of a campaign seeded with ``seed`` always draws from
``SeedSequence(seed, spawn_key=(k,))``, so results do not depend on how the
work is split between processes.
"""

from __future__ import annotations

import csv
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import channel
from .deploy import relocate
from .laser import resolve_r_star
from .model import CLASSES, SystemConfig, to_flat, validate
from .pointproc import PointSet2D, sample_ppp, thin_by_los, uniform_in_disk

MODES = ("central_Lu", "central_Nu", "Lu", "Nu", "Lb", "Nb")
OUTAGE = -1
EDGE_GUARD = 5000.0  # m, minimum user-to-boundary distance


@dataclass
class NetworkRealization:
    config: SystemConfig
    sets: dict[str, PointSet2D]  # Lu, Nu, Lb, Nb without the central UAV
    lbds: PointSet2D
    central_uav: np.ndarray  # (2,)
    central_class: str  # "Lu" or "Nu"
    shifted: bool
    r_c: float
    r_star: float
    reference_user: np.ndarray = field(default_factory=lambda: np.zeros(2))

    @property
    def central_distance(self) -> float:
        return float(np.hypot(*(self.central_uav - self.reference_user)))


@dataclass
class UserOutcome:
    serving_mode: str | None  # one of MODES, None on outage
    sinr: float
    serving_distance: float
    covered: np.ndarray  # bool per gamma
    nearest: dict[str, float]  # nearest non-central node per class (inf if none)


def realize(config: SystemConfig, r_star: float, rng: np.random.Generator) -> NetworkRealization:
    sp = config.spatial
    w = sp.region_half_width
    if w < EDGE_GUARD + sp.r_max:
        raise ValueError(f"region half-width {w} m leaves less than {EDGE_GUARD} m around the user")
    lbds = sample_ppp(sp.lambda_lbd, w, rng)
    tbs = sample_ppp(sp.lambda_b, w, rng)
    parents = sample_ppp(sp.lambda_cc, w, rng)
    # the user sits at the origin; its parent is uniform in the disk around it
    ref_parent = uniform_in_disk(sp.r_max, 1, rng)
    all_parents = np.vstack((ref_parent, parents.points))
    dep = relocate(all_parents, lbds.points, r_star)
    h_u = config.uav_height
    h_b = config.classes["Lb"].height
    uavs = PointSet2D(dep.uav_positions[1:], w)
    uav_los, uav_nlos = thin_by_los(uavs, config.env, h_u, rng)
    tbs_los, tbs_nlos = thin_by_los(tbs, config.env, h_b, rng)
    central = dep.uav_positions[0]
    p_los = channel.los_probability(config.env, h_u, np.hypot(*central))
    central_class = "Lu" if rng.random() < p_los else "Nu"
    return NetworkRealization(
        config=config,
        sets={"Lu": uav_los, "Nu": uav_nlos, "Lb": tbs_los, "Nb": tbs_nlos},
        lbds=lbds,
        central_uav=central,
        central_class=central_class,
        shifted=bool(dep.shifted[0]),
        r_c=float(dep.r_c[0]),
        r_star=float(r_star),
    )


def evaluate_user(real: NetworkRealization, gamma_grid, rng: np.random.Generator) -> UserOutcome:
    """Serve the user from the strongest mean-power node and measure its SINR."""
    gamma_grid = np.asarray(gamma_grid, dtype=float)
    cfg = real.config
    powers, faded, labels, dists = [], [], [], []
    nearest = {}
    for cls in CLASSES:
        pts = real.sets[cls].points
        r = np.hypot(pts[:, 0], pts[:, 1])
        p = cfg.classes[cls]
        mean = channel.mean_received_power(p, r)
        powers.append(mean)
        faded.append(mean * channel.sample_power_fading(p.m, rng, len(r)))
        labels.append(np.full(len(r), MODES.index(cls)))
        dists.append(r)
        nearest[cls] = float(r.min()) if len(r) else math.inf
    pc = cfg.classes[real.central_class]
    rc = real.central_distance
    mean_c = float(channel.mean_received_power(pc, rc))
    powers.append(np.array([mean_c]))
    faded.append(mean_c * channel.sample_power_fading(pc.m, rng, 1))
    labels.append(np.array([MODES.index("central_" + real.central_class)]))
    dists.append(np.array([rc]))

    powers = np.concatenate(powers)
    faded = np.concatenate(faded)
    labels = np.concatenate(labels)
    dists = np.concatenate(dists)
    k = int(np.argmax(powers))
    signal = faded[k]
    # summing the others directly avoids cancellation when the signal dominates
    faded[k] = 0.0
    interference = faded.sum()
    denom = interference + cfg.noise_power
    sinr = signal / denom if denom > 0 else math.inf
    return UserOutcome(MODES[labels[k]], float(sinr), float(dists[k]), sinr >= gamma_grid, nearest)


def _realization_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


@dataclass
class EmpiricalMetrics:
    """Per-realization records of a campaign plus derived statistics."""

    gamma_db: np.ndarray
    sinr: np.ndarray  # (n,)
    mode: np.ndarray  # (n,) index into MODES, OUTAGE if no node
    serving_distance: np.ndarray
    central_distance: np.ndarray
    central_class: np.ndarray  # (n,) 0 for Lu, 1 for Nu
    nearest: np.ndarray  # (n, 4) nearest non-central node per class
    shifted: np.ndarray  # (n,) bool
    r_c: np.ndarray
    r_star: float
    seed: int

    @property
    def n(self) -> int:
        return len(self.sinr)

    @property
    def gamma(self) -> np.ndarray:
        return 10.0 ** (self.gamma_db / 10.0)

    @property
    def coverage(self) -> np.ndarray:
        return (self.sinr[:, None] >= self.gamma[None, :]).mean(axis=0)

    @property
    def coverage_stderr(self) -> np.ndarray:
        c = self.coverage
        return np.sqrt(c * (1.0 - c) / self.n)

    @property
    def shares(self) -> dict[str, float]:
        counts = np.bincount(self.mode[self.mode >= 0], minlength=len(MODES))
        return {m: counts[k] / self.n for k, m in enumerate(MODES)}

    @property
    def displacement(self) -> np.ndarray:
        return np.where(self.shifted, self.r_c - self.r_star, 0.0)

    def conditional_association(self, mode: str, edges) -> tuple[np.ndarray, np.ndarray]:
        """Frequency with which ``mode`` serves, binned by its candidate distance.

        For central modes the candidate is the central UAV of that class; for
        the other modes it is the nearest non-central node of the class.
        Returns ``(trials, hits)`` per bin.
        """
        k = MODES.index(mode)
        if mode.startswith("central_"):
            cls = 0 if mode.endswith("Lu") else 1
            sel = self.central_class == cls
            d = self.central_distance[sel]
        else:
            sel = np.isfinite(self.nearest[:, CLASSES.index(mode)])
            d = self.nearest[sel, CLASSES.index(mode)]
        hit = self.mode[sel] == k
        trials, _ = np.histogram(d, bins=edges)
        hits, _ = np.histogram(d[hit], bins=edges)
        return trials, hits

    @classmethod
    def concat(cls, parts: list["EmpiricalMetrics"]) -> "EmpiricalMetrics":
        first = parts[0]
        cat = {name: np.concatenate([getattr(p, name) for p in parts])
               for name in ("sinr", "mode", "serving_distance", "central_distance",
                            "central_class", "nearest", "shifted", "r_c")}
        return cls(first.gamma_db, r_star=first.r_star, seed=first.seed, **cat)

    def summary(self) -> dict:
        return {
            "n": self.n,
            "seed": self.seed,
            "r_star_m": self.r_star,
            "gamma_db": self.gamma_db.tolist(),
            "coverage": self.coverage.tolist(),
            "coverage_stderr": self.coverage_stderr.tolist(),
            "shares": self.shares,
            "hover_fraction": float(np.mean(~self.shifted)),
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["gamma[dB]", "coverage[-]", "stderr[-]"])
            for g, c, e in zip(self.gamma_db, self.coverage, self.coverage_stderr):
                w.writerow([f"{g:.6g}", f"{c:.10g}", f"{e:.10g}"])

    def write_json(self, path, config: SystemConfig | None = None) -> None:
        doc = self.summary()
        if config is not None:
            doc["config"] = to_flat(config)
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)


def _run_chunk(args) -> EmpiricalMetrics:
    config, r_star, gamma_db, seed, start, stop = args
    gamma = 10.0 ** (np.asarray(gamma_db) / 10.0)
    n = stop - start
    sinr = np.empty(n)
    mode = np.empty(n, dtype=np.int64)
    serving = np.empty(n)
    central = np.empty(n)
    cclass = np.empty(n, dtype=np.int64)
    nearest = np.empty((n, len(CLASSES)))
    shifted = np.empty(n, dtype=bool)
    r_c = np.empty(n)
    for row, k in enumerate(range(start, stop)):
        rng = _realization_rng(seed, k)
        real = realize(config, r_star, rng)
        out = evaluate_user(real, gamma, rng)
        sinr[row] = out.sinr
        mode[row] = OUTAGE if out.serving_mode is None else MODES.index(out.serving_mode)
        serving[row] = out.serving_distance
        central[row] = real.central_distance
        cclass[row] = 0 if real.central_class == "Lu" else 1
        nearest[row] = [out.nearest[c] for c in CLASSES]
        shifted[row] = real.shifted
        r_c[row] = real.r_c
    return EmpiricalMetrics(np.asarray(gamma_db, dtype=float), sinr, mode, serving, central,
                            cclass, nearest, shifted, r_c, float(r_star), seed)


def run_campaign(config: SystemConfig, n_realizations: int, seed: int | None = None,
                 gamma_db=None, r_star: float | None = None, workers: int = 1,
                 chunk: int = 2000, progress: bool = False) -> EmpiricalMetrics:
    """Simulate ``n_realizations`` independent networks and aggregate.

    The result is bit-identical for fixed ``(config, seed)`` whatever the
    value of ``workers``.
    """
    if n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    config = validate(config)
    seed = config.numerics.seed if seed is None else int(seed)
    r_star = resolve_r_star(config) if r_star is None else float(r_star)
    gamma_db = np.arange(-10.0, 30.01, 2.0) if gamma_db is None else np.asarray(gamma_db, dtype=float)
    bounds = list(range(0, n_realizations, chunk)) + [n_realizations]
    jobs = [(config, r_star, gamma_db, seed, a, b) for a, b in zip(bounds[:-1], bounds[1:])]
    t0 = time.monotonic()
    parts = []

    def report(done):
        if progress:
            rate = done / max(time.monotonic() - t0, 1e-9)
            print(f"\r{done}/{n_realizations} realizations ({rate:.0f}/s)", end="", file=sys.stderr, flush=True)

    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_run_chunk, jobs):
                parts.append(part)
                report(sum(p.n for p in parts))
    else:
        for job in jobs:
            parts.append(_run_chunk(job))
            report(sum(p.n for p in parts))
    if progress:
        print(file=sys.stderr)
    return EmpiricalMetrics.concat(parts)
