"""Closed-form performance expressions evaluated by numerical quadrature.

The central object is :class:`CoverageModel`, which binds a configuration and
a critical charging distance R* and exposes the distance laws, association
probabilities, Laplace transforms of interference and the SINR coverage
probability.

Conventions used throughout:

* ``i`` is the serving class and ``j`` the interfering class, both in
  ``("Lu", "Nu", "Lb", "Nb")``.
* ``void_exponent(j, a)`` is ``2*pi*int_0^a lambda_j(x) x dx``, so that
  ``exp(-void_exponent)`` is the probability of no class-``j`` node within a.
* The strategy average over the central UAV's placement is linear in the
  conditional law of the user-to-central-UAV distance, so every such average
  is computed against the single mixture density :meth:`CoverageModel.central_mixture_pdf`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate

from . import channel
from .deploy import Strategy
from .errors import NumericalError
from .laser import resolve_r_star
from .model import CLASSES, UAV_CLASSES, SystemConfig, validate
from .numerics import (composite_nodes, fd_derivatives, gauss_legendre, geometric_edges,
                       series_weighted_sum, sine_nodes)

BRANCH_TOL = 1e-12  # m


# --------------------------------------------------------------------------
# distance between the reference user and its central UAV


def shifted_disk_pdf(alpha, r_cc, r_max):
    """Density of the distance from a point at offset ``r_cc`` from a disk's
    centre to a point uniform in that disk (radius ``r_max``).

    Arc-length form: the fraction of the circle of radius alpha around the
    point that falls inside the disk. Broadcasts over ``alpha`` and ``r_cc``.
    """
    alpha = np.asarray(alpha, dtype=float)
    r_cc = np.asarray(r_cc, dtype=float)
    a, c = np.broadcast_arrays(alpha, r_cc)
    out = np.zeros(a.shape)
    inside = (a >= 0) & (a + c <= r_max)
    out[inside] = 2.0 * a[inside] / r_max**2
    cross = (a > 0) & (c > 0) & (a + c > r_max) & (np.abs(a - c) < r_max)
    ac, cc = a[cross], c[cross]
    arg = np.clip((ac * ac + cc * cc - r_max**2) / (2.0 * ac * cc), -1.0, 1.0)
    out[cross] = 2.0 * ac * np.arccos(arg) / (math.pi * r_max**2)
    return out


@dataclass(frozen=True)
class CentralDistanceLaw:
    """Law of the user-to-central-UAV distance given the placement strategy.

    ``r_c`` is the cluster centre's distance to its nearest LBD; it is only
    meaningful for :attr:`Strategy.SHIFT`.
    """

    strategy: Strategy
    r_max: float
    r_star: float = 0.0
    r_c: float | None = None

    @classmethod
    def hover(cls, r_max: float, r_star: float = 0.0) -> "CentralDistanceLaw":
        return cls(Strategy.HOVER, r_max, r_star)

    @classmethod
    def shifted(cls, r_c: float, r_star: float, r_max: float) -> "CentralDistanceLaw":
        if r_c <= r_star:
            raise ValueError("a shifted UAV needs r_c > R*")
        return cls(Strategy.SHIFT, r_max, r_star, r_c)

    @property
    def r_cc(self) -> float:
        """Distance between the cluster centre and the relocated UAV."""
        return 0.0 if self.strategy is Strategy.HOVER else self.r_c - self.r_star

    def support(self) -> tuple[float, float]:
        d = self.r_cc
        return max(d - self.r_max, 0.0), self.r_max + d

    def pdf(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        if self.r_cc <= BRANCH_TOL:
            return np.where((alpha >= 0) & (alpha <= self.r_max), 2.0 * alpha / self.r_max**2, 0.0)
        return shifted_disk_pdf(alpha, self.r_cc, self.r_max)

    def pdf_branches(self, alpha):
        """Same density assembled branch by branch from the derivative of the
        CDF (Leibniz rule), with the inner integrals done by quadrature.

        Slow; kept as an independent route to :meth:`pdf`.
        """
        return np.vectorize(self._pdf_branch_scalar, otypes=[float])(alpha)

    def _pdf_branch_scalar(self, alpha: float) -> float:
        rm = self.r_max
        rcc = self.r_cc
        if alpha < 0:
            return 0.0
        if rcc <= BRANCH_TOL:
            return 2.0 * alpha / rm**2 if alpha <= rm else 0.0

        def unshifted(x):
            return 2.0 * x / rm**2 if 0.0 <= x <= rm else 0.0

        def fcos(r):
            return (rcc * rcc + r * r - alpha * alpha) / (2.0 * rcc * r)

        def arccos_clip(x):
            return math.acos(min(1.0, max(-1.0, x)))

        d = alpha - rcc
        ad = abs(d)
        same = ad <= BRANCH_TOL
        if ad >= rm - BRANCH_TOL:
            return unshifted(d)
        if rm <= rcc + alpha + BRANCH_TOL:
            if same:
                return self._arc_integral(alpha, 0.0, rm)
            return (unshifted(d) - 2.0 * d * arccos_clip(fcos(ad)) / (math.pi * rm**2)
                    + self._arc_integral(alpha, ad, rm))
        top = alpha + rcc
        edge = 2.0 * top * arccos_clip(fcos(top)) / (math.pi * rm**2)
        if same:
            return self._arc_integral(alpha, 0.0, top) + edge
        return (unshifted(d) - 2.0 * d * arccos_clip(fcos(ad)) / (math.pi * rm**2)
                + self._arc_integral(alpha, ad, top) + edge)

    def _arc_integral(self, alpha, lo, hi):
        """int_lo^hi 2a / (pi rm^2 rcc sqrt(1 - f(r, a)^2)) dr, singularities
        at r = |a - rcc| and r = a + rcc taken by algebraic weights."""
        rm, rcc = self.r_max, self.r_cc
        if hi <= lo:
            return 0.0
        top = alpha + rcc
        ad = abs(alpha - rcc)
        c = 4.0 * alpha / (math.pi * rm**2)
        hi_singular = abs(hi - top) <= 1e-9 * max(1.0, top)
        beta = -0.5 if hi_singular else 0.0
        if ad <= BRANCH_TOL:
            # sqrt(r^2 - d^2) reduces to r: the lower end is regular
            def smooth(r):
                rest = (r + top) if hi_singular else (r + top) * (top - r)
                return c / math.sqrt(rest)
            val, _ = integrate.quad(smooth, lo, hi, weight="alg", wvar=(0.0, beta), limit=200)
            return val

        def smooth(r):
            rest = (r + ad) * (r + top)
            if not hi_singular:
                rest *= top - r
            return c * r / math.sqrt(rest)

        val, _ = integrate.quad(smooth, lo, hi, weight="alg", wvar=(-0.5, beta), limit=200)
        return val


def _law_rule(law: CentralDistanceLaw, lower: float = 0.0, n: int = 32):
    """Nodes and pdf-weighted weights for int_{lower}^inf g(x) f_law(x) dx."""
    lo, hi = law.support()
    lo = max(lo, lower)
    if hi <= lo:
        return np.zeros(0), np.zeros(0)
    if law.r_cc <= BRANCH_TOL:
        x, w = composite_nodes([lo, hi], n)
        return x, w * law.pdf(x)
    kink = law.r_max - law.r_cc
    pieces = [(lo, min(kink, hi)), (max(kink, lo), hi)] if kink > lo else [(lo, hi)]
    xs, ws = [], []
    for a, b in pieces:
        if b > a:
            x, w = sine_nodes(a, b, n)
            xs.append(x)
            ws.append(w * law.pdf(x))
    return np.concatenate(xs), np.concatenate(ws)


# --------------------------------------------------------------------------
# the evaluator


@dataclass
class CoverageResult:
    gamma: np.ndarray  # linear SINR thresholds
    coverage: np.ndarray

    @property
    def gamma_db(self) -> np.ndarray:
        return 10.0 * np.log10(self.gamma)


def exclusion_radius_params(serving, interferer, r):
    """Radius around the user free of ``interferer``-class nodes when a
    ``serving``-class node at horizontal distance ``r`` is the strongest."""
    r = np.asarray(r, dtype=float)
    if serving.name == interferer.name:
        return r.copy()
    ratio = (interferer.gain / serving.gain) ** (2.0 / interferer.alpha_pl)
    inner = ratio * (serving.height**2 + r * r) ** (serving.alpha_pl / interferer.alpha_pl) - interferer.height**2
    return np.sqrt(np.maximum(inner, 0.0))


class CoverageModel:
    """Analytic evaluator bound to one configuration and one R*."""

    LAPLACE_PANELS = 14
    LAPLACE_NODES = 8
    MIX_NODES = 8
    OUTER_NODES = 12

    def __init__(self, config: SystemConfig, r_star: float | None = None):
        self.config = validate(config)
        self.r_star = float(resolve_r_star(config) if r_star is None else r_star)
        self.env = config.env
        self.params = dict(config.classes)
        self.lam = {c: config.base_density(c) for c in CLASSES}
        self.lam_lbd = config.spatial.lambda_lbd
        self.r_max = config.spatial.r_max
        self.r_trunc = config.numerics.r_trunc
        self.noise = config.noise_power
        self.fd_step = config.numerics.fd_step
        self.p_hover = 1.0 - math.exp(-math.pi * self.lam_lbd * self.r_star**2)
        # beyond this r_c the LBD-distance tail mass is below e^-40
        self.r_c_max = math.sqrt(40.0 / (math.pi * self.lam_lbd))
        self.z_max = max(self.r_c_max - self.r_star, 0.0) + self.r_max

    # ---------------------------------------------------------- densities

    def class_probability(self, j, x):
        return channel.class_probability(self.params[j], self.env, x)

    def density(self, j, x):
        return self.lam[j] * self.class_probability(j, x)

    def _moment_edges(self, h):
        k = np.arange(0, 40)
        edges = (h / 16.0) * 2.0**k
        return np.concatenate(([0.0], edges[edges < 1e7], [1e7]))

    def _los_moment(self, h, a):
        """2*pi*int_0^a P_L(x) x dx for LOS probability at altitude h."""
        a = np.asarray(a, dtype=float)
        edges = self._moment_edges(h)
        lo, hi = edges[:-1], edges[1:]
        t, w = gauss_legendre(16)
        up = np.clip(a[..., None], lo, hi)
        half = 0.5 * (up - lo)
        x = lo[:, None] + half[..., None] * (t + 1.0)
        vals = channel.los_probability(self.env, h, x) * x
        return 2.0 * math.pi * np.sum(half[..., None] * w * vals, axis=(-1, -2))

    def void_exponent(self, j, a):
        """2*pi*int_0^a lambda_j(x) x dx."""
        a = np.asarray(a, dtype=float)
        p = self.params[j]
        los = self._los_moment(p.height, a)
        if p.is_los:
            return self.lam[j] * los
        return self.lam[j] * (math.pi * a * a - los)

    def nn_distance_pdf(self, j, r):
        """Density of the distance to the nearest class-``j`` node."""
        r = np.asarray(r, dtype=float)
        return 2.0 * math.pi * self.density(j, r) * r * np.exp(-self.void_exponent(j, r))

    def exclusion_radius(self, i, j, r):
        """Interferer-free radius for class ``j`` when class ``i`` serves at r."""
        return exclusion_radius_params(self.params[i], self.params[j], r)

    def _exclusion_onset(self, i, j):
        """Serving distance at which the class-j exclusion radius leaves zero."""
        si, sj = self.params[i], self.params[j]
        if i == j:
            return 0.0
        base = (sj.height**2 * (si.gain / sj.gain) ** (2.0 / sj.alpha_pl)) ** (sj.alpha_pl / si.alpha_pl)
        return math.sqrt(base - si.height**2) if base > si.height**2 else 0.0

    # ------------------------------------------------- central distance law

    def law(self, r_c: float | None = None) -> CentralDistanceLaw:
        if r_c is None or r_c <= self.r_star:
            return CentralDistanceLaw.hover(self.r_max, self.r_star)
        return CentralDistanceLaw.shifted(r_c, self.r_star, self.r_max)

    def lbd_distance_pdf(self, r_c):
        r_c = np.asarray(r_c, dtype=float)
        return 2.0 * math.pi * self.lam_lbd * r_c * np.exp(-math.pi * self.lam_lbd * r_c * r_c)

    def central_distance_pdf(self, law: CentralDistanceLaw, alpha):
        return law.pdf(alpha)

    def central_shift_pdf(self, z, n: int = 24):
        """Continuous (shifted-UAV) part of the central-distance mixture."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        rm = self.r_max
        a_hi = np.maximum(rm - z, 0.0)
        xa, wa = composite_nodes(np.stack([np.zeros_like(z), a_hi], -1), n)
        xb, wb = sine_nodes(np.abs(rm - z), z + rm, n)
        total = np.zeros_like(z)
        for x, w in ((xa, wa), (xb, wb)):
            f = shifted_disk_pdf(z[:, None], x, rm) * self.lbd_distance_pdf(self.r_star + x)
            total += np.sum(w * f, axis=-1)
        return total

    def central_mixture_pdf(self, z):
        """Density of the user-to-central-UAV distance averaged over strategies."""
        z = np.asarray(z, dtype=float)
        hover = np.where((z >= 0) & (z <= self.r_max), 2.0 * z / self.r_max**2, 0.0)
        shape = z.shape
        shift = self.central_shift_pdf(z.ravel()).reshape(shape)
        return self.p_hover * hover + shift

    @cached_property
    def _mixture_grid(self):
        rm = self.r_max
        near = rm * np.array([0.0, 0.25, 0.5, 0.75, 1.0])
        far = np.arange(1.5 * rm, self.z_max + 0.5 * rm, 0.5 * rm)
        edges = np.concatenate((near, far))
        edges[-1] = max(edges[-1], self.z_max)
        x, w = composite_nodes(edges, self.MIX_NODES)
        m = self.central_mixture_pdf(x)
        panel = np.repeat(np.arange(len(edges) - 1), self.MIX_NODES)
        return edges, x, w * m, panel

    def _mixture_rule(self, lower):
        """Batched rule for int_{lower}^inf g(z) M(z) dz, one row per lower."""
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        edges, xg, wg, panel = self._mixture_grid
        k = np.clip(np.searchsorted(edges, lower, side="right") - 1, 0, len(edges) - 2)
        beyond = lower >= edges[-1]
        lo = np.where(beyond, edges[-1], np.maximum(lower, 0.0))
        hi = np.where(beyond, edges[-1], edges[k + 1])
        xp, wp = composite_nodes(np.stack([lo, hi], -1), self.MIX_NODES)
        wp = wp * self.central_mixture_pdf(xp)
        keep = panel[None, :] > k[:, None]
        keep &= ~beyond[:, None]
        x = np.concatenate((np.broadcast_to(xg, keep.shape), xp), axis=1)
        w = np.concatenate((np.where(keep, wg, 0.0), wp), axis=1)
        return x, w

    def _central_rule(self, lower, law):
        if law is None:
            return self._mixture_rule(lower)
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        rules = [_law_rule(law, lo) for lo in lower]
        n = max(len(x) for x, _ in rules) or 1
        x = np.ones((len(rules), n))
        w = np.zeros((len(rules), n))
        for row, (xr, wr) in enumerate(rules):
            x[row, :len(xr)] = xr
            w[row, :len(wr)] = wr
        return x, w

    # ------------------------------------------------------ association

    def _void_product(self, i, r, classes):
        total = 0.0
        for j in classes:
            total = total + self.void_exponent(j, self.exclusion_radius(i, j, r))
        return np.exp(-total)

    def association_central(self, r, i):
        """P(central UAV of class i at distance r is the strongest node)."""
        return self._void_product(i, r, CLASSES)

    def association_others(self, r, i):
        """P(nearest class-i node at r beats the nearest of every other class)."""
        return self._void_product(i, r, [j for j in CLASSES if j != i])

    def central_weaker(self, r, i, law: CentralDistanceLaw | None = None):
        """P(the central UAV is weaker than a class-i node at r).

        ``law=None`` averages over the placement strategy.
        """
        return self._central_factor(np.zeros(1), i, np.atleast_1d(r), law)[..., 0].reshape(np.shape(r))

    def association_noncentral(self, r, i, law: CentralDistanceLaw | None = None):
        return self.central_weaker(r, i, law) * self.association_others(r, i)

    # ------------------------------------------------------ Laplace

    def _interference_rule(self, j, a):
        """Nodes x, weights 2*pi*lambda_j(x)*x*dx and mean powers on [a, r_trunc]."""
        a = np.minimum(np.atleast_1d(np.asarray(a, dtype=float)), self.r_trunc)
        p = self.params[j]
        edges = geometric_edges(a, np.full_like(a, self.r_trunc), self.LAPLACE_PANELS, p.height / 4.0)
        x, w = composite_nodes(edges, self.LAPLACE_NODES)
        w = w * 2.0 * math.pi * self.density(j, x) * x
        return x, w, channel.mean_received_power(p, x)

    def laplace_exponent(self, j, s, a):
        """-log of the Laplace transform of class-j interference from nodes
        beyond radius ``a``; ``s`` has shape (len(a), k) or broadcasts to it."""
        a = np.atleast_1d(np.asarray(a, dtype=float))
        x, w, pw = self._interference_rule(j, a)
        m = self.params[j].m
        s = np.asarray(s, dtype=float)
        s2 = s.reshape(len(a), -1) if s.ndim else np.full((len(a), 1), float(s))
        u = s2[..., None] * pw[:, None, :] / m
        one_minus = -np.expm1(-m * np.log1p(u))
        out = np.einsum("rsn,rn->rs", one_minus, w)
        return out.reshape(s.shape) if s.ndim else out[:, 0]

    def _ppp_log_laplace(self, s, i, r):
        """Sum over classes of the PPP interference exponents, serving class i at r."""
        total = 0.0
        for j in CLASSES:
            total = total + self.laplace_exponent(j, s, self.exclusion_radius(i, j, r))
        return total

    def _central_factor(self, s, i, r, law=None):
        """sum_j int_{f_i^j(r)} (m_j/(m_j + s Rbar_j(z)))^{m_j} P_j(z) f(z) dz.

        Equals P(central weaker) at s = 0. ``s`` has shape (len(r), k).
        """
        r = np.atleast_1d(np.asarray(r, dtype=float))
        s = np.asarray(s, dtype=float)
        s2 = s.reshape(len(r), -1) if s.ndim > 1 else np.broadcast_to(s, (len(r), s.size))
        total = np.zeros(s2.shape)
        for j in UAV_CLASSES:
            pj = self.params[j]
            x, w = self._central_rule(self.exclusion_radius(i, j, r), law)
            w = w * self.class_probability(j, x)
            u = s2[..., None] * channel.mean_received_power(pj, x)[:, None, :] / pj.m
            kern = np.exp(-pj.m * np.log1p(u))
            total += np.einsum("rsn,rn->rs", kern, w)
        return total.reshape(s.shape) if s.ndim > 1 else total

    def laplace_central(self, s, i, r):
        """E[exp(-s I)] when the central UAV (class i) serves at distance r."""
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        val = np.exp(-self._ppp_log_laplace(s_arr[None, :], i, np.atleast_1d(r)))[0]
        return val if np.ndim(s) else float(val[0])

    def laplace_noncentral(self, s, i, r, law: CentralDistanceLaw | None = None):
        """E[exp(-s I)] when the nearest class-i node at r serves.

        Includes every other node of all four classes plus the central UAV,
        the latter conditioned on being weaker than the serving node.
        """
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        rr = np.atleast_1d(float(r))
        ppp = np.exp(-self._ppp_log_laplace(s_arr[None, :], i, rr))[0]
        cf = self._central_factor(s_arr, i, rr, law)[0]
        weaker = self._central_factor(np.zeros(1), i, rr, law)[0, 0]
        factor = cf / weaker if weaker > 0 else np.ones_like(cf)
        val = ppp * factor
        return val if np.ndim(s) else float(val[0])

    # ------------------------------------------------------ coverage

    def s_threshold(self, i, r, gamma):
        p = self.params[i]
        r = np.asarray(r, dtype=float)
        return np.asarray(gamma)[None, :] * p.m * (p.height**2 + r[:, None] ** 2) ** (p.alpha_pl / 2) / p.gain

    @cached_property
    def outer_rule(self):
        rm = self.r_max
        edges = {0.0, self.r_trunc}
        edges.update(rm * np.array([0.125, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0]))
        edges.update([300, 400, 550, 700, 900, 1200, 1600, 2000, 2500, 3000, 4000,
                      5000, 6500, 8000, 10000, 13000, 16000])
        edges.add(min(self.z_max, self.r_trunc))
        for i in CLASSES:
            for j in CLASSES:
                edges.add(self._exclusion_onset(i, j))
        e = np.array(sorted(x for x in edges if 0 <= x <= self.r_trunc))
        e = e[np.concatenate(([True], np.diff(e) > 1e-6))]
        return composite_nodes(e, self.OUTER_NODES)

    def _series(self, i, r, gamma, central: bool):
        """sum_k (-s)^k/k! d^k/ds^k L_{I+noise}(s) at s = s_r for each (r, gamma)."""
        s0 = self.s_threshold(i, r, gamma)
        m = self.params[i].m

        def laplace(s):
            flat = s.reshape(len(r), -1)
            logl = -flat * self.noise - self._ppp_log_laplace(flat, i, r)
            val = np.exp(logl)
            if not central:
                val = val * self._central_factor(flat, i, r)
            return val.reshape(s.shape)

        derivs = fd_derivatives(laplace, s0, m - 1, self.fd_step)
        return series_weighted_sum(derivs, s0)

    def serving_weights(self, r):
        """Per-mode densities in r of being served; they integrate to 1 overall."""
        out = {}
        for i in CLASSES:
            out[i] = self.nn_distance_pdf(i, r) * self.association_noncentral(r, i)
        mix = self.central_mixture_pdf(r)
        for i in UAV_CLASSES:
            out["central_" + i] = self.class_probability(i, r) * mix * self.association_central(r, i)
        return out

    def association_shares(self) -> dict[str, float]:
        """Probability of each of the six serving modes."""
        r, w = self.outer_rule
        return {k: float(np.sum(w * v)) for k, v in self.serving_weights(r).items()}

    def coverage(self, gamma) -> CoverageResult:
        """SINR coverage probability at linear thresholds ``gamma``."""
        gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
        if np.any(gamma <= 0):
            raise ValueError("gamma must be > 0")
        r, w = self.outer_rule
        weights = self.serving_weights(r)
        # the non-central series carries P(central weaker) inside its
        # central-UAV factor, so those modes are weighted without it
        for i in CLASSES:
            weights[i] = self.nn_distance_pdf(i, r) * self.association_others(r, i)
        total = np.zeros(len(gamma))
        for mode, weight in weights.items():
            central = mode.startswith("central_")
            i = mode.removeprefix("central_")
            active = weight * w > 0
            if not np.any(active):
                continue
            series = self._series(i, r[active], gamma, central)
            if not np.all(np.isfinite(series)):
                bad = r[active][~np.all(np.isfinite(series), axis=1)]
                raise NumericalError(f"non-finite coverage integrand for mode {mode} near r = {bad[:3]} m")
            total += (w[active] * weight[active]) @ series
        return CoverageResult(gamma, total)


def coverage_probability(config: SystemConfig, gamma, r_star: float | None = None):
    """Coverage probability C(gamma) for linear thresholds ``gamma``."""
    res = CoverageModel(config, r_star).coverage(gamma)
    return res.coverage if np.ndim(gamma) else float(res.coverage[0])
