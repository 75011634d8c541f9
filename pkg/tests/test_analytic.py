import dataclasses
import math

import numpy as np
import pytest
from scipy import integrate

from lasercov.analytic import CentralDistanceLaw, CoverageModel, coverage_probability, shifted_disk_pdf
from lasercov.model import CLASSES, UAV_CLASSES, default_config
from oracles import empirical_cdf_sup, exclusion, pdf_to_cdf, shifted_disk_distances


@pytest.fixture(scope="module")
def urban():
    return CoverageModel(default_config("Urban"))


# ------------------------------------------------------------ distance law

def test_unshifted_law():
    law = CentralDistanceLaw.hover(100.0)
    assert law.pdf(50.0) == pytest.approx(0.01)
    assert law.pdf(150.0) == 0.0


@pytest.mark.parametrize("r_cc", [20.0, 150.0, 400.0])
def test_law_unit_mass(r_cc):
    law = CentralDistanceLaw.shifted(1000.0 + r_cc, 1000.0, 100.0)
    lo, hi = law.support()
    pieces = sorted({lo, hi, max(lo, min(hi, 100.0 - r_cc)), r_cc})
    mass = sum(integrate.quad(law.pdf, a, b, limit=200, epsabs=1e-12)[0] for a, b in zip(pieces[:-1], pieces[1:]))
    assert mass == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("r_cc", [20.0, 60.0, 100.0, 150.0])
def test_branch_form_matches_arc_length_form(r_cc):
    law = CentralDistanceLaw.shifted(1000.0 + r_cc, 1000.0, 100.0)
    lo, hi = law.support()
    alpha = np.linspace(lo, hi, 37)[1:-1]
    alpha = alpha[np.abs(alpha - r_cc) > 1e-6]
    assert law.pdf_branches(alpha) == pytest.approx(law.pdf(alpha), abs=1e-7)


def test_law_support_and_sign():
    law = CentralDistanceLaw.shifted(1400.0, 1000.0, 100.0)
    assert law.support() == (300.0, 500.0)
    a = np.linspace(0, 700, 701)
    p = law.pdf(a)
    assert np.all(p >= 0)
    assert np.all(p[(a < 300) | (a > 500)] == 0)


def test_law_against_geometry():
    rng = np.random.default_rng(11)
    law = CentralDistanceLaw.shifted(1150.0, 1000.0, 100.0)
    d = shifted_disk_distances(150.0, 100.0, 200_000, rng)
    grid = np.linspace(50.0, 250.0, 2001)
    cdf = pdf_to_cdf(law.pdf, grid)
    assert empirical_cdf_sup(d, lambda g: np.interp(g, grid, cdf), grid) < 0.01


def test_shifted_pdf_continuity_at_inner_edge():
    # alpha + r_cc = r_max is where the full circle leaves the disk
    eps = 1e-9
    # arccos has a square-root edge there, so the gap shrinks like sqrt(eps)
    assert abs(shifted_disk_pdf(60 - eps, 40.0, 100.0) - shifted_disk_pdf(60 + eps, 40.0, 100.0)) < 1e-6


def test_mixture_is_a_density(urban):
    r, w = urban.outer_rule
    assert np.sum(w * urban.central_mixture_pdf(r)) == pytest.approx(1.0, abs=1e-5)


# ------------------------------------------------------------ nearest neighbour

def test_nn_pdf_homogeneous_reduction():
    # huge b makes the LOS probability ~1 everywhere
    cfg = default_config()
    cfg = dataclasses.replace(cfg, env=dataclasses.replace(cfg.env, b=1e4))
    m = CoverageModel(cfg)
    r = np.linspace(0, 2000, 9)
    lam = cfg.spatial.lambda_cc
    assert m.nn_distance_pdf("Lu", r) == pytest.approx(2 * math.pi * lam * r * np.exp(-math.pi * lam * r * r), rel=1e-9)


@pytest.mark.parametrize("cls", CLASSES)
def test_nn_pdf_deficit_is_void_probability(urban, cls):
    far = 3e5
    mass, _ = integrate.quad(lambda x: float(urban.nn_distance_pdf(cls, x)), 0, far, limit=500,
                             points=[100, 1000, 5000, 20000])
    assert mass == pytest.approx(1 - math.exp(-float(urban.void_exponent(cls, far))), abs=1e-6)
    assert mass <= 1 + 1e-9


# ------------------------------------------------------------ exclusion radii

def test_exclusion_examples(urban):
    assert urban.exclusion_radius("Lu", "Lb", 0.0) == pytest.approx(math.sqrt(30e4 - 625), rel=1e-12)
    assert urban.exclusion_radius("Lu", "Lb", 0.0) == pytest.approx(547.2, abs=0.05)
    assert urban.exclusion_radius("Lb", "Lu", 0.0) == 0.0
    for c in CLASSES:
        assert urban.exclusion_radius(c, c, 123.0) == 123.0


def test_exclusion_matches_scalar_oracle(urban):
    cl = urban.params
    for i in CLASSES:
        for j in CLASSES:
            if i == j:
                continue
            for r in (0.0, 37.0, 400.0, 5000.0):
                want = exclusion(cl[i].gain, cl[i].alpha_pl, cl[i].height, cl[j].gain, cl[j].alpha_pl, cl[j].height, r)
                assert urban.exclusion_radius(i, j, r) == pytest.approx(want, rel=1e-12, abs=1e-9)


@pytest.mark.parametrize("i", CLASSES)
@pytest.mark.parametrize("j", CLASSES)
def test_exclusion_monotone(urban, i, j):
    f = urban.exclusion_radius(i, j, np.linspace(0, 10000, 400))
    assert np.all(np.diff(f) >= 0)


# ------------------------------------------------------------ association

@pytest.mark.parametrize("i", UAV_CLASSES)
def test_central_association_decreasing(urban, i):
    a = urban.association_central(np.linspace(0, 3000, 61), i)
    assert np.all(np.diff(a) <= 1e-15) and np.all((a >= 0) & (a <= 1))


def test_central_association_without_competitors():
    cfg = default_config()
    sp = dataclasses.replace(cfg.spatial, lambda_b=1e-30, lambda_cc=1e-30)
    m = CoverageModel(dataclasses.replace(cfg, spatial=sp))
    assert m.association_central(np.array([10.0, 900.0]), "Lu") == pytest.approx([1.0, 1.0])


def test_central_weaker_bounds(urban):
    r = np.linspace(0, 3000, 31)
    for i in CLASSES:
        a = urban.central_weaker(r, i)
        assert np.all((a >= -1e-12) & (a <= 1 + 1e-9))


def test_central_weaker_far_uav_is_one(urban):
    # central UAV pushed 10 km away: it never competes with a nearby node
    law = CentralDistanceLaw.shifted(11000.0, 1000.0, 100.0)
    assert urban.central_weaker(np.array([50.0]), "Lb", law)[0] == pytest.approx(1.0, abs=1e-9)


def test_association_completeness():
    for env in ("SubUrban", "Urban", "DenseUrban"):
        shares = CoverageModel(default_config(env)).association_shares()
        assert sum(shares.values()) == pytest.approx(1.0, abs=0.01)


# ------------------------------------------------------------ Laplace

def test_laplace_at_zero(urban):
    assert urban.laplace_central(0.0, "Lu", 200.0) == pytest.approx(1.0)
    assert urban.laplace_noncentral(0.0, "Nb", 200.0) == pytest.approx(1.0)


def test_laplace_monotone(urban):
    s = np.geomspace(1e2, 1e8, 25)
    lc = urban.laplace_central(s, "Lu", 200.0)
    ln = urban.laplace_noncentral(s, "Nb", 200.0)
    assert np.all(np.diff(lc) < 0) and np.all(np.diff(ln) < 0)
    lr = [urban.laplace_central(1e6, "Lu", r) for r in (50.0, 200.0, 800.0)]
    assert np.all(np.diff(lr) > 0)


def test_rayleigh_central_factor_specialization(urban):
    law = CentralDistanceLaw.hover(100.0)
    r, s = 100.0, 3e5
    # a TBS serving at 100 m: the central LOS UAV factor is E[1/(1 + s*Rbar(z))]
    cl = urban.params["Lu"]
    lower = float(urban.exclusion_radius("Lb", "Lu", r))
    lower_n = float(urban.exclusion_radius("Lb", "Nu", r))
    num_lu = integrate.quad(lambda z: law.pdf(z) * float(urban.class_probability("Lu", z))
                            / (1 + s * cl.gain / (z * z + cl.height**2)), lower, 100)[0]
    mn = urban.params["Nu"]
    num_nu = integrate.quad(lambda z: law.pdf(z) * float(urban.class_probability("Nu", z))
                            * (3 / (3 + s * mn.gain * (z * z + mn.height**2) ** -1.5)) ** 3, lower_n, 100)[0]
    den = sum(integrate.quad(lambda z, c=c, lo=lo: law.pdf(z) * float(urban.class_probability(c, z)), lo, 100)[0]
              for c, lo in (("Lu", lower), ("Nu", lower_n)))
    ppp = float(np.exp(-urban._ppp_log_laplace(np.array([[s]]), "Lb", np.array([r])))[0, 0])
    assert urban.laplace_noncentral(s, "Lb", r, law) == pytest.approx(ppp * (num_lu + num_nu) / den, rel=1e-6)


# ------------------------------------------------------------ coverage

def test_coverage_limits_and_monotonicity(urban):
    g = 10 ** (np.arange(-60, 31, 2) / 10)
    c = urban.coverage(g).coverage
    assert c[0] == pytest.approx(1.0, abs=2e-3)
    assert np.all(np.diff(c) <= 1e-12)
    assert np.all((c >= 0) & (c <= 1))


def test_coverage_probability_scalar():
    cfg = dataclasses.replace(default_config(), r_star=1000.0)
    assert isinstance(coverage_probability(cfg, 1.0), float)
    with pytest.raises(ValueError):
        coverage_probability(cfg, 0.0)
