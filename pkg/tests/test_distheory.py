import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import kstest

from loopfact import distheory as D
from loopfact.errors import UnnormalizableTag
from loopfact.random_loops import random_sl, random_su
from loopfact.sampler import haar_su2
from loopfact.stats import noise_band

seeds = st.integers(0, 2 ** 32 - 1)


def random_cartan(rng, x_scale=1.0):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    return D.CartanPoint.from_ab(q[0] + 1j * q[1], q[2] + 1j * q[3], x_scale * rng.normal())


def t_law_mass(p, s):
    """Integral of (1 + |v|^2)^-s over R^p."""
    return math.pi ** (p / 2) * math.gamma(s - p / 2) / math.gamma(s)


# normalizers, each against a closed form

def test_sphere_law_normalizer():
    assert abs(D.ReferenceDensity("EQ321").normalizer - math.pi) < 1e-6


def test_coefficient_law_normalizers():
    # coordinate k carries weight 1/k, contributing a factor k to the mass
    assert abs(D.ReferenceDensity("EQ331", 1).normalizer - t_law_mass(2, 4)) < 1e-6
    assert abs(D.ReferenceDensity("EQ331", 2).normalizer - 2 * t_law_mass(4, 7)) < 1e-6


def test_two_matrix_law_normalizer():
    # weights (2,2,1,1,1,1, 1,1,1/2,1/2,1/2,1/2) multiply to 1/4
    ref = D.ReferenceDensity("EQ330")
    assert abs(ref.normalizer / (2 * t_law_mass(12, 7)) - 1) < 1e-6


def test_sech_normalizer():
    assert abs(D.ReferenceDensity("SECH_CUBED").normalizer - math.pi / 2) < 1e-6


def test_f_rho_law_normalizes():
    from scipy.integrate import quad

    ref = D.ReferenceDensity("F_RHO")
    mass = quad(lambda r: 2 * np.pi * r * ref.radial_profile(r), 0, np.inf, limit=200)[0]
    assert abs(mass / ref.normalizer - 1) < 1e-6


def test_unknown_and_unnormalizable_tags():
    with pytest.raises(ValueError):
        D.ReferenceDensity("EQ999")
    with pytest.raises(UnnormalizableTag):
        D.ReferenceDensity("EQ331", 0)


def test_sphere_law_cdf_at_one():
    assert D.ReferenceDensity("EQ321").radial_cdf(1.0) == pytest.approx(0.5, abs=1e-15)


def test_sphere_law_moebius_invariance(rng):
    ref = D.ReferenceDensity("EQ321")
    for _ in range(20):
        m = random_su(2, rng)
        w = complex(*rng.normal(size=2))
        image = D.moebius(m, w)
        jac = abs(1 / (m[0, 0] + m[0, 1] * w) ** 2) ** 2
        assert abs(ref.density(image) * jac / ref.density(w) - 1) < 1e-12


@pytest.mark.parametrize("tag, N", [("EQ321", 1), ("EQ331", 1), ("EQ331", 3), ("F_RHO", 1)])
def test_samplers_match_radial_law(tag, N):
    ref = D.ReferenceDensity(tag, N)
    s = ref.sample(20000, seed=4)
    first = s if s.ndim == 1 else s[:, 0]
    assert kstest(np.abs(first), ref.radial_cdf).statistic < noise_band(first.size)


def test_sech_sampler_and_cdf():
    ref = D.ReferenceDensity("SECH_CUBED")
    s = ref.sample(20000, seed=2)
    assert kstest(s, ref.cdf).statistic < noise_band(s.size)
    x = np.linspace(-3, 3, 7)
    from scipy.integrate import quad
    numeric = [quad(lambda y: ref.density(y), -np.inf, v)[0] for v in x]
    assert np.max(np.abs(ref.cdf(x) - numeric)) < 1e-8


def test_coherence_reduction_to_itself():
    one = D.ReferenceDensity("EQ331", 1)
    s = one.sample(20000, seed=6)[:, 0]
    assert kstest(np.abs(s), one.radial_cdf).statistic < noise_band(s.size)


# sphere coordinate of a symmetric zero mode

def test_zeta_at_identity():
    assert D.zeta_coordinate(np.eye(2)) == 0


def test_zeta_forms_agree_with_cartan_coordinate(rng):
    for _ in range(200):
        p = random_cartan(rng)
        g0 = p.matrix()
        assert D.is_symmetric_zero_mode(g0)
        z = p.sphere_coordinate
        assert abs(D.zeta_coordinate(g0, "trace") - z) < 1e-10 * max(1, abs(z))
        assert abs(D.zeta_coordinate(g0, "entries") - z) < 1e-10 * max(1, abs(z))


def _printed_trace_form(g0):
    a0, b0, d0 = g0[0, 0].real, g0[0, 1], g0[1, 1].real
    return -np.conj(b0) / (a0 + d0 + math.sqrt(1 + ((a0 - d0) / 2) ** 2))


def _printed_entries_form(g0):
    a0, b0 = g0[0, 0].real, g0[0, 1]
    nb = abs(b0) ** 2
    return -np.conj(b0) * a0 / (a0 * a0 + 1 - nb + 0.5 * math.sqrt(4 * a0 ** 2 + (a0 ** 2 + nb - 1) ** 2))


@pytest.mark.xfail(strict=True, reason="printed denominators lack a factor 1/2; see decisions ledger")
@pytest.mark.parametrize("form", [_printed_trace_form, _printed_entries_form])
def test_printed_zeta_forms(rng, form):
    p = random_cartan(rng)
    assert abs(form(p.matrix()) - p.sphere_coordinate) < 1e-10


# polar coordinate of SL(2, C)

def test_polar_coordinate_is_uniform_on_sphere():
    rng = np.random.default_rng(3)
    n = 20000
    us = haar_su2(rng, n)
    vals = np.array([D.polar_eigen_coordinate(random_sl(2, rng) @ u) for u in us])
    assert kstest(np.abs(vals), D.ReferenceDensity("EQ321").radial_cdf).statistic < noise_band(n)


def test_polar_inequality_holds_iff_d_at_least_a():
    rng = np.random.default_rng(0)
    seen = set()
    for _ in range(1000):
        g = random_sl(2, rng, scale=1.0)
        lhs, rhs, A, Dd = D.polar_inequality(g)
        holds = lhs <= rhs * (1 + 1e-12)
        assert holds == (Dd >= A) or abs(Dd - A) < 1e-9 * (A + Dd)
        seen.add(holds)
    assert seen == {True, False}


@pytest.mark.xfail(strict=True, reason="literal inequality needs D >= A; see decisions ledger")
def test_polar_inequality_literal():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        lhs, rhs, _, _ = D.polar_inequality(random_sl(2, rng, scale=1.0))
        assert lhs <= rhs * (1 + 1e-12)


# Cartan parametrization

def test_jacobian_at_origin_and_half():
    rng = np.random.default_rng(1)
    r0 = D.jacobian_check(D.CartanPoint(random_su(2, rng), 0.0))
    assert abs(r0["det_fd"] - 1) < 1e-5
    r = D.jacobian_check(D.CartanPoint(random_su(2, rng), 0.5))
    assert abs(r["det_fd"] - math.cosh(1.0) ** 2) < 1e-5
    assert r["block_error"] < 1e-6


def test_lower_translation_invariance():
    rng = np.random.default_rng(2)
    for _ in range(20):
        g = random_cartan(rng).matrix()
        t = complex(*rng.normal(size=2))
        low = np.diag([t, 1 / t]) @ np.array([[1, 0], [complex(*rng.normal(size=2)), 1]])
        assert abs(D.lower_translation_check(g, low) - 1) < 1e-5


@given(seeds)
def test_cartan_points_are_symmetric(seed):
    p = random_cartan(np.random.default_rng(seed), x_scale=2.0)
    g = p.matrix()
    assert D.is_symmetric_zero_mode(g, tol=1e-8 * max(1.0, np.max(np.abs(g))))
    assert abs((p.a0 - p.d0) / 2 - math.sinh(2 * p.x)) < 1e-9 * math.cosh(2 * p.x)


# diagonal law

def test_sech_identity():
    x = np.linspace(-5, 5, 101)
    assert np.max(np.abs(D.sech_cubed_consistency(x))) < 1e-14


def test_shear_cdf_two_routes():
    for s in (-2.0, -0.3, 0.0, 0.7, 3.0):
        assert abs(D.shear_cdf_cartan(s) - D.shear_cdf_matrix(s)) < 1e-8


def test_matrix_forms_differ_by_half(rng):
    for _ in range(10):
        a0 = rng.uniform(0.2, 3) * rng.choice([-1, 1])
        assert abs(D.matrix_forms_agree(a0, complex(*rng.normal(size=2))) - 0.5) < 1e-12


def test_diagonal_transform_examples():
    assert D.diag_transform_s2(0.0) == pytest.approx(1.0, abs=1e-12)
    assert abs(D.diag_transform_s2(1.0) - 1 / (1 - 2j)) < 1e-10


def test_fourier_routes():
    for row in D.fourier_check_75([0.0, 0.5, 1.0, 2.0]):
        assert row["abs_error"] < 1e-6
        assert abs(row["direct"] - row["reduced"]) < 1e-6
    for lam in (0.0, 0.5, 1.0, 2.0):
        want = 1 / np.sin(np.pi * (1 - 1j * lam) / 2)
        assert abs(D.sine_product_74(D.S2_ROOT_DATA, lam, D.S2_COXETER) - want) < 1e-12


def test_eq330_pushforwards_follow_sphere_law():
    s = D.sample_reference(D.ReferenceDensity("EQ330"), 20000, seed=7)
    b1, b2p = D.eq330_pushforwards(s)
    cdf = D.ReferenceDensity("EQ321").radial_cdf
    assert kstest(np.abs(b1), cdf).statistic < noise_band(b1.size)
    assert kstest(np.abs(b2p), cdf).statistic < noise_band(b2p.size)


# F(rho)

def test_f_rho_limit_and_dual_quadrature():
    assert abs(D.f_rho_zero_limit() - 2) < 1e-10
    assert abs(D.f_rho(1e-12) - 2) < 1e-6
    assert abs(D.f_rho(1.0) - D.f_rho_legendre(1.0)) < 1e-8


@given(st.floats(1e-3, 1e3))
def test_f_rho_routes_agree(rho):
    assert abs(D.f_rho(rho) - D.f_rho_legendre(rho)) < 1e-7 * max(1.0, D.f_rho(rho))


@pytest.mark.xfail(strict=True, reason="F increases on (0.5, 1, 2); see decisions ledger")
def test_f_rho_decreasing():
    v = [D.f_rho(r) for r in (0.5, 1.0, 2.0)]
    assert v[0] > v[1] > v[2]


@pytest.mark.xfail(strict=True, reason="rho F grows like sqrt(rho); see decisions ledger")
def test_rho_f_stabilizes():
    a, b = 1e3 * D.f_rho(1e3), 1e4 * D.f_rho(1e4)
    assert abs(b - a) / a < 0.01
