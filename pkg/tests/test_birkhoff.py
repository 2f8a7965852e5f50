import numpy as np
import pytest
from hypothesis import given, strategies as st

from loopfact.birkhoff import (BirkhoffFactors, factorize, g_minus_from_theta, is_symmetric_point,
                               rh_coords, stratum_report, toeplitz_condition)
from loopfact.errors import LowerStratum
from loopfact.loopalg import InvolutionConfig, TruncatedLoop, mul, star, star_theta
from loopfact.random_loops import (default_config, random_factors, random_su,
                                   random_symmetric_factors, random_unipotent)

E12 = np.array([[0, 1], [0, 0]], dtype=complex)
E21 = np.array([[0, 0], [1, 0]], dtype=complex)
I2 = np.eye(2, dtype=complex)
seeds = st.integers(0, 2 ** 32 - 1)


def test_identity():
    f = factorize(TruncatedLoop.identity(2))
    one = TruncatedLoop.identity(2)
    assert f.g_minus.max_abs_diff(one) == 0 and f.g_plus.max_abs_diff(one) == 0
    assert np.allclose(f.g_zero, I2)


def test_constructed_factors_recovered():
    gm = TruncatedLoop.from_dict({0: I2, -1: E21})
    g0 = np.diag([2.0, 0.5]).astype(complex)
    gp = TruncatedLoop.from_dict({0: I2, 1: E12})
    g = mul(mul(gm, TruncatedLoop.constant(g0)), gp)
    f = factorize(g)
    assert f.max_abs_diff(BirkhoffFactors(gm, g0, gp)) < 1e-10


def test_lower_stratum_representative():
    g = TruncatedLoop.from_dict({1: np.diag([1, 0]), -1: np.diag([0, 1])})
    with pytest.raises(LowerStratum) as exc:
        factorize(g)
    assert exc.value.report is not None and not exc.value.report.in_top_stratum
    assert not stratum_report(g).in_top_stratum


def test_stratum_report_top(rng):
    f = random_factors(2, 6, rng)
    rep = stratum_report(f.product(n=None))
    assert rep.in_top_stratum and rep.residual < 1e-9
    assert np.isfinite(toeplitz_condition(f.product(n=None)))


def test_zero_coordinates_for_trivial_minus_factor():
    co = rh_coords(factorize(TruncatedLoop.identity(2)), order=4)
    assert np.all(co.theta == 0) and np.all(co.x[1:] == 0)


def test_second_coefficient_relation(rng):
    # 2 g_2 = theta_2 + theta_1 g_1, in the w = -1/z expansion
    for _ in range(100):
        gm = random_unipotent(2, 4, rng, sign=-1)
        f = BirkhoffFactors(gm, I2, TruncatedLoop.identity(2))
        co = rh_coords(f, order=4)
        g1, g2 = -co.g_coeffs[1], co.g_coeffs[2]
        assert np.max(np.abs(2 * g2 - (co.theta[2] + co.theta[1] @ g1))) < 1e-10


def test_theta_roundtrip(rng):
    for _ in range(100):
        gm = random_unipotent(3, 5, rng, sign=-1)
        co = rh_coords(BirkhoffFactors(gm, np.eye(3), TruncatedLoop.identity(3)), order=5)
        assert np.max(np.abs(g_minus_from_theta(co.theta) - co.g_coeffs)) < 1e-10


def test_symmetric_point_examples(rng):
    cfg = InvolutionConfig.s2()
    assert is_symmetric_point(TruncatedLoop.identity(2), cfg)
    k = random_su(2, rng)
    kc = TruncatedLoop.constant(k)
    phi = mul(kc, star_theta(kc, cfg))
    assert is_symmetric_point(phi, cfg)
    f = random_factors(2, 4, rng)
    assert not is_symmetric_point(f.product(n=None), cfg)


@given(seeds)
def test_roundtrip_property(seed):
    rng = np.random.default_rng(seed)
    for d, n in ((2, 8), (3, 6)):
        f = random_factors(d, n, rng)
        assert factorize(f.product(n=None)).rel_diff(f) < 1e-9


@given(seeds)
def test_star_swaps_factor_roles(seed):
    # (g- g0 g+)^* = g+^* g0^* g-^*, and g+^* is a negative factor
    rng = np.random.default_rng(seed)
    f = random_factors(2, 5, rng)
    fs = factorize(star(f.product(n=None)))
    want = BirkhoffFactors(star(f.g_plus), f.g_zero.conj().T, star(f.g_minus))
    assert fs.rel_diff(want) < 1e-9


@given(seeds)
def test_symmetric_construction_is_symmetric(seed):
    rng = np.random.default_rng(seed)
    for d, eps in ((2, 1), (3, 1), (3, -1)):
        cfg = default_config(d, eps)
        f = random_symmetric_factors(d, 4, rng, cfg)
        assert is_symmetric_point(f.product(n=None), cfg)


@given(seeds)
def test_small_perturbation_moves_factors_little(seed):
    rng = np.random.default_rng(seed)
    f = random_factors(2, 6, rng)
    g = f.product(n=None)
    eps = 1e-8
    noise = TruncatedLoop(eps * (rng.normal(size=g.coeffs.shape) + 0j), g.lo)
    g2 = TruncatedLoop(g.coeffs + noise.coeffs, g.lo)
    cond = toeplitz_condition(g)
    assert factorize(g2).max_abs_diff(factorize(g)) < 10 * eps * cond


def test_json_roundtrip(rng):
    f = random_factors(3, 4, rng)
    assert BirkhoffFactors.from_json(f.to_json()).max_abs_diff(f) == 0
