import numpy as np
import pytest
from hypothesis import given, strategies as st

from loopfact.errors import DimensionMismatch, SingularOnCircle, StepTooLarge
from loopfact.loopalg import (InvolutionConfig, TruncatedLoop, circle_grid, energy, inverse,
                              mul, star, theta)
from loopfact.random_loops import random_su
from loopfact.sampler import rotation_loop

E11 = np.array([[1, 0], [0, 0]], dtype=complex)
E12 = np.array([[0, 1], [0, 0]], dtype=complex)
E21 = np.array([[0, 0], [1, 0]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def random_loop(rng, d=2, lo=-3, hi=3, scale=0.3):
    c = (rng.normal(size=(hi - lo + 1, d, d)) + 1j * rng.normal(size=(hi - lo + 1, d, d))) * scale
    return TruncatedLoop(c, lo)


seeds = st.integers(0, 2 ** 32 - 1)


def test_identity_times_loop(rng):
    g = random_loop(rng)
    assert mul(TruncatedLoop.identity(2), g).max_abs_diff(g) == 0


def test_hand_expansion():
    f = TruncatedLoop.from_dict({0: I2, -1: E12})
    g = TruncatedLoop.from_dict({0: I2, 1: E21})
    want = TruncatedLoop.from_dict({0: I2 + E11, -1: E12, 1: E21})
    assert mul(f, g).max_abs_diff(want) < 1e-15


def test_product_matches_grid(rng):
    f, g = random_loop(rng, lo=-4, hi=4), random_loop(rng, lo=-4, hi=4)
    z = circle_grid(64)
    prod = mul(f, g, n=8)
    assert not prod.truncated
    assert np.max(np.abs(prod.evaluate(z) - f.evaluate(z) @ g.evaluate(z))) < 1e-12


def test_truncation_flag(rng):
    f, g = random_loop(rng, lo=-6, hi=6), random_loop(rng, lo=-6, hi=6)
    assert mul(f, g, n=8).truncated
    assert not mul(f, g, n=None).truncated


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        mul(TruncatedLoop.identity(2), TruncatedLoop.identity(3))


def test_inverse_examples():
    assert inverse(TruncatedLoop.identity(2)).max_abs_diff(TruncatedLoop.identity(2)) < 1e-14
    d = TruncatedLoop.constant(np.diag([2, 0.5]))
    assert inverse(d).max_abs_diff(TruncatedLoop.constant(np.diag([0.5, 2]))) < 1e-14
    nil = TruncatedLoop.from_dict({0: I2, -1: E12})
    assert inverse(nil).max_abs_diff(TruncatedLoop.from_dict({0: I2, -1: -E12})) < 1e-14


def test_inverse_roundtrip(rng):
    g = TruncatedLoop.from_dict({0: 3 * I2, -1: rng.normal(size=(2, 2)), 2: rng.normal(size=(2, 2))})
    gi = inverse(g, n=16)
    one = mul(g, gi, n=10)
    assert one.max_abs_diff(TruncatedLoop.identity(2)) < 1e-10


def test_inverse_singular():
    # det(1 - z E) with E = I vanishes at z = 1
    g = TruncatedLoop.from_dict({0: I2, 1: -I2})
    with pytest.raises(SingularOnCircle):
        inverse(g)


def test_star_and_theta_examples():
    one = TruncatedLoop.identity(2)
    cfg = InvolutionConfig.s2()
    assert star(one).max_abs_diff(one) == 0
    assert theta(one, cfg).max_abs_diff(one) == 0
    mono = TruncatedLoop.from_dict({1: E11, -1: np.diag([0, 1])})
    want = TruncatedLoop.from_dict({-1: E11, 1: np.diag([0, 1])})
    assert star(mono).max_abs_diff(want) == 0


def test_star_is_inverse_on_unitary_loops(rng):
    # SU(2)-valued loop: exp of a trigonometric polynomial in su(2)
    m = 64
    ts = np.arange(m) / m
    pts = []
    a, b = random_su(2, rng), random_su(2, rng)
    for t in ts:
        x = np.cos(2 * np.pi * t) * a + np.sin(2 * np.pi * t) * b
        x = (x - x.conj().T) / 2
        w, v = np.linalg.eigh(1j * x)
        pts.append(v @ np.diag(np.exp(-1j * w)) @ v.conj().T)
    g = TruncatedLoop.from_grid(np.array(pts), 16)
    assert star(g).max_abs_diff(inverse(g, n=16)) < 1e-10


def test_energy_constant_and_rotation():
    assert energy(np.repeat(np.eye(2)[None], 9, axis=0)) == 0
    e = energy(rotation_loop(256))
    assert abs(e - 4 * np.pi ** 2) < 1e-6
    assert abs(energy(rotation_loop(512)) - e) < 1e-8


def test_energy_step_too_large():
    pts = np.array([np.eye(2), np.diag([-1, -1]), np.eye(2)], dtype=complex)
    with pytest.raises(StepTooLarge):
        energy(pts)


def test_json_roundtrip(rng):
    g = random_loop(rng)
    assert TruncatedLoop.from_json(g.to_json()).max_abs_diff(g) == 0


@given(seeds)
def test_star_and_theta_are_involutions(seed):
    rng = np.random.default_rng(seed)
    g = random_loop(rng)
    cfg = InvolutionConfig.s2()
    assert star(star(g)).max_abs_diff(g) == 0
    assert theta(theta(g, cfg), cfg).max_abs_diff(g) == 0
    assert star(theta(g, cfg)).max_abs_diff(theta(star(g), cfg)) < 1e-15


@given(seeds)
def test_star_reverses_products(seed):
    rng = np.random.default_rng(seed)
    f, g = random_loop(rng), random_loop(rng)
    assert star(mul(f, g)).max_abs_diff(mul(star(g), star(f))) < 1e-14


@given(seeds)
def test_evaluation_is_multiplicative(seed):
    rng = np.random.default_rng(seed)
    f, g = random_loop(rng), random_loop(rng)
    z = circle_grid(32)
    p = mul(f, g)
    assert np.max(np.abs(p.evaluate(z) - f.evaluate(z) @ g.evaluate(z))) < 1e-12


@given(seeds)
def test_sl_determinant_preserved(seed):
    from loopfact.random_loops import random_factors

    rng = np.random.default_rng(seed)
    f = random_factors(2, 3, rng)
    g = f.product(n=None)
    assert g.check_group()
    assert star(g).check_group() and theta(g, InvolutionConfig.s2()).check_group()
    assert inverse(g, n=12).det_error() < 1e-9
