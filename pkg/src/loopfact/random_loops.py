"""Random generators for top-stratum loops with known factors.

Negative and positive factors are built as products of elementary unipotent
loops ``1 + E_ij p(z^{-1})`` (resp. ``p(z)``), which keeps the determinant
identically 1 and the inverse polynomial.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .birkhoff import BirkhoffFactors
from .loopalg import TruncatedLoop, mul, InvolutionConfig, star_theta

TAG = {2: "SL2", 3: "SL3"}


def _split_degrees(total, parts):
    base = [total // parts] * parts
    for i in range(total % parts):
        base[i] += 1
    return base


def random_unipotent(d, n, rng, scale=0.5, sign=-1, n_factors=None):
    """Product of elementary loops with degrees in ``[sign*n, 0]`` and
    constant term 1.

    Consecutive factors use a root vector and its opposite, so the degree
    of the product grows with every factor.
    """
    tag = TAG.get(d, "GL")
    upper = [(i, j) for i in range(d) for j in range(d) if i < j]
    k = n_factors or (2 if d == 2 else 4)
    k = max(1, min(k, n))
    degs = _split_degrees(n, k)
    out = TruncatedLoop.identity(d, tag)
    start = int(rng.integers(2))
    i, j = upper[int(rng.integers(len(upper)))]
    for idx, deg in enumerate(degs):
        if idx % 2 == 0:
            i, j = upper[int(rng.integers(len(upper)))]
            if start:
                i, j = j, i
        else:
            i, j = j, i
        c = np.zeros((deg + 1, d, d), dtype=complex)
        c[0] = np.eye(d)
        coef = (rng.normal(size=deg) + 1j * rng.normal(size=deg)) * scale / np.sqrt(2)
        c[1:, i, j] = coef
        if sign < 0:
            el = TruncatedLoop(c[::-1], -deg, tag)
        else:
            el = TruncatedLoop(c, 0, tag)
        out = mul(out, el, n=None)
    # a constant conjugation mixes the root components of every coefficient
    s = random_sl(d, rng, 0.5)
    return TruncatedLoop(s @ out.coeffs @ np.linalg.inv(s), out.lo, tag)


def random_sl(d, rng, scale=0.5):
    """Random constant in SL(d, C), close enough to the identity to be well
    conditioned."""
    x = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) * scale / np.sqrt(2)
    x -= np.trace(x) / d * np.eye(d)
    return expm(x)


def random_su(d, rng):
    """Haar-distributed element of SU(d)."""
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    q = q * ph[None, :]
    return q / np.linalg.det(q) ** (1.0 / d)


def random_sl2_param(rng, scale=1.0):
    """Random (a, b, c, d) with ad - bc = 1."""
    a, b, c = (rng.normal(size=3) + 1j * rng.normal(size=3)) * scale / np.sqrt(2)
    while abs(a) < 0.2:
        a = (rng.normal() + 1j * rng.normal()) * scale
    return a, b, c, (1 + b * c) / a


def random_factors(d, n, rng, scale=0.5, zero_scale=0.5):
    """Random ``(g_minus, g_zero, g_plus)`` in SL(d) with degrees ``<= n``."""
    gm = random_unipotent(d, n, rng, scale, sign=-1)
    gp = random_unipotent(d, n, rng, scale, sign=+1)
    g0 = random_sl(d, rng, zero_scale)
    return BirkhoffFactors(gm, g0, gp)


def random_symmetric_factors(d, n, rng, cfg=None, scale=0.5, zero_scale=0.5):
    """Random symmetric point data: ``g_plus = star_theta(g_minus)`` and
    ``g_zero`` fixed by ``star_theta``.

    The middle factor is ``k * Theta(k)^{-1}``-style: ``g_zero = s * s^{*Theta}``
    for a random SL element ``s`` near 1, which is fixed by ``star_theta``.
    """
    cfg = cfg or default_config(d)
    gm = random_unipotent(d, n, rng, scale, sign=-1)
    gp = star_theta(gm, cfg)
    s = random_sl(d, rng, zero_scale)
    g0 = s @ cfg.star_theta_matrix(s)
    return BirkhoffFactors(gm, g0, gp)


def default_config(d, epsilon=1):
    """Theta for SL2/SL3 fixing the triangular structure.

    SL2: conjugation by diag(1, -1) (epsilon = +1).  SL3: conjugation by
    diag(1, 1, -1) flips the top root vector (epsilon = +1); diag(1, -1, 1)
    fixes it (epsilon = -1).
    """
    if d == 2:
        if epsilon != 1:
            raise ValueError("only epsilon = +1 is realized for SL2")
        return InvolutionConfig(np.diag([1.0, -1.0]), 1)
    if d == 3:
        if epsilon == 1:
            return InvolutionConfig(np.diag([1.0, 1.0, -1.0]), 1)
        return InvolutionConfig(np.diag([1.0, -1.0, 1.0]), -1)
    raise ValueError("supported dimensions are 2 and 3")
