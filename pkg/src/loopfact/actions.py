"""Closed-form group actions in factorization coordinates.

The loop embedding of SL(2) attached to the highest root sends
``[[a, b], [c, d]]`` to the loop that is ``d`` at the top-left corner,
``c/z`` top-right, ``b z`` bottom-left, ``a`` bottom-right and the identity
elsewhere.  Each action below returns factors computed from formulas in the
input factors only; :func:`oracle` multiplies out and refactors, and the
test-suite compares the two routes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .birkhoff import (BirkhoffFactors, factorize, rh_coords, series_log,
                       _series_mul, _series_inverse, TOL_DIV)
from .errors import Degenerate
from .loopalg import TruncatedLoop, mul, star_theta, InvolutionConfig

TOL_UNIMODULAR = 1e-12


@dataclass(frozen=True)
class MoebiusParam:
    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if abs(det - 1) > TOL_UNIMODULAR * max(1.0, abs(self.a * self.d), abs(self.b * self.c)):
            raise ValueError(f"ad - bc = {det} is not 1")

    @classmethod
    def identity(cls):
        return cls(1, 0, 0, 1)

    @classmethod
    def from_matrix(cls, m):
        return cls(complex(m[0][0]), complex(m[0][1]), complex(m[1][0]), complex(m[1][1]))

    def matrix(self):
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def inv(self):
        return MoebiusParam(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other):
        return MoebiusParam.from_matrix(self.matrix() @ other.matrix())

    def star_theta(self, epsilon=1):
        """Parameter of ``i0(h)^{*Theta}``: ``[[conj a, -eps conj c],
        [-eps conj b, conj d]]``."""
        a, b, c, d = (np.conj(v) for v in (self.a, self.b, self.c, self.d))
        return MoebiusParam(a, -epsilon * c, -epsilon * b, d)

    def fractional(self, w):
        return (self.c + self.d * w) / (self.a + self.b * w)


@dataclass(frozen=True, eq=False)
class RootEmbedding:
    e_theta: np.ndarray
    e_minus_theta: np.ndarray
    h_theta: np.ndarray
    epsilon: int = 1

    @classmethod
    def for_dim(cls, d, epsilon=1):
        e = np.zeros((d, d), dtype=complex)
        e[0, d - 1] = 1
        h = np.zeros((d, d), dtype=complex)
        h[0, 0], h[d - 1, d - 1] = 1, -1
        return cls(e, e.T.copy(), h, epsilon)

    @property
    def dim(self):
        return self.e_theta.shape[0]

    def weights(self):
        """Eigenvalue of ``ad(h_theta)`` on each matrix unit."""
        hd = np.real(np.diag(self.h_theta))
        return hd[:, None] - hd[None, :]

    def power_h(self, s):
        """``s ** h_theta`` (integer exponents, so no branch choice)."""
        hd = np.real(np.diag(self.h_theta)).astype(int)
        return np.diag([s ** int(k) if k >= 0 else 1 / s ** int(-k) for k in hd]).astype(complex)

    def i0(self, h):
        d = self.dim
        c = np.zeros((3, d, d), dtype=complex)
        c[1] = np.eye(d)
        c[1, 0, 0], c[1, d - 1, d - 1] = h.d, h.a
        c[0, 0, d - 1] = h.c
        c[2, d - 1, 0] = h.b
        return TruncatedLoop(c, -1, "SL2" if d == 2 else "SL3")

    def check_relations(self):
        e, f, h = self.e_theta, self.e_minus_theta, self.h_theta
        return max(np.max(np.abs(e @ f - f @ e - h)),
                   np.max(np.abs(h @ e - e @ h - 2 * e)),
                   np.max(np.abs(h @ f - f @ h + 2 * f)))


def _loop(coeffs_by_degree, d):
    return TruncatedLoop.from_dict(coeffs_by_degree, dim=d)


def _tag(d):
    return "SL2" if d == 2 else "SL3"


def _retag(g, d):
    return TruncatedLoop(g.coeffs, g.lo, _tag(d))


def _clean_minus(g, d):
    """Drop the (numerically zero) positive part of a nonpositive loop."""
    return _retag(g.with_window(g.lo, 0), d)


def _clean_plus(g, d):
    return _retag(g.with_window(0, g.hi), d)


def _split_coordinate(series, step, left):
    """Second-order log coefficient after splitting off ``exp(step u)``.

    ``series`` holds ``1, s_1, s_2, ...`` in a variable ``u``; the first-order
    root part ``step`` is removed by multiplying with ``exp(step u)`` on the
    left (``left=True``) or on the right, and the ``u**2`` coefficient of the
    logarithm of the result is returned.
    """
    d = series.shape[1]
    ex = np.zeros((3, d, d), dtype=complex)
    ex[0] = np.eye(d)
    ex[1] = step
    ex[2] = step @ step / 2
    s = series[:3]
    prod = _series_mul(ex, s, 2) if left else _series_mul(s, ex, 2)
    return series_log(prod, 2)[2]


def _scaled_weight_part(x, a, weights, exclude):
    """``a * a^{-ad h}(x)`` with the ``exclude`` weight removed; pass negated
    weights for ``a * a^{ad h}(x)``."""
    out = np.zeros_like(x)
    for k in np.unique(weights):
        if k == exclude:
            continue
        mask = weights == k
        out[mask] = x[mask] * (a ** (1 - k) if 1 - k >= 0 else 1 / a ** (k - 1))
    return out


def _check(value, what):
    if abs(value) < TOL_DIV:
        raise Degenerate(f"{what} = {value!r} is on the excluded locus")


def act_left_i0(h, f, emb=None):
    """Factors of ``i0(h) * g``."""
    d = f.dim
    emb = emb or RootEmbedding.for_dim(d)
    co = rh_coords(f, order=max(2, -f.g_minus.lo))
    Z1 = co.Z[1]
    alpha = h.a + h.b * Z1
    _check(alpha, "a + b Z1")
    e, fm = emb.e_theta, emb.e_minus_theta
    x1p = co.x[1] - Z1 * e
    w = emb.weights()
    inner = _scaled_weight_part(x1p, h.a, w, exclude=2)
    z2 = _split_coordinate(co.g_coeffs, -Z1 * e, left=False)[0, d - 1]
    l0 = expm(h.b * (fm @ inner - inner @ fm) - h.b ** 2 * z2 * fm)
    n_plus = _loop({0: np.eye(d), 1: -(h.b / alpha) * fm}, d)
    right = mul(n_plus, TruncatedLoop.constant(emb.power_h(alpha) @ np.linalg.inv(l0)), n=None)
    gm = mul(mul(emb.i0(h), f.g_minus, n=None), right, n=None)
    g0 = l0 @ emb.power_h(1 / alpha) @ f.g_zero
    g0inv = np.linalg.inv(f.g_zero)
    p = _loop({0: np.eye(d), 1: (h.b / alpha) * (g0inv @ fm @ f.g_zero)}, d)
    gp = mul(p, f.g_plus, n=None)
    return BirkhoffFactors(_clean_minus(gm, d), g0, _clean_plus(gp, d))


def act_right_i0(h, f, emb=None):
    """Factors of ``g * i0(h)``."""
    d = f.dim
    emb = emb or RootEmbedding.for_dim(d)
    co = rh_coords(f, order=max(2, -f.g_minus.lo))
    W1 = co.W[1]
    beta = h.a + h.c * W1
    _check(beta, "a + c W1")
    e, fm = emb.e_theta, emb.e_minus_theta
    y1p = co.y[1] - W1 * fm
    w = emb.weights()
    inner = _scaled_weight_part(y1p, h.a, -w, exclude=2)
    P = np.array([f.plus_coeff(k) for k in range(3)])
    w2 = _split_coordinate(P, -W1 * fm, left=True)[d - 1, 0]
    u0 = expm(-h.c * (e @ inner - inner @ e) - h.c ** 2 * w2 * e)
    g0 = f.g_zero
    n_minus = _loop({0: np.eye(d), -1: (h.c / beta) * (g0 @ e @ np.linalg.inv(g0))}, d)
    gm = mul(f.g_minus, n_minus, n=None)
    g0n = g0 @ emb.power_h(1 / beta) @ u0
    left = np.linalg.inv(u0) @ emb.power_h(beta)
    nm = _loop({0: left, -1: left @ (-(h.c / beta) * e)}, d)
    gp = mul(mul(nm, f.g_plus, n=None), emb.i0(h), n=None)
    return BirkhoffFactors(_clean_minus(gm, d), g0n, _clean_plus(gp, d))


# SL(2) formulas written entrywise ------------------------------------------

def act_left_sl2(h, f):
    """Entrywise SL(2) form of the left action (no exponentials)."""
    co = rh_coords(f, order=max(2, -f.g_minus.lo))
    A1, B1, B2 = co.A[1], co.B[1], co.B[2]
    a, b = h.a, h.b
    alpha = a + b * B1
    _check(alpha, "a + b B1")
    gamma0 = (-2 * a * b * A1 + b ** 2 * (B2 - A1 * B1)) / alpha
    right = _loop({0: [[alpha, 0], [gamma0, 1 / alpha]], 1: [[0, 0], [-b, 0]]}, 2)
    emb = RootEmbedding.for_dim(2)
    gm = mul(mul(emb.i0(h), f.g_minus, n=None), right, n=None)
    g0 = np.array([[1 / alpha, 0], [-gamma0, alpha]]) @ f.g_zero
    g0inv = np.linalg.inv(f.g_zero)
    p = _loop({0: np.eye(2), 1: g0inv @ np.array([[0, 0], [b / alpha, 0]]) @ f.g_zero}, 2)
    return BirkhoffFactors(_clean_minus(gm, 2), g0, _clean_plus(mul(p, f.g_plus, n=None), 2))


def act_right_inverse_sl2(h, f):
    """Entrywise SL(2) form of ``g * i0(h)^{-1}``."""
    P = np.array([f.plus_coeff(k) for k in range(3)])
    a1, c1, c2 = P[1, 0, 0], P[1, 1, 0], P[2, 1, 0]
    c, d = h.c, h.d
    alpha_p = d - c * c1
    _check(alpha_p, "d - c c1")
    beta0 = (2 * c * d * a1 + c ** 2 * (c2 - a1 * c1)) / alpha_p
    g0 = f.g_zero
    g0inv = np.linalg.inv(g0)
    nm = _loop({0: np.eye(2), -1: g0 @ np.array([[0, -c / alpha_p], [0, 0]]) @ g0inv}, 2)
    gm = mul(f.g_minus, nm, n=None)
    g0n = g0 @ np.array([[1 / alpha_p, -beta0], [0, alpha_p]])
    emb = RootEmbedding.for_dim(2)
    left = _loop({0: [[alpha_p, beta0], [0, 1 / alpha_p]], -1: [[0, c], [0, 0]]}, 2)
    gp = mul(mul(left, f.g_plus, n=None), emb.i0(h.inv()), n=None)
    return BirkhoffFactors(_clean_minus(gm, 2), g0n, _clean_plus(gp, 2))


def sigma_loop(g):
    """Entrywise automorphism: top-right series times z, bottom-left times 1/z."""
    if g.dim != 2:
        raise ValueError("sigma is defined here for 2x2 loops")
    lo, hi = g.lo - 1, g.hi + 1
    c = np.zeros((hi - lo + 1, 2, 2), dtype=complex)
    src = g.coeffs
    n = src.shape[0]
    off = g.lo - lo
    c[off:off + n, 0, 0] = src[:, 0, 0]
    c[off:off + n, 1, 1] = src[:, 1, 1]
    c[off + 1:off + 1 + n, 0, 1] = src[:, 0, 1]
    c[off - 1:off - 1 + n, 1, 0] = src[:, 1, 0]
    return TruncatedLoop(c, lo, g.group_tag, g.truncated).trimmed()


def act_sigma(f):
    """Closed-form factors of ``sigma(g)``; needs ``a0 != 0``."""
    g0 = f.g_zero
    a0, b0, c0 = g0[0, 0], g0[0, 1], g0[1, 0]
    _check(a0, "a0")
    B1 = f.minus_coeff(1)[0, 1]
    c1 = f.plus_coeff(1)[1, 0]
    rm = _loop({0: [[1, -B1], [0, 1]], -1: [[0, 0], [c0 / a0, -B1 * c0 / a0]]}, 2)
    gm = mul(sigma_loop(f.g_minus), rm, n=None)
    g0n = np.array([[a0 + B1 * c1 / a0, B1 / a0], [c1 / a0, 1 / a0]])
    lm = _loop({0: [[1, 0], [-c1, 1]], 1: [[0, b0 / a0], [0, -c1 * b0 / a0]]}, 2)
    gp = mul(lm, sigma_loop(f.g_plus), n=None)
    return BirkhoffFactors(_clean_minus(gm, 2), g0n, _clean_plus(gp, 2))


def sigma_ladder(f, nmax):
    """``B_n`` of the sigma image predicted from the ladders of ``g``."""
    co = rh_coords(f, order=max(nmax + 1, -f.g_minus.lo))
    g0 = f.g_zero
    a0, c0 = g0[0, 0], g0[1, 0]
    _check(a0, "a0")
    A, B = co.A, co.B
    L = len(B) - 1
    Bx = lambda k: B[k] if k <= L else 0.0  # noqa: E731
    return np.array([-A[n] * B[1] + Bx(n + 1) - B[n] * B[1] * c0 / a0
                     for n in range(1, nmax + 1)])


def moebius_Bn(h, coords, nmax, Z1=None):
    """Transformed ladders ``(B_n, D_{n-1}, B'_n)`` for ``n = 1..nmax``."""
    Z1 = coords.Z[1] if Z1 is None else Z1
    alpha = h.a + h.b * Z1
    _check(alpha, "a + b Z1")
    B, D = coords.B, coords.D
    Bn = np.array([(h.d * B[n] + h.c * D[n - 1]) / alpha for n in range(1, nmax + 1)])
    Dn = np.array([(h.b * B[n] + h.a * D[n - 1]) / alpha for n in range(1, nmax + 1)])
    bp = coords.b_primes(nmax)
    den = h.a + h.b * bp
    if np.min(np.abs(den)) < TOL_DIV:
        raise Degenerate("a + b B'_n vanishes")
    return Bn, Dn, (h.c + h.d * bp) / den


# symmetric actions ------------------------------------------------------------

def act_symmetric(h, f, cfg=None, emb=None):
    """Factors of ``i0(h) * g * i0(h)^{*Theta}`` for a symmetric point ``g``.

    The right factor is applied first, then the left one.  The returned
    positive factor is ``star_theta`` of the negative one.
    """
    d = f.dim
    emb = emb or RootEmbedding.for_dim(d, cfg.epsilon if cfg else 1)
    cfg = cfg or InvolutionConfig.s2()
    eps = cfg.epsilon
    co = rh_coords(f, order=max(2, -f.g_minus.lo))
    Z1 = co.Z[1]
    den_r = np.conj(h.a) + np.conj(h.b) * np.conj(Z1)
    _check(den_r, "conj(a) + conj(b Z1)")
    mid = act_right_i0(h.star_theta(eps), f, emb)
    out = act_left_i0(h, mid, emb)
    gm = out.g_minus
    return BirkhoffFactors(gm, out.g_zero, star_theta(gm, cfg))


def symmetric_z1_prime(h, f, cfg, emb=None):
    """Top-root coordinate of the intermediate negative factor, and the
    resulting left denominator ``a + b Z1'``."""
    d = f.dim
    emb = emb or RootEmbedding.for_dim(d, cfg.epsilon)
    co = rh_coords(f, order=max(2, -f.g_minus.lo))
    Z1 = co.Z[1]
    Dg = adjoint_top_coefficient(f.g_zero, emb)
    den = np.conj(h.a) + np.conj(h.b) * np.conj(Z1)
    _check(den, "conj(a) + conj(b Z1)")
    z1p = Z1 - cfg.epsilon * np.conj(h.b) / den * Dg
    lhs = h.a + h.b * z1p
    rhs = (abs(h.a + h.b * Z1) ** 2 - cfg.epsilon * abs(h.b) ** 2 * Dg) / den
    return z1p, lhs, rhs


def adjoint_top_coefficient(g0, emb):
    """``<Ad(g0) e, e> / <e, e>`` for the top root vector ``e``."""
    e = emb.e_theta
    x = g0 @ e @ np.linalg.inv(g0)
    return np.vdot(e, x) / np.vdot(e, e)


def act_symmetric_s2(h, f):
    """Entrywise SL(2) form of the symmetric action."""
    g0 = f.g_zero
    a0, b0 = g0[0, 0], g0[0, 1]
    co = rh_coords(f, order=max(2, -f.g_minus.lo))
    B1 = co.B[1]
    a, b = h.a, h.b
    ap = np.conj(a) + np.conj(b) * np.conj(B1)
    _check(ap, "conj(a + b B1)")
    bb = np.conj(b) / ap
    alpha = (abs(a + b * B1) ** 2 - abs(b) ** 2 * a0 ** 2) / ap
    _check(alpha, "|a + b B1|^2 - |b|^2 a0^2")
    g0inv = np.linalg.inv(g0)
    nm = _loop({0: np.eye(2), -1: g0 @ np.array([[0, -bb], [0, 0]]) @ g0inv}, 2)
    inter = mul(f.g_minus, nm, n=None)
    A1p, B1p, B2p = inter.coeff(-1)[0, 0], inter.coeff(-1)[0, 1], inter.coeff(-2)[0, 1]
    gamma0 = (-2 * a * b * A1p + b ** 2 * (B2p - A1p * B1p)) / alpha
    P = np.array([f.plus_coeff(k) for k in range(3)])
    a1, c1, c2 = P[1, 0, 0], P[1, 1, 0], P[2, 1, 0]
    cr, dr = np.conj(b), np.conj(a)
    beta0 = (2 * cr * dr * a1 + cr ** 2 * (c2 - a1 * c1)) / ap
    right = _loop({0: [[alpha, 0], [gamma0, 1 / alpha]], 1: [[0, 0], [-b, 0]]}, 2)
    emb = RootEmbedding.for_dim(2)
    gm = mul(mul(emb.i0(h), inter, n=None), right, n=None)
    g0n = (np.array([[1 / alpha, 0], [-gamma0, alpha]]) @ g0
           @ np.array([[1 / ap, -beta0], [0, ap]]))
    gm = _clean_minus(gm, 2)
    return BirkhoffFactors(gm, g0n, star_theta(gm, InvolutionConfig.s2()))


def projected_laws_s2(h, f):
    """Predicted ``(a0', B1', B2', D1')`` for the symmetric action."""
    g0 = f.g_zero
    a0, b0 = g0[0, 0].real, g0[0, 1]
    co = rh_coords(f, order=max(2, -f.g_minus.lo))
    A1, B1, B2, D1 = co.A[1], co.B[1], co.B[2], co.D[1]
    a, b, c, d = h.a, h.b, h.c, h.d
    ap = np.conj(a) + np.conj(b) * np.conj(B1)
    bb = np.conj(b) / ap
    q = abs(a + b * B1) ** 2 - abs(b) ** 2 * a0 ** 2
    alpha = q / ap
    a0n = a0 / q
    B1n = (d * B1 + c - d * np.conj(b) * a0 ** 2 / ap) / alpha
    B2n = (d * B2 + c * D1 - d * A1 * bb * a0 ** 2 + (d * B1 + c) * bb * np.conj(b0) * a0) / alpha
    D1n = (b * B2 + a * D1 - b * A1 * bb * a0 ** 2 + (b * B1 + a) * bb * np.conj(b0) * a0) / alpha
    return a0n, B1n, B2n, D1n


def adjoint_recursion(f, cfg, emb=None, nmax=4):
    """Both sides of the zero-mode recursion and of the order-n extraction for
    ``h = [[0, 1], [-1, 0]]``.

    Returns ``(pred_D, pred_series)`` where ``pred_D`` is the predicted
    top-root adjoint coefficient of the new middle factor and
    ``pred_series[n]`` the predicted ``z**-n`` coefficient of the lowest-root
    coordinate of ``Ad(g_minus') e_{-theta}`` for ``n = 0..nmax``.
    """
    d = f.dim
    emb = emb or RootEmbedding.for_dim(d, cfg.epsilon)
    eps = cfg.epsilon
    co = rh_coords(f, order=max(nmax + 2, -f.g_minus.lo))
    Z1 = co.Z[1]
    _check(Z1, "Z1")
    Dg = adjoint_top_coefficient(f.g_zero, emb)
    q = abs(Z1) ** 2 - eps * Dg
    _check(q, "|Z1|^2 - eps D")
    pred_D = Dg / q ** 2
    z1p = Z1 - eps * Dg / np.conj(Z1)
    coef = -eps / np.conj(Z1)
    e, fm = emb.e_theta, emb.e_minus_theta
    X = f.g_zero @ e @ np.linalg.inv(f.g_zero)
    ad = lambda u, v: u @ v - v @ u  # noqa: E731
    v0 = fm
    v1 = coef * ad(X, fm)
    v2 = 0.5 * coef ** 2 * ad(X, ad(X, fm))
    G = co.g_coeffs
    L = G.shape[0] - 1
    Ginv = _series_inverse(G, L)  # same recursion for a series in 1/z

    def adj(k, v):
        """z**-k coefficient of Ad(g_minus) v, from the series of g_minus and
        its inverse."""
        if k < 0:
            return np.zeros_like(v)
        acc = np.zeros_like(v)
        for i in range(0, min(k, L) + 1):
            j = k - i
            if j <= Ginv.shape[0] - 1:
                acc = acc + G[i] @ v @ Ginv[j]
        return acc

    pred = []
    for n in range(nmax + 1):
        # h^{-1} e_{-theta} = -z^{-2} e_theta on the circle; pairing with it
        # raises the z-degree by two and flips the sign.
        tot = (adj(n + 2, v0) + adj(n + 1, v1) + adj(n, v2))
        pred.append(-np.vdot(e, tot) / z1p ** 2 / np.vdot(e, e))
    return pred_D, np.array(pred)


def lowest_root_series(gm, emb, nmax):
    """``z**-n`` coefficients of the lowest-root coordinate of
    ``Ad(g_minus) e_{-theta}``, by grid evaluation and refit."""
    fm = emb.e_minus_theta
    m = 4 * (gm.hi - gm.lo + 1 + nmax)
    m = 1 << (m - 1).bit_length()
    vals = gm.on_grid(m)
    loop = TruncatedLoop.from_grid(vals @ fm @ np.linalg.inv(vals), m // 2 - 1)
    return np.array([np.vdot(fm, loop.coeff(-n)) / np.vdot(fm, fm) for n in range(nmax + 1)])


# SU(n) multivalued loop -------------------------------------------------------

def sigma_delta_su_n(n, t):
    """``lambda * w * prod exp(2 pi i (j/n) t h_j)`` in the defining
    representation; ``w`` is the cyclic shift ``e_k -> e_{k+1}``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    m = np.zeros((n, n), dtype=complex)
    ph = np.exp(2j * np.pi * t / n)
    for k in range(n - 1):
        m[k + 1, k] = ph
    m[0, n - 1] = np.exp(-2j * np.pi * (n - 1) * t / n)
    lam = ((-1.0) ** (n - 1) + 0j) ** (1.0 / n)
    return lam * m


def chevalley_triples(n):
    """Simple-root triples ``(h_j, e_j, f_j)`` of sl(n), j = 1..n-1."""
    out = []
    for j in range(n - 1):
        e = np.zeros((n, n), dtype=complex)
        e[j, j + 1] = 1
        h = np.zeros((n, n), dtype=complex)
        h[j, j], h[j + 1, j + 1] = 1, -1
        out.append((h, e, e.T.copy()))
    return out


def apply_sigma_delta(g, n_out=None):
    """Pointwise conjugation by the multivalued loop, refit as a loop.

    The central multivaluedness cancels under conjugation, so the result is
    single valued; the window grows by one degree on each side.
    """
    d = g.dim
    N = n_out or max(-g.lo, g.hi) + 1
    m = 4 * (2 * N + 1)
    m = 1 << (m - 1).bit_length()
    ts = np.arange(m) / m
    vals = g.on_grid(m)
    out = np.empty_like(vals)
    for i, t in enumerate(ts):
        s = sigma_delta_su_n(d, t)
        out[i] = s @ vals[i] @ np.linalg.inv(s)
    return TruncatedLoop.from_grid(out, N, g.group_tag)


# oracle -----------------------------------------------------------------------

def oracle(left, f, right=None):
    """Factor ``left * g * right`` numerically (any argument may be None)."""
    g = f.product(n=None)
    if left is not None:
        g = mul(left, g, n=None)
    if right is not None:
        g = mul(g, right, n=None)
    return factorize(g)
