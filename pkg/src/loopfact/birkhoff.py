"""Triangular factorization ``g = g_minus * g_zero * g_plus`` of matrix loops.

``g_minus`` is a polynomial in ``1/z`` with constant term 1, ``g_plus`` a
series in ``z`` with constant term 1 and ``g_zero`` a constant matrix.

Method: the positive-degree part of ``g * g_plus^{-1}`` must vanish, and
this condition is linear in the coefficients of ``h = g_plus^{-1}``.  One
block Toeplitz solve therefore gives ``h``; the constant term of ``g * h``
is ``g_zero`` and the rest of ``g * h`` (right-divided by ``g_zero``) is
``g_minus``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

from .errors import DegenerateDn, LowerStratum
from .loopalg import TruncatedLoop, mul, star_theta, TOL_DET

COND_MAX = 1e12
TOL_RESIDUAL = 1e-9
TOL_DIV = 1e-12


@dataclass(frozen=True)
class StratumReport:
    in_top_stratum: bool
    toeplitz_condition: float
    residual: float = float("nan")
    detected_lambda_hint: tuple | None = None

    def to_json(self):
        return {"in_top_stratum": self.in_top_stratum,
                "toeplitz_condition": self.toeplitz_condition,
                "residual": self.residual,
                "detected_lambda_hint": self.detected_lambda_hint}


@dataclass(frozen=True, eq=False)
class BirkhoffFactors:
    g_minus: TruncatedLoop
    g_zero: np.ndarray
    g_plus: TruncatedLoop
    residual: float = 0.0

    @property
    def dim(self):
        return self.g_zero.shape[0]

    @property
    def group_tag(self):
        return self.g_minus.group_tag

    def product(self, n=None):
        mid = TruncatedLoop.constant(self.g_zero, self.group_tag)
        return mul(mul(self.g_minus, mid, n=None), self.g_plus, n=n)

    def minus_coeff(self, k):
        """Coefficient of ``z**-k`` in ``g_minus``."""
        return self.g_minus.coeff(-k)

    def plus_coeff(self, k):
        return self.g_plus.coeff(k)

    def scale(self):
        """``max(1, largest coefficient of any factor)``."""
        return max(1.0, float(np.max(np.abs(self.g_minus.coeffs))),
                   float(np.max(np.abs(self.g_zero))), float(np.max(np.abs(self.g_plus.coeffs))))

    def rel_diff(self, other):
        """Largest coefficient difference relative to ``other.scale()``."""
        return self.max_abs_diff(other) / other.scale()

    def max_abs_diff(self, other):
        return max(self.g_minus.max_abs_diff(other.g_minus),
                   float(np.max(np.abs(self.g_zero - other.g_zero))),
                   self.g_plus.max_abs_diff(other.g_plus))

    def to_json(self):
        z = self.g_zero
        return {"g_minus": self.g_minus.to_json(),
                "g_zero": TruncatedLoop.constant(z, self.group_tag).to_json(),
                "g_plus": self.g_plus.to_json(),
                "residual": float(self.residual)}

    @classmethod
    def from_json(cls, obj):
        return cls(TruncatedLoop.from_json(obj["g_minus"]),
                   TruncatedLoop.from_json(obj["g_zero"]).coeff(0),
                   TruncatedLoop.from_json(obj["g_plus"]),
                   float(obj.get("residual", 0.0)))


def _block_toeplitz(g, K):
    d = g.dim
    idx = np.arange(K)[:, None] - np.arange(K)[None, :]
    padded = g.with_window(min(g.lo, -K), max(g.hi, K)).coeffs
    blocks = padded[idx - min(g.lo, -K)]
    T = blocks.transpose(0, 2, 1, 3).reshape(K * d, K * d)
    rhs = -padded[1 - min(g.lo, -K):K + 1 - min(g.lo, -K)].reshape(K * d, d)
    return T, rhs


def _lu_solve_with_cond(T, rhs):
    """LU solve plus the LAPACK 1-norm reciprocal condition estimate."""
    lu, piv, info = lapack.zgetrf(T)
    if info != 0:
        return None, float("inf")
    rcond, _ = lapack.zgecon(lu, np.abs(T).sum(axis=0).max(), norm="1")
    if rcond == 0:
        return None, float("inf")
    sol, _ = lapack.zgetrs(lu, piv, rhs)
    return sol, 1.0 / rcond


def _series_inverse(h, order):
    """Inverse of ``1 + h_1 z + ...`` as a power series up to ``z**order``."""
    d = h.shape[1]
    out = np.zeros((order + 1, d, d), dtype=complex)
    out[0] = np.eye(d)
    for n in range(1, order + 1):
        j = np.arange(1, min(n, h.shape[0] - 1) + 1)
        out[n] = -np.einsum("kab,kbc->ac", h[j], out[n - j])
    return out


def _grid_series_inverse(h, order):
    """Power series inverse via pointwise inversion on a fine circle grid;
    accurate when the inverse series decays well within the grid."""
    m = 1 << int(np.ceil(np.log2(8 * max(order, h.shape[0]))))
    vals = np.fft.ifft(h, n=m, axis=0) * m
    inv = np.fft.fft(np.linalg.inv(vals), axis=0) / m
    return inv[:order + 1]


def default_order(g):
    """Number of unknown coefficients of ``g_plus^{-1}`` to solve for.

    For SL loops ``g_plus`` is a polynomial of degree at most ``hi`` and its
    inverse is the adjugate, of degree at most ``(d-1)*hi``.  General loops
    start with ``4*hi`` terms; ``factorize`` doubles this (up to ``GL_MAX_ORDER
    * hi``) while the truncation leak exceeds the tolerance.
    """
    if g.group_tag == "GL":
        return max(4 * g.hi, 1)
    return max((g.dim - 1) * g.hi, 1)


GL_MAX_ORDER = 16


def _solve(g, K, cond_max, tol):
    d = g.dim
    T, rhs = _block_toeplitz(g, K)
    sol, cond = _lu_solve_with_cond(T, rhs)
    if sol is None or not np.isfinite(cond) or cond > cond_max:
        raise LowerStratum(f"Toeplitz condition {cond:.3e} exceeds {cond_max:.0e}",
                           StratumReport(False, cond))
    h = np.concatenate([np.eye(d, dtype=complex)[None], sol.reshape(K, d, d)], axis=0)
    gh = mul(g, TruncatedLoop(h, 0, g.group_tag), n=None)
    g0 = gh.coeff(0)
    if abs(np.linalg.det(g0)) < TOL_DET:
        raise LowerStratum("singular middle factor", StratumReport(False, cond))
    neg = gh.with_window(g.lo, 0)
    gm = TruncatedLoop(neg.coeffs @ np.linalg.inv(g0), neg.lo, g.group_tag)
    if g.group_tag == "GL":
        # general loops have an infinite positive factor: keep K terms of it
        # and count the finite-section leak (degrees above K of g*h)
        gp = TruncatedLoop(_grid_series_inverse(h, K), 0, g.group_tag)
    else:
        gp = TruncatedLoop(_series_inverse(h, g.hi), 0, g.group_tag)
    f = BirkhoffFactors(gm, g0, gp)
    resid = f.product(n=None).max_abs_diff(g.with_window(g.lo, g.hi))
    if gh.hi > K:
        resid = max(resid, float(np.max(np.abs(gh.coeffs[K + 1 - gh.lo:]))))
    return BirkhoffFactors(gm, g0, gp, resid), cond


def factorize(g, order=None, cond_max=COND_MAX, tol=TOL_RESIDUAL):
    """Factor ``g`` or raise :class:`LowerStratum` (with a report attached)."""
    d = g.dim
    if g.hi == 0:
        # already nonpositive: g_plus = 1
        g0 = g.coeff(0)
        if abs(np.linalg.det(g0)) < TOL_DET:
            raise LowerStratum("singular constant term",
                               StratumReport(False, float("inf")))
        gm = TruncatedLoop(g.coeffs @ np.linalg.inv(g0), g.lo, g.group_tag)
        return BirkhoffFactors(gm, g0, TruncatedLoop.identity(d, g.group_tag), 0.0)

    K = order or default_order(g)
    f, cond = _solve(g, K, cond_max, tol)
    while (order is None and g.group_tag == "GL" and not f.residual < tol
           and 2 * K <= GL_MAX_ORDER * g.hi):
        K *= 2
        f, cond = _solve(g, K, cond_max, tol)
    if not f.residual < tol:
        raise LowerStratum(f"factorization residual {f.residual:.3e}",
                           StratumReport(False, cond, f.residual))
    return f


def toeplitz_condition(g, order=None):
    """1-norm condition estimate of the factorization system."""
    if g.hi == 0:
        return 1.0
    T, rhs = _block_toeplitz(g, order or default_order(g))
    return _lu_solve_with_cond(T, rhs)[1]


def stratum_report(g, order=None, cond_max=COND_MAX):
    try:
        f = factorize(g, order=order, cond_max=cond_max)
    except LowerStratum as exc:
        return exc.report
    return StratumReport(True, toeplitz_condition(g, order), f.residual)


# linear coordinates ----------------------------------------------------------

def _series_mul(a, b, order):
    d = a.shape[1]
    out = np.zeros((order + 1, d, d), dtype=complex)
    for i in range(min(order, a.shape[0] - 1) + 1):
        for j in range(min(order - i, b.shape[0] - 1) + 1):
            out[i + j] += a[i] @ b[j]
    return out


def series_log(c, order):
    """Log of ``1 + c_1 u + c_2 u^2 + ...`` as ``x_1 u + x_2 u^2 + ...``."""
    d = c.shape[1]
    y = np.zeros((order + 1, d, d), dtype=complex)
    m = min(order, c.shape[0] - 1)
    y[1:m + 1] = c[1:m + 1]
    out = np.zeros_like(y)
    power = y.copy()
    for k in range(1, order + 1):
        out += ((-1) ** (k + 1) / k) * power
        power = _series_mul(power, y, order)
    return out


def series_exp(x, order):
    """Exp of ``x_1 u + x_2 u^2 + ...`` (x[0] must vanish)."""
    d = x.shape[1]
    out = np.zeros((order + 1, d, d), dtype=complex)
    out[0] = np.eye(d)
    term = out.copy()
    for k in range(1, order + 1):
        term = _series_mul(term, x, order) / k
        out += term
    return out


def theta_from_w_coeffs(gw):
    """From ``g = sum gw[n] w^n`` (gw[0] = 1) to ``theta_n`` with
    ``dg/dw = (theta_1 + theta_2 w + ...) g``."""
    L = gw.shape[0] - 1
    th = np.zeros_like(gw)
    for n in range(1, L + 1):
        acc = n * gw[n]
        for m in range(1, n):
            acc = acc - th[m] @ gw[n - m]
        th[n] = acc
    return th


def w_coeffs_from_theta(th):
    """Inverse recursion: integrate ``dg/dw = theta(w) g`` order by order."""
    L = th.shape[0] - 1
    d = th.shape[1]
    gw = np.zeros_like(th)
    gw[0] = np.eye(d)
    for n in range(1, L + 1):
        acc = np.zeros((d, d), dtype=complex)
        for m in range(1, n + 1):
            acc = acc + th[m] @ gw[n - m]
        gw[n] = acc / n
    return gw


@dataclass(frozen=True, eq=False)
class RHLinearCoords:
    """Linear coordinates of the negative factor.

    Index 0 of every array is the constant term.  ``g_coeffs[n]`` is the
    coefficient of ``z**-n``; ``theta[n]`` is the coefficient of ``w**(n-1)``
    in ``(d g_minus / dw) g_minus^{-1}``, ``w = -1/z``; ``x[n]`` is the
    coefficient of ``z**-n`` in ``log g_minus``.  The scalar ladders read the
    corner entries: A = (0,0), B = (0,d-1), C = (d-1,0), D = (d-1,d-1).
    """

    g_coeffs: np.ndarray
    theta: np.ndarray
    x: np.ndarray
    y: np.ndarray = field(default=None)

    @property
    def order(self):
        return self.g_coeffs.shape[0] - 1

    @property
    def dim(self):
        return self.g_coeffs.shape[1]

    def _entry(self, i, j):
        return self.g_coeffs[:, i, j]

    @property
    def A(self):
        return self._entry(0, 0)

    @property
    def B(self):
        return self._entry(0, self.dim - 1)

    @property
    def C(self):
        return self._entry(self.dim - 1, 0)

    @property
    def D(self):
        return self._entry(self.dim - 1, self.dim - 1)

    @property
    def Z(self):
        """Top-root component of each x_n."""
        return self.x[:, 0, self.dim - 1]

    @property
    def W(self):
        """Lowest-root component of each y_n (from ``g_plus = exp(y)``)."""
        if self.y is None:
            return None
        return self.y[:, self.dim - 1, 0]

    def b_prime(self, n, tol_div=TOL_DIV):
        """``B_n / D_{n-1}`` (with ``D_0 = 1``)."""
        den = self.D[n - 1]
        if abs(den) < tol_div:
            raise DegenerateDn(f"|D_{n - 1}| = {abs(den):.3e}")
        return self.B[n] / den

    def b_primes(self, nmax, tol_div=TOL_DIV):
        return np.array([self.b_prime(n, tol_div) for n in range(1, nmax + 1)])


def rh_coords(f, order=None, plus_order=None):
    """Linear coordinates up to ``z**-order``; the log of ``g_plus`` is taken
    to ``plus_order`` (its full degree by default)."""
    L = order or -f.g_minus.lo
    L = max(L, 1)
    G = np.array([f.minus_coeff(k) for k in range(L + 1)])
    sign = (-1.0) ** np.arange(L + 1)
    theta = theta_from_w_coeffs(G * sign[:, None, None])
    x = series_log(G, L)
    Lp = max(f.g_plus.hi if plus_order is None else min(plus_order, f.g_plus.hi), 1)
    P = np.array([f.plus_coeff(k) for k in range(Lp + 1)])
    y = series_log(P, Lp)
    theta[0] = 0
    return RHLinearCoords(G, theta, x, y)


def g_minus_from_theta(theta):
    """Rebuild the ``z**-n`` coefficients of ``g_minus`` from theta."""
    gw = w_coeffs_from_theta(theta)
    sign = (-1.0) ** np.arange(gw.shape[0])
    return gw * sign[:, None, None]


def is_symmetric_point(g, cfg, tol=1e-9):
    """``g^{*Theta} = g``, and the factors pair up the same way.  Factor
    comparisons are relative to ``max(1, largest factor coefficient)``."""
    st = star_theta(g, cfg)
    if g.max_abs_diff(st) >= tol * max(1.0, float(np.max(np.abs(g.coeffs)))):
        return False
    try:
        f = factorize(g)
    except LowerStratum:
        return True
    tol = tol * f.scale()
    if f.g_plus.max_abs_diff(star_theta(f.g_minus, cfg)) >= tol:
        return False
    return bool(np.max(np.abs(cfg.star_theta_matrix(f.g_zero) - f.g_zero)) < tol)
