"""Reference laws and closed formulas for the limit distributions.

Densities
---------
``EQ321``       on C: ``(1 + |w|^2)^-2``, the rotation invariant law on the
                Riemann sphere in an affine chart.
``EQ330``       on sl(2, C) + sl(2, C) (12 real dimensions):
                ``(1 + |t1|^2 + |t2|^2 / 2)^-7`` with ``|t|^2 = trace(t t^*)``.
``EQ331(N)``    on C^N: ``(1 + sum_k |b_k|^2 / k)^-(1 + 3N)``.
``SECH_CUBED``  on R (Cartan coordinate x): ``sech^3(2x)`` against the
                invariant volume ``cosh^2(2x) dx``, i.e. ``sech(2x) dx``.
``F_RHO``       on C: ``(1 + |w|^2)^-3/2 F(1/(1 + |w|^2))``.

The quadratic densities are multivariate t laws: ``(1 + |v|^2)^-(nu + p)/2``
on R^p is the law of ``Z / chi_nu`` with Z standard normal, so exact samples
come from one Gaussian vector and one chi variable.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy import integrate, stats

from .errors import (DegenerateDenominator, QuadratureNonconvergent,
                     StepSizeUnstable, UnnormalizableTag)

QUAD_ABS = 1e-10


def _quad(f, a, b, points=None, epsabs=QUAD_ABS, epsrel=1e-12, limit=400):
    kw = {"epsabs": epsabs, "epsrel": epsrel, "limit": limit}
    if points is not None and np.isfinite(a) and np.isfinite(b):
        kw["points"] = points
    with np.errstate(all="ignore"):
        val, err = integrate.quad(f, a, b, full_output=0, **kw)
    if not np.isfinite(val) or err > max(1e3 * epsabs, 1e-6 * abs(val)):
        raise QuadratureNonconvergent(f"quad on [{a}, {b}]: value {val}, error {err}")
    return val


def _quad_complex(f, a, b, **kw):
    return _quad(lambda t: f(t).real, a, b, **kw) + 1j * _quad(lambda t: f(t).imag, a, b, **kw)


# radial helpers ------------------------------------------------------------------

def _radial_normalizer(profile):
    """``int_C profile(|w|) dm(w)``."""
    return 2 * math.pi * (_quad(lambda r: r * profile(r), 0, 1)
                          + _quad(lambda r: r * profile(r), 1, np.inf))


def _radial_cdf_table(profile, r_max, m=4001):
    """CDF of ``|w|`` on a grid concentrated near the origin."""
    r = np.concatenate([[0.0], np.geomspace(1e-6, r_max, m - 1)])
    dens = 2 * math.pi * r * np.array([profile(x) for x in r])
    c = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2 * np.diff(r))])
    return r, c


# F(rho) ---------------------------------------------------------------------------

def f_rho(rho):
    """``F(rho) = int_0^inf rho (rho + (x - 1)^2 / x)^-3/2 dx`` by adaptive
    quadrature, split at the peak ``x = 1`` and its width ``sqrt(rho)``."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    f = lambda x: rho * (rho + (x - 1) ** 2 / x) ** -1.5
    w = math.sqrt(rho)
    cuts = sorted({0.0, max(1 - 20 * w, 0.0), max(1 - w, 0.0), 1.0, 1 + w, 1 + 20 * w})
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b > a:
            total += _quad(f, a, b)
    total += _quad(f, cuts[-1], np.inf)
    return total


def f_rho_legendre(rho, nodes=200, t_max=None):
    """Independent evaluation of F: with ``x = e^t`` the integrand becomes
    ``2 rho cosh(t) (rho + 4 sinh^2(t/2))^-3/2`` on ``t > 0``; composite
    Gauss-Legendre on panels refined near ``t = 0``."""
    g = lambda t: 2 * rho * np.cosh(t) * (rho + 4 * np.sinh(t / 2) ** 2) ** -1.5
    w = math.sqrt(rho)
    if t_max is None:
        # tail beyond t_max is below 2 rho * 2 e^{-t_max/2} / ...; keep it tiny
        t_max = max(80.0, 2 * math.log(1e14 * max(rho, 1.0)))
    edges = np.unique(np.concatenate([[0.0], w * np.geomspace(1e-3, 1e3, 61), [t_max]]))
    edges = edges[edges <= t_max]
    x, wt = np.polynomial.legendre.leggauss(nodes)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        t = (b - a) / 2 * x + (a + b) / 2
        total += (b - a) / 2 * np.sum(wt * g(t))
    # analytic tail: integrand ~ 2 rho cosh t (4 sinh^2(t/2))^-3/2 ~ 2 rho e^{-t/2}
    total += 4 * rho * math.exp(-t_max / 2)
    return float(total)


def f_rho_zero_limit():
    """Limit of F at 0: near ``x = 1`` put ``x - 1 = sqrt(rho) u``."""
    return _quad(lambda u: (1 + u * u) ** -1.5, -np.inf, np.inf)


# reference densities ------------------------------------------------------------

@dataclass(frozen=True)
class ReferenceDensity:
    tag: str
    N: int = 1

    def __post_init__(self):
        if self.tag not in ("EQ321", "EQ330", "EQ331", "SECH_CUBED", "F_RHO"):
            raise ValueError(f"unknown tag {self.tag}")
        if self.tag == "EQ331" and self.N < 1:
            raise UnnormalizableTag("EQ331 needs N >= 1")

    # dimensions and t parameters
    @property
    def real_dim(self):
        return {"EQ321": 2, "EQ330": 12, "EQ331": 2 * self.N,
                "SECH_CUBED": 1, "F_RHO": 2}[self.tag]

    @property
    def exponent(self):
        """Power ``s`` in ``(1 + |v|^2)^-s`` for the quadratic tags."""
        return {"EQ321": 2.0, "EQ330": 7.0, "EQ331": 1.0 + 3 * self.N}.get(self.tag)

    @property
    def dof(self):
        """Degrees of freedom of the t representation."""
        s = self.exponent
        return None if s is None else 2 * s - self.real_dim

    def unnormalized(self, point):
        p = np.asarray(point)
        if self.tag == "SECH_CUBED":
            # delta = sech^3 against cosh^2; both factors vanish/explode far out
            c = np.cosh(np.clip(2 * p.astype(float), -200, 200))
            return c ** -3.0 * c ** 2
        if self.tag == "F_RHO":
            q = 1 + np.abs(p) ** 2
            return q ** -1.5 * np.vectorize(f_rho)(1 / q)
        return (1 + self.quadratic_form(p)) ** -self.exponent

    def quadratic_form(self, p):
        """``|v|^2`` of the t representation; ``p`` holds complex coordinates
        (last axis).  EQ330 points are ``(t1, t2)`` as two 2x2 matrices."""
        if self.tag == "EQ321":
            return np.abs(p) ** 2
        if self.tag == "EQ331":
            k = np.arange(1, self.N + 1)
            return np.sum(np.abs(p) ** 2 / k, axis=-1)
        t1, t2 = p[..., 0, :, :], p[..., 1, :, :]
        n1 = np.sum(np.abs(t1) ** 2, axis=(-1, -2))
        n2 = np.sum(np.abs(t2) ** 2, axis=(-1, -2))
        return n1 + n2 / 2

    @property
    def normalizer(self):
        return _normalizer(self)

    def density(self, point):
        return self.unnormalized(point) / self.normalizer

    def radial_profile(self, r):
        """Density of one complex coordinate as a function of its modulus
        (EQ321, F_RHO, and the first coordinate of EQ331)."""
        if self.tag == "EQ321":
            return (1 + r * r) ** -2
        if self.tag == "F_RHO":
            q = 1 + r * r
            return q ** -1.5 * f_rho(1 / q)
        if self.tag == "EQ331":
            # marginal of a t law is a t law with the same dof
            return (1 + r * r) ** -((self.dof + 2) / 2)
        raise ValueError(f"{self.tag} has no radial profile")

    def radial_cdf(self, r):
        """CDF of the modulus of one complex coordinate."""
        r = np.asarray(r, dtype=float)
        if self.tag == "EQ321":
            return r ** 2 / (1 + r ** 2)
        if self.tag == "EQ331":
            s = (self.dof + 2) / 2
            return 1 - (1 + r ** 2) ** (1 - s)
        grid, cdf = _radial_table(self)
        return np.interp(r, grid, cdf, right=1.0)

    def cdf(self, x):
        """CDF of the real coordinate (SECH_CUBED only)."""
        if self.tag != "SECH_CUBED":
            raise ValueError(f"{self.tag} is not a one-dimensional law")
        # antiderivative of sech(2x) is atan(sinh(2x)) / 2
        return 0.5 + np.arctan(np.sinh(np.clip(2 * np.asarray(x, dtype=float), -700, 700))) / np.pi

    def sample(self, n, seed):
        return sample_reference(self, n, seed)


@lru_cache(maxsize=None)
def _normalizer(ref):
    if ref.tag == "SECH_CUBED":
        f = lambda x: ref.unnormalized(x)
        return 2 * _quad(f, 0, np.inf)
    if ref.tag == "F_RHO":
        return _radial_normalizer(ref.radial_profile)
    # (1 + |v|^2)^-s on R^p, radial integral with the unit sphere area
    p, s = ref.real_dim, ref.exponent
    if 2 * s <= p:
        raise UnnormalizableTag(f"{ref.tag}: exponent {s} too small in dimension {p}")
    area = 2 * math.pi ** (p / 2) / math.gamma(p / 2)
    f = lambda r: r ** (p - 1) * (1 + r * r) ** -s
    radial = _quad(f, 0, 1) + _quad(f, 1, np.inf)
    # coordinate scalings: |v|^2 = sum c_i |x_i|^2 contributes prod c_i^-1/2
    jac = 1.0
    if ref.tag == "EQ331":
        jac = float(np.prod(np.arange(1, ref.N + 1)))  # two real dims per k
    elif ref.tag == "EQ330":
        jac = float(np.prod(1 / np.sqrt(_eq330_scales())))
    return area * radial * jac


def _eq330_scales():
    """Quadratic form weights of the 12 real coordinates
    (Re/Im of h1, b1, c1, h2, b2, c2)."""
    w1 = [2, 2, 1, 1, 1, 1]
    w2 = [1, 1, 0.5, 0.5, 0.5, 0.5]
    return np.array(w1 + w2, dtype=float)


@lru_cache(maxsize=None)
def _radial_table(ref):
    return _radial_cdf_table_normalized(ref)


def _radial_cdf_table_normalized(ref):
    r, c = _radial_cdf_table(ref.radial_profile, 1e4)
    total = _radial_normalizer(ref.radial_profile)
    return r, c / total


# sampling ---------------------------------------------------------------------------

def _rng(seed):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def _t_vectors(rng, n, p, dof):
    """Rows distributed as ``(1 + |v|^2)^-(dof + p)/2`` on R^p."""
    z = rng.standard_normal((n, p))
    chi = np.sqrt(rng.chisquare(dof, size=n))
    return z / chi[:, None]


def sample_reference(ref, n, seed):
    """Exact samples.  Shapes: EQ321/F_RHO (n,) complex; EQ331 (n, N)
    complex; EQ330 (n, 2, 2, 2) complex (t1, t2); SECH_CUBED (n,) real."""
    rng = _rng(seed)
    if ref.tag == "EQ321":
        u = rng.random(n)
        r = np.sqrt(u / (1 - u))
        return r * np.exp(2j * np.pi * rng.random(n))
    if ref.tag == "SECH_CUBED":
        u = rng.random(n)
        return np.arcsinh(np.tan(np.pi * (u - 0.5))) / 2
    if ref.tag == "F_RHO":
        grid, cdf = _radial_table(ref)
        r = np.interp(rng.random(n) * cdf[-1], cdf, grid)
        return r * np.exp(2j * np.pi * rng.random(n))
    if ref.tag == "EQ331":
        v = _t_vectors(rng, n, 2 * ref.N, ref.dof)
        w = v[:, 0::2] + 1j * v[:, 1::2]
        return w * np.sqrt(np.arange(1, ref.N + 1))
    v = _t_vectors(rng, n, 12, ref.dof) / np.sqrt(_eq330_scales())
    c = v[:, 0::2] + 1j * v[:, 1::2]
    out = np.zeros((n, 2, 2, 2), dtype=complex)
    for i in range(2):
        h, b, cc = c[:, 3 * i], c[:, 3 * i + 1], c[:, 3 * i + 2]
        out[:, i, 0, 0], out[:, i, 1, 1] = h, -h
        out[:, i, 0, 1], out[:, i, 1, 0] = b, cc
    return out


def eq330_marginal_density(x):
    """Density of one real coordinate of the 12-dimensional EQ330 vector in
    its normalized chart, by quadrature over the other 11 dimensions."""
    f = lambda r, x: r ** 10 * (1 + x * x + r * r) ** -7
    vals = np.array([_quad(lambda r: f(r, xi), 0, np.inf) for xi in np.atleast_1d(x)])
    z = _quad(lambda xi: _quad(lambda r: f(r, xi), 0, np.inf), -np.inf, np.inf)
    return vals / z


def eq330_marginal_cdf(x_grid):
    dens = eq330_marginal_density(x_grid)
    c = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2 * np.diff(x_grid))])
    return c / c[-1]


def eq330_pushforwards(samples):
    """``(B1, B2')`` from EQ330 samples ``(t1, t2)``.

    ``t1, t2`` are the first two coefficients of the logarithmic derivative
    in ``w = -1/z``; with ``g_n`` the ``w^n`` coefficients, ``g1 = t1`` and
    ``2 g2 = t2 + t1^2``.  For traceless 2x2 ``t1^2`` is scalar, so the upper
    right entry of ``g2`` is half that of ``t2``.  Back in ``z^-n``
    coefficients, ``B1 = -(t1)_{12}``, ``D1 = -(t1)_{22}`` and
    ``B2 = (t2)_{12} / 2``.
    """
    t1, t2 = samples[:, 0], samples[:, 1]
    b1 = -t1[:, 0, 1]
    d1 = -t1[:, 1, 1]
    b2 = t2[:, 0, 1] / 2
    return b1, b2 / d1


# coherence of the N-family ---------------------------------------------------------------

def coherence_check_331(N, n, seed):
    """Sample the N-density, drop the last coordinate, and compare the
    radial law of the first coordinate with that of the (N-1)-density."""
    if N < 2:
        raise ValueError("N >= 2 required")
    big = ReferenceDensity("EQ331", N)
    small = ReferenceDensity("EQ331", N - 1)
    s = sample_reference(big, n, seed)[:, 0]
    r = np.abs(s)
    res = stats.kstest(r, small.radial_cdf)
    marginal_exponent = (big.dof + 2) / 2
    return {"N": N, "n": n, "seed": seed, "ks": float(res.statistic),
            "p_value": float(res.pvalue),
            "marginal_exponent": marginal_exponent,
            "reduced_exponent": small.exponent if N - 1 == 1 else (small.dof + 2) / 2}


# Cartan coordinates --------------------------------------------------------------------

SIGMA = np.diag([1.0, -1.0])


@dataclass(frozen=True, eq=False)
class CartanPoint:
    k: np.ndarray
    x: float

    @classmethod
    def from_ab(cls, a, b, x):
        return cls(np.array([[a, b], [-np.conj(b), np.conj(a)]]), float(x))

    @property
    def a(self):
        return self.k[0, 0]

    @property
    def b(self):
        return self.k[0, 1]

    def matrix(self):
        return cartan_map(self)

    @property
    def a0(self):
        return float(self.matrix()[0, 0].real)

    @property
    def b0(self):
        return complex(self.matrix()[0, 1])

    @property
    def d0(self):
        return float(self.matrix()[1, 1].real)

    @property
    def sphere_coordinate(self):
        """``-conj(b)/a``, the affine coordinate of ``k`` on the sphere."""
        return -np.conj(self.b) / self.a


def cartan_map(point):
    """``k exp(2x h) Theta(k)^-1`` with ``h = diag(1, -1)``: entries
    ``|a|^2 e^{2x} - |b|^2 e^{-2x}``, ``ab (e^{2x} + e^{-2x})`` and so on."""
    k = np.asarray(point.k, dtype=complex)
    e = np.diag([np.exp(2 * point.x), np.exp(-2 * point.x)])
    return k @ e @ SIGMA @ np.conj(k.T) @ SIGMA


def is_symmetric_zero_mode(g0, tol=1e-10):
    """``g0 = [[a0, b0], [-conj(b0), d0]]`` with real diagonal and det 1."""
    g0 = np.asarray(g0)
    star = SIGMA @ np.conj(g0.T) @ SIGMA
    return bool(np.max(np.abs(star - g0)) < tol and abs(np.linalg.det(g0) - 1) < tol)


def zeta_coordinate(g0, form="trace"):
    """Sphere coordinate of a symmetric zero mode.

    ``form="trace"`` uses ``a0 + d0`` and ``a0 - d0``; ``form="entries"``
    uses only ``a0`` and ``|b0|`` (eliminating ``d0`` through the
    determinant).  Both equal ``-conj(b)/a`` for the Cartan point.
    """
    g0 = np.asarray(g0)
    a0, b0, d0 = g0[0, 0].real, g0[0, 1], g0[1, 1].real
    if form == "trace":
        den = (a0 + d0) / 2 + math.sqrt(1 + ((a0 - d0) / 2) ** 2)
        num = -np.conj(b0)
    elif form == "entries":
        if a0 == 0:
            raise DegenerateDenominator("a0 = 0")
        nb = abs(b0) ** 2
        den = (a0 * a0 + 1 - nb) / 2 + math.copysign(1.0, a0) * math.sqrt(
            4 * a0 * a0 + (a0 * a0 + nb - 1) ** 2) / 2
        num = -np.conj(b0) * a0
    else:
        raise ValueError(form)
    if abs(den) < 1e-14:
        raise DegenerateDenominator("vanishing denominator")
    return complex(num / den)


def polar_zeta_sl2(g):
    """``conj(B) / (D - A + sqrt((A + D)^2 - 4))`` for ``g^* g = [[A, B],
    [conj(B), D]]``.  Minus twice this is the affine coordinate of the
    eigenvector of ``g^* g`` for its smaller eigenvalue."""
    A, B, D = polar_entries(g)
    s = math.sqrt(max((A + D) ** 2 - 4, 0.0))
    den = D - A + s
    if abs(den) < 1e-14:
        raise DegenerateDenominator("D - A + sqrt((A + D)^2 - 4) = 0")
    return complex(np.conj(B) / den)


def polar_entries(g):
    g = np.asarray(g, dtype=complex)
    p2 = np.conj(g.T) @ g
    return float(p2[0, 0].real), complex(p2[0, 1]), float(p2[1, 1].real)


def polar_eigen_coordinate(g):
    """Equivariant version: ``-2 * polar_zeta_sl2(g)``."""
    return -2 * polar_zeta_sl2(g)


def polar_inequality(g):
    """Both sides of ``(A + D)^2 <= 4 + Q^2`` with ``Q = conj(B) / zeta``."""
    A, B, D = polar_entries(g)
    z = polar_zeta_sl2(g)
    q = np.conj(B) / z
    return (A + D) ** 2, 4 + abs(q) ** 2, A, D


def moebius(m, w):
    """``(c + d w) / (a + b w)`` for ``m = [[a, b], [c, d]]``."""
    return (m[1, 0] + m[1, 1] * w) / (m[0, 0] + m[0, 1] * w)


# Jacobian of the Cartan parametrization ---------------------------------------------------

def _lie_basis():
    """Basis of the tangent model: two off-diagonal skew-Hermitian
    directions and the real diagonal ``diag(1, -1)``."""
    return [np.array([[0, 1], [-1, 0]], dtype=complex),
            np.array([[0, 1j], [1j, 0]], dtype=complex),
            np.diag([1.0, -1.0]).astype(complex)]


def _coords(X):
    """Coordinates of ``X = [[r, u], [-conj(u), -r]]`` in ``_lie_basis``."""
    return np.array([X[0, 1].real, X[0, 1].imag, X[0, 0].real])


def _pulled_tangent(k, x, s):
    from scipy.linalg import expm

    b = _lie_basis()
    kk = k @ expm(s[0] * b[0] + s[1] * b[1])
    P = cartan_map(CartanPoint(kk, x + s[2]))
    h = np.linalg.inv(k @ np.diag([np.exp(x), np.exp(-x)]))
    # translate back to the base point; phi(exp(tX)) has derivative 2X there
    return h @ P @ SIGMA @ np.conj(h.T) @ SIGMA


def jacobian_fd(k, x, step=1e-3):
    """Finite-difference differential of the Cartan parametrization in the
    basis of ``_lie_basis``, Richardson-extrapolated."""
    def central(hh):
        J = np.zeros((3, 3))
        for j in range(3):
            e = np.zeros(3)
            e[j] = hh
            d = (_pulled_tangent(k, x, e) - _pulled_tangent(k, x, -e)) / (2 * hh)
            J[:, j] = _coords(d / 2)
        return J

    j1, j2 = central(step), central(step / 2)
    rich = (4 * j2 - j1) / 3
    scale = max(1.0, float(np.max(np.abs(rich))))
    if np.max(np.abs(rich - j2)) / scale > 1e-4:
        raise StepSizeUnstable("finite differences disagree beyond 1e-4")
    return rich


def block_differential(x):
    """``cosh(ad x)`` on the off-diagonal directions and ``sinh(ad x)/ad x``
    on the diagonal, built from ``ad(x)^2`` in ``_lie_basis``."""
    X = np.diag([x, -x]).astype(complex)
    b = _lie_basis()
    M = np.zeros((3, 3))
    for j, v in enumerate(b):
        w = X @ (X @ v - v @ X) - (X @ v - v @ X) @ X
        M[:, j] = _coords(w)
    vals, vecs = np.linalg.eig(M)
    r = np.sqrt(vals.astype(complex))
    ch = np.cosh(r)
    sh = np.where(np.abs(r) > 1e-12, np.sinh(r) / np.where(np.abs(r) > 1e-12, r, 1), 1.0)
    Cm = (vecs @ np.diag(ch) @ np.linalg.inv(vecs)).real
    Sm = (vecs @ np.diag(sh) @ np.linalg.inv(vecs)).real
    out = np.zeros((3, 3))
    out[:2, :2] = Cm[:2, :2]
    out[2, 2] = Sm[2, 2]
    return out


def jacobian_check(point, step=1e-3):
    """Finite-difference Jacobian determinant vs ``cosh^2(2|x|)`` and the
    full matrix vs the block form."""
    J = jacobian_fd(np.asarray(point.k, dtype=complex), point.x, step)
    det = float(np.linalg.det(J))
    ref = math.cosh(2 * abs(point.x)) ** 2
    blk = block_differential(point.x)
    # root product: one positive root with value 2x on the off-diagonal part
    root_product = math.cosh(2 * point.x) ** 2
    return {"x": point.x, "det_fd": det, "det_ref": ref,
            "det_rel_error": abs(det - ref) / ref,
            "block_error": float(np.max(np.abs(J - blk)) / max(1.0, np.max(np.abs(blk)))),
            "block_det": float(np.linalg.det(blk)), "root_product": root_product}


def invariant_density_chart(g0):
    """Invariant volume density in the chart ``(a0, Re b0, Im b0)``:
    proportional to ``1/|a0|`` (equivalently ``a0 da0 dm(b0/a0)``)."""
    return 1.0 / abs(np.asarray(g0)[0, 0].real)


def lower_translation_check(g0, l, step=1e-6):
    """Change of variables under ``g0 -> l g0 l^{*Theta}`` for lower
    triangular ``l``: returns ``|det dT| * rho(T g0) / rho(g0)`` (1 when the
    chart density is invariant)."""
    l = np.asarray(l, dtype=complex)

    def T(c):
        a0, br, bi = c
        b0 = br + 1j * bi
        g = np.array([[a0, b0], [-np.conj(b0), (1 - abs(b0) ** 2) / a0]])
        h = l @ g @ SIGMA @ np.conj(l.T) @ SIGMA
        return np.array([h[0, 0].real, h[0, 1].real, h[0, 1].imag]), h

    g0 = np.asarray(g0)
    c0 = np.array([g0[0, 0].real, g0[0, 1].real, g0[0, 1].imag])
    J = np.zeros((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = step
        J[:, j] = (T(c0 + e)[0] - T(c0 - e)[0]) / (2 * step)
    img = T(c0)[1]
    return abs(np.linalg.det(J)) * invariant_density_chart(img) / invariant_density_chart(g0)


# diagonal distribution ---------------------------------------------------------------

def sech_cubed_consistency(x):
    """``sech^3(2x) cosh^2(2x) - sech(2x)`` (zero identically)."""
    x = np.asarray(x, dtype=float)
    return ReferenceDensity("SECH_CUBED").unnormalized(x) - 1 / np.cosh(2 * x)


def _sech(y):
    e = math.exp(-abs(y))
    return 2 * e / (1 + e * e)


def shear_cdf_cartan(s):
    """CDF of ``(a0 - d0)/2 = sinh(2x)`` under ``sech(2x) dx`` (normalized)."""
    xs = math.asinh(s) / 2
    z = 2 * _quad(lambda x: _sech(2 * x), 0, np.inf)
    if xs >= 0:
        return 0.5 + _quad(lambda x: _sech(2 * x), 0, xs) / z
    return 0.5 - _quad(lambda x: _sech(2 * x), xs, 0) / z


def _matrix_form_density(a0, r):
    """Density of the matrix-coordinate form in ``(a0, |z|)`` with
    ``z = b0 / a0``: ``(1 + s^2)^-3/2 |a0|`` times ``2 pi r``."""
    s = ((1 + r * r) * a0 * a0 - 1) / (2 * a0)
    return (1 + s * s) ** -1.5 * abs(a0) * 2 * math.pi * r


def shear_cdf_matrix(s):
    """Same CDF from the ``(a0, z)`` form by two-dimensional quadrature over
    the region ``(a0 - d0)/2 <= s``."""
    # |z|^2 = (2 a0 s + 1)/a0^2 - 1 is the boundary; for a0 > 0 the region
    # lies inside it, for a0 < 0 outside
    def edge(a):
        v = (2 * a * s + 1) / (a * a) - 1
        return math.sqrt(v) if v > 0 else 0.0

    top = s + math.sqrt(1 + s * s)
    pos = _dbl(lambda r, a: _matrix_form_density(a, r), 0, top, lambda a: 0.0, edge)
    neg = _dbl_tail(lambda r, a: _matrix_form_density(a, r), edge)
    total = 2 * _dbl_tail(lambda r, a: _matrix_form_density(a, r), lambda a: 0.0)
    return (pos + neg) / total


def _dbl(f, a_lo, a_hi, lo, hi):
    out = _quad(lambda a: _quad(lambda r: f(r, a), lo(a), hi(a)) if hi(a) > lo(a) else 0.0,
                a_lo, a_hi, epsabs=1e-11)
    return out


def _dbl_tail(f, lo):
    """``int_{a<0} int_{r >= lo(a)} f``, written with ``a -> -a``."""
    def inner(a):
        a = -a
        start = lo(a)
        return _quad(lambda r: f(r, a), start, start + 1) + _quad(lambda r: f(r, a), start + 1, np.inf)
    return _quad(inner, 0, 1, epsabs=1e-11) + _quad(inner, 1, np.inf, epsabs=1e-11)


def matrix_forms_agree(a0, z):
    """Pointwise ratio of the ``a0 da0`` form to the ``d(a0^2)`` form
    (with ``d(a0^2) = 2 a0 da0``); equals 1/2."""
    d0 = (1 - abs(z * a0) ** 2) / a0
    f1 = (1 + ((a0 - d0) / 2) ** 2) ** -1.5 * a0
    f2 = (1 + (((1 + abs(z) ** 2) * a0 * a0 - 1) / (2 * a0)) ** 2) ** -1.5 * 2 * a0
    return f1 / f2


def diag_transform_s2(lam):
    """``int_0^1 t^{-2 i lam} dt`` by quadrature (``t = e^u``)."""
    f = lambda u: np.exp(u * (1 - 2j * lam))
    return _quad_complex(f, -np.inf, 0)


def _u_integral(x, lam):
    """``int_{-1}^{1} |u cosh(2x) + sinh(2x)|^{-i lam} du`` numerically,
    split at the sign change and written with logarithmic variables."""
    c = math.cosh(2 * x)
    total = 0
    for top in (math.exp(2 * x), math.exp(-2 * x)):
        # int_0^top v^{-i lam} dv with v = top * e^{-t}
        f = lambda t, top=top: top * np.exp(-t * (1 - 1j * lam)) * top ** (-1j * lam)
        total += _quad_complex(f, 0, np.inf)
    return total / c


def fourier_check_75(lams, delta=None):
    """Mellin transform of ``|a0|`` under ``delta(2x) cosh^2(2x) dk dx``.

    Two routes: (i) direct double integral, the ``u``-integral done by
    quadrature; (ii) the reduced single integral
    ``2/(1 - i lam) int e^{2x(1 - i lam)} delta(2x) cosh(2x) dx``.
    Both are normalized by the total mass and compared with
    ``1/sin(pi (1 - i lam)/2)``.
    """
    delta = delta or (lambda y: 1 / np.cosh(y) ** 3)
    w = lambda x: delta(2 * x) * np.cosh(2 * x) ** 2
    # both integrands decay like exp(-2|x|); the cut avoids inf * 0 in cosh powers
    mass = 2 * _quad(lambda x: w(x), -40, 40)
    out = []
    for lam in lams:
        direct = _quad_complex(lambda x: _u_integral(x, lam) * w(x), -12, 12, epsabs=1e-12) / mass
        red = _quad_complex(lambda x: np.exp(2 * x * (1 - 1j * lam)) * delta(2 * x)
                            * np.cosh(2 * x), -40, 40, epsabs=1e-12)
        reduced = 2 / (1 - 1j * lam) * red / mass
        ref = 1 / np.sin(np.pi * (1 - 1j * lam) / 2)
        out.append({"lambda": lam, "direct": complex(direct), "reduced": complex(reduced),
                    "reference": complex(ref),
                    "abs_error": float(max(abs(direct - ref), abs(reduced - ref)))})
    return out


def sine_product_74(root_data, lam, coxeter):
    """``prod sin(pi/h <delta, alpha>) / sin(pi/h (<delta, alpha> - i <lam, alpha>))``
    for caller-supplied pairs ``(<delta, alpha>, <lam_unit, alpha>)``; the
    second entry is scaled by ``lam``."""
    out = 1.0 + 0j
    for d_a, l_a in root_data:
        out *= np.sin(np.pi / coxeter * d_a) / np.sin(np.pi / coxeter * (d_a - 1j * lam * l_a))
    return complex(out)


S2_ROOT_DATA = [(1.0, 1.0)]
S2_COXETER = 2
