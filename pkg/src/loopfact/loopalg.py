"""Truncated matrix-valued Laurent polynomials on the unit circle.

A :class:`TruncatedLoop` stores the coefficients of ``sum_k c_k z**k`` for
``k`` in a finite window ``[lo, hi]``.  Products are truncated to a working
window and any discarded mass is recorded in the ``truncated`` flag, so that
loss of information is observable rather than silent.

Pointwise involutions:

* ``star``  -- ``g*(z) = g(1/conj(z))^H``; on coefficients it reverses the
  degree index and conjugate-transposes every matrix.
* ``theta`` -- conjugation of every coefficient by a fixed matrix.

The Lie algebra norm used throughout the package is
``<X, Y> = -trace(X Y)`` (so ``|X|^2 = -trace(X^2)`` on skew-Hermitian X).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, SingularOnCircle, StepTooLarge

DEFAULT_N = 16
TOL_DET = 1e-9
TOL_TRUNC = 1e-14
GROUP_TAGS = ("GL", "SL2", "SL3")


def grid_size(lo, hi):
    """Power of two at least four times the number of stored degrees."""
    m = 4 * (hi - lo + 1)
    return 1 << (m - 1).bit_length()


def circle_grid(m):
    return np.exp(2j * np.pi * np.arange(m) / m)


@dataclass(frozen=True, eq=False)
class TruncatedLoop:
    coeffs: np.ndarray
    lo: int
    group_tag: str = "GL"
    truncated: bool = False

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[1] != c.shape[2]:
            raise ValueError(f"coefficients must have shape (n, d, d), got {c.shape}")
        if self.lo > 0 or self.lo + c.shape[0] - 1 < 0:
            raise ValueError("degree window must contain 0")
        if self.group_tag not in GROUP_TAGS:
            raise ValueError(f"unknown group tag {self.group_tag!r}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # construction -------------------------------------------------------
    @classmethod
    def from_dict(cls, mapping, dim=None, group_tag="GL"):
        """Build from ``{degree: matrix}``."""
        if not mapping:
            raise ValueError("empty coefficient mapping")
        mats = {k: np.asarray(v, dtype=complex) for k, v in mapping.items()}
        d = dim or next(iter(mats.values())).shape[0]
        lo = min(min(mats), 0)
        hi = max(max(mats), 0)
        c = np.zeros((hi - lo + 1, d, d), dtype=complex)
        for k, v in mats.items():
            c[k - lo] += v
        return cls(c, lo, group_tag)

    @classmethod
    def identity(cls, d, group_tag="GL"):
        return cls(np.eye(d, dtype=complex)[None], 0, group_tag)

    @classmethod
    def constant(cls, m, group_tag="GL"):
        return cls(np.asarray(m, dtype=complex)[None], 0, group_tag)

    @classmethod
    def from_grid(cls, values, n, group_tag="GL"):
        """Discrete Fourier refit of samples on a uniform circle grid.

        ``values[j]`` is the loop at ``exp(2 pi i j / m)``; degrees ``-n..n``
        are kept.
        """
        values = np.asarray(values, dtype=complex)
        m = values.shape[0]
        if m < 2 * n + 1:
            raise ValueError("grid too coarse for requested window")
        spec = np.fft.fft(values, axis=0) / m
        ks = np.arange(-n, n + 1)
        return cls(spec[ks % m], -n, group_tag)

    # basic accessors ----------------------------------------------------
    @property
    def dim(self):
        return self.coeffs.shape[1]

    @property
    def hi(self):
        return self.lo + self.coeffs.shape[0] - 1

    def coeff(self, k):
        if self.lo <= k <= self.hi:
            return self.coeffs[k - self.lo]
        return np.zeros((self.dim, self.dim), dtype=complex)

    def evaluate(self, z):
        """Value at a scalar or an array of points (finite Laurent sum)."""
        z = np.asarray(z, dtype=complex)
        ks = np.arange(self.lo, self.hi + 1)
        powers = z[..., None] ** ks
        return np.tensordot(powers, self.coeffs, axes=([-1], [0]))

    def on_grid(self, m=None):
        """Values on the m-point uniform grid, computed by FFT."""
        if m is None:
            m = grid_size(self.lo, self.hi)
        if m < self.hi - self.lo + 1:
            raise ValueError("grid smaller than the coefficient window")
        buf = np.zeros((m, self.dim, self.dim), dtype=complex)
        ks = np.arange(self.lo, self.hi + 1)
        np.add.at(buf, ks % m, self.coeffs)
        return np.fft.ifft(buf, axis=0) * m

    def with_window(self, lo, hi):
        """Re-window, zero padding or dropping coefficients (flagging loss)."""
        lo, hi = min(lo, 0), max(hi, 0)
        c = np.zeros((hi - lo + 1, self.dim, self.dim), dtype=complex)
        a, b = max(lo, self.lo), min(hi, self.hi)
        if a <= b:
            c[a - lo:b - lo + 1] = self.coeffs[a - self.lo:b - self.lo + 1]
        lost = self.truncated
        for k in range(self.lo, self.hi + 1):
            if (k < lo or k > hi) and np.max(np.abs(self.coeff(k))) > TOL_TRUNC:
                lost = True
                break
        return TruncatedLoop(c, lo, self.group_tag, lost)

    def trimmed(self, tol=0.0):
        """Smallest window keeping every coefficient above ``tol``."""
        mags = np.max(np.abs(self.coeffs), axis=(1, 2))
        nz = np.nonzero(mags > tol)[0]
        if nz.size == 0:
            return self.with_window(0, 0)
        return self.with_window(self.lo + nz[0], self.lo + nz[-1])

    def map_coeffs(self, fn):
        return TruncatedLoop(fn(self.coeffs), self.lo, self.group_tag, self.truncated)

    def det_error(self):
        vals = self.on_grid()
        return float(np.max(np.abs(np.linalg.det(vals) - 1.0)))

    def check_group(self, tol=TOL_DET):
        """True unless the tag is SL and the determinant drifts from 1."""
        if self.group_tag == "GL":
            return True
        return self.det_error() < tol

    def max_abs_diff(self, other):
        lo, hi = min(self.lo, other.lo), max(self.hi, other.hi)
        a = self.with_window(lo, hi).coeffs
        b = other.with_window(lo, hi).coeffs
        return float(np.max(np.abs(a - b)))

    # serialization ------------------------------------------------------
    def to_json(self):
        d = self.dim
        coeffs = [[[float(v.real), float(v.imag)] for v in c.reshape(d * d)]
                  for c in self.coeffs]
        return {"dim": d, "lo": int(self.lo), "hi": int(self.hi),
                "coeffs": coeffs, "group_tag": self.group_tag}

    @classmethod
    def from_json(cls, obj):
        d = int(obj["dim"])
        lo, hi = int(obj["lo"]), int(obj["hi"])
        raw = np.asarray(obj["coeffs"], dtype=float)
        if raw.shape != (hi - lo + 1, d * d, 2):
            raise ValueError("coefficient array does not match dim/lo/hi")
        c = (raw[..., 0] + 1j * raw[..., 1]).reshape(hi - lo + 1, d, d)
        return cls(c, lo, obj.get("group_tag", "GL"))

    def __repr__(self):
        return (f"TruncatedLoop(dim={self.dim}, lo={self.lo}, hi={self.hi}, "
                f"group_tag={self.group_tag!r}, truncated={self.truncated})")


def _tag(f, g):
    return f.group_tag if f.group_tag == g.group_tag else "GL"


def mul(f, g, n=DEFAULT_N):
    """Product of two loops.

    The result is kept in degrees ``[-n, n]``; ``n=None`` keeps the exact
    product window.  Dropped nonzero coefficients set ``truncated``.
    """
    if f.dim != g.dim:
        raise DimensionMismatch(f"dimension mismatch: {f.dim} vs {g.dim}")
    nf, ng = f.coeffs.shape[0], g.coeffs.shape[0]
    out = np.zeros((nf + ng - 1, f.dim, f.dim), dtype=complex)
    for i in range(nf):
        out[i:i + ng] += f.coeffs[i] @ g.coeffs
    prod = TruncatedLoop(out, f.lo + g.lo, _tag(f, g), f.truncated or g.truncated)
    if n is None:
        return prod
    return prod.with_window(-n, n)


def mul_all(*loops, n=None):
    out = loops[0]
    for g in loops[1:]:
        out = mul(out, g, n=n)
    return out


def add(f, g):
    lo, hi = min(f.lo, g.lo), max(f.hi, g.hi)
    c = f.with_window(lo, hi).coeffs + g.with_window(lo, hi).coeffs
    return TruncatedLoop(c, lo, "GL", f.truncated or g.truncated)


def scale(f, s):
    return TruncatedLoop(f.coeffs * s, f.lo, "GL", f.truncated)


def lmul_const(m, g):
    m = np.asarray(m, dtype=complex)
    return TruncatedLoop(m @ g.coeffs, g.lo, "GL", g.truncated)


def rmul_const(g, m):
    m = np.asarray(m, dtype=complex)
    return TruncatedLoop(g.coeffs @ m, g.lo, "GL", g.truncated)


def inverse(g, n=None, tol_det=TOL_DET):
    """Pointwise inverse, refit on ``[-n, n]`` (default: the input window)."""
    if n is None:
        n = max(-g.lo, g.hi)
    m = grid_size(-n, n)
    vals = g.on_grid(m)
    dets = np.linalg.det(vals)
    if np.min(np.abs(dets)) < tol_det:
        raise SingularOnCircle(f"min |det| on grid = {np.min(np.abs(dets)):.3e}")
    return TruncatedLoop.from_grid(np.linalg.inv(vals), n, g.group_tag)


def star(g):
    c = np.conj(np.transpose(g.coeffs[::-1], (0, 2, 1)))
    return TruncatedLoop(c, -g.hi, g.group_tag, g.truncated)


@dataclass(frozen=True)
class InvolutionConfig:
    """Theta is conjugation by ``theta_conjugator``; epsilon is the sign with
    ``Theta(e_top) = -epsilon * e_top`` for the highest root vector."""

    theta_conjugator: np.ndarray = field(default_factory=lambda: np.diag([1.0, -1.0]))
    epsilon: int = 1

    def __post_init__(self):
        c = np.asarray(self.theta_conjugator, dtype=complex)
        if not np.allclose(c @ c, c[0, 0] ** 2 * np.eye(c.shape[0])):
            raise ValueError("theta conjugator must square to a scalar")
        if self.epsilon not in (1, -1):
            raise ValueError("epsilon must be +1 or -1")
        object.__setattr__(self, "theta_conjugator", c)

    @classmethod
    def s2(cls):
        return cls(np.diag([1.0, -1.0]), 1)

    def theta_matrix(self, m):
        c = self.theta_conjugator
        return c @ m @ np.linalg.inv(c)

    def star_theta_matrix(self, m):
        return self.theta_matrix(np.conj(np.swapaxes(m, -1, -2)))


def theta(g, cfg):
    c = cfg.theta_conjugator
    return TruncatedLoop(c @ g.coeffs @ np.linalg.inv(c), g.lo, g.group_tag, g.truncated)


def star_theta(g, cfg):
    return theta(star(g), cfg)


def _unitary_log_angles(u):
    w = np.linalg.eigvals(u)
    return np.angle(w)


def energy(path):
    """Kinetic energy ``1/2 sum |log(g_i^-1 g_{i+1})|^2 / dt`` of a closed path.

    ``path`` is an array of ``M + 1`` unitary matrices (or any object with a
    ``points`` attribute holding one).  The norm is ``-trace(X^2)``.
    """
    pts = np.asarray(getattr(path, "points", path), dtype=complex)
    M = pts.shape[0] - 1
    if M < 1:
        return 0.0
    steps = np.conj(np.swapaxes(pts[:-1], -1, -2)) @ pts[1:]
    ang = _unitary_log_angles(steps)
    if np.max(np.abs(ang)) >= np.pi - 1e-12:
        raise StepTooLarge(f"step angle {np.max(np.abs(ang)):.4f} reaches pi")
    dt = 1.0 / M
    return float(0.5 * np.sum(ang ** 2) / dt)
