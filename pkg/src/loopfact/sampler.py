"""Wiener loops on SU(2) and their image in the two-sphere loop space.

Time normalization: an increment over path parameter ``ds`` has the law of
the heat kernel at time ``ds / beta``, so the free path at ``s = 1`` is
distributed as ``p_T`` with ``T = 1 / beta``.

The heat kernel is taken with respect to Haar probability measure,

    p_t(theta) = sum_{n >= 1} n exp(-(n^2 - 1) t / 2) sin(n theta) / sin(theta),

where ``theta`` is the class angle (eigenvalues ``exp(+-i theta)``).  With
the Lie algebra norm ``-trace(X Y)`` this is the kernel of ``exp(t Delta)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
import logging

import numpy as np

from .errors import (AliasingExcessive, RejectionStall, TruncationInsufficient)
from .loopalg import TruncatedLoop, InvolutionConfig, energy

log = logging.getLogger(__name__)

TAIL_TOL = 1e-10
UNITARY_TOL = 1e-10
ALIAS_MAX = 0.05
IMAGE_SUM_T = 0.5


# heat kernel -------------------------------------------------------------------

def chebyshev_u_sum(weights, cos_theta):
    """``sum_n weights[n-1] * U_{n-1}(cos_theta)``; ``U_{n-1}(cos t) =
    sin(n t)/sin(t)`` with the correct limits at 0 and pi."""
    x = np.asarray(cos_theta, dtype=float)
    u_prev = np.zeros_like(x)
    u = np.ones_like(x)
    acc = weights[0] * u
    for w in weights[1:]:
        u, u_prev = 2 * x * u - u_prev, u
        acc = acc + w * u
    return acc


def required_terms(t, tol=TAIL_TOL):
    """Smallest ``n_max`` whose dropped tail ``sum n^2 exp(-(n^2-1)t/2)`` is
    below ``tol``."""
    n = max(1, int(np.sqrt(2 * 40 / t)) + 2)
    while True:
        k = np.arange(n + 1, n + 200)
        tail = np.sum(k ** 2 * np.exp(-(k ** 2 - 1) * t / 2))
        if tail < tol:
            break
        n += 50
    # shrink to the smallest adequate value
    lo = 1
    while lo < n:
        mid = (lo + n) // 2
        k = np.arange(mid + 1, mid + 400)
        if np.sum(k ** 2 * np.exp(-(k ** 2 - 1) * t / 2)) < tol:
            n = mid
        else:
            lo = mid + 1
    return n


@dataclass(frozen=True, eq=False)
class HeatKernelTable:
    t: float
    n_max: int
    weights: np.ndarray = field(repr=False, default=None)
    normalizer: float = 1.0

    def __call__(self, theta):
        th = np.asarray(theta, dtype=float)
        return chebyshev_u_sum(self.weights, np.cos(th)) / self.normalizer

    def fast(self, theta):
        """Same values; image sum over geodesics for small ``t``."""
        if self.t >= IMAGE_SUM_T:
            return self(theta)
        return image_sum(theta, self.t)

    def at_identity(self):
        n = np.arange(1, self.n_max + 1)
        return float(np.sum(n * self.weights) / self.normalizer)

    def of_matrix(self, g):
        return self.fast(class_angle(g))

    def angle_density(self, theta):
        """Density of the class angle under ``p_t * Haar``."""
        th = np.asarray(theta, dtype=float)
        return self(th) * (2 / np.pi) * np.sin(th) ** 2

    def angle_cdf_table(self, m=8193):
        top = min(np.pi, 14 * np.sqrt(self.t) + 0.05)
        th = np.linspace(0.0, top, m)
        dens = self.fast(th) * (2 / np.pi) * np.sin(th) ** 2
        cdf = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2 * np.diff(th))])
        cdf /= cdf[-1]
        return th, cdf

    def angle_cdf(self, theta):
        th, cdf = self.angle_cdf_table()
        return np.interp(theta, th, cdf)


@lru_cache(maxsize=4096)
def heat_kernel(t, n_max=None):
    """Heat kernel table; raises if ``n_max`` leaves a tail above 1e-10."""
    if t <= 0:
        raise ValueError("t must be positive")
    need = required_terms(t)
    if n_max is None:
        n_max = need
    elif n_max < need:
        raise TruncationInsufficient(f"n_max={n_max} < {need} needed at t={t}")
    n = np.arange(1, n_max + 1)
    w = n * np.exp(-(n ** 2 - 1) * t / 2)
    # Haar integral of U_{n-1} is delta_{n,1}; evaluate it numerically anyway.
    # The integrand is a trigonometric polynomial, so the trapezoid rule on
    # more than 2 n_max + 2 nodes is exact.
    th = np.linspace(0, np.pi, 4 * n_max + 65)
    vals = chebyshev_u_sum(w, np.cos(th)) * (2 / np.pi) * np.sin(th) ** 2
    z = float(np.sum((vals[1:] + vals[:-1]) / 2) * (th[1] - th[0]))
    return HeatKernelTable(t, n_max, w, z)


def image_sum(theta, t, images=2):
    """``p_t`` as a sum over the geodesics from 1 to ``g`` (Poisson
    resummation of the character series); fast and accurate for small t."""
    th = np.minimum(np.asarray(theta, dtype=float), np.pi - 1e-6)
    pref = 2 * np.pi ** 2 * (2 * np.pi * t) ** -1.5 * np.exp(t / 2)
    near0 = th < 1e-6
    s = np.where(near0, 1.0, np.sin(th))
    acc = np.where(near0, 1.0, th / s) * np.exp(-th ** 2 / (2 * t))
    for k in range(1, images + 1):
        for shift in (2 * np.pi * k, -2 * np.pi * k):
            u = th + shift
            # the paired images cancel at theta = 0
            acc = acc + np.where(near0, 0.0, u / s * np.exp(-u ** 2 / (2 * t)))
    return pref * acc


def gaussian_small_time(theta, t):
    """Flat-space approximation of ``p_t`` near the identity (Haar
    normalization): ``2 pi^2 (2 pi t)^{-3/2} exp(-theta^2 / (2 t))``."""
    return 2 * np.pi ** 2 * (2 * np.pi * t) ** -1.5 * np.exp(-np.asarray(theta) ** 2 / (2 * t))


def semigroup_check(s=0.2, t=0.2, n=10 ** 6, n_targets=20, seed=0, chunk=250_000):
    """Monte Carlo test of ``int p_s(g h^{-1}) p_t(h) dh = p_{s+t}(g)`` over
    Haar ``h``, at random targets ``g``.  Reports each estimate with its
    standard error and the error measured in standard errors."""
    rng = make_rng(seed, 99)
    ks, kt, kst = heat_kernel(s), heat_kernel(t), heat_kernel(s + t)
    targets = haar_su2(rng, n_targets)
    # concentrate half the targets near the identity, where the kernels peak
    near = su2_from_angle_axis(rng.uniform(0, 1.0, n_targets // 2),
                               rng.normal(size=(n_targets // 2, 3)) / np.sqrt(3))
    targets[: n_targets // 2] = project_su2(near)
    total = np.zeros(n_targets)
    total_sq = np.zeros(n_targets)
    done = 0
    while done < n:
        m = min(chunk, n - done)
        h = haar_su2(rng, m)
        pt = kt.fast(class_angle(h))
        for i, g in enumerate(targets):
            # trace(g h^{-1}) = sum of g * conj(h) entrywise
            tr = np.real(np.einsum("ij,nij->n", g, np.conj(h))) / 2
            v = ks.fast(np.arccos(np.clip(tr, -1, 1))) * pt
            total[i] += v.sum()
            total_sq[i] += (v * v).sum()
        done += m
    mean = total / n
    se = np.sqrt(np.maximum(total_sq / n - mean ** 2, 0) / (n - 1))
    ref = kst.fast(class_angle(targets))
    z = np.abs(mean - ref) / se
    return {"s": s, "t": t, "n": n, "estimate": mean.tolist(), "reference": ref.tolist(),
            "standard_error": se.tolist(), "max_z": float(z.max()),
            "ok": bool(np.all(z <= 3))}


# SU(2) utilities ---------------------------------------------------------------

def su2_from_angle_axis(theta, axis):
    """``cos(theta) + sin(theta) * i(axis . sigma)`` for arrays of inputs."""
    theta = np.asarray(theta)
    axis = np.asarray(axis)
    c, s = np.cos(theta), np.sin(theta)
    out = np.empty(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c + 1j * s * axis[..., 2]
    out[..., 1, 1] = c - 1j * s * axis[..., 2]
    out[..., 0, 1] = s * (axis[..., 1] + 1j * axis[..., 0])
    out[..., 1, 0] = s * (-axis[..., 1] + 1j * axis[..., 0])
    return out


def class_angle(g):
    tr = np.real(np.trace(g, axis1=-2, axis2=-1)) / 2
    return np.arccos(np.clip(tr, -1.0, 1.0))


def project_su2(g):
    """Nearest SU(2) element: keep the quaternion part and normalize."""
    a = (g[..., 0, 0] + np.conj(g[..., 1, 1])) / 2
    b = (g[..., 0, 1] - np.conj(g[..., 1, 0])) / 2
    r = np.sqrt(np.abs(a) ** 2 + np.abs(b) ** 2)
    a, b = a / r, b / r
    out = np.empty(g.shape, dtype=complex)
    out[..., 0, 0], out[..., 0, 1] = a, b
    out[..., 1, 0], out[..., 1, 1] = -np.conj(b), np.conj(a)
    return out


def haar_su2(rng, n):
    q = rng.normal(size=(n, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    a = q[:, 0] + 1j * q[:, 1]
    b = q[:, 2] + 1j * q[:, 3]
    out = np.empty((n, 2, 2), dtype=complex)
    out[:, 0, 0], out[:, 0, 1] = a, b
    out[:, 1, 0], out[:, 1, 1] = -np.conj(b), np.conj(a)
    return out


def make_rng(seed, stream=0):
    """Counter-based generator keyed by ``(seed, stream)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


class IncrementSampler:
    """Draws SU(2) increments distributed as ``p_t * Haar``."""

    def __init__(self, t):
        self.kernel = heat_kernel(t)
        self._th, self._cdf = self.kernel.angle_cdf_table()

    def angles(self, rng, n):
        u = rng.random(n)
        return np.interp(u, self._cdf, self._th)

    def __call__(self, rng, n):
        th = self.angles(rng, n)
        ax = rng.normal(size=(n, 3))
        ax /= np.linalg.norm(ax, axis=1, keepdims=True)
        return su2_from_angle_axis(th, ax)


def axis_angle(g):
    """Class angle and rotation axis of SU(2) elements."""
    th = class_angle(g)
    v = np.stack([np.imag(g[..., 0, 1] + g[..., 1, 0]) / 2,
                  np.real(g[..., 0, 1] - g[..., 1, 0]) / 2,
                  np.imag(g[..., 0, 0] - g[..., 1, 1]) / 2], axis=-1)
    nv = np.linalg.norm(v, axis=-1, keepdims=True)
    ax = np.where(nv > 1e-300, v / np.where(nv > 0, nv, 1.0), [0.0, 0.0, 1.0])
    return th, ax


# paths --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LoopPath:
    beta: float
    M: int
    points: np.ndarray
    seed: int = 0
    fallback_steps: int = 0
    drift: float = 0.0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        if pts.shape != (self.M + 1, 2, 2):
            raise ValueError("points must have shape (M + 1, 2, 2)")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def unitarity_error(self):
        p = self.points
        eye = np.conj(np.swapaxes(p, -1, -2)) @ p - np.eye(2)
        return float(max(np.max(np.abs(eye)), np.max(np.abs(np.linalg.det(p) - 1))))

    def energy(self):
        return energy(self.points)


def _check_M(M):
    if M < 16 or M & (M - 1):
        raise ValueError("M must be a power of two, at least 16")


def sample_free_paths(beta, M, n, seed, stream=0):
    """Unconditioned random walks started at the identity, shape (n, M+1, 2, 2)."""
    _check_M(M)
    rng = make_rng(seed, stream)
    inc = IncrementSampler(1.0 / (M * beta))
    pts = np.empty((n, M + 1, 2, 2), dtype=complex)
    pts[:, 0] = np.eye(2)
    for k in range(1, M + 1):
        pts[:, k] = project_su2(pts[:, k - 1] @ inc(rng, n))
    return pts


def _guided_chain(rng, prev, start, dt, r, step_kernel, rem_kernel, steps):
    """Independence Metropolis chain for ``p_dt(prev^-1 g) p_{r dt}(g)``.

    Proposals are heat kernel draws of variance ``dt r/(r+1)`` around the
    point a fraction ``1/(r+1)`` of the way from ``prev`` to the identity,
    the flat-space mean and variance of the target.
    """
    th, ax = axis_angle(prev)
    centre = su2_from_angle_axis(th * r / (r + 1), ax)
    prop = IncrementSampler(dt * r / (r + 1))

    def log_target(g):
        a = step_kernel.fast(class_angle(np.conj(np.swapaxes(prev, -1, -2)) @ g))
        b = rem_kernel.fast(class_angle(g))
        return np.log(np.maximum(a * b, 1e-300))

    def log_q(g):
        rel = np.conj(np.swapaxes(centre, -1, -2)) @ g
        return np.log(np.maximum(prop.kernel.fast(class_angle(rel)), 1e-300))

    cur = start.copy()
    cur_lw = log_target(cur) - log_q(cur)
    for _ in range(steps):
        cand = centre @ prop(rng, len(cur))
        lw = log_target(cand) - log_q(cand)
        acc = np.log(rng.random(len(cur))) < lw - cur_lw
        cur[acc], cur_lw[acc] = cand[acc], lw[acc]
    return cur


def sample_bridges(beta, M, n, seed, stream=0, retry_cap=24, metropolis=True,
                   metropolis_steps=24):
    """Closed paths (Brownian bridges at the identity), shape (n, M+1, 2, 2).

    Step ``k`` draws ``g_k`` from ``p_dt(g_{k-1}^-1 g) p_{(M-k) dt}(g)`` by
    rejection with proposal ``p_dt(g_{k-1}^-1 g)``.  Loops that exhaust
    ``retry_cap`` proposals at a step fall back to a Metropolis chain with
    the same target (see ``_guided_chain``).

    Returns ``(points, info)`` where ``info`` records fallback counts and the
    largest pre-projection unitarity drift.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    _check_M(M)
    rng = make_rng(seed, stream)
    dt = 1.0 / (M * beta)
    inc = IncrementSampler(dt)
    pts = np.empty((n, M + 1, 2, 2), dtype=complex)
    pts[:, 0] = np.eye(2)
    pts[:, M] = np.eye(2)
    fallback = np.zeros(n, dtype=int)
    drift = 0.0
    for k in range(1, M):
        rem = heat_kernel((M - k) * dt)
        top = rem.at_identity()
        prev = pts[:, k - 1]
        pending = np.arange(n)
        tries = 0
        best = np.empty((n, 2, 2), dtype=complex)
        best_w = np.full(n, -1.0)
        while pending.size and tries < retry_cap:
            cand = prev[pending] @ inc(rng, pending.size)
            w = rem.of_matrix(cand) / top
            better = w > best_w[pending]
            best[pending[better]] = cand[better]
            best_w[pending[better]] = w[better]
            ok = rng.random(pending.size) < w
            pts[pending[ok], k] = cand[ok]
            pending = pending[~ok]
            tries += 1
        if pending.size:
            if not metropolis:
                raise RejectionStall(f"{pending.size} loops stalled at step {k}")
            pts[pending, k] = _guided_chain(rng, prev[pending], best[pending], dt,
                                            M - k, inc.kernel, rem, metropolis_steps)
            fallback[pending] += 1
        raw = pts[:, k]
        drift = max(drift, float(np.max(np.abs(np.abs(np.linalg.det(raw)) - 1))))
        pts[:, k] = project_su2(raw)
    return pts, {"fallback_steps": fallback, "drift": drift}


def sample_bridge(beta, M, seed, **kw):
    pts, info = sample_bridges(beta, M, 1, seed, **kw)
    return LoopPath(beta, M, pts[0], seed, int(info["fallback_steps"][0]), info["drift"])


# projection to the sphere loop space ---------------------------------------------

def project_s2_points(points, cfg=None):
    """Pointwise ``k -> k Theta(k)^{-1}`` on an array of SU(2) elements."""
    cfg = cfg or InvolutionConfig.s2()
    c = cfg.theta_conjugator
    ci = np.linalg.inv(c)
    th = c @ points @ ci
    return points @ np.conj(np.swapaxes(th, -1, -2))


def refit(values, n, alias_max=ALIAS_MAX, tag="GL"):
    """Fourier refit of closed-path samples (``values[M] == values[0]``)."""
    vals = np.asarray(values)[:-1]
    m = vals.shape[0]
    spec = np.fft.fft(vals, axis=0) / m
    ks = np.arange(-n, n + 1)
    power = np.sum(np.abs(spec) ** 2, axis=(1, 2))
    kept = np.sum(power[ks % m])
    out_frac = 1.0 - kept / np.sum(power)
    if out_frac > alias_max:
        raise AliasingExcessive(f"out-of-window spectral mass {out_frac:.3f}")
    return TruncatedLoop(spec[ks % m], -n, tag), float(out_frac)


def project_s2(path, cfg=None, n=16, alias_max=ALIAS_MAX):
    """Symmetric loop ``g Theta(g)^{-1}`` of a closed path, refit on ``[-n, n]``."""
    pts = getattr(path, "points", path)
    loop, _ = refit(project_s2_points(pts, cfg), n, alias_max)
    return loop


# asymptotic invariance probes --------------------------------------------------------

def invariance_bound(sigma_loop, beta):
    """``2^{3/2} p_{T/2}(1)^2 / p_T(1) * beta^{1/2} * E(sigma)^{1/2}``, T = 1/beta."""
    T = 1.0 / beta
    e = energy(sigma_loop)
    ph = heat_kernel(T / 2).at_identity()
    pf = heat_kernel(T).at_identity()
    return float(2 ** 1.5 * ph ** 2 / pf * np.sqrt(beta) * np.sqrt(e))


def rotation_loop(M, winding=1):
    """Closed path ``diag(exp(2 pi i w t), exp(-2 pi i w t))`` at ``t = k/M``."""
    t = np.arange(M + 1) / M
    out = np.zeros((M + 1, 2, 2), dtype=complex)
    out[:, 0, 0] = np.exp(2j * np.pi * winding * t)
    out[:, 1, 1] = np.exp(-2j * np.pi * winding * t)
    return out


def invariance_probe(statistic, transform, betas, n, seed, M=256):
    """Two-sample KS distance between a statistic on sampled loops and on the
    transformed loops, for each beta.  ``statistic`` maps an array of paths
    to real values (NaN marks dropped loops); ``transform`` maps paths to
    paths."""
    from scipy.stats import ks_2samp

    out = []
    for i, beta in enumerate(betas):
        pts, _ = sample_bridges(beta, M, n, seed, stream=i)
        s0 = np.asarray(statistic(pts), dtype=float)
        s1 = np.asarray(statistic(transform(pts)), dtype=float)
        s0, s1 = s0[np.isfinite(s0)], s1[np.isfinite(s1)]
        res = ks_2samp(s0, s1)
        out.append({"beta": beta, "n0": int(s0.size), "n1": int(s1.size),
                    "ks": float(res.statistic), "p_value": float(res.pvalue)})
    return out
