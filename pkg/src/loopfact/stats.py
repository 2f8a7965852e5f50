"""Goodness-of-fit tests for real and complex statistics.

Complex statistics are compared through the modulus (KS against a radial
CDF) and the argument (Kuiper against the uniform law on the circle); the
reference laws here are all rotation invariant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats as _st

from .distheory import ReferenceDensity
from .errors import InsufficientSamples

MIN_SAMPLES = 100


@dataclass(frozen=True)
class KSResult:
    distance: float
    p_value: float
    parts: dict = field(default_factory=dict)

    def __iter__(self):
        yield self.distance
        yield self.p_value


def kuiper_uniform(u):
    """Kuiper statistic of ``u`` in [0, 1) against the uniform law, with the
    Stephens small-sample correction for the p-value."""
    u = np.sort(np.asarray(u, dtype=float))
    n = u.size
    i = np.arange(1, n + 1)
    v = float(np.max(i / n - u) + np.max(u - (i - 1) / n))
    lam = (np.sqrt(n) + 0.155 + 0.24 / np.sqrt(n)) * v
    if lam < 0.4:
        return v, 1.0
    j = np.arange(1, 101)
    p = 2 * np.sum((4 * j ** 2 * lam ** 2 - 1) * np.exp(-2 * j ** 2 * lam ** 2))
    return v, float(min(max(p, 0.0), 1.0))


def _angles(z):
    return (np.angle(z) / (2 * np.pi)) % 1.0


def _check_size(*arrays):
    for a in arrays:
        if a.size < MIN_SAMPLES:
            raise InsufficientSamples(f"{a.size} samples, need {MIN_SAMPLES}")


def ks_test(samples, reference):
    """Distance and p-value of ``samples`` against ``reference``.

    ``reference`` is a :class:`ReferenceDensity`, a CDF callable, or a second
    sample.  For complex samples the distance is the radial KS distance and
    the p-value is the Bonferroni combination of the radial and angular
    tests.
    """
    x = np.asarray(samples)
    x = x[np.isfinite(x)]
    _check_size(x)
    is_complex = np.iscomplexobj(x)

    if isinstance(reference, (np.ndarray, list, tuple)):
        y = np.asarray(reference)
        y = y[np.isfinite(y)]
        _check_size(y)
        if not is_complex:
            r = _st.ks_2samp(x, y)
            return KSResult(float(r.statistic), float(r.pvalue))
        rad = _st.ks_2samp(np.abs(x), np.abs(y))
        ang = _st.ks_2samp(_angles(x), _angles(y))
        return _combine(rad.statistic, rad.pvalue, ang.statistic, ang.pvalue)

    if isinstance(reference, ReferenceDensity):
        cdf = reference.radial_cdf if is_complex else reference.cdf
    else:
        cdf = reference
    if not is_complex:
        r = _st.kstest(x, cdf)
        return KSResult(float(r.statistic), float(r.pvalue))
    rad = _st.kstest(np.abs(x), cdf)
    v, pv = kuiper_uniform(_angles(x))
    return _combine(rad.statistic, rad.pvalue, v, pv)


def _combine(d_rad, p_rad, d_ang, p_ang):
    p = min(1.0, 2 * min(p_rad, p_ang))
    return KSResult(float(d_rad), float(p),
                    {"radial_distance": float(d_rad), "radial_p": float(p_rad),
                     "angle_distance": float(d_ang), "angle_p": float(p_ang)})


def noise_band(n, alpha=0.01):
    """One-sample KS critical distance at level ``alpha`` (asymptotic)."""
    return float(np.sqrt(-np.log(alpha / 2) / 2) / np.sqrt(n))


def two_sample_band(n, m, alpha=0.01):
    return float(np.sqrt(-np.log(alpha / 2) / 2) * np.sqrt((n + m) / (n * m)))
