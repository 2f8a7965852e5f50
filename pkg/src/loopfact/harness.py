"""Experiment runner: sample loops, factor them, extract statistics, test
them against reference laws, and write reproducible reports."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import re
import time
from dataclasses import dataclass, field

import numpy as np
import scipy

from . import __version__
from .birkhoff import factorize, rh_coords
from .distheory import ReferenceDensity, zeta_coordinate
from .errors import (AliasingExcessive, Degenerate, DegenerateDenominator, DegenerateDn,
                     InsufficientSamples, LowerStratum, StepTooLarge)
from .loopalg import InvolutionConfig
from .sampler import ALIAS_MAX, project_s2_points, refit, sample_bridges
from .stats import ks_test

log = logging.getLogger(__name__)

TARGETS = ("SU2_GROUP", "S2")
CHUNK = 2000
_BPRIME = re.compile(r"^(?:B(\d+)p|Bnp\((\d+)\))$")
_SCALAR = {"a0", "theta1", "theta2", "zeta"}
_S2_ONLY = {"a0", "zeta"}


def bprime_index(name):
    m = _BPRIME.match(name)
    if not m:
        return None
    return int(m.group(1) or m.group(2))


@dataclass(frozen=True)
class ExperimentConfig:
    target: str
    betas: tuple
    M: int = 256
    N: int = 16
    n_loops: int = 1000
    seed: int = 0
    statistics: tuple = ("B1p",)
    references: dict = field(default_factory=lambda: {"B1p": "EQ321"})
    alias_max: float = ALIAS_MAX

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        object.__setattr__(self, "statistics", tuple(self.statistics))
        if self.target not in TARGETS:
            raise ValueError(f"target must be one of {TARGETS}")
        if any(b <= 0 for b in self.betas):
            raise ValueError("every beta must be positive")
        if self.n_loops < 0:
            raise ValueError("n_loops must be nonnegative")
        for s in self.statistics:
            if s not in _SCALAR and bprime_index(s) is None:
                raise ValueError(f"unknown statistic {s!r}")
            if s in _S2_ONLY and self.target != "S2":
                raise ValueError(f"{s} is only defined for the S2 target")

    def to_json(self):
        return dataclasses.asdict(self) | {"betas": list(self.betas),
                                           "statistics": list(self.statistics)}

    @classmethod
    def from_json(cls, obj):
        return cls(**obj)

    def digest(self):
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass
class Report:
    config: ExperimentConfig
    rows: list
    metadata: dict

    def reconciles(self):
        return all(r["kept"] + r["dropped"] + r["lower_stratum"] == self.config.n_loops
                   for r in self.rows)

    def to_json(self, with_timestamp=True):
        meta = dict(self.metadata)
        if not with_timestamp:
            meta.pop("timestamp", None)
            meta.pop("runtime_s", None)
        return {"config": self.config.to_json(), "rows": self.rows, "metadata": meta}

    def digest(self):
        blob = json.dumps(self.to_json(with_timestamp=False), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def _pair(z):
    return [float(np.real(z)), float(np.imag(z))]


def _matrix_json(m):
    return [_pair(v) for v in np.asarray(m).reshape(-1)]


def loop_statistics(points, target, N, alias_max=ALIAS_MAX, nmax=1):
    """Factor one sampled path and read off its statistics.

    Returns ``(status, stats)`` with status ``kept``, ``dropped`` or
    ``lower_stratum``; the failure reason is stored under ``reason``.
    """
    try:
        vals = project_s2_points(points) if target == "S2" else points
        loop, out_frac = refit(vals, N, alias_max)
        f = factorize(loop)
    except LowerStratum as exc:
        return "lower_stratum", {"reason": str(exc)}
    except (AliasingExcessive, StepTooLarge) as exc:
        return "dropped", {"reason": str(exc)}
    co = rh_coords(f, order=max(nmax, 2), plus_order=2)
    out = {"alias": out_frac}
    try:
        for n, v in enumerate(co.b_primes(nmax), start=1):
            out[f"B{n}p"] = _pair(v)
    except (DegenerateDn, Degenerate) as exc:
        return "dropped", {"reason": str(exc)}
    out["theta1"] = _matrix_json(co.theta[1])
    out["theta2"] = _matrix_json(co.theta[2])
    g0 = f.g_zero
    if target == "S2":
        out["a0"] = float(np.real(g0[0, 0]))
        out["b0"] = _pair(g0[0, 1])
        try:
            out["zeta"] = _pair(zeta_coordinate(g0))
        except DegenerateDenominator:
            out["zeta"] = None
    return "kept", out


def iter_records(cfg):
    """Yield one JSON-ready record per sampled loop, in a fixed order."""
    nmax = max([bprime_index(s) or 1 for s in cfg.statistics] + [1])
    for i, beta in enumerate(cfg.betas):
        done = 0
        chunk_id = 0
        while done < cfg.n_loops:
            m = min(CHUNK, cfg.n_loops - done)
            pts, _ = sample_bridges(beta, cfg.M, m, cfg.seed, stream=1000 * i + chunk_id)
            for j in range(m):
                status, st = loop_statistics(pts[j], cfg.target, cfg.N, cfg.alias_max, nmax)
                if status != "kept":
                    log.info("beta=%g loop %d quarantined: %s", beta, done + j, st["reason"])
                yield {"beta": beta, "M": cfg.M, "seed": cfg.seed, "loop": done + j,
                       "status": status, "stratum_ok": status != "lower_stratum",
                       "statistics": st}
            done += m
            chunk_id += 1


def statistic_values(records, name):
    """Scalar view of a statistic: complex for pairs, real for numbers."""
    n = bprime_index(name)
    key = name if n is None else f"B{n}p"
    out = []
    for r in records:
        v = r["statistics"].get(key)
        if v is None:
            continue
        if isinstance(v, list) and len(v) == 2 and not isinstance(v[0], list):
            out.append(complex(v[0], v[1]))
        elif isinstance(v, (int, float)):
            out.append(float(v))
    return np.asarray(out)


def _reference(tag):
    if tag is None:
        return None
    m = re.match(r"^EQ331\((\d+)\)$", tag)
    if m:
        return ReferenceDensity("EQ331", int(m.group(1)))
    return ReferenceDensity(tag)


def summarize(records, cfg):
    """Report rows from records: counts per beta and KS per statistic."""
    rows = []
    for beta in cfg.betas:
        rs = [r for r in records if r["beta"] == beta]
        kept = [r for r in rs if r["status"] == "kept"]
        n_drop = sum(r["status"] == "dropped" for r in rs)
        n_low = sum(r["status"] == "lower_stratum" for r in rs)
        attempts = len(kept) + n_low
        for name in cfg.statistics:
            row = {"beta": beta, "statistic": name, "kept": len(kept), "dropped": n_drop,
                   "lower_stratum": n_low,
                   "lower_fraction": n_low / attempts if attempts else 0.0,
                   "reference": cfg.references.get(name), "ks": None, "p_value": None}
            ref = _reference(row["reference"])
            vals = statistic_values(kept, name)
            if ref is not None and not vals.size:
                row["note"] = "no values for this statistic"
            elif ref is not None:
                try:
                    res = ks_test(vals, ref)
                    row.update(ks=res.distance, p_value=res.p_value, parts=res.parts)
                except InsufficientSamples as exc:
                    row["note"] = str(exc)
            rows.append(row)
    return rows


def run_experiment(cfg, samples_path=None):
    """Run ``cfg``; optionally stream the per-loop records to JSONL."""
    t0 = time.time()
    records = []
    fh = open(samples_path, "w") if samples_path else None
    try:
        for rec in iter_records(cfg):
            records.append(rec)
            if fh:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
    finally:
        if fh:
            fh.close()
    meta = {"config_hash": cfg.digest(), "seed": cfg.seed,
            "versions": {"loopfact": __version__, "numpy": np.__version__,
                         "scipy": scipy.__version__},
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
            "runtime_s": round(time.time() - t0, 3)}
    rep = Report(cfg, summarize(records, cfg), meta)
    assert rep.reconciles()
    return rep


def read_jsonl(path):
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]
