"""Command line entry point.

Exit codes: 0 when every check passes, 1 on a failed check (details on
stdout as JSON), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import inspect
import json
import logging
import sys

import numpy as np

from . import harness, verify
from .birkhoff import factorize
from .errors import InsufficientSamples, LowerStratum
from .loopalg import TruncatedLoop
from .stats import ks_test


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def _emit(obj, path=None):
    text = json.dumps(obj, indent=2, default=_jsonable)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    print(text)


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"not serializable: {type(x)}")


def _matrix(m):
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(m)]


def cmd_factorize(args):
    with open(args.input) as fh:
        loop = TruncatedLoop.from_json(json.load(fh))
    try:
        f = factorize(loop)
    except LowerStratum as exc:
        _emit({"ok": False, "error": "LowerStratum", "message": str(exc),
               "report": exc.report.to_json() if exc.report else None})
        return 1
    _emit({"ok": True, "g_minus": f.g_minus.to_json(), "g_zero": _matrix(f.g_zero),
           "g_plus": f.g_plus.to_json(), "residual": f.residual}, args.out)
    return 0


def cmd_verify(args):
    fn = verify.SUITES[args.suite]
    accepted = inspect.signature(fn).parameters
    kw = {k: v for k, v in (("trials", args.trials), ("seed", args.seed), ("tol", args.tol))
          if v is not None and k in accepted}
    res = fn(**kw)
    _emit(res)
    return 0 if res["failures"] == 0 else 1


def cmd_sample(args):
    target = {"su2": "SU2_GROUP", "s2": "S2"}[args.target]
    stats = ["B1p", "B2p", "B3p"] + (["a0", "zeta"] if target == "S2" else [])
    cfg = harness.ExperimentConfig(target, [args.beta], M=args.steps, N=args.window,
                                   n_loops=args.loops, seed=args.seed, statistics=stats,
                                   references={}, alias_max=args.alias_max)
    counts = {"kept": 0, "dropped": 0, "lower_stratum": 0}
    with open(args.out, "w") as fh:
        for rec in harness.iter_records(cfg):
            counts[rec["status"]] += 1
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    print(json.dumps({"out": args.out, "config_hash": cfg.digest(), **counts}))
    return 0


def cmd_stats(args):
    records = [r for r in harness.read_jsonl(args.input) if r["status"] == "kept"]
    vals = harness.statistic_values(records, args.statistic)
    ref = harness._reference(args.reference)
    try:
        res = ks_test(vals, ref)
    except InsufficientSamples as exc:
        _emit({"ok": False, "error": "InsufficientSamples", "message": str(exc)})
        return 1
    ok = args.band is None or res.distance <= args.band
    _emit({"statistic": args.statistic, "reference": args.reference, "n": int(vals.size),
           "distance": res.distance, "p_value": res.p_value, "parts": res.parts,
           "band": args.band, "ok": ok}, args.out)
    return 0 if ok else 1


def cmd_special(args):
    names = list(verify.SPECIAL) if args.check == "all" else [args.check]
    results = [verify.SPECIAL[n]() for n in names]
    _emit(results[0] if len(results) == 1 else results)
    return 0 if all(r["ok"] for r in results) else 1


def cmd_experiment(args):
    with open(args.config) as fh:
        cfg = harness.ExperimentConfig.from_json(json.load(fh))
    rep = harness.run_experiment(cfg, args.samples)
    out = rep.to_json() | {"report_hash": rep.digest()}
    _emit(out, args.out)
    return 0 if rep.reconciles() else 1


def build_parser():
    p = _Parser(prog="loopfact", description="Loop factorization and Wiener loop experiments")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("factorize", help="factor a loop given as JSON")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_factorize)

    s = sub.add_parser("verify", help="closed forms against the factorization oracle")
    s.add_argument("--suite", required=True, choices=sorted(verify.SUITES))
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--tol", type=float)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("sample", help="sample Wiener loops and write JSONL records")
    s.add_argument("--target", required=True, choices=["su2", "s2"])
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--steps", type=int, default=256)
    s.add_argument("--loops", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--window", type=int, default=16)
    s.add_argument("--alias-max", type=float, default=harness.ALIAS_MAX)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("stats", help="goodness of fit of one statistic")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--statistic", required=True)
    s.add_argument("--reference", required=True)
    s.add_argument("--band", type=float)
    s.add_argument("--out")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("special", help="analytic and distributional checks")
    s.add_argument("--check", required=True, choices=sorted(verify.SPECIAL) + ["all"])
    s.set_defaults(func=cmd_special)

    s = sub.add_parser("experiment", help="run an experiment config file")
    s.add_argument("--config", required=True)
    s.add_argument("--samples")
    s.add_argument("--out")
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
