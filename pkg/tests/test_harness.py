import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from loopfact import cli, harness
from loopfact.distheory import ReferenceDensity
from loopfact.errors import InsufficientSamples
from loopfact.loopalg import TruncatedLoop
from loopfact.random_loops import random_factors
from loopfact.stats import kuiper_uniform, ks_test, noise_band

SPHERE = ReferenceDensity("EQ321")


def small_config(**kw):
    base = dict(target="S2", betas=[1.0], M=64, N=8, n_loops=30, seed=5,
                statistics=["B1p", "a0", "zeta"], references={"B1p": "EQ321"})
    return harness.ExperimentConfig(**(base | kw))


# goodness of fit

def test_self_consistency():
    passes = sum(ks_test(SPHERE.sample(10 ** 5, seed), SPHERE).p_value > 0.01
                 for seed in range(100))
    assert passes >= 98


def test_power_against_shift():
    s = SPHERE.sample(10 ** 5, 1) + 0.3
    assert ks_test(s, SPHERE).p_value < 1e-6


def test_identical_samples():
    s = SPHERE.sample(500, 2)
    assert ks_test(s, s).distance == 0
    r = np.abs(s)
    assert ks_test(r, r).distance == 0


def test_too_few_samples():
    with pytest.raises(InsufficientSamples):
        ks_test(SPHERE.sample(99, 0), SPHERE)


def test_real_statistic_against_callable():
    x = np.random.default_rng(0).random(5000)
    d, p = ks_test(x, lambda q: np.clip(q, 0, 1))
    assert d < noise_band(5000) and p > 0.01


def test_kuiper_detects_concentration():
    rng = np.random.default_rng(1)
    assert kuiper_uniform(rng.random(2000))[1] > 0.01
    assert kuiper_uniform(rng.random(2000) ** 2)[1] < 1e-6


@given(st.integers(100, 2000), st.integers(0, 2 ** 31))
def test_distance_in_unit_interval(n, seed):
    d, p = ks_test(SPHERE.sample(n, seed), SPHERE)
    assert 0 <= d <= 1 and 0 <= p <= 1


# configuration and reports

def test_config_validation():
    with pytest.raises(ValueError):
        harness.ExperimentConfig("SU2_GROUP", [1.0], statistics=["a0"])
    with pytest.raises(ValueError):
        harness.ExperimentConfig("S2", [0.0])
    with pytest.raises(ValueError):
        harness.ExperimentConfig("S3", [1.0])
    with pytest.raises(ValueError):
        harness.ExperimentConfig("S2", [1.0], statistics=["B0x"])
    assert harness.bprime_index("Bnp(3)") == 3 and harness.bprime_index("B2p") == 2


def test_config_json_roundtrip():
    cfg = small_config()
    again = harness.ExperimentConfig.from_json(json.loads(json.dumps(cfg.to_json())))
    assert again == cfg and again.digest() == cfg.digest()


def test_empty_run():
    rep = harness.run_experiment(small_config(n_loops=0))
    assert rep.reconciles()
    assert all(r["kept"] == r["dropped"] == r["lower_stratum"] == 0 for r in rep.rows)


def test_deterministic_records_and_report(tmp_path):
    cfg = small_config()
    a = harness.run_experiment(cfg, tmp_path / "a.jsonl")
    b = harness.run_experiment(cfg, tmp_path / "b.jsonl")
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()
    assert a.digest() == b.digest()
    assert a.metadata["config_hash"] == cfg.digest()
    for row in a.rows:
        assert row["kept"] + row["dropped"] + row["lower_stratum"] == cfg.n_loops


def test_quarantine_leaves_kept_loops_alone():
    loose = list(harness.iter_records(small_config(alias_max=1.0)))
    strict = list(harness.iter_records(small_config(alias_max=0.01)))
    assert sum(r["status"] == "kept" for r in strict) < sum(r["status"] == "kept" for r in loose)
    for a, b in zip(loose, strict):
        if b["status"] == "kept":
            assert a["statistics"] == b["statistics"]


def test_su2_bprime_rows():
    cfg = harness.ExperimentConfig("SU2_GROUP", [1.0], M=64, N=8, n_loops=120, seed=2,
                                   statistics=["B1p", "B2p", "Bnp(3)"],
                                   references={"B1p": "EQ321", "B2p": "EQ321", "Bnp(3)": "EQ321"})
    rep = harness.run_experiment(cfg)
    for row in rep.rows:
        assert row["reference"] == "EQ321"
        assert row["ks"] is not None


def test_loop_statistics_of_constant_path():
    pts = np.repeat(np.eye(2, dtype=complex)[None], 17, axis=0)
    status, st_ = harness.loop_statistics(pts, "S2", 4)
    assert status == "kept"
    assert st_["a0"] == pytest.approx(1.0) and st_["zeta"] == [0.0, 0.0]


# command line

def run_cli(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr().out


def test_cli_verify_example(capsys):
    code, out = run_cli(["verify", "--suite", "lemma38", "--trials", "200", "--seed", "7",
                         "--tol", "1e-9"], capsys)
    assert code == 0 and json.loads(out)["max_error"] < 1e-9


def test_cli_special_pass_and_fail(capsys):
    assert run_cli(["special", "--check", "diag72"], capsys)[0] == 0
    assert run_cli(["special", "--check", "coherence331"], capsys)[0] == 1


@pytest.mark.parametrize("argv", [["verify", "--suite", "lemma38", "--bogus"],
                                  ["verify", "--suite", "nope"],
                                  ["sample", "--target", "s2", "--beta", "1", "--loops", "3",
                                   "--out", "x.jsonl"],
                                  []])
def test_cli_usage_errors(argv):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == 2


def test_cli_factorize(tmp_path, capsys):
    f = random_factors(2, 3, np.random.default_rng(0))
    src = tmp_path / "loop.json"
    src.write_text(json.dumps(f.product(n=None).to_json()))
    code, _ = run_cli(["factorize", "--in", str(src), "--out", str(tmp_path / "f.json")], capsys)
    assert code == 0
    assert json.loads((tmp_path / "f.json").read_text())["residual"] < 1e-9


def test_cli_factorize_lower_stratum(tmp_path, capsys):
    loop = TruncatedLoop.from_dict({1: np.diag([1, 0]), -1: np.diag([0, 1])})
    src = tmp_path / "loop.json"
    src.write_text(json.dumps(loop.to_json()))
    code, out = run_cli(["factorize", "--in", str(src)], capsys)
    assert code == 1 and json.loads(out)["error"] == "LowerStratum"


def test_cli_sample_stats_experiment(tmp_path, capsys):
    samples = tmp_path / "s.jsonl"
    code, _ = run_cli(["sample", "--target", "s2", "--beta", "1", "--steps", "64", "--window", "8",
                       "--loops", "120", "--seed", "3", "--out", str(samples)], capsys)
    assert code == 0 and len(samples.read_text().splitlines()) == 120
    code, out = run_cli(["stats", "--in", str(samples), "--statistic", "B1p",
                         "--reference", "EQ321"], capsys)
    res = json.loads(out)
    assert code == (0 if res["ok"] else 1) and ("distance" in res or res["error"])
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(small_config(n_loops=10).to_json()))
    code, out = run_cli(["experiment", "--config", str(cfg)], capsys)
    assert code == 0 and "report_hash" in json.loads(out)
