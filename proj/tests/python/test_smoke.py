import math
from pathlib import Path

import numpy as np
import pytest

import trojan_game as tg

ROOT = Path(__file__).resolve().parents[2]


def test_auc_matches_pair_counting():
    rng = np.random.default_rng(0)
    p = rng.integers(0, 5, 17).tolist()
    n = rng.integers(0, 5, 11).tolist()
    wins = sum(1.0 if a > b else 0.5 if a == b else 0.0 for a in p for b in n)
    assert tg.auc(p, n) == wins / (len(p) * len(n))
    assert tg.auc(p, n) == pytest.approx(1 - tg.auc(n, p))


def test_optimal_discriminator():
    assert tg.optimal_discriminator_value(1.0, 3.0) == 0.75
    with pytest.raises(tg.ConfigError):
        tg.optimal_discriminator_value(0.0, 0.0)


def test_js_limits():
    a = np.tile([0.1, 0.9], (40, 1))
    b = np.tile([0.9, 0.1], (40, 1))
    assert tg.js_proxy(a, a) == pytest.approx(0.0)
    assert tg.js_proxy(a, b) == pytest.approx(2 * math.log(2))


def test_train_and_forward(tmp_path):
    x, y = tg.make_blobs(2, 6, 30, 0.1, 3)
    assert x.shape == (60, 6)
    f = tg.train_classifier(x, y, 2, hidden=[16], epochs=80, seed=1)
    p = f.forward(x)
    assert p.shape == (60, 2)
    assert np.allclose(p.sum(axis=1), 1.0)
    assert tg.accuracy(f, x, y) > 0.9
    f.save(tmp_path / "m.json")
    assert tg.load_model(tmp_path / "m.json") == f


def test_supermodularity_toys():
    ok, worst = tg.supermodularity_check(lambda s: bin(s).count("1") ** 2, 5)
    assert ok and worst == 0.0
    ok, worst = tg.supermodularity_check(lambda s: bin(s).count("1") ** 0.5, 5)
    assert not ok and worst > 0.0


def test_anomaly_report():
    r = tg.anomaly_report([1, 2, 3, 4, 10], 2.0)
    assert r["flagged_class"] == 0
    assert r["anomaly_index"][4] == pytest.approx(7 / 1.4826)


def test_run_command_errors(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[data]\nbogus = 1\n")
    with pytest.raises(tg.ParseError):
        tg.run_command("mm-trojan", bad, tmp_path / "out")
    with pytest.raises(tg.IoError):
        tg.run_command("mm-trojan", tmp_path / "missing.ini", tmp_path / "out")


def test_run_command_baseline(tmp_path):
    cfg = tmp_path / "small.ini"
    cfg.write_text(
        "[data]\nclasses = 2\ndim = 8\nper_class = 30\n"
        "[train]\nepochs = 5\n[trigger]\nsize = 2\n"
        "[shadows]\ntrojan = 4\nclean = 4\nholdout_clean = 2\ntargets = 1\n"
        "[detector]\nepochs = 5\n"
    )
    tg.run_command("mm-trojan", cfg, tmp_path / "out", baseline=True)
    assert (tmp_path / "out" / "report.json").exists()
    assert len(tg.config_hash(cfg)) == 16
