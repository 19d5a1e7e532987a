import json
import math
import pathlib

import numpy as np
import pytest

import evstudy

FIXTURES = pathlib.Path(__file__).resolve().parents[2] / "tests" / "fixtures"


def test_ols_matches_numpy():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(120, 2))
    y = 0.3 + x @ np.array([1.5, -0.7]) + rng.normal(scale=0.1, size=120)
    fit = evstudy.ols(x, y.tolist(), names=["a", "b"])
    ref, *_ = np.linalg.lstsq(np.column_stack([np.ones(120), x]), y, rcond=None)
    assert fit["names"] == ["intercept", "a", "b"]
    assert np.allclose(fit["coefficients"], ref, rtol=1e-10, atol=1e-12)
    assert fit["dof"] == 117


def test_rank_deficient_raises():
    x = np.column_stack([np.arange(10.0), 2 * np.arange(10.0)])
    with pytest.raises(evstudy.RankDeficientError):
        evstudy.ols(x, list(range(10)))


def test_corrado_closed_form():
    ar = [0.001 * i + 0.0005 for i in range(100)]
    res = evstudy.corrado_statistic(ar, 0)
    assert res["statistic"] == pytest.approx(-49.5 / math.sqrt((100**3 - 100) / 1200), abs=1e-10)


def test_car_and_stars():
    res = evstudy.car([0.01, -0.02, 0.03], sigma2=1e-4, dof=100)
    assert res["car"] == pytest.approx(0.02)
    assert res["t_stat"] == pytest.approx(0.02 / math.sqrt(3e-4))
    assert evstudy.significance_stars(0.004) == "***"
    assert evstudy.significance_stars(0.2) == ""


def test_conditional_probability_extreme_event():
    est = [0.001 * ((-1) ** i) for i in range(200)]
    res = evstudy.conditional_probability(est, -0.5, 5)
    assert res["cp"] == 0.0
    assert res["windows"] == 200 - 10


def test_simulate_panel_is_deterministic():
    a = evstudy.simulate_panel(n_days=120, event_index=100, post_event_length=10, seed=3)
    b = evstudy.simulate_panel({"n_days": 120, "event_index": 100, "post_event_length": 10, "seed": 3})
    assert a == b
    assert len(a["dates"]) == 120
    assert set(a["columns"]) == {"market_premium", "sector_1"}


def test_run_study_from_path(tmp_path):
    report = evstudy.run_study(FIXTURES / "synthetic_study.json", out_dir=tmp_path, formats=["json"])
    assert report["exit_code"] == 0
    fin = next(s for s in report["sectors"] if s["sector_id"] == "Financials")
    assert fin["ok"]
    assert fin["event_ar"] < -0.03
    doc = json.loads((tmp_path / "sectoral_reactions.json").read_text())
    assert doc["schema_version"] == evstudy.SCHEMA_VERSION


def test_run_study_from_mapping_matches_path():
    cfg = json.loads((FIXTURES / "synthetic_study.json").read_text())
    a = evstudy.run_study(cfg)
    b = evstudy.run_study(FIXTURES / "synthetic_study.json")
    assert a["config_hash"] == b["config_hash"] == evstudy.config_hash(cfg)
    assert a["sectors"] == b["sectors"]


def test_bad_config_raises_config_error():
    with pytest.raises(evstudy.ConfigError):
        evstudy.run_study({"synthetic": {"n_days": 10}, "bogus": 1})


def test_size_power_study_small():
    plan = {
        "replications": 200,
        "event": {"post_event_length": 10},
        "cells": [{"name": "null", "panel": {"n_days": 300, "event_index": 280, "post_event_length": 10, "seed": 11}}],
    }
    rows = evstudy.size_power_study(plan, threads=2)
    ar = next(r for r in rows if r["statistic"] == "ar_t")
    assert ar["trials"] == 200
    assert 0.0 <= ar["rate"] <= 0.15
    assert rows == evstudy.size_power_study(plan, threads=1)
