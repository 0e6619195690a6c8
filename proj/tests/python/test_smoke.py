"""Smoke tests for the python surface: worked values and a tiny end-to-end run."""

import json
import math

import pytest

import adalloc as ad


def test_penalty_worked_values():
    log_pen = ad.penalty_log(ad.PenaltyInput([0.5], [1.0], [2.0]), 0.4)
    assert log_pen == pytest.approx(-0.4 + 0.4 * math.log(0.4), rel=1e-12)
    exp_pen = ad.penalty_exponential(ad.PenaltyInput([1.0], [1.0], [1.0]), 1.0, 0, 1)
    assert exp_pen == pytest.approx(-2.0, abs=1e-12)
    lin = ad.penalty_linear(ad.PenaltyInput([1.0, 0.2], [0.4, 0.5], [1.0, 2.0]))
    assert lin == pytest.approx(0.6, rel=1e-12)


def test_value_functions_and_oracle():
    spec = ad.ValueFunctionSpec()
    spec.kind = ad.PolicyKind.log
    spec.price_estimate = [0.5]
    spec.budget = [2.0]
    spec.log_weight = 0.4
    assert ad.value(spec, 0, 0.8) == pytest.approx(0.4 + 0.4 * math.log(0.4), rel=1e-12)
    # the grid oracle agrees with the closed form
    oracle = ad.penalty_numeric(spec, [1.0], 10000)
    assert oracle == pytest.approx(-0.4 + 0.4 * math.log(0.4), rel=1e-6)


def test_duals_on_the_worked_instance():
    book = ad.CampaignBook([ad.Campaign("c0", budget=4_000_000)])
    sample = [
        ad.Impression("i0", "u0", [ad.BidEntry(0, 2_000_000, 1_000_000)]),
        ad.Impression("i1", "u1", [ad.BidEntry(0, 1_000_000, 1_000_000)]),
    ]
    assert ad.validate_instance(sample, book) is None
    duals = ad.estimate_initial_duals(sample, book, 0.5)
    assert duals.prices[0] == pytest.approx(1.0, abs=1e-9)
    best, value = ad.reduced_price(sample[0], ad.DualPriceVector([1.0], 10.0))
    assert best == 0 and value == pytest.approx(1.0)


def test_engine_round_trip():
    book = ad.CampaignBook([ad.Campaign("a", budget=9_000_000),
                            ad.Campaign("b", budget=9_000_000)])
    policy = ad.PolicyConfig()
    policy.kind = ad.PolicyKind.zero
    policy.initial_prices = ad.DualPriceVector([0.0, 0.0], 1.0)
    state = ad.make_state(book, policy)
    imp = ad.Impression("i", "u", [ad.BidEntry(0, 3_000_000, 1_000_000),
                                   ad.BidEntry(1, 5_000_000, 1_000_000)])
    d = ad.decide(state, imp)
    assert d.chosen == 1
    ad.apply(state, d)
    assert state.collected == 5_000_000
    assert state.remaining[1] == 8_000_000
    assert state.served == 1


def test_end_to_end_experiment():
    spec = ad.SynthSpec()
    spec.n_campaigns = 10
    spec.n_impressions = 2000
    cfg = ad.ExperimentConfig()
    cfg.synth = spec
    cfg.seed = 42
    cfg.delta = 0.3
    report = json.loads(ad.run_experiment(cfg))
    assert report["schema"] == "adalloc-report-v1"
    assert report["t2_size"] == 1000
    policies = {p["policy"]: p for p in report["policies"]}
    assert set(policies) == {"zero", "linear", "log", "exponential"}
    for p in policies.values():
        assert p["total_revenue_micro"] >= 0
    # identical seed, identical bytes
    assert ad.run_experiment(cfg) == ad.run_experiment(cfg)


def test_stability_study_shapes():
    spec = ad.SynthSpec()
    spec.n_campaigns = 6
    spec.n_impressions = 800
    stream, book = ad.synth_generate(spec, 3)
    sizes, duals, counts = ad.dual_stability_study(stream, book, [100, 200], 9)
    assert sizes == [100, 200]
    assert len(duals) == 2 and len(duals[0]) == 6
    assert len(counts[1]) == 6
