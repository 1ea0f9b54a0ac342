import dataclasses

import numpy as np
import pytest

from conftest import make_config, tiny_config
from gridwatch.detection import Label
from gridwatch.errors import ConfigurationError
from gridwatch.harness import (
    MOST_NEGATIVE_MODE,
    ScenarioConfig,
    TrialOutcome,
    benign_corr_std,
    case_config,
    derive_trial_seed,
    estimate_detection_probability,
    run_billing,
    run_trial,
    simulate_window,
    trial_success,
    with_months,
)
from gridwatch.model import FixedOffset, Multiplicative, RandomOffset


class TestSeeding:
    def test_trial_seeds_are_injective(self):
        seen = {tuple(derive_trial_seed(3, i).entropy) for i in range(100)}
        seen |= {tuple(derive_trial_seed(4, i).entropy) for i in range(100)}
        assert len(seen) == 200

    def test_adjacent_trial_streams_do_not_collide(self):
        for index in range(3):
            a = np.random.default_rng(derive_trial_seed(0, index)).random(10_000)
            b = np.random.default_rng(derive_trial_seed(0, index + 1)).random(10_000)
            assert not np.array_equal(a, b)
            assert not np.array_equal(a[1:], b[:-1])

    def test_same_seed_bitwise_identical_outcome(self):
        cfg = tiny_config(periods_per_day=8)
        o1 = run_trial(cfg, derive_trial_seed(5, 0))
        o2 = run_trial(cfg, derive_trial_seed(5, 0))
        assert o1 == o2
        for v1, v2 in zip(o1.report, o2.report):
            assert v1 == v2  # float equality, not approx


class TestSimulateWindow:
    def test_period_conservation(self):
        cfg = tiny_config(periods_per_day=8)
        window = simulate_window(cfg, np.random.default_rng(0))
        np.testing.assert_allclose(
            window.actual_total, window.reported_total + window.leakage, rtol=1e-12
        )

    def test_all_benign_zero_leakage(self):
        cfg = tiny_config(attackers="")
        window = simulate_window(cfg, np.random.default_rng(0))
        assert np.all(window.leakage == 0.0)

    def test_single_multiplicative_leakage_identity(self):
        # leakage(t) = (1 - alpha) * attacker_usage(t) for every period
        cfg = tiny_config(attackers="1 = multiplicative 0.1", periods_per_day=8)
        window = simulate_window(cfg, np.random.default_rng(0), keep_matrices=True)
        np.testing.assert_allclose(
            window.leakage, 0.9 * window.usage[:, 1], rtol=1e-9
        )

    def test_sampled_report_matches_reports_matrix(self):
        cfg = tiny_config(attackers="0 = fixed_offset 0.4 subtract\n2 = random_offset 0.3 add")
        window = simulate_window(cfg, np.random.default_rng(1), keep_matrices=True)
        periods = cfg.region.total_periods
        expected = window.reports[np.arange(periods), window.sampled_ids]
        np.testing.assert_array_equal(window.sampled_reports, expected)

    def test_reports_never_negative(self):
        cfg = tiny_config(attackers="0 = fixed_offset 5.0 subtract\n1 = random_offset 5.0 subtract")
        window = simulate_window(cfg, np.random.default_rng(2), keep_matrices=True)
        assert np.all(window.reports >= 0.0)

    def test_elasticity_hook_caps_usage(self):
        base = tiny_config(extra="[billing]\ntariff = 2.0\n")
        elastic = dataclasses.replace(base, elasticity_factor=0.6, elasticity_level=1.0)
        window = simulate_window(elastic, np.random.default_rng(3), keep_matrices=True)
        assert window.usage.max() <= 1.5 * 0.6 + 1e-12


class TestRunTrial:
    def test_underreporting_attacker_perfectly_correlated(self):
        cfg = make_config("25 = multiplicative 0.1")
        outcome = run_trial(cfg, derive_trial_seed(46, 0))
        assert outcome.report.corr(25) == pytest.approx(1.0, abs=1e-9)
        assert outcome.report.verdict(25).label == Label.MALICIOUS_UNDER
        assert outcome.attacker_found == {25: True}

    def test_overreporting_attacker_anticorrelated(self):
        cfg = make_config("25 = multiplicative 10.0")
        outcome = run_trial(cfg, derive_trial_seed(46, 0))
        assert outcome.report.corr(25) == pytest.approx(-1.0, abs=1e-9)
        assert outcome.report.verdict(25).label == Label.MALICIOUS_OVER

    def test_most_negative_mode_selects_one(self):
        cfg = make_config("25 = random_offset 1.0 subtract",
                          extra="[detection]\nmode = most_negative\n")
        outcome = run_trial(cfg, derive_trial_seed(0, 0))
        assert outcome.selected == 25
        assert outcome.detected == frozenset({25})


class TestOutcomeScoring:
    def _outcome(self, true_malicious, detected):
        return TrialOutcome(
            report=None,
            true_malicious=frozenset(true_malicious),
            detected=frozenset(detected),
            selected=None,
            exact_match=set(detected) == set(true_malicious),
            attacker_found={a: a in detected for a in true_malicious},
            false_positive_count=len(set(detected) - set(true_malicious)),
        )

    def test_outcome_classes(self):
        assert self._outcome({1, 2}, {1, 2}).outcome_class == "exact"
        assert self._outcome({1, 2}, {1, 2, 9}).outcome_class == "extra_benign"
        assert self._outcome({1, 2}, {1}).outcome_class == "missed_attacker"
        assert self._outcome({1, 2}, {1, 9}).outcome_class == "missed_attacker"

    def test_trial_success_single_attacker_ignores_false_positives(self):
        assert trial_success(self._outcome({5}, {5, 9}))
        assert not trial_success(self._outcome({5}, {9}))

    def test_trial_success_multi_attacker_requires_exact_set(self):
        assert trial_success(self._outcome({1, 2}, {1, 2}))
        assert not trial_success(self._outcome({1, 2}, {1, 2, 3}))


class TestEstimates:
    def test_probability_and_stderr(self):
        cfg = tiny_config(attackers="1 = multiplicative 0.1", periods_per_day=24)
        cfg = dataclasses.replace(cfg, repetitions=20)
        est = estimate_detection_probability(cfg)
        assert 0.0 <= est.probability <= 1.0
        p = est.probability
        assert est.stderr == pytest.approx(np.sqrt(p * (1 - p) / 20))

    def test_thread_count_does_not_change_result(self):
        cfg = tiny_config(attackers="1 = multiplicative 0.1", periods_per_day=24)
        cfg = dataclasses.replace(cfg, repetitions=8)
        serial = estimate_detection_probability(cfg, threads=1)
        parallel = estimate_detection_probability(cfg, threads=2)
        assert serial == parallel


class TestScenarioBuilders:
    def test_with_months_scales_periods(self):
        cfg = make_config()
        assert with_months(cfg, 12).region.total_periods == 12 * 2880

    def test_case_configs(self):
        base = make_config(attackers="")
        c1 = case_config(base, "I", 25)
        c2 = case_config(base, "II", 25)
        c3 = case_config(base, "III", 25)
        assert c1.region.consumers[25].behavior == Multiplicative(0.1)
        # offsets default to the midpoint of the [0.5, 1.5] usage range
        assert c2.region.consumers[25].behavior == FixedOffset(1.0, "subtract")
        assert c3.region.consumers[25].behavior == RandomOffset(1.0, "subtract")
        assert c3.mode == MOST_NEGATIVE_MODE
        assert c1.attacker_ids == {25}

    def test_case_config_rejects_unknown_attacker(self):
        with pytest.raises(ConfigurationError):
            case_config(make_config(attackers=""), "I", 250)

    def test_validation(self):
        cfg = make_config()
        with pytest.raises(ConfigurationError):
            dataclasses.replace(cfg, mode="psychic")
        with pytest.raises(ConfigurationError):
            dataclasses.replace(cfg, th=0.0)
        with pytest.raises(ConfigurationError):
            dataclasses.replace(cfg, repetitions=0)
        with pytest.raises(ConfigurationError):
            dataclasses.replace(cfg, elasticity_factor=2.0)


class TestBillingPath:
    def test_bills_match_reported_totals(self):
        cfg = tiny_config(attackers="1 = multiplicative 0.1")
        window, bills = run_billing(cfg, derive_trial_seed(0, 0))
        total = sum(b.amount for b in bills)
        assert total == pytest.approx(float(window.reported_total.sum()), rel=1e-9)

    def test_one_bill_per_consumer_per_month(self):
        cfg = tiny_config()
        cfg = with_months(cfg, 2)
        _, bills = run_billing(cfg, derive_trial_seed(0, 0))
        assert len(bills) == 2 * 5
        starts = {b.window_start for b in bills}
        assert starts == {0, 30 * 4}


class TestConcentration:
    def test_benign_std_helper(self):
        cfg = make_config()
        outcome = run_trial(cfg, derive_trial_seed(42, 1))
        std = benign_corr_std(outcome.report, {25})
        assert 0.0 < std < 1.0
