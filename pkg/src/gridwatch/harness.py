"""Scenario orchestration: seeded end-to-end trials and Monte-Carlo estimates.

A trial generates every consumer's usage and reports for the whole
measurement window, aggregates period by period, accumulates the sampled
(report, leakage) pairs, runs the configured detector, and scores the
result against the known attacker set.  Trials are deterministic given
their seed; Monte-Carlo repetitions use seeds derived injectively from
``(master_seed, trial_index)`` so they can run in any order or in
parallel without changing the result.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .aggregation import PeriodRecord, SampleSeries, series_from_arrays
from .billing import BillingLedger, BillStatement, TariffSchedule, accrue, issue_bills
from .detection import (
    DEFAULT_MIN_SAMPLES,
    DEFAULT_THRESHOLD,
    DetectionReport,
    detect_region,
    most_negative,
)
from .errors import ConfigurationError
from .model import (
    Benign,
    BehaviorModel,
    ConsumerProfile,
    FixedOffset,
    Multiplicative,
    RandomOffset,
    RegionConfig,
    apply_behavior,
    is_benign,
)

DAYS_PER_MONTH = 30

THRESHOLD_MODE = "threshold"
MOST_NEGATIVE_MODE = "most_negative"


@dataclass(frozen=True)
class ScenarioConfig:
    region: RegionConfig
    months: int = 1
    th: float = DEFAULT_THRESHOLD
    min_samples: int = DEFAULT_MIN_SAMPLES
    mode: str = THRESHOLD_MODE
    low_report_quantile: float | None = None
    tariff: TariffSchedule = field(default_factory=lambda: TariffSchedule.flat(1.0))
    elasticity_factor: float | None = None
    elasticity_level: float | None = None
    master_seed: int = 0
    repetitions: int = 1000

    def __post_init__(self):
        if self.months < 1:
            raise ConfigurationError(f"months must be >= 1, got {self.months}")
        if self.mode not in (THRESHOLD_MODE, MOST_NEGATIVE_MODE):
            raise ConfigurationError(f"unknown detection mode {self.mode!r}")
        if not 0.0 < self.th <= 1.0:
            raise ConfigurationError(f"threshold must be in (0, 1], got {self.th}")
        if self.repetitions < 1:
            raise ConfigurationError(
                f"repetitions must be >= 1, got {self.repetitions}"
            )
        if self.master_seed < 0:
            raise ConfigurationError(
                f"master_seed must be >= 0, got {self.master_seed}"
            )
        if (self.elasticity_factor is None) != (self.elasticity_level is None):
            raise ConfigurationError(
                "elasticity_factor and elasticity_level must be set together"
            )
        if self.elasticity_factor is not None and self.elasticity_factor <= 0:
            raise ConfigurationError("elasticity_factor must be > 0")

    @property
    def attacker_ids(self) -> set[int]:
        return self.region.malicious_ids


def with_months(config: ScenarioConfig, months: int) -> ScenarioConfig:
    """Same scenario over a different measurement duration."""
    region = replace(config.region, num_days=DAYS_PER_MONTH * months)
    tariff = config.tariff
    if tariff.rates is not None:
        tariff = TariffSchedule.from_vector(tariff.rates, region.total_periods)
    return replace(config, region=region, months=months, tariff=tariff)


def derive_trial_seed(master_seed: int, trial_index: int) -> np.random.SeedSequence:
    """Injective (master_seed, trial_index) -> independent random stream."""
    return np.random.SeedSequence([master_seed, trial_index])


@dataclass(frozen=True)
class WindowData:
    """Whole-window simulation arrays (one entry per period)."""

    region: RegionConfig
    actual_total: np.ndarray
    reported_total: np.ndarray
    leakage: np.ndarray
    sampled_ids: np.ndarray
    sampled_reports: np.ndarray
    usage: np.ndarray | None = None
    reports: np.ndarray | None = None

    def to_records(self) -> list[PeriodRecord]:
        return [
            PeriodRecord(
                period_index=t,
                actual_total=float(self.actual_total[t]),
                reported_total=float(self.reported_total[t]),
                leakage=float(self.leakage[t]),
                sampled_id=int(self.sampled_ids[t]),
                sampled_report=float(self.sampled_reports[t]),
            )
            for t in range(self.actual_total.shape[0])
        ]

    def to_series(self) -> SampleSeries:
        return series_from_arrays(
            self.sampled_ids,
            self.sampled_reports,
            self.leakage,
            self.region.consumer_ids,
        )


def simulate_window(
    config: ScenarioConfig,
    rng: np.random.Generator,
    keep_matrices: bool = False,
) -> WindowData:
    """Generate usage and reports for every period and aggregate them.

    Draw order is fixed: the usage matrix first (period-major), then each
    misreporting consumer's random offsets in consumer order, then the
    per-period sampled indices.
    """
    region = config.region
    consumers = region.consumers
    n = len(consumers)
    periods = region.total_periods
    lows = np.array([c.usage_min for c in consumers])
    highs = np.array([c.usage_max for c in consumers])

    if config.elasticity_factor is not None:
        rates = np.array(
            [config.tariff.rate_at(t) for t in range(periods)]
        )
        scale = np.where(rates > config.elasticity_level, config.elasticity_factor, 1.0)
        highs = np.maximum(highs[None, :] * scale[:, None], lows[None, :] + 1e-12)

    usage = rng.uniform(lows, highs, size=(periods, n))

    leakage = np.zeros(periods)
    dishonest: dict[int, np.ndarray] = {}
    for pos, profile in enumerate(consumers):
        if is_benign(profile.behavior):
            continue
        reported = np.asarray(apply_behavior(profile.behavior, usage[:, pos], rng))
        dishonest[pos] = reported
        leakage = leakage + (usage[:, pos] - reported)

    actual_total = usage.sum(axis=1)
    reported_total = actual_total - leakage

    sampled_pos = rng.integers(0, n, size=periods)
    sampled_reports = usage[np.arange(periods), sampled_pos].copy()
    for pos, reported in dishonest.items():
        hit = sampled_pos == pos
        sampled_reports[hit] = reported[hit]
    ids = np.array(region.consumer_ids)
    sampled_ids = ids[sampled_pos]

    reports = None
    if keep_matrices:
        reports = usage.copy()
        for pos, reported in dishonest.items():
            reports[:, pos] = reported

    return WindowData(
        region=region,
        actual_total=actual_total,
        reported_total=reported_total,
        leakage=leakage,
        sampled_ids=sampled_ids,
        sampled_reports=sampled_reports,
        usage=usage if keep_matrices else None,
        reports=reports,
    )


@dataclass(frozen=True)
class TrialOutcome:
    report: DetectionReport
    true_malicious: frozenset[int]
    detected: frozenset[int]
    selected: int | None
    exact_match: bool
    attacker_found: dict[int, bool]
    false_positive_count: int

    @property
    def all_attackers_found(self) -> bool:
        return all(self.attacker_found.values())

    @property
    def outcome_class(self) -> str:
        """'exact', 'extra_benign', or 'missed_attacker' (trumps extra labels)."""
        if not self.all_attackers_found:
            return "missed_attacker"
        if self.false_positive_count > 0:
            return "extra_benign"
        return "exact"


def run_trial(
    config: ScenarioConfig,
    trial_seed: int | np.random.SeedSequence,
) -> TrialOutcome:
    """One fully deterministic end-to-end trial."""
    if isinstance(trial_seed, int):
        trial_seed = np.random.SeedSequence([trial_seed])
    rng = np.random.default_rng(trial_seed)
    window = simulate_window(config, rng)
    series = window.to_series()
    report = detect_region(
        series,
        th=config.th,
        min_samples=config.min_samples,
        low_report_quantile=config.low_report_quantile,
    )
    true_malicious = frozenset(config.attacker_ids)
    selected = None
    if config.mode == MOST_NEGATIVE_MODE:
        selected = most_negative(series, config.min_samples)
        detected = frozenset({selected})
    else:
        detected = frozenset(report.malicious_ids)
    return TrialOutcome(
        report=report,
        true_malicious=true_malicious,
        detected=detected,
        selected=selected,
        exact_match=detected == true_malicious,
        attacker_found={a: a in detected for a in sorted(true_malicious)},
        false_positive_count=len(detected - true_malicious),
    )


def trial_success(outcome: TrialOutcome) -> bool:
    """Correct-detection criterion for probability estimates.

    Single-attacker scenarios count a trial correct when the attacker is
    identified (threshold mode: labeled malicious; most-negative mode:
    selected).  Multi-attacker scenarios require the exact set.
    """
    if len(outcome.true_malicious) == 1:
        return outcome.all_attackers_found
    return outcome.exact_match


def _run_indexed(args: tuple[ScenarioConfig, int]) -> bool:
    config, index = args
    return trial_success(run_trial(config, derive_trial_seed(config.master_seed, index)))


@dataclass(frozen=True)
class ProbabilityEstimate:
    successes: int
    repetitions: int

    @property
    def probability(self) -> float:
        return self.successes / self.repetitions

    @property
    def stderr(self) -> float:
        p = self.probability
        return math.sqrt(p * (1.0 - p) / self.repetitions)


def estimate_detection_probability(
    config: ScenarioConfig, threads: int = 1
) -> ProbabilityEstimate:
    """Fraction of seeded repetitions with correct detection, plus binomial stderr.

    The result is independent of ``threads``: every trial's stream depends
    only on (master_seed, trial_index).
    """
    reps = config.repetitions
    jobs = [(config, i) for i in range(reps)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_indexed, jobs, chunksize=max(1, reps // (8 * threads))))
    else:
        results = [_run_indexed(job) for job in jobs]
    return ProbabilityEstimate(successes=sum(results), repetitions=reps)


def run_billing(
    config: ScenarioConfig,
    trial_seed: int | np.random.SeedSequence,
) -> tuple[WindowData, list[BillStatement]]:
    """Simulate one window and bill it month by month from reports only."""
    if isinstance(trial_seed, int):
        trial_seed = np.random.SeedSequence([trial_seed])
    rng = np.random.default_rng(trial_seed)
    window = simulate_window(config, rng, keep_matrices=True)
    region = config.region
    month_len = DAYS_PER_MONTH * region.periods_per_day
    ledger = BillingLedger(region.consumer_ids, 0, month_len)
    bills: list[BillStatement] = []
    for t in range(region.total_periods):
        accrue(ledger, t, window.reports[t], config.tariff.rate_at(t))
        if t + 1 == ledger.window_end:
            bills.extend(issue_bills(ledger))
    return window, bills


def concentration_experiment(
    config: ScenarioConfig, durations: Iterable[int]
) -> dict[int, DetectionReport]:
    """Per-consumer correlations from one seeded trial at each duration (months)."""
    out: dict[int, DetectionReport] = {}
    for months in durations:
        scaled = with_months(config, months)
        outcome = run_trial(scaled, derive_trial_seed(config.master_seed, months))
        out[months] = outcome.report
    return out


def benign_corr_std(report: DetectionReport, attacker_ids: set[int]) -> float:
    """Sample standard deviation of the benign consumers' defined correlations."""
    values = [
        v.corr
        for v in report
        if v.consumer_id not in attacker_ids and v.corr is not None
    ]
    return float(np.std(values, ddof=1))


def duration_sweep(
    config: ScenarioConfig,
    durations: Sequence[int],
    threads: int = 1,
) -> dict[int, ProbabilityEstimate]:
    """Detection probability at each measurement duration (months)."""
    return {
        months: estimate_detection_probability(with_months(config, months), threads)
        for months in durations
    }


# Documented defaults for the offset attacks: both offsets are sized at the
# midpoint of the attacker's usage range, so the fixed offset clips the
# report to zero on roughly half the periods and the random offset's
# variance is large enough to dominate the benign correlation spread.
def _midpoint(profile: ConsumerProfile) -> float:
    return 0.5 * (profile.usage_min + profile.usage_max)


def case_behavior(case: str, profile: ConsumerProfile) -> BehaviorModel:
    """Standard attacker behavior for the three benchmark cases."""
    if case == "I":
        return Multiplicative(alpha=0.1)
    if case == "II":
        return FixedOffset(eta=_midpoint(profile), direction="subtract")
    if case == "III":
        return RandomOffset(theta_max=_midpoint(profile), direction="subtract")
    raise ConfigurationError(f"unknown case {case!r}")


def case_config(base: ScenarioConfig, case: str, attacker_id: int) -> ScenarioConfig:
    """Single-attacker benchmark scenario for one case, all others benign.

    Case III uses the most-negative selection rule; Cases I and II use the
    correlation threshold.
    """
    profiles = []
    for profile in base.region.consumers:
        behavior: BehaviorModel = Benign()
        if profile.consumer_id == attacker_id:
            behavior = case_behavior(case, profile)
        profiles.append(replace(profile, behavior=behavior))
    if attacker_id not in base.region.consumer_ids:
        raise ConfigurationError(
            f"attacker id {attacker_id} is not a consumer in the region"
        )
    region = replace(base.region, consumers=tuple(profiles))
    mode = MOST_NEGATIVE_MODE if case == "III" else THRESHOLD_MODE
    return replace(base, region=region, mode=mode)


def probability_table(
    base: ScenarioConfig,
    attacker_id: int,
    cases: Sequence[str] = ("I", "II", "III"),
    durations: Sequence[int] = (1, 3, 6, 12),
    threads: int = 1,
) -> list[tuple[str, int, ProbabilityEstimate]]:
    """Correct-detection probability for each case and duration."""
    rows = []
    for case in cases:
        scenario = case_config(base, case, attacker_id)
        for months, estimate in duration_sweep(scenario, durations, threads).items():
            rows.append((case, months, estimate))
    return rows
