"""Seeded smart-grid metering simulator with correlation-based misreporting
detection, privacy-preserving aggregation, and aggregator-side billing."""

__version__ = "0.1.0"

from .aggregation import (
    PeriodRecord,
    SampleSeries,
    accumulate_samples,
    aggregate_period,
)
from .billing import (
    BillStatement,
    BillingLedger,
    TariffSchedule,
    accrue,
    issue_bills,
)
from .detection import (
    DetectionReport,
    Label,
    classify,
    detect_region,
    low_report_filter,
    most_negative,
    pearson,
)
from .errors import ConfigurationError, GridwatchError, InputError, StateError
from .harness import (
    ProbabilityEstimate,
    ScenarioConfig,
    TrialOutcome,
    concentration_experiment,
    derive_trial_seed,
    estimate_detection_probability,
    probability_table,
    run_trial,
)
from .model import (
    Benign,
    BehaviorModel,
    ConsumerProfile,
    FixedOffset,
    Multiplicative,
    RandomOffset,
    RegionConfig,
    apply_behavior,
    draw_usage,
)

__all__ = [
    "__version__",
    "PeriodRecord",
    "SampleSeries",
    "accumulate_samples",
    "aggregate_period",
    "BillStatement",
    "BillingLedger",
    "TariffSchedule",
    "accrue",
    "issue_bills",
    "DetectionReport",
    "Label",
    "classify",
    "detect_region",
    "low_report_filter",
    "most_negative",
    "pearson",
    "ConfigurationError",
    "GridwatchError",
    "InputError",
    "StateError",
    "ProbabilityEstimate",
    "ScenarioConfig",
    "TrialOutcome",
    "concentration_experiment",
    "derive_trial_seed",
    "estimate_detection_probability",
    "probability_table",
    "run_trial",
    "Benign",
    "BehaviorModel",
    "ConsumerProfile",
    "FixedOffset",
    "Multiplicative",
    "RandomOffset",
    "RegionConfig",
    "apply_behavior",
    "draw_usage",
]
