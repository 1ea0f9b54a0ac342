"""Correlation-based detection of misreporting consumers.

The detector computes, per consumer, the Pearson correlation between its
sampled reports and the regional leakage values observed on the same
periods.  An honest consumer's reports are independent of the leakage, so
its correlation concentrates around zero; a consumer scaling its reports
down (up) drives the correlation toward +1 (-1).  Classification is a
symmetric threshold on the correlation; the random-offset attack is
instead found by taking the most negative correlation in the region.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .aggregation import SampleSeries
from .errors import ConfigurationError, InputError

DEFAULT_THRESHOLD = 0.5
DEFAULT_MIN_SAMPLES = 5
DEFAULT_LOW_REPORT_QUANTILE = 0.25


class Label(str, enum.Enum):
    BENIGN = "benign"
    MALICIOUS_UNDER = "malicious_under"
    MALICIOUS_OVER = "malicious_over"
    INSUFFICIENT_DATA = "insufficient_data"


def pearson(x, y) -> float | None:
    """Pearson correlation of two equal-length vectors, or None when undefined.

    Undefined means fewer than 2 points or zero variance on either side.
    The result is clamped into [-1, 1]; rounding overshoot never exceeds
    1e-9 before clamping.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InputError(
            f"pearson needs two equal-length vectors, got shapes {x.shape} and {y.shape}"
        )
    if x.shape[0] < 2:
        return None
    xc = x - x.mean()
    yc = y - y.mean()
    nx = math.sqrt(float(xc @ xc))
    ny = math.sqrt(float(yc @ yc))
    if nx == 0.0 or ny == 0.0:
        return None
    r = float(xc @ yc) / (nx * ny)
    return max(-1.0, min(1.0, r))


def classify(corr: float | None, th: float = DEFAULT_THRESHOLD) -> Label:
    """Threshold rule: corr >= th under-reporting, corr <= -th over-reporting.

    Strictly inside (-th, th) is benign; an undefined correlation carries
    no evidence and maps to INSUFFICIENT_DATA.
    """
    if not 0.0 < th <= 1.0:
        raise ConfigurationError(f"threshold must be in (0, 1], got {th}")
    if corr is None:
        return Label.INSUFFICIENT_DATA
    if corr >= th:
        return Label.MALICIOUS_UNDER
    if corr <= -th:
        return Label.MALICIOUS_OVER
    return Label.BENIGN


def low_report_filter(
    reports, leakages, q: float = DEFAULT_LOW_REPORT_QUANTILE
) -> tuple[np.ndarray, np.ndarray]:
    """Keep the pairs whose report is at or below the q-quantile of reports.

    Used for the fixed-offset attack, where only the periods with small
    (clipped) reports carry information about the attacker.
    """
    if not 0.0 < q < 1.0:
        raise ConfigurationError(f"quantile must be in (0, 1), got {q}")
    reports = np.asarray(reports, dtype=float)
    leakages = np.asarray(leakages, dtype=float)
    if reports.size == 0:
        raise InputError("low_report_filter needs a nonempty series")
    cutoff = np.quantile(reports, q)
    keep = reports <= cutoff
    return reports[keep], leakages[keep]


@dataclass(frozen=True)
class ConsumerVerdict:
    consumer_id: int
    sample_count: int
    corr: float | None
    label: Label


@dataclass(frozen=True)
class DetectionReport:
    verdicts: tuple[ConsumerVerdict, ...]

    def __iter__(self):
        return iter(self.verdicts)

    def verdict(self, consumer_id: int) -> ConsumerVerdict:
        for v in self.verdicts:
            if v.consumer_id == consumer_id:
                return v
        raise KeyError(consumer_id)

    def corr(self, consumer_id: int) -> float | None:
        return self.verdict(consumer_id).corr

    @property
    def malicious_ids(self) -> set[int]:
        return {
            v.consumer_id
            for v in self.verdicts
            if v.label in (Label.MALICIOUS_UNDER, Label.MALICIOUS_OVER)
        }

    def correlations(self) -> dict[int, float]:
        """Defined correlations only, keyed by consumer id."""
        return {v.consumer_id: v.corr for v in self.verdicts if v.corr is not None}


def detect_region(
    series: SampleSeries,
    th: float = DEFAULT_THRESHOLD,
    min_samples: int = DEFAULT_MIN_SAMPLES,
    low_report_quantile: float | None = None,
) -> DetectionReport:
    """Correlate every consumer's sampled reports against leakage and classify.

    Consumers with fewer than ``min_samples`` observations are reported as
    INSUFFICIENT_DATA.  When ``low_report_quantile`` is set, each
    consumer's series is first reduced to its low-report pairs (fixed-offset
    attack mode).
    """
    if min_samples < 2:
        raise ConfigurationError(f"min_samples must be >= 2, got {min_samples}")
    verdicts = []
    for cid in series.consumer_ids:
        count = series.count(cid)
        if count < min_samples:
            verdicts.append(
                ConsumerVerdict(cid, count, None, Label.INSUFFICIENT_DATA)
            )
            continue
        r, l = series.pairs(cid)
        if low_report_quantile is not None:
            r, l = low_report_filter(r, l, low_report_quantile)
        corr = pearson(r, l)
        verdicts.append(ConsumerVerdict(cid, count, corr, classify(corr, th)))
    return DetectionReport(tuple(verdicts))


def most_negative(
    series: SampleSeries, min_samples: int = DEFAULT_MIN_SAMPLES
) -> int:
    """Id of the consumer with the lowest defined correlation (ties: lowest id)."""
    best_id = None
    best = math.inf
    for cid in series.consumer_ids:
        if series.count(cid) < min_samples:
            continue
        corr = pearson(*series.pairs(cid))
        if corr is not None and corr < best:
            best = corr
            best_id = cid
    if best_id is None:
        raise InputError(
            f"no consumer has a defined correlation with >= {min_samples} samples"
        )
    return best_id
