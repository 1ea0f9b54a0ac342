"""Aggregator-side billing: per-period cost accrual from reports and tariffs.

Bills are computed from reported values only; the billing path never sees
ground-truth usage.  A window covers a fixed span of periods (default one
30-day month) and issuing bills resets the ledger for the next window.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, InputError, StateError


@dataclass(frozen=True)
class TariffSchedule:
    """Per-period price per energy unit: one flat value or one value per period."""

    flat_rate: float | None = None
    rates: tuple[float, ...] | None = None

    def __post_init__(self):
        if (self.flat_rate is None) == (self.rates is None):
            raise ConfigurationError(
                "tariff must be either a flat rate or a per-period vector"
            )
        values = (self.flat_rate,) if self.rates is None else self.rates
        if any(v < 0 for v in values):
            raise ConfigurationError("tariff values must be >= 0")

    @classmethod
    def flat(cls, rate: float) -> "TariffSchedule":
        return cls(flat_rate=rate)

    @classmethod
    def from_vector(
        cls, rates: Sequence[float], total_periods: int
    ) -> "TariffSchedule":
        rates = tuple(float(r) for r in rates)
        if len(rates) != total_periods:
            raise ConfigurationError(
                f"tariff vector has length {len(rates)}, expected {total_periods}"
            )
        return cls(rates=rates)

    def rate_at(self, period_index: int) -> float:
        if self.flat_rate is not None:
            return self.flat_rate
        return self.rates[period_index]


@dataclass(frozen=True)
class BillStatement:
    consumer_id: int
    window_start: int
    window_end: int
    amount: float


class BillingLedger:
    """Accumulates per-consumer cost over one billing window.

    ``window_start`` .. ``window_end`` is a half-open period range.  Every
    period in the window must be accrued exactly once before bills issue.
    """

    def __init__(self, consumer_ids: Sequence[int], window_start: int, window_end: int):
        if window_end <= window_start:
            raise ConfigurationError(
                f"empty billing window [{window_start}, {window_end})"
            )
        self.consumer_ids = list(consumer_ids)
        self.window_start = window_start
        self.window_end = window_end
        self._costs = np.zeros(len(self.consumer_ids))
        self._accrued: set[int] = set()

    @property
    def window_length(self) -> int:
        return self.window_end - self.window_start

    def cost_of(self, consumer_id: int) -> float:
        return float(self._costs[self.consumer_ids.index(consumer_id)])


def accrue(
    ledger: BillingLedger,
    period_index: int,
    reports: Sequence[float],
    tariff_at: float,
) -> BillingLedger:
    """Add ``tariff_at * report`` to every consumer's accumulated cost."""
    if not ledger.window_start <= period_index < ledger.window_end:
        raise InputError(
            f"period {period_index} outside billing window "
            f"[{ledger.window_start}, {ledger.window_end})"
        )
    if period_index in ledger._accrued:
        raise InputError(f"period {period_index} already accrued")
    reports = np.asarray(reports, dtype=float)
    if reports.shape != (len(ledger.consumer_ids),):
        raise InputError(
            f"expected {len(ledger.consumer_ids)} reports, got {reports.shape}"
        )
    if tariff_at < 0:
        raise InputError(f"tariff must be >= 0, got {tariff_at}")
    ledger._costs += tariff_at * reports
    ledger._accrued.add(period_index)
    return ledger


def issue_bills(ledger: BillingLedger) -> list[BillStatement]:
    """Emit one statement per consumer and reset the ledger for the next window.

    A partially accrued window is a state error; an untouched ledger may be
    flushed and yields all-zero bills.
    """
    if 0 < len(ledger._accrued) != ledger.window_length:
        raise StateError(
            f"window incomplete: {len(ledger._accrued)} of "
            f"{ledger.window_length} periods accrued"
        )
    bills = [
        BillStatement(cid, ledger.window_start, ledger.window_end, float(cost))
        for cid, cost in zip(ledger.consumer_ids, ledger._costs)
    ]
    span = ledger.window_length
    ledger.window_start = ledger.window_end
    ledger.window_end += span
    ledger._costs = np.zeros(len(ledger.consumer_ids))
    ledger._accrued = set()
    return bills
