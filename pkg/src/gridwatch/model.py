"""Grid entities: consumer profiles, reporting behaviors, per-period usage generation.

Usage is drawn i.i.d. uniform on ``[usage_min, usage_max]`` per consumer per
period (no temporal correlation, the hardest setting for the detector).
Reported values are derived from actual usage by the consumer's behavior
model and are clipped at zero so reports stay physical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Union

import numpy as np

from .errors import ConfigurationError

DEFAULT_USAGE_MIN = 0.5
DEFAULT_USAGE_MAX = 1.5

Direction = Literal["subtract", "add"]


@dataclass(frozen=True)
class Benign:
    """Reports actual usage unchanged."""


@dataclass(frozen=True)
class Multiplicative:
    """Reports a fixed fraction or multiple of actual usage.

    ``alpha`` in (0, 1) under-reports, ``alpha`` > 1 over-reports;
    ``alpha`` = 1 is accepted but behaves exactly like `Benign`.
    """

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigurationError(f"alpha must be > 0, got {self.alpha}")


@dataclass(frozen=True)
class FixedOffset:
    """Adds or subtracts a fixed quantity ``eta``; subtraction clips at zero."""

    eta: float
    direction: Direction = "subtract"

    def __post_init__(self):
        if not self.eta > 0:
            raise ConfigurationError(f"eta must be > 0, got {self.eta}")
        _check_direction(self.direction)


@dataclass(frozen=True)
class RandomOffset:
    """Adds or subtracts a fresh uniform(0, theta_max) draw each period.

    The offset is drawn independently of the actual usage; subtraction
    clips at zero.
    """

    theta_max: float
    direction: Direction = "subtract"

    def __post_init__(self):
        if not self.theta_max > 0:
            raise ConfigurationError(f"theta_max must be > 0, got {self.theta_max}")
        _check_direction(self.direction)


BehaviorModel = Union[Benign, Multiplicative, FixedOffset, RandomOffset]


def _check_direction(direction: str) -> None:
    if direction not in ("subtract", "add"):
        raise ConfigurationError(
            f"direction must be 'subtract' or 'add', got {direction!r}"
        )


def is_benign(behavior: BehaviorModel) -> bool:
    """True when the behavior reports truthfully (includes alpha == 1)."""
    if isinstance(behavior, Benign):
        return True
    return isinstance(behavior, Multiplicative) and behavior.alpha == 1.0


@dataclass(frozen=True)
class ConsumerProfile:
    consumer_id: int
    usage_min: float = DEFAULT_USAGE_MIN
    usage_max: float = DEFAULT_USAGE_MAX
    behavior: BehaviorModel = field(default_factory=Benign)

    def __post_init__(self):
        if self.consumer_id < 0:
            raise ConfigurationError(
                f"consumer_id must be >= 0, got {self.consumer_id}"
            )
        if self.usage_min < 0:
            raise ConfigurationError(
                f"usage_min must be >= 0, got {self.usage_min}"
            )
        if not self.usage_min < self.usage_max:
            raise ConfigurationError(
                f"usage_min ({self.usage_min}) must be < usage_max ({self.usage_max})"
            )


@dataclass(frozen=True)
class RegionConfig:
    region_id: int
    consumers: tuple[ConsumerProfile, ...]
    periods_per_day: int = 96
    num_days: int = 30

    def __post_init__(self):
        object.__setattr__(self, "consumers", tuple(self.consumers))
        if len(self.consumers) < 2:
            raise ConfigurationError(
                f"a region needs at least 2 consumers, got {len(self.consumers)}"
            )
        ids = [c.consumer_id for c in self.consumers]
        if len(set(ids)) != len(ids):
            raise ConfigurationError("consumer ids must be unique within a region")
        if self.periods_per_day <= 0:
            raise ConfigurationError(
                f"periods_per_day must be > 0, got {self.periods_per_day}"
            )
        if self.num_days <= 0:
            raise ConfigurationError(f"num_days must be > 0, got {self.num_days}")

    @property
    def total_periods(self) -> int:
        return self.periods_per_day * self.num_days

    @property
    def consumer_ids(self) -> list[int]:
        return [c.consumer_id for c in self.consumers]

    @property
    def malicious_ids(self) -> set[int]:
        return {c.consumer_id for c in self.consumers if not is_benign(c.behavior)}


def draw_usage(profile: ConsumerProfile, rng: np.random.Generator) -> float:
    """Draw one period's actual consumption, uniform on [usage_min, usage_max]."""
    return float(rng.uniform(profile.usage_min, profile.usage_max))


def apply_behavior(behavior: BehaviorModel, actual, rng: np.random.Generator):
    """Turn actual usage into the reported value.

    Accepts a scalar or an ndarray of per-period actuals; the returned
    report has the same shape and is always >= 0.  `RandomOffset` draws
    one offset per element from ``rng``.
    """
    if isinstance(behavior, Benign):
        return actual
    if isinstance(behavior, Multiplicative):
        return behavior.alpha * np.asarray(actual) if np.ndim(actual) else behavior.alpha * actual
    if isinstance(behavior, FixedOffset):
        if behavior.direction == "subtract":
            return np.maximum(np.asarray(actual) - behavior.eta, 0.0) if np.ndim(actual) else max(actual - behavior.eta, 0.0)
        return actual + behavior.eta
    if isinstance(behavior, RandomOffset):
        size = np.shape(actual) if np.ndim(actual) else None
        theta = rng.uniform(0.0, behavior.theta_max, size=size)
        if behavior.direction == "subtract":
            return np.maximum(actual - theta, 0.0)
        return actual + theta
    raise TypeError(f"unknown behavior model: {behavior!r}")
