"""Probability estimates that carry their own uncertainty."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError


@dataclass(frozen=True)
class EstimateWithError:
    """A probability with a standard error.

    Exact values have n_samples = 0 and std_error = 0; a Monte Carlo
    estimate keeps its sample count even when the empirical frequency
    (and hence the plug-in standard error) is 0.
    """

    value: float
    std_error: float = 0.0
    n_samples: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise ValidationError(f"estimate must lie in [0, 1], got {self.value}")
        if self.std_error < 0.0:
            raise ValidationError("standard error must be nonnegative")

    @property
    def exact(self) -> bool:
        return self.n_samples == 0 and self.std_error == 0.0

    @classmethod
    def exact_value(cls, value: float) -> "EstimateWithError":
        return cls(value=value)

    @classmethod
    def from_indicator_mean(cls, value: float, n_samples: int) -> "EstimateWithError":
        """Monte Carlo mean of a 0/1 indicator with binomial standard error."""
        se = (value * (1.0 - value) / n_samples) ** 0.5
        return cls(value=value, std_error=se, n_samples=n_samples)
