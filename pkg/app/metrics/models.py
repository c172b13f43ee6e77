"""
Prediction and rate result types.
"""
import math
from dataclasses import dataclass, field

from django.db import models

from core.exceptions import InsufficientDataError


class PredictionBasis(models.TextChoices):
    """Which closed form a signal-power prediction comes from."""
    TR_MEAN = 'tr_mean', 'TR average desired power'
    ETR_BOUND = 'etr_bound', 'Upper bound on the ETR desired power'


@dataclass(frozen=True)
class TheoreticalPrediction:
    """Closed-form desired signal power for one (M, N, rho, gamma)."""
    signal_power: float
    basis: str
    inputs: dict = field(default_factory=dict)


def mean_and_standard_error(values):
    """fsum-based mean and SE; SE is NaN for a single value"""
    count = len(values)
    if count == 0:
        raise InsufficientDataError('no values to summarize')
    mean = math.fsum(values) / count
    if count == 1:
        return mean, math.nan
    variance = math.fsum((v - mean) ** 2 for v in values) / (count - 1)
    return mean, math.sqrt(variance / count)


@dataclass(frozen=True)
class SumRateResult:
    """Per-realization sum rates (bits/s/Hz) of one experiment cell."""
    rates: tuple

    @property
    def count(self):
        return len(self.rates)

    @property
    def mean(self):
        return mean_and_standard_error(self.rates)[0]

    @property
    def standard_error(self):
        return mean_and_standard_error(self.rates)[1]

    def merge(self, other):
        """Pool the realizations of two results"""
        return SumRateResult(rates=self.rates + other.rates)
