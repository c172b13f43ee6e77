"""
Pre-filter domain types.

A PrefilterSet stores p_{m,n}(t) un-reversed: the TR set holds the channel
itself, scaled. The transmit filter of antenna m for user n is
conj(p_{m,n}(-t)), which is how linksim applies it.
"""
from dataclasses import dataclass

import numpy as np
from django.db import models

from core.exceptions import InvalidArgumentError


class Technique(models.TextChoices):
    """Pre-filter families."""
    TR = 'TR', 'Time reversal'
    ETR = 'ETR', 'Equalized time reversal'
    INTR = 'INTR', 'Interference-nulling time reversal'


@dataclass(eq=False)
class PrefilterSet:
    """Per-antenna, per-user filters shaped (M, N, L_p)."""
    taps: np.ndarray
    technique: str
    delay_reference: np.ndarray

    def __post_init__(self):
        self.taps = np.asarray(self.taps, dtype=np.complex128)
        if self.taps.ndim != 3 or self.taps.shape[2] < 1:
            raise InvalidArgumentError(
                f'pre-filter taps must be (M, N, L_p), got {self.taps.shape}'
            )
        if self.technique not in Technique.values:
            raise InvalidArgumentError(
                f'unknown technique {self.technique!r}'
            )
        delays = np.asarray(self.delay_reference, dtype=np.int64)
        if delays.ndim == 0:
            delays = np.full(self.num_users, int(delays), dtype=np.int64)
        if delays.shape != (self.num_users,):
            raise InvalidArgumentError(
                f'need one delay reference per user, got {delays.shape}'
            )
        self.delay_reference = delays

    @property
    def num_antennas(self):
        return self.taps.shape[0]

    @property
    def num_users(self):
        return self.taps.shape[1]

    @property
    def prefilter_length(self):
        """L_p"""
        return self.taps.shape[2]


@dataclass(eq=False)
class Equalizer:
    """Zero-forcing pre-equalizer g_n(t) of one user."""
    taps: np.ndarray
    target_delay: int
    residual: float

    @property
    def length(self):
        return len(self.taps)
