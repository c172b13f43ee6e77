"""
Link-level result types.
"""
from dataclasses import dataclass

import numpy as np
from scipy import stats

from core.exceptions import InvalidArgumentError


@dataclass(eq=False)
class CompositeResponse:
    """
    End-to-end responses q[n', n, t] from stream n' to receiver n, shaped
    (N, N, L + L_p - 1), and the sampling delay of every receiver.
    """
    q: np.ndarray
    peak: np.ndarray

    @property
    def num_users(self):
        return self.q.shape[0]

    @property
    def length(self):
        return self.q.shape[2]

    def peak_coefficients(self):
        """q[n, n, peak_n] for every user"""
        users = np.arange(self.num_users)
        return self.q[users, users, self.peak]


@dataclass(eq=False)
class PowerDecomposition:
    """Per-user desired, ISI and IUI powers for one realization."""
    signal: np.ndarray
    isi: np.ndarray
    iui: np.ndarray
    rho: float = 1.0

    @property
    def total(self):
        return self.signal + self.isi + self.iui

    def normalized(self, gamma):
        """The same powers in units of rho * gamma"""
        scale = self.rho * gamma
        return PowerDecomposition(
            signal=self.signal / scale,
            isi=self.isi / scale,
            iui=self.iui / scale,
            rho=1.0,
        )

    def user_means(self):
        """(P_s, P_isi, P_iui) averaged over users"""
        return (
            float(np.mean(self.signal)),
            float(np.mean(self.isi)),
            float(np.mean(self.iui)),
        )


@dataclass(eq=False)
class BerResult:
    """Bit error counts of one SNR point, possibly pooled."""
    snr_db: float
    errors: np.ndarray  # per user
    bits: int  # per user
    realizations: int = 1

    def __post_init__(self):
        self.errors = np.asarray(self.errors, dtype=np.int64)

    @property
    def total_errors(self):
        return int(np.sum(self.errors))

    @property
    def total_bits(self):
        return int(self.bits * self.errors.size)

    @property
    def ber(self):
        return self.total_errors / self.total_bits

    def merge(self, other):
        """Pool counts of the same SNR point"""
        if other.snr_db != self.snr_db:
            raise InvalidArgumentError(
                f'cannot merge SNR {other.snr_db} dB into {self.snr_db} dB'
            )
        if other.errors.shape != self.errors.shape:
            raise InvalidArgumentError('cannot merge different user counts')
        return BerResult(
            snr_db=self.snr_db,
            errors=self.errors + other.errors,
            bits=self.bits + other.bits,
            realizations=self.realizations + other.realizations,
        )

    def wilson_interval(self, confidence=0.95):
        """Wilson score interval of the pooled BER"""
        n = self.total_bits
        p = self.ber
        z = stats.norm.ppf(0.5 + confidence / 2)
        denominator = 1 + z ** 2 / n
        centre = (p + z ** 2 / (2 * n)) / denominator
        half = z * np.sqrt(p * (1 - p) / n + z ** 2 / (4 * n ** 2))
        half /= denominator
        return max(0.0, centre - half), min(1.0, centre + half)

    def interval_width(self, confidence=0.95):
        low, high = self.wilson_interval(confidence)
        return high - low
