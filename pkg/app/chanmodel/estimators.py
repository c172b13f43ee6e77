"""
Statistical estimators used to validate the channel generator.
"""
import numpy as np
from scipy import stats

from core.exceptions import (
    DegenerateDistributionError,
    InsufficientDataError,
    InvalidArgumentError,
)

MIN_NAKAGAMI_SAMPLES = 1000

# Element distances closer than this share a correlation bin (m)
DISTANCE_RESOLUTION = 1e-9


def estimate_nakagami_m(samples):
    """
    Inverse normalized variance estimate m = E[X^2]^2 / Var(X^2).

    Constant non-zero amplitudes have no fading at all and return +inf.
    """
    amplitudes = np.abs(np.asarray(samples)).ravel()
    if amplitudes.size < MIN_NAKAGAMI_SAMPLES:
        raise InsufficientDataError(
            f'need at least {MIN_NAKAGAMI_SAMPLES} samples, '
            f'got {amplitudes.size}'
        )
    power = amplitudes ** 2
    mean_power = power.mean()
    if mean_power == 0:
        raise DegenerateDistributionError('all amplitudes are zero')
    variance = power.var()
    if variance <= 1e-24 * mean_power ** 2:
        return np.inf
    return float(mean_power ** 2 / variance)


def ks_distance_to_nakagami(samples, m, omega):
    """Kolmogorov-Smirnov distance between |samples| and Nakagami(m, omega)"""
    amplitudes = np.abs(np.asarray(samples)).ravel()
    target = stats.nakagami(nu=m, scale=np.sqrt(omega))
    return float(stats.kstest(amplitudes, target.cdf).statistic)


def complex_correlation(x, y):
    """Normalized complex sample correlation |E[x y*]| / sqrt(E|x|^2 E|y|^2)"""
    x = np.asarray(x, dtype=np.complex128).ravel()
    y = np.asarray(y, dtype=np.complex128).ravel()
    denominator = np.sqrt(np.mean(np.abs(x) ** 2) * np.mean(np.abs(y) ** 2))
    if denominator == 0:
        raise DegenerateDistributionError('correlation of an all-zero signal')
    return float(np.abs(np.mean(x * np.conj(y))) / denominator)


def _stack_taps(batch):
    """(R, M, N, L) tensor from a batch of ChannelSets"""
    if len(batch) < 2:
        raise InsufficientDataError(
            'spatial statistics need at least two realizations'
        )
    shapes = {channels.taps.shape for channels in batch}
    if len(shapes) != 1:
        raise InvalidArgumentError(f'mixed channel shapes in batch: {shapes}')
    return np.stack([channels.taps for channels in batch])


def estimate_spatial_correlation(batch, pair_distances=None):
    """
    Envelope correlation R_h versus element distance.

    For every tap and user the Pearson correlation of |h_m| and |h_m'|
    across realizations is computed, averaged over taps with the measured
    tap powers as weights and over users, then grouped by the distance
    between elements m and m'. R_h(0) is 1 by definition.

    Returns a list of (distance, correlation, num_pairs) sorted by
    distance. With pair_distances given, only those distances are kept.
    """
    taps = _stack_taps(batch)
    array = batch[0].array
    if array is None or array.num_elements != taps.shape[1]:
        raise InvalidArgumentError('batch does not carry a matching array')

    num_realizations, num_antennas, num_users, num_taps = taps.shape
    envelopes = np.abs(taps)
    centered = envelopes - envelopes.mean(axis=0)
    spread = centered.std(axis=0)  # (M, N, L)

    # Covariance between every element pair, per (user, tap)
    per_cell = centered.transpose(2, 3, 0, 1).reshape(
        num_users * num_taps, num_realizations, num_antennas
    )
    covariance = (
        np.swapaxes(per_cell, 1, 2) @ per_cell
    ) / num_realizations
    scale = spread.transpose(1, 2, 0).reshape(num_users * num_taps, -1)
    with np.errstate(invalid='ignore', divide='ignore'):
        correlation = covariance / (scale[:, :, None] * scale[:, None, :])

    # Weight each (user, tap) cell by its average power
    tap_power = np.mean(np.abs(taps) ** 2, axis=(0, 1, 2))
    weights = np.tile(tap_power, num_users)
    valid = np.isfinite(correlation)
    weighted = np.where(valid, correlation, 0.0) * weights[:, None, None]
    norm = np.sum(valid * weights[:, None, None], axis=0)
    with np.errstate(invalid='ignore', divide='ignore'):
        pair_correlation = np.sum(weighted, axis=0) / norm

    distances = np.round(
        array.pair_distances() / DISTANCE_RESOLUTION
    ) * DISTANCE_RESOLUTION
    rows = [(0.0, 1.0, num_antennas)]
    upper = np.triu_indices(num_antennas, k=1)
    pair_d = distances[upper]
    pair_r = pair_correlation[upper]
    for distance in np.unique(pair_d):
        members = (pair_d == distance) & np.isfinite(pair_r)
        if np.any(members):
            rows.append(
                (
                    float(distance),
                    float(np.mean(pair_r[members])),
                    int(np.count_nonzero(members)),
                )
            )

    if pair_distances is None:
        return rows
    selected = []
    for wanted in pair_distances:
        match = [row for row in rows if abs(row[0] - wanted) < 1e-6]
        if not match:
            raise InvalidArgumentError(
                f'no element pair at distance {wanted} m'
            )
        selected.append(match[0])
    return selected


def channel_second_moments(batch):
    """
    Empirical table E[h_{m,n}(l) h*_{m',n}(l)] shaped (M, M, L).

    Users share the same statistics, so the average runs over users as
    well as realizations.
    """
    taps = _stack_taps(batch)
    num_realizations, _, num_users, _ = taps.shape
    moments = np.einsum('rmnl,rknl->mkl', taps, np.conj(taps))
    return moments / (num_realizations * num_users)
