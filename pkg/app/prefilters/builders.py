"""
TR, ETR and INTR pre-filter construction.

All three families are normalized to unit total energy, so the transmit
power is rho whatever M and N are.
"""
import logging

import numpy as np

from core.exceptions import (
    DegenerateChannelError,
    EqualizerDesignError,
    InvalidArgumentError,
    RankDeficiencyError,
)
from dspcore import kernels
from prefilters.models import Equalizer, PrefilterSet, Technique

logger = logging.getLogger(__name__)


def _normalize(taps):
    """Scale a tap tensor to unit total energy"""
    energy = np.sum(np.abs(taps) ** 2)
    if not np.isfinite(energy) or energy == 0:
        raise DegenerateChannelError(
            'pre-filter has no energy and cannot be normalized'
        )
    return taps / np.sqrt(energy)


def _check_user(channels, user):
    if not 0 <= user < channels.num_users:
        raise InvalidArgumentError(
            f'user {user} out of range for {channels.num_users} users'
        )


def default_target_delay(num_taps, equalizer_length):
    """Centre of the equalized autocorrelation, L - 1 + floor(L_E / 2)"""
    return num_taps - 1 + equalizer_length // 2


def tr_prefilter(channels):
    """
    Conventional TR: each filter is the channel itself divided by
    sqrt(sum_n sum_l ||h_n(l)||^2). The desired symbol peaks at L - 1.
    """
    taps = _normalize(channels.taps)
    return PrefilterSet(
        taps=taps,
        technique=Technique.TR,
        delay_reference=channels.num_taps - 1,
    )


def aggregate_autocorrelation(channels, user):
    """r_n(t) = sum_m conj(h_{m,n}(L-1-t)) * h_{m,n}(t), length 2L - 1"""
    _check_user(channels, user)
    h = channels.taps[:, user, :]
    return sum(
        kernels.convolve(kernels.time_reverse_conjugate(row), row)
        for row in h
    )


def design_zf_equalizer(channels, user, equalizer_length, target_delay=None):
    """
    Least-squares zero-forcing equalizer of one user.

    Solves conv(g_n, r_n) ~= delta(t - t_0) over the full convolution
    support, an over-determined Toeplitz system.
    """
    if equalizer_length < 1:
        raise InvalidArgumentError(
            f'equalizer length must be at least 1, got {equalizer_length}'
        )
    num_taps = channels.num_taps
    if target_delay is None:
        target_delay = default_target_delay(num_taps, equalizer_length)
    support = 2 * num_taps - 2 + equalizer_length
    if not 0 <= target_delay < support:
        raise InvalidArgumentError(
            f'target delay {target_delay} outside [0, {support})'
        )

    autocorrelation = aggregate_autocorrelation(channels, user)
    system = kernels.convolution_matrix(autocorrelation, equalizer_length)
    target = np.zeros(support, dtype=np.complex128)
    target[target_delay] = 1.0

    try:
        taps = kernels.least_squares_solve(system, target)
    except RankDeficiencyError as exc:
        raise EqualizerDesignError(
            f'equalizer of user {user} is undetermined: {exc}'
        ) from exc

    residual = float(np.linalg.norm(system @ taps - target))
    return Equalizer(
        taps=taps, target_delay=int(target_delay), residual=residual
    )


def etr_prefilter(channels, equalizer_length, target_delay=None):
    """
    Equalized TR: the TR filter of each user in cascade with its ZF
    equalizer, p_{m,n} = h_{m,n} * conj(g_n(-t)). L_p = L + L_E - 1.
    """
    if not np.any(channels.taps):
        raise DegenerateChannelError('all-zero channel')

    num_antennas, num_users, num_taps = channels.taps.shape
    taps = np.empty(
        (num_antennas, num_users, num_taps + equalizer_length - 1),
        dtype=np.complex128,
    )
    delay = None
    for user in range(num_users):
        equalizer = design_zf_equalizer(
            channels, user, equalizer_length, target_delay
        )
        logger.debug(
            'user %d equalizer residual %.3e', user, equalizer.residual
        )
        delay = equalizer.target_delay
        reversed_taps = kernels.time_reverse_conjugate(equalizer.taps)
        for antenna in range(num_antennas):
            taps[antenna, user] = kernels.convolve(
                channels.taps[antenna, user], reversed_taps
            )

    return PrefilterSet(
        taps=_normalize(taps),
        technique=Technique.ETR,
        delay_reference=delay,
    )


def _check_intr_arguments(channels, prefilter_length, reg_epsilon):
    if prefilter_length < channels.num_taps:
        raise InvalidArgumentError(
            f'L_p={prefilter_length} is shorter than L={channels.num_taps}'
        )
    if reg_epsilon < 0:
        raise InvalidArgumentError('reg_epsilon cannot be negative')


def window_lead(num_taps, prefilter_length):
    """Samples kept ahead of the TR seed inside an L_p window"""
    return (prefilter_length - num_taps) // 3


def _project_spectra(channels, tr, prefilter_length, reg_epsilon):
    """(M, N, N_f) INTR spectra from the delayed TR seed, not truncated"""
    num_points = channels.num_taps + prefilter_length - 1
    lead = window_lead(channels.num_taps, prefilter_length)
    channel_spectra = kernels.dft(channels.taps, num_points)
    seed = np.zeros(
        tr.taps.shape[:2] + (lead + channels.num_taps,), dtype=np.complex128
    )
    seed[:, :, lead:] = tr.taps
    seed_spectra = kernels.dft(seed, num_points)
    if channels.num_users == 1:
        return seed_spectra

    # Bins lead so every user is one batched projection over all bins
    basis = channel_spectra.transpose(2, 0, 1)
    seeds = seed_spectra.transpose(2, 0, 1)
    projected = np.empty_like(seeds)
    for user in range(channels.num_users):
        interferers = np.delete(basis, user, axis=2)
        projected[:, :, user] = kernels.nullspace_project(
            interferers, seeds[:, :, user], reg_epsilon
        )
    return projected.transpose(1, 2, 0)


def intr_spectra(channels, prefilter_length,
                 reg_epsilon=kernels.DEFAULT_REG_EPSILON):
    """
    Frequency-domain INTR filters before truncation, shaped (M, N, N_f)
    with N_f = L + L_p - 1.

    At every bin P_n(f) is the TR spectrum projected onto the orthogonal
    complement of the other users' steering vectors, so
    <H_n'(f), P_n(f)> = 0 for n' != n.
    """
    _check_intr_arguments(channels, prefilter_length, reg_epsilon)
    tr = tr_prefilter(channels)
    return _project_spectra(channels, tr, prefilter_length, reg_epsilon)


def own_composite_peaks(taps, channels):
    """argmax_t |q_{n,n}(t)| of every user"""
    num_points = channels.num_taps + taps.shape[2] - 1
    transmit = kernels.dft(kernels.time_reverse_conjugate(taps), num_points)
    channel_spectra = kernels.dft(channels.taps, num_points)
    own = kernels.idft(np.sum(transmit * channel_spectra, axis=0))
    return np.argmax(np.abs(own), axis=-1)


def intr_prefilter(channels, prefilter_length,
                   reg_epsilon=kernels.DEFAULT_REG_EPSILON):
    """
    Interference-nulling TR.

    The TR seed is delayed by window_lead samples before projection, so
    the kept window [0, L_p) holds part of the nulling correction on both
    sides of the seed; the part left outside shrinks as L_p grows. The
    truncated set is renormalized to unit energy. With a single user
    there is nothing to null and the TR filters are returned, padded.
    """
    _check_intr_arguments(channels, prefilter_length, reg_epsilon)
    tr = tr_prefilter(channels)

    if channels.num_users == 1:
        taps = np.zeros(
            (channels.num_antennas, 1, prefilter_length), dtype=np.complex128
        )
        taps[:, :, :channels.num_taps] = tr.taps
    else:
        spectra = _project_spectra(
            channels, tr, prefilter_length, reg_epsilon
        )
        taps = _normalize(kernels.idft(spectra)[:, :, :prefilter_length])

    return PrefilterSet(
        taps=taps,
        technique=Technique.INTR,
        delay_reference=own_composite_peaks(taps, channels),
    )


def prefilter_energy(prefilters):
    """Total energy sum |p_{m,n}(t)|^2"""
    return float(np.sum(np.abs(prefilters.taps) ** 2))


def build_prefilter(technique, channels, prefilter_length=None,
                    equalizer_length=None,
                    reg_epsilon=kernels.DEFAULT_REG_EPSILON):
    """
    Build one technique at a requested L_p.

    TR ignores prefilter_length. ETR uses L_E = L_p - L + 1 unless an
    explicit equalizer_length is given.
    """
    if technique == Technique.TR:
        return tr_prefilter(channels)
    if prefilter_length is None:
        prefilter_length = channels.num_taps
    if technique == Technique.ETR:
        if equalizer_length is None:
            equalizer_length = prefilter_length - channels.num_taps + 1
        return etr_prefilter(channels, equalizer_length)
    if technique == Technique.INTR:
        return intr_prefilter(channels, prefilter_length, reg_epsilon)
    raise InvalidArgumentError(f'unknown technique {technique!r}')
