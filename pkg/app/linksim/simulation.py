"""
Composite responses, received-power decomposition and Monte Carlo BPSK.
"""
import logging

import numpy as np
from scipy import signal, special

from core.exceptions import DegenerateChannelError, InvalidArgumentError
from dspcore import kernels
from linksim.models import BerResult, CompositeResponse, PowerDecomposition
from prefilters.models import Technique

logger = logging.getLogger(__name__)

MIN_SYMBOLS = 1000

# Blocks drawn per chunk, capped so a chunk holds at most this many symbols
DEFAULT_CHUNK_BLOCKS = 4096
MAX_CHUNK_SYMBOLS = 1 << 22


def composite_response(prefilters, channels):
    """
    q[n', n] = sum_m conj(p_{m,n'}(-t)) * h_{m,n}(t), for all user pairs.

    The sampling delay of each receiver is the set's delay reference for
    TR and ETR and the argmax of |q[n, n]| for INTR.
    """
    if prefilters.taps.shape[:2] != channels.taps.shape[:2]:
        raise InvalidArgumentError(
            f'pre-filters {prefilters.taps.shape[:2]} do not match '
            f'channels {channels.taps.shape[:2]} (M, N)'
        )
    num_points = channels.num_taps + prefilters.prefilter_length - 1
    transmit = kernels.dft(
        kernels.time_reverse_conjugate(prefilters.taps), num_points
    )
    received = kernels.dft(channels.taps, num_points)
    q = kernels.idft(np.einsum('mif,mjf->ijf', transmit, received))

    users = np.arange(channels.num_users)
    if prefilters.technique == Technique.INTR:
        peak = np.argmax(np.abs(q[users, users]), axis=-1)
    else:
        peak = prefilters.delay_reference.copy()
    if np.any(peak < 0) or np.any(peak >= num_points):
        raise InvalidArgumentError(
            f'delay reference {peak} outside [0, {num_points})'
        )
    return CompositeResponse(q=q, peak=peak)


def power_decomposition(composite, rho=1.0):
    """
    Split each receiver's energy into the desired peak, the rest of its
    own response (ISI) and the other users' responses (IUI).
    """
    if not rho > 0:
        raise InvalidArgumentError(f'rho must be positive, got {rho}')
    energy = rho * np.abs(composite.q) ** 2
    users = np.arange(composite.num_users)
    own = energy[users, users]

    signal_power = own[users, composite.peak]
    off_peak = own.copy()
    off_peak[users, composite.peak] = 0
    cross = energy.copy()
    cross[users, users] = 0

    return PowerDecomposition(
        signal=signal_power,
        isi=off_peak.sum(axis=-1),
        iui=cross.sum(axis=(0, 2)),
        rho=rho,
    )


def awgn(x, variance, rng):
    """Add circular complex Gaussian noise of the given per-sample variance"""
    if variance < 0:
        raise InvalidArgumentError(f'variance cannot be negative: {variance}')
    x = np.asarray(x, dtype=np.complex128)
    if variance == 0:
        return x.copy()
    scale = np.sqrt(variance / 2)
    noise = rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape)
    return x + scale * noise


def noise_variance(snr_db, rho=1.0, gamma=1.0):
    """sigma_z^2 = rho * gamma / 10^(snr / 10); +inf dB is noiseless"""
    if np.isnan(snr_db) or snr_db == -np.inf:
        raise InvalidArgumentError(f'invalid SNR {snr_db} dB')
    if snr_db == np.inf:
        return 0.0
    return rho * gamma / 10 ** (snr_db / 10)


def bpsk_error_probability(snr):
    """Q(sqrt(2 snr)) for BPSK at linear SNR snr"""
    return 0.5 * special.erfc(np.sqrt(snr))


def _random_symbols(rng, shape):
    """Equiprobable +/-1 symbols"""
    return 1.0 - 2.0 * rng.integers(0, 2, size=shape)


def _block_errors(composite, variance, num_symbols, rng, rho, derotation):
    """
    One symbol decision per block: every tap of every stream carries its
    own independent symbol, so the sample at the peak sees exactly the ISI
    and IUI the composite response implies.
    """
    num_users, _, length = composite.q.shape
    users = np.arange(num_users)
    chunk = max(
        1,
        min(DEFAULT_CHUNK_BLOCKS, MAX_CHUNK_SYMBOLS // (num_users * length)),
    )
    errors = np.zeros(num_users, dtype=np.int64)
    remaining = num_symbols
    while remaining:
        blocks = min(chunk, remaining)
        symbols = _random_symbols(rng, (blocks, num_users, length))
        received = np.sqrt(rho) * np.einsum(
            'ijt,bit->bj', composite.q, symbols
        )
        received = awgn(received, variance, rng)
        decided = np.where(np.real(received * derotation) >= 0, 1.0, -1.0)
        desired = symbols[:, users, composite.peak]
        errors += np.count_nonzero(decided != desired, axis=0)
        remaining -= blocks
    return errors


def _streaming_errors(composite, variance, num_symbols, rng, rho,
                      derotation):
    """Continuous symbol streams convolved with the composite responses"""
    num_users, _, length = composite.q.shape
    streams = _random_symbols(
        rng, (num_users, num_symbols + 2 * length - 2)
    )
    # Skip the first L + L_p - 2 symbols so every decision sees full ISI
    detected = np.arange(length - 1, length - 1 + num_symbols)
    errors = np.zeros(num_users, dtype=np.int64)
    for user in range(num_users):
        received = np.sqrt(rho) * sum(
            signal.fftconvolve(streams[other], composite.q[other, user])
            for other in range(num_users)
        )
        samples = awgn(received[detected + composite.peak[user]], variance,
                       rng)
        decided = np.where(
            np.real(samples * derotation[user]) >= 0, 1.0, -1.0
        )
        errors[user] = np.count_nonzero(decided != streams[user, detected])
    return errors


def simulate_composite_ber(composite, snr_db, num_symbols, rng, rho=1.0,
                           gamma=1.0, streaming=False):
    """
    BPSK bit errors of every user at one SNR.

    The detector knows each user's peak delay and the phase of its peak
    coefficient, derotates, and decides on the sign of the real part.
    """
    if num_symbols < MIN_SYMBOLS:
        raise InvalidArgumentError(
            f'need at least {MIN_SYMBOLS} symbols, got {num_symbols}'
        )
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    variance = noise_variance(snr_db, rho, gamma)

    peaks = composite.peak_coefficients()
    if np.any(np.abs(peaks) == 0):
        raise DegenerateChannelError('a user has a zero peak coefficient')
    derotation = np.conj(peaks) / np.abs(peaks)

    simulate = _streaming_errors if streaming else _block_errors
    errors = simulate(composite, variance, num_symbols, rng, rho, derotation)
    logger.debug(
        'SNR %.1f dB: %d errors in %d bits',
        snr_db, int(errors.sum()), num_symbols * composite.num_users,
    )
    return BerResult(snr_db=snr_db, errors=errors, bits=num_symbols)


def simulate_ber(prefilters, channels, snr_db, num_symbols, rng, rho=1.0,
                 gamma=None, streaming=False):
    """Monte Carlo BER of a pre-filter set over one channel realization"""
    if gamma is None:
        gamma = channels.gamma
    return simulate_composite_ber(
        composite_response(prefilters, channels),
        snr_db,
        num_symbols,
        rng,
        rho=rho,
        gamma=gamma,
        streaming=streaming,
    )
