"""
Power delay profiles and the specular/diffuse split of each tap.
"""
import logging

import numpy as np
from scipy import optimize

from chanmodel.models import PdpShape, PowerDelayProfile
from core.exceptions import ConfigurationError, InvalidArgumentError

logger = logging.getLogger(__name__)

# Below this the profile collapses to a single tap
FLAT_LIMIT_SAMPLES = 1e-9

# Smallest m that still gets a specular component
RAYLEIGH_TOLERANCE = 1e-9

# Search range for the exponential decay constant, in samples
_LOG_DECAY_BOUNDS = (np.log(1e-3), np.log(1e7))


def _profile_weights(shape, first_tap_fraction, num_taps, decay):
    """Unnormalized tap weights for a decay constant in samples"""
    tail = np.exp(-np.arange(num_taps) / decay)
    tail /= tail.sum()
    if shape == PdpShape.EXPONENTIAL:
        return tail
    weights = (1 - first_tap_fraction) * tail
    weights[0] += first_tap_fraction
    return weights


def _rms_in_samples(weights):
    """Discrete second-moment RMS delay spread in samples"""
    weights = weights / weights.sum()
    delays = np.arange(len(weights))
    mean = np.sum(weights * delays)
    return np.sqrt(max(np.sum(weights * delays ** 2) - mean ** 2, 0.0))


def build_pdp(scenario):
    """
    Build the scenario's PDP.

    The decay constant of the exponential (or of the tail, for the
    specular_exponential shape) is solved so the discrete RMS delay spread
    equals scenario.rms_delay_spread; the taps are then scaled to sum to
    gamma.
    """
    num_taps = scenario.num_taps
    target = scenario.rms_delay_spread / scenario.sample_period

    if target < FLAT_LIMIT_SAMPLES:
        weights = np.zeros(num_taps)
        weights[0] = 1.0
    else:
        def mismatch(log_decay):
            weights = _profile_weights(
                scenario.pdp_shape,
                scenario.first_tap_fraction,
                num_taps,
                np.exp(log_decay),
            )
            return _rms_in_samples(weights) - target

        low, high = _LOG_DECAY_BOUNDS
        if mismatch(high) < 0:
            raise ConfigurationError(
                f'{num_taps} taps of {scenario.sample_period} ns cannot '
                f'realize a {scenario.rms_delay_spread} ns RMS delay spread '
                f'with a {scenario.pdp_shape} profile'
            )
        log_decay = optimize.brentq(mismatch, low, high, xtol=1e-14)
        weights = _profile_weights(
            scenario.pdp_shape,
            scenario.first_tap_fraction,
            num_taps,
            np.exp(log_decay),
        )
        logger.debug(
            'PDP decay %.4f samples for %s', np.exp(log_decay), scenario.name
        )

    taps = scenario.gamma * weights / weights.sum()
    return PowerDelayProfile(taps=taps)


def rician_k_factor(m_target):
    """Rician K solving m = (1 + K)^2 / (1 + 2K); zero at or below m = 1"""
    if m_target < 1 + RAYLEIGH_TOLERANCE:
        return 0.0
    return (m_target - 1) + np.sqrt(m_target ** 2 - m_target)


def split_specular_diffuse(m_target, omega):
    """Split a tap power omega into (specular, diffuse) powers"""
    if not omega > 0:
        raise InvalidArgumentError(f'omega must be positive, got {omega}')
    k_factor = rician_k_factor(m_target)
    specular = omega * k_factor / (1 + k_factor)
    return specular, omega - specular
