"""
Channel model domain types.

Nothing here is persisted through the ORM; the types are plain dataclasses
around numpy arrays. Channel realizations persist through the binary cache
in chanmodel.storage.
"""
from dataclasses import dataclass, field, replace

import numpy as np
from django.conf import settings
from django.db import models
from scipy import constants

from core.exceptions import ConfigurationError, InvalidArgumentError


class Scenario(models.TextChoices):
    """IEEE 802.11ad indoor scenarios."""
    CB = 'CB', 'Cubicle'
    CR = 'CR', 'Conference room'
    LR = 'LR', 'Living room'


class PdpShape(models.TextChoices):
    """Power delay profile shapes understood by build_pdp."""
    EXPONENTIAL = 'exponential', 'Single exponential'
    SPECULAR_EXPONENTIAL = (
        'specular_exponential',
        'Dominant first tap plus exponential tail',
    )


# Nakagami m and RMS delay spread (ns) per scenario
SCENARIO_DEFAULTS = {
    Scenario.CB: (4.34, 3.47),
    Scenario.CR: (2.56, 4.82),
    Scenario.LR: (1.74, 7.81),
}


@dataclass(frozen=True)
class ScenarioParams:
    """Statistical description of one indoor scenario."""
    name: str
    nakagami_m: float
    rms_delay_spread: float  # ns
    sample_period: float  # ns
    num_taps: int
    gamma: float
    carrier_wavelength: float  # m
    pdp_shape: str = PdpShape.EXPONENTIAL
    first_tap_fraction: float = 0.0

    def __post_init__(self):
        if self.name not in Scenario.values:
            raise ConfigurationError(f'unknown scenario {self.name!r}')
        if self.nakagami_m < 0.5:
            raise ConfigurationError(
                f'Nakagami m must be at least 0.5, got {self.nakagami_m}'
            )
        if self.num_taps < 1 or self.sample_period <= 0:
            raise ConfigurationError(
                'num_taps and sample_period must be positive'
            )
        if self.gamma <= 0 or self.carrier_wavelength <= 0:
            raise ConfigurationError(
                'gamma and carrier_wavelength must be positive'
            )
        if self.rms_delay_spread < 0:
            raise ConfigurationError('rms_delay_spread cannot be negative')

        # The PDP tail must fit inside the CIR window
        if self.num_taps * self.sample_period < 3 * self.rms_delay_spread:
            raise ConfigurationError(
                f'{self.num_taps} taps of {self.sample_period} ns cannot '
                f'capture a {self.rms_delay_spread} ns delay spread'
            )
        if self.pdp_shape not in PdpShape.values:
            raise ConfigurationError(f'unknown PDP shape {self.pdp_shape!r}')
        if not 0 <= self.first_tap_fraction < 1:
            raise ConfigurationError('first_tap_fraction must be in [0, 1)')

    @classmethod
    def preset(cls, name, **overrides):
        """Build the default parameters for a scenario name"""
        defaults = settings.SIMULATION
        try:
            nakagami_m, rms_delay_spread = SCENARIO_DEFAULTS[Scenario(name)]
        except ValueError as exc:
            raise ConfigurationError(f'unknown scenario {name!r}') from exc

        params = {
            'name': Scenario(name).value,
            'nakagami_m': nakagami_m,
            'rms_delay_spread': rms_delay_spread,
            'sample_period': defaults['SAMPLE_PERIOD_NS'],
            'num_taps': defaults['NUM_TAPS'],
            'gamma': defaults['GAMMA'],
            'carrier_wavelength': (
                constants.c / defaults['CARRIER_FREQUENCY_HZ']
            ),
        }
        params.update(overrides)
        return cls(**params)

    def with_overrides(self, **changes):
        """Return a validated copy with some fields replaced"""
        return replace(self, **changes)

    def as_dict(self):
        """Plain-type representation for JSON sidecars"""
        return {
            'name': str(self.name),
            'nakagami_m': float(self.nakagami_m),
            'rms_delay_spread': float(self.rms_delay_spread),
            'sample_period': float(self.sample_period),
            'num_taps': int(self.num_taps),
            'gamma': float(self.gamma),
            'carrier_wavelength': float(self.carrier_wavelength),
            'pdp_shape': str(self.pdp_shape),
            'first_tap_fraction': float(self.first_tap_fraction),
        }


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform rectangular array in its own (local) x-y plane."""
    rows: int
    cols: int
    element_spacing: float  # m

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ConfigurationError(
                'array needs at least one row and one column'
            )
        if self.element_spacing <= 0:
            raise ConfigurationError('element_spacing must be positive')

    @classmethod
    def rectangular(cls, rows, cols, element_spacing=None):
        """Array with the default element spacing from settings"""
        if element_spacing is None:
            element_spacing = settings.SIMULATION['ELEMENT_SPACING_M']
        return cls(rows=rows, cols=cols, element_spacing=element_spacing)

    @property
    def num_elements(self):
        return self.rows * self.cols

    @property
    def element_positions(self):
        """(M, 3) coordinates, row-major, centred on the array centroid"""
        r, c = np.meshgrid(
            np.arange(self.rows), np.arange(self.cols), indexing='ij'
        )
        x = (c.ravel() - (self.cols - 1) / 2) * self.element_spacing
        y = (r.ravel() - (self.rows - 1) / 2) * self.element_spacing
        return np.stack([x, y, np.zeros_like(x)], axis=1)

    def pair_distances(self):
        """(M, M) inter-element distances"""
        positions = self.element_positions
        deltas = positions[:, None, :] - positions[None, :, :]
        return np.linalg.norm(deltas, axis=-1)


@dataclass(frozen=True, eq=False)
class PowerDelayProfile:
    """Average tap powers A_h(t), shared by every antenna-user pair."""
    taps: np.ndarray

    @property
    def total_power(self):
        return float(np.sum(self.taps))

    def rms_delay_spread(self, sample_period):
        """Discrete RMS delay spread in the units of sample_period"""
        weights = self.taps / np.sum(self.taps)
        delays = np.arange(len(self.taps)) * sample_period
        mean = np.sum(weights * delays)
        variance = np.sum(weights * delays ** 2) - mean ** 2
        return float(np.sqrt(max(variance, 0.0)))


@dataclass(frozen=True, eq=False)
class ScattererLayout:
    """Per-tap scatterers seen by one user in one realization."""
    positions: np.ndarray  # (L, 3)
    specular_power: np.ndarray  # (L,)
    diffuse_power: np.ndarray  # (L,)
    subray_directions: np.ndarray  # (L, K, 3) unit vectors
    excess_delays: np.ndarray  # (L,) ns


@dataclass(eq=False)
class ChannelSet:
    """One realization of every antenna-user CIR, shaped (M, N, L)."""
    taps: np.ndarray
    scenario: ScenarioParams = None
    array: ArrayGeometry = None
    correlated: bool = False
    seed: int = 0
    layouts: list = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.taps = np.asarray(self.taps, dtype=np.complex128)
        if self.taps.ndim != 3:
            raise InvalidArgumentError(
                f'channel taps must be (M, N, L), got {self.taps.shape}'
            )
        if not np.all(np.isfinite(self.taps)):
            raise InvalidArgumentError('channel taps must be finite')

    @property
    def num_antennas(self):
        return self.taps.shape[0]

    @property
    def num_users(self):
        return self.taps.shape[1]

    @property
    def num_taps(self):
        return self.taps.shape[2]

    @property
    def gamma(self):
        """Total channel power of the generating scenario (1 if hand-built)"""
        return self.scenario.gamma if self.scenario is not None else 1.0
