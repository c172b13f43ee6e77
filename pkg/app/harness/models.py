"""
Experiment configuration, run results and check outcomes.
"""
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

from django.conf import settings
from django.db import models

from chanmodel.models import ArrayGeometry, PdpShape, ScenarioParams
from prefilters.models import Technique


@dataclass
class ExperimentConfig:
    """
    One experiment: a grid of (array, users, correlated) cells, each run
    for num_realizations channel draws.
    """
    scenario: str
    arrays: list
    users: list
    techniques: list
    prefilter_lengths: list
    snr_grid_db: list
    num_realizations: int
    master_seed: int
    num_taps: int = 60
    sample_period: float = 0.5
    gamma: float = 1.0
    pdp_shape: str = PdpShape.EXPONENTIAL
    first_tap_fraction: float = 0.0
    correlated: list = field(default_factory=lambda: [False])
    equalizer_length: int = None
    reg_epsilon: float = 1e-12
    rho: float = 1.0
    num_symbols: int = 0
    streaming: bool = False
    output_path: str = ''
    workers: int = 1

    def __post_init__(self):
        self.arrays = [tuple(pair) for pair in self.arrays]

    def scenario_params(self):
        """ScenarioParams of this experiment"""
        return ScenarioParams.preset(
            self.scenario,
            num_taps=self.num_taps,
            sample_period=self.sample_period,
            gamma=self.gamma,
            pdp_shape=self.pdp_shape,
            first_tap_fraction=self.first_tap_fraction,
        )

    def array_geometries(self):
        return [ArrayGeometry.rectangular(rows, cols)
                for rows, cols in self.arrays]

    def cells(self):
        """(ArrayGeometry, num_users, correlated) for every grid cell"""
        return list(
            product(self.array_geometries(), self.users, self.correlated)
        )

    def lengths_for(self, technique):
        """
        Pre-filter lengths a technique runs at.

        TR is defined for L_p = L only. A fixed equalizer pins ETR to the
        length it actually produces, L + L_E - 1.
        """
        if technique == Technique.TR:
            return [self.num_taps]
        if technique == Technique.ETR and self.equalizer_length:
            return [self.num_taps + self.equalizer_length - 1]
        return list(self.prefilter_lengths)

    @property
    def output_dir(self):
        if self.output_path:
            return Path(self.output_path)
        return Path(settings.SIMULATION['OUTPUT_DIR'])


@dataclass
class RunResult:
    """Where a finished run left its files, and its summary."""
    output_dir: Path
    realizations_path: Path
    summary_path: Path
    manifest_path: Path
    summary: dict
    resumed: int = 0


class CheckStatus(models.TextChoices):
    """Outcome of one self-check or acceptance check."""
    PASS = 'pass', 'Passed'
    FAIL = 'fail', 'Failed'
    SKIP = 'skip', 'Not covered by the available data'


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str
    detail: str = ''

    @property
    def failed(self):
        return self.status == CheckStatus.FAIL
