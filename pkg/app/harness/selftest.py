"""
Fast invariant suite run by the selftest command.

Every check draws from a fixed seed, so a failing check fails the same way
on every machine.
"""
import logging
import shutil
import tempfile
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from chanmodel import estimators
from chanmodel.generator import generate_realization
from chanmodel.models import (
    SCENARIO_DEFAULTS,
    ArrayGeometry,
    ChannelSet,
    ScenarioParams,
)
from chanmodel.pdp import build_pdp
from dspcore import kernels
from harness import runner
from harness.config import load_preset
from harness.models import CheckResult, CheckStatus
from linksim.simulation import composite_response, power_decomposition
from prefilters import builders
from prefilters.models import Technique

logger = logging.getLogger(__name__)

NUM_INSTANCES = 100


def _random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _direct_convolution(a, b):
    out = np.zeros(a.size + b.size - 1, dtype=np.complex128)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _gram_schmidt_complement(B, v):
    """v minus its projection on the span of B's columns"""
    basis = []
    for column in B.T:
        w = column.astype(np.complex128)
        for q in basis:
            w = w - q * np.vdot(q, w)
        basis.append(w / np.linalg.norm(w))
    for q in basis:
        v = v - q * np.vdot(q, v)
    return v


def _check(name, errors, tolerance, unit=''):
    worst = max(errors)
    detail = f'worst {worst:.2e}{unit}, tolerance {tolerance:.0e}'
    status = CheckStatus.PASS if worst < tolerance else CheckStatus.FAIL
    return CheckResult(name, status, detail)


def check_kernels(seed=0):
    """Convolution, DFT, projector and LS against slow oracles"""
    rng = np.random.default_rng(seed)
    convolution, theorem, projector, least_squares = [], [], [], []
    for _ in range(NUM_INSTANCES):
        a = _random_complex(rng, rng.integers(1, 17))
        b = _random_complex(rng, rng.integers(1, 17))
        full = kernels.convolve(a, b)
        convolution.append(np.max(np.abs(full - _direct_convolution(a, b))))

        n = full.size
        theorem.append(np.max(np.abs(
            kernels.dft(full, n) - kernels.dft(a, n) * kernels.dft(b, n)
        )))

        B = _random_complex(rng, (8, 3))
        v = _random_complex(rng, 8)
        projector.append(np.max(np.abs(
            kernels.nullspace_project(B, v)
            - _gram_schmidt_complement(B, v)
        )))

        A = _random_complex(rng, (20, 5))
        y = _random_complex(rng, 20)
        gram = A.conj().T @ A
        normal = np.linalg.solve(gram, A.conj().T @ y)
        least_squares.append(np.max(np.abs(
            kernels.least_squares_solve(A, y) - normal
        )))

    return [
        _check('convolution_oracle', convolution, 1e-12),
        _check('convolution_theorem', theorem, 1e-10),
        _check('projector_oracle', projector, 1e-10),
        _check('least_squares_oracle', least_squares, 1e-8),
    ]


def check_channel_model(seed=0):
    """PDP normalization, delay spread, Nakagami m and spatial correlation"""
    results = []
    for name, (nakagami_m, rms_delay_spread) in SCENARIO_DEFAULTS.items():
        scenario = ScenarioParams.preset(name)
        pdp = build_pdp(scenario)
        total_error = abs(float(np.sum(pdp.taps)) - scenario.gamma)
        spread = pdp.rms_delay_spread(scenario.sample_period)
        spread_error = abs(spread - rms_delay_spread) / rms_delay_spread
        results.append(_check(f'pdp_total_{name}', [total_error], 1e-12))
        results.append(_check(
            f'pdp_delay_spread_{name}', [spread_error], 0.005, ' relative'
        ))

        array = ArrayGeometry.rectangular(8, 8)
        samples = np.concatenate([
            generate_realization(scenario, array, 16, False, seed, k)
            .taps[:, :, 0].ravel()
            for k in range(100)
        ])
        m_hat = estimators.estimate_nakagami_m(samples)
        results.append(_check(
            f'nakagami_m_{name}',
            [abs(m_hat - nakagami_m) / nakagami_m],
            0.10,
            ' relative',
        ))

    scenario = ScenarioParams.preset('CB', num_taps=30)
    array = ArrayGeometry.rectangular(4, 4)
    spacing = array.element_spacing
    correlated = estimators.estimate_spatial_correlation(
        [
            generate_realization(scenario, array, 2, True, seed, k)
            for k in range(300)
        ],
        pair_distances=[spacing, 2 * spacing, 3 * spacing],
    )
    values = [row[1] for row in correlated]
    decays = values[0] > values[1] > values[2]
    results.append(CheckResult(
        'spatial_correlation_decay',
        CheckStatus.PASS if decays else CheckStatus.FAIL,
        f'R_h over three spacings {np.round(values, 3).tolist()}',
    ))

    uncorrelated = estimators.estimate_spatial_correlation([
        generate_realization(scenario, array, 2, False, seed, k)
        for k in range(1000)
    ])
    results.append(_check(
        'spatial_correlation_uncorrelated',
        [abs(row[1]) for row in uncorrelated[1:]],
        0.1,
    ))
    return results


def check_prefilters(seed=0):
    """Unit energy, exact INTR nulling and the energy partition"""
    rng = np.random.default_rng(seed)
    energy, nulling, partition = [], [], []
    single_user_equal = True
    for _ in range(20):
        channels = ChannelSet(taps=_random_complex(rng, (8, 3, 8)))
        for technique in Technique.values:
            prefilters = builders.build_prefilter(technique, channels, 16)
            energy.append(abs(builders.prefilter_energy(prefilters) - 1))
            composite = composite_response(prefilters, channels)
            powers = power_decomposition(composite)
            partition.append(abs(
                float(np.sum(powers.total))
                - float(np.sum(np.abs(composite.q) ** 2))
            ))

        spectra = builders.intr_spectra(channels, 16)
        steering = kernels.dft(channels.taps, spectra.shape[2])
        inner = np.einsum('mif,mjf->ijf', spectra.conj(), steering)
        norms = np.linalg.norm(steering, axis=0)
        for user in range(3):
            for other in range(3):
                if other != user:
                    nulling.append(float(np.max(
                        np.abs(inner[user, other]) / norms[other]
                    )))

        single = ChannelSet(taps=_random_complex(rng, (8, 1, 8)))
        single_user_equal &= np.array_equal(
            builders.intr_prefilter(single, 8).taps,
            builders.tr_prefilter(single).taps,
        )

    return [
        _check('prefilter_unit_energy', energy, 1e-10),
        _check('intr_exact_nulling', nulling, 1e-10, ' relative'),
        _check('energy_partition', partition, 1e-10),
        CheckResult(
            'intr_single_user_is_tr',
            CheckStatus.PASS if single_user_equal else CheckStatus.FAIL,
            'bitwise comparison of 20 instances',
        ),
    ]


def check_smoke_run():
    """The smoke preset is deterministic and resumes to the same result"""
    config = load_preset('smoke')
    with tempfile.TemporaryDirectory() as tmp:
        first = replace(config, output_path=str(Path(tmp) / 'first'))
        second = replace(config, output_path=str(Path(tmp) / 'second'))
        started = time.perf_counter()
        result = runner.run_experiment(first)
        elapsed = time.perf_counter() - started
        runner.run_experiment(second)

        # Pretend the second run was killed half-way, then resume it
        resumed_dir = Path(tmp) / 'resumed'
        shutil.copytree(second.output_dir, resumed_dir)
        manifest = resumed_dir / runner.MANIFEST_FILE
        lines = manifest.read_text().splitlines()
        done = [line for line in lines if line.startswith('done ')]
        manifest.write_text('\n'.join(
            [lines[0], f'status {runner.STATUS_RUNNING}']
            + done[:len(done) // 2]
        ) + '\n')
        runner.run_experiment(
            replace(config, output_path=str(resumed_dir)), resume=True
        )

        csv_bytes = [
            (directory / runner.REALIZATIONS_FILE).read_bytes()
            for directory in (first.output_dir, second.output_dir,
                              resumed_dir)
        ]
        summaries = [
            (directory / runner.SUMMARY_FILE).read_bytes()
            for directory in (first.output_dir, resumed_dir)
        ]

    identical = csv_bytes[0] == csv_bytes[1]
    resumes = csv_bytes[0] == csv_bytes[2] and summaries[0] == summaries[1]
    detail = f'{len(result.summary)} cells in {elapsed:.1f} s'
    return [
        CheckResult(
            'smoke_determinism',
            CheckStatus.PASS if identical else CheckStatus.FAIL,
            detail,
        ),
        CheckResult(
            'smoke_resume',
            CheckStatus.PASS if resumes else CheckStatus.FAIL,
            'resumed run matches the uninterrupted one',
        ),
    ]


SUITES = (
    ('kernels', check_kernels),
    ('channel model', check_channel_model),
    ('pre-filters', check_prefilters),
    ('smoke run', check_smoke_run),
)


def run_selftest(suites=None):
    """CheckResult of every invariant check of the selected suites"""
    results = []
    for name, suite in SUITES:
        if suites is not None and name not in suites:
            continue
        started = time.perf_counter()
        results.extend(suite())
        logger.info(
            'Self-test suite %s done in %.1f s',
            name, time.perf_counter() - started,
        )
    return results
