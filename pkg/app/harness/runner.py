"""
Seeded experiment execution.

A run is a list of realization tasks, one per (cell, realization index).
Tasks are independent; a worker pool maps them in order and the parent
process appends each task's CSV rows and a MANIFEST line as soon as the
task is done, so a killed run can be resumed from the last completed task.
"""
import csv
import hashlib
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import django
import numpy as np

from chanmodel.generator import (
    RoomGeometry,
    derive_seed,
    generate_realization,
)
from chanmodel.storage import load_channel_set
from core.exceptions import ConfigurationError, FormatError
from harness.cache import channel_path
from harness.config import dump_config
from harness.models import RunResult
from linksim.models import BerResult
from linksim.simulation import (
    composite_response,
    noise_variance,
    power_decomposition,
    simulate_composite_ber,
)
from metrics.analysis import CELL_FIELDS, aggregate, sum_rate, summary_key
from prefilters.builders import build_prefilter
from prefilters.models import Technique

logger = logging.getLogger(__name__)

CSV_FIELDS = (
    'technique', 'scenario', 'M', 'N', 'L', 'L_p', 'correlated', 'snr_db',
    'realization', 'P_s', 'P_isi', 'P_iui', 'errors', 'bits', 'rate',
)
INT_FIELDS = ('M', 'N', 'L', 'L_p', 'realization', 'errors', 'bits')
FLOAT_FIELDS = ('snr_db', 'P_s', 'P_isi', 'P_iui', 'rate')

REALIZATIONS_FILE = 'realizations.csv'
SUMMARY_FILE = 'summary.json'
MANIFEST_FILE = 'MANIFEST'
CONFIG_FILE = 'config.yaml'

STATUS_RUNNING = 'running'
STATUS_COMPLETE = 'complete'
STATUS_INCOMPLETE = 'incomplete'


@dataclass(frozen=True)
class RealizationTask:
    """Everything a worker needs to process one channel realization."""
    config: object
    scenario: object
    geometry: RoomGeometry
    array: object
    num_users: int
    correlated: bool
    index: int
    channel_file: Path = None

    @property
    def tag(self):
        return task_tag(
            self.array.num_elements, self.num_users, self.correlated,
            self.index,
        )


def task_tag(num_antennas, num_users, correlated, index):
    """Identifier of a task in the MANIFEST"""
    flag = 'corr' if correlated else 'uncorr'
    return f'M{num_antennas}_N{num_users}_{flag}_r{index}'


def config_digest(config):
    """Hash of everything in a config that changes the results"""
    canonical = replace(config, output_path='', workers=1)
    return hashlib.sha256(dump_config(canonical).encode()).hexdigest()


def _check_cached(task, channels):
    """Refuse a cached realization drawn for another run"""
    seed = derive_seed(
        task.config.master_seed, task.index, task.array.num_elements,
        task.num_users, int(task.correlated),
    )
    mismatches = [
        name for name, found, wanted in (
            ('seed', channels.seed, seed),
            ('scenario', channels.scenario.as_dict(),
             task.scenario.as_dict()),
            ('array', channels.array, task.array),
            ('correlated', channels.correlated, task.correlated),
        )
        if found != wanted
    ]
    if mismatches:
        raise ConfigurationError(
            f'{task.channel_file}: cached for a different run '
            f'({", ".join(mismatches)} differ)'
        )


def _load_or_generate(task):
    scenario = task.scenario
    if task.channel_file is None:
        return generate_realization(
            scenario,
            task.array,
            task.num_users,
            task.correlated,
            task.config.master_seed,
            task.index,
            geometry=task.geometry,
        )
    if not task.channel_file.is_file():
        raise FormatError(f'{task.channel_file}: not in the channel cache')
    channels = load_channel_set(
        task.channel_file,
        {
            'num_antennas': task.array.num_elements,
            'num_users': task.num_users,
            'num_taps': scenario.num_taps,
            'scenario': scenario.name,
        },
    )
    _check_cached(task, channels)
    return channels


def run_realization(task):
    """CSV rows of every technique, L_p and SNR point of one realization"""
    config = task.config
    started = time.perf_counter()
    channels = _load_or_generate(task)
    num_antennas = task.array.num_elements
    rows = []

    for technique in config.techniques:
        technique_code = Technique.values.index(technique)
        for prefilter_length in config.lengths_for(technique):
            prefilters = build_prefilter(
                technique,
                channels,
                prefilter_length,
                config.equalizer_length,
                config.reg_epsilon,
            )
            composite = composite_response(prefilters, channels)
            powers = power_decomposition(composite, config.rho)
            signal, isi, iui = powers.normalized(config.gamma).user_means()

            for snr_index, snr_db in enumerate(config.snr_grid_db):
                sigma_z2 = noise_variance(snr_db, config.rho, config.gamma)
                errors = bits = 0
                if config.num_symbols:
                    seed = derive_seed(
                        config.master_seed, task.index, num_antennas,
                        task.num_users, int(task.correlated),
                        technique_code, prefilter_length, snr_index,
                    )
                    ber = simulate_composite_ber(
                        composite,
                        snr_db,
                        config.num_symbols,
                        np.random.default_rng(seed),
                        rho=config.rho,
                        gamma=config.gamma,
                        streaming=config.streaming,
                    )
                    errors, bits = ber.total_errors, ber.total_bits
                rows.append({
                    'technique': str(technique),
                    'scenario': str(config.scenario),
                    'M': num_antennas,
                    'N': task.num_users,
                    'L': config.num_taps,
                    'L_p': prefilter_length,
                    'correlated': bool(task.correlated),
                    'snr_db': float(snr_db),
                    'realization': task.index,
                    'P_s': signal,
                    'P_isi': isi,
                    'P_iui': iui,
                    'errors': errors,
                    'bits': bits,
                    'rate': sum_rate(powers, sigma_z2).mean,
                })

    logger.debug(
        '%s done in %.3f s', task.tag, time.perf_counter() - started
    )
    return rows


def _init_worker():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'app.settings')
    django.setup()


def build_tasks(config, channel_dir=None, geometry=None):
    """Realization tasks of a config in their canonical order"""
    geometry = geometry or RoomGeometry.from_settings()
    scenario = config.scenario_params()
    tasks = []
    for array, num_users, correlated in config.cells():
        for index in range(config.num_realizations):
            channel_file = None
            if channel_dir is not None:
                channel_file = channel_path(
                    channel_dir, scenario.name, array, num_users,
                    correlated, index,
                )
            tasks.append(RealizationTask(
                config=config,
                scenario=scenario,
                geometry=geometry,
                array=array,
                num_users=num_users,
                correlated=bool(correlated),
                index=index,
                channel_file=channel_file,
            ))
    return tasks


def format_rows(rows, header=False):
    """CSV text of rows; floats keep their shortest exact repr"""
    buffer = io.StringIO()
    writer = csv.DictWriter(
        buffer, fieldnames=CSV_FIELDS, lineterminator='\n'
    )
    if header:
        writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


def parse_row(row):
    """Typed record of one CSV row"""
    record = dict(row)
    try:
        for name in INT_FIELDS:
            record[name] = int(record[name])
        for name in FLOAT_FIELDS:
            record[name] = float(record[name])
    except (TypeError, ValueError) as exc:
        raise FormatError(
            f'row of realization {record.get("realization")} is incomplete'
        ) from exc
    record['correlated'] = record['correlated'] == 'True'
    return record


def read_realizations(path):
    """Typed records of a per-realization CSV"""
    with open(path, newline='') as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_FIELDS:
            raise FormatError(f'{path}: unexpected columns')
        return [parse_row(row) for row in reader]


def drop_partial_row(path):
    """
    Cut a CSV back to its last complete line.

    A run killed while appending can leave half a row behind; the
    realization it belonged to is not in the MANIFEST yet, so it is rerun.
    Returns the number of bytes removed.
    """
    with open(path, 'rb+') as fh:
        data = fh.read()
        keep = data.rfind(b'\n') + 1
        if keep < len(data):
            fh.truncate(keep)
    return len(data) - keep


def read_manifest(path):
    """
    Parse a MANIFEST into (digest, status, completed task tags).

    The status is the last status line, so a run killed mid-way still
    reads as running.
    """
    digest, status, done = None, None, []
    for line in Path(path).read_text().splitlines():
        key, _, value = line.partition(' ')
        if key == 'experiment':
            digest = value
        elif key == 'status':
            status = value
        elif key == 'done':
            done.append(value)
    if digest is None or status is None:
        raise FormatError(f'{path}: not a run manifest')
    return digest, status, done


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def summarize(records):
    """
    Summary mapping keyed by 'technique|M|N|L_p|correlated|snr'.

    Each entry carries the cell fields, the mean/SE/count/sum of every
    value field and the pooled BER with its 95% Wilson interval.
    """
    summary = {}
    for cell, stats in aggregate(records).items():
        entry = {'cell': dict(zip(CELL_FIELDS, cell))}
        for name, values in stats.items():
            entry[name] = {k: _json_value(v) for k, v in values.items()}
        errors = int(round(stats['errors']['sum']))
        bits = int(round(stats['bits']['sum']))
        if bits:
            pooled = BerResult(snr_db=cell[-1], errors=[errors], bits=bits)
            low, high = pooled.wilson_interval()
            entry['ber'] = {'value': pooled.ber, 'low': low, 'high': high}
        else:
            entry['ber'] = None
        summary[summary_key(cell)] = entry
    return summary


def write_summary(summary, path):
    Path(path).write_text(json.dumps(summary, indent=2, allow_nan=False))
    return path


def load_summary(path):
    """Read a summary JSON written by run_experiment"""
    try:
        return json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise FormatError(f'{path}: unreadable summary') from exc


def _resume_state(out, digest):
    """Completed task tags and their rows from an earlier run"""
    manifest = out / MANIFEST_FILE
    if not manifest.is_file():
        logger.warning('Nothing to resume in %s, starting over', out)
        return set(), []
    found, status, done = read_manifest(manifest)
    if found != digest:
        raise ConfigurationError(
            f'cannot resume {out}: the config changed since the first run'
        )
    done = set(done)
    rows = []
    if (out / REALIZATIONS_FILE).is_file():
        dropped = drop_partial_row(out / REALIZATIONS_FILE)
        if dropped:
            logger.warning(
                'Dropped %d bytes of an unfinished row from %s',
                dropped, REALIZATIONS_FILE,
            )
        rows = [
            row for row in read_realizations(out / REALIZATIONS_FILE)
            if task_tag(row['M'], row['N'], row['correlated'],
                        row['realization']) in done
        ]
    logger.warning(
        'Resuming %s (%s): skipping %d completed realizations',
        out, status, len(done),
    )
    return done, rows


def run_experiment(config, resume=False, channel_dir=None, geometry=None):
    """
    Run every realization task of a config and write its result files.

    Writes realizations.csv, summary.json, MANIFEST and a config.yaml copy
    into config.output_dir. On any error the MANIFEST is closed with an
    incomplete status before the error propagates.
    """
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    digest = config_digest(config)
    tasks = build_tasks(config, channel_dir, geometry)

    done, kept_rows = set(), []
    if resume:
        done, kept_rows = _resume_state(out, digest)
    pending = [task for task in tasks if task.tag not in done]

    (out / CONFIG_FILE).write_text(dump_config(config))
    realizations_path = out / REALIZATIONS_FILE
    manifest_path = out / MANIFEST_FILE
    realizations_path.write_text(format_rows(kept_rows, header=True))
    manifest_path.write_text(
        f'experiment {digest}\nstatus {STATUS_RUNNING}\n'
        + ''.join(f'done {tag}\n' for tag in sorted(done))
    )

    logger.info(
        'Running %s: %d realization tasks (%d pending) on %d worker(s)',
        config.scenario, len(tasks), len(pending), config.workers,
    )
    executor = None
    try:
        if config.workers > 1 and len(pending) > 1:
            executor = ProcessPoolExecutor(
                max_workers=config.workers, initializer=_init_worker
            )
            results = executor.map(run_realization, pending)
        else:
            results = map(run_realization, pending)

        with open(realizations_path, 'a', newline='') as csv_fh, \
                open(manifest_path, 'a') as manifest_fh:
            for count, (task, rows) in enumerate(zip(pending, results), 1):
                csv_fh.write(format_rows(rows))
                csv_fh.flush()
                manifest_fh.write(f'done {task.tag}\n')
                manifest_fh.flush()
                if count % max(1, len(pending) // 10) == 0:
                    logger.info('%d/%d realizations done', count,
                                len(pending))
    except BaseException:
        with open(manifest_path, 'a') as manifest_fh:
            manifest_fh.write(f'status {STATUS_INCOMPLETE}\n')
        logger.error('Run in %s stopped before completion', out)
        raise
    finally:
        if executor is not None:
            executor.shutdown(cancel_futures=True)

    summary = summarize(read_realizations(realizations_path))
    summary_path = write_summary(summary, out / SUMMARY_FILE)
    with open(manifest_path, 'a') as manifest_fh:
        manifest_fh.write(f'status {STATUS_COMPLETE}\n')
    logger.info('Run complete: %d cells summarized in %s',
                len(summary), summary_path)

    return RunResult(
        output_dir=out,
        realizations_path=realizations_path,
        summary_path=summary_path,
        manifest_path=manifest_path,
        summary=summary,
        resumed=len(done),
    )
