"""
Plot-ready CSV tables built from run summaries.
"""
import csv
import logging
from dataclasses import dataclass
from pathlib import Path

from core.exceptions import CoverageError, InvalidArgumentError
from harness.runner import load_summary
from metrics.analysis import CELL_FIELDS
from prefilters.models import Technique

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FigureSpec:
    """Axes of one figure and the cells it is drawn from."""
    x: str
    quantity: str
    x_label: str
    y_label: str
    techniques: tuple = tuple(Technique.values)
    # Received powers do not depend on the SNR point
    snr_independent: bool = False


FIGURES = {
    'fig5a': FigureSpec(
        x='L_p',
        quantity='P_isi',
        x_label='L_p [samples]',
        y_label='P_isi [rho*Gamma]',
        techniques=(Technique.ETR, Technique.INTR),
        snr_independent=True,
    ),
    'fig5b': FigureSpec(
        x='L_p',
        quantity='P_iui',
        x_label='L_p [samples]',
        y_label='P_iui [rho*Gamma]',
        techniques=(Technique.ETR, Technique.INTR),
        snr_independent=True,
    ),
    'fig6': FigureSpec(
        x='snr_db', quantity='ber', x_label='snr [dB]', y_label='ber'
    ),
    'fig7a': FigureSpec(
        x='M', quantity='ber', x_label='M [antennas]', y_label='ber'
    ),
    'fig7b': FigureSpec(
        x='N', quantity='ber', x_label='N [users]', y_label='ber'
    ),
    'fig8': FigureSpec(
        x='snr_db',
        quantity='rate',
        x_label='snr [dB]',
        y_label='sum rate [bit/s/Hz]',
    ),
}


def merge_summaries(summaries):
    """One summary mapping from paths or already-loaded mappings"""
    merged = {}
    for summary in summaries:
        if not isinstance(summary, dict):
            summary = load_summary(summary)
        merged.update(summary)
    return merged


def _series_fields(figure):
    skip = {figure.x}
    if figure.snr_independent:
        skip.add('snr_db')
    return [name for name in CELL_FIELDS if name not in skip]


def _label(fields, values):
    return ' '.join(f'{name}={value}' for name, value in zip(fields, values))


def _point(figure, entry):
    """(y, extra columns) of one summary entry"""
    if figure.quantity == 'ber':
        ber = entry['ber']
        return ber['value'], (ber['low'], ber['high'])
    stats = entry[figure.quantity]
    return stats['mean'], (stats['standard_error'],)


def figure_header(figure):
    extra = (
        ('ber_low', 'ber_high') if figure.quantity == 'ber'
        else ('standard_error',)
    )
    return ('series', figure.x_label, figure.y_label) + extra


def plot_rows(summary, figure_id):
    """
    Rows (series, x, y, ...) of one figure, sorted by series then x.

    Every series must have a point at every x value seen in the figure;
    otherwise CoverageError lists the absent cells.
    """
    try:
        figure = FIGURES[figure_id]
    except KeyError as exc:
        raise InvalidArgumentError(
            f'unknown figure {figure_id!r}; '
            f'expected one of {", ".join(FIGURES)}'
        ) from exc

    entries = [
        entry for entry in summary.values()
        if entry['cell']['technique'] in figure.techniques
    ]
    if figure.quantity == 'ber':
        entries = [entry for entry in entries if entry['ber'] is not None]
    if not entries:
        raise CoverageError(
            f'{figure_id}: no {figure.quantity} data for '
            f'{"/".join(figure.techniques)}',
            missing=[f'{t}|*' for t in figure.techniques],
        )

    fields = _series_fields(figure)
    grid = {}
    for entry in sorted(entries, key=lambda e: e['cell']['snr_db']):
        cell = entry['cell']
        series = tuple(cell[name] for name in fields)
        # Keep the first (lowest SNR) entry of SNR-independent quantities
        grid.setdefault(series, {}).setdefault(cell[figure.x], entry)

    xs = sorted({x for points in grid.values() for x in points})
    missing = [
        f'{_label(fields, series)} {figure.x}={x}'
        for series, points in grid.items()
        for x in xs if x not in points
    ]
    if missing:
        raise CoverageError(
            f'{figure_id}: {len(missing)} cells missing: '
            + '; '.join(missing),
            missing=missing,
        )

    rows = []
    for series in sorted(grid):
        label = _label(fields, series)
        for x in xs:
            y, extra = _point(figure, grid[series][x])
            rows.append((label, x, y) + extra)
    return rows


def emit_plot_data(summaries, figure_id, output):
    """Write the plot CSV of one figure; returns its path"""
    rows = plot_rows(merge_summaries(summaries), figure_id)
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    with open(output, 'w', newline='') as fh:
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(figure_header(FIGURES[figure_id]))
        writer.writerows(rows)
    logger.info('Wrote %d %s points to %s', len(rows), figure_id, output)
    return output
