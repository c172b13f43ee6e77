"""
Closed-form performance predictions, sum rate and Monte Carlo summaries.
"""
import math

import numpy as np

from core.exceptions import InsufficientDataError, InvalidArgumentError
from metrics.models import (
    PredictionBasis,
    SumRateResult,
    TheoreticalPrediction,
    mean_and_standard_error,
)

# Fields identifying one experiment cell, in summary-key order
CELL_FIELDS = ('technique', 'M', 'N', 'L_p', 'correlated', 'snr_db')

VALUE_FIELDS = ('P_s', 'P_isi', 'P_iui', 'errors', 'bits', 'rate')


def _check_positive(**values):
    for name, value in values.items():
        if not value > 0:
            raise InvalidArgumentError(f'{name} must be positive, got {value}')


def tr_signal_power_prediction(M, N, rho=1.0, gamma=1.0):
    """Average TR desired power M * rho * gamma / N"""
    _check_positive(M=M, N=N, rho=rho, gamma=gamma)
    return TheoreticalPrediction(
        signal_power=M * rho * gamma / N,
        basis=PredictionBasis.TR_MEAN,
        inputs={'M': M, 'N': N, 'rho': rho, 'gamma': gamma},
    )


def etr_signal_power_bound(M, N, rho=1.0, gamma=1.0):
    """The ETR desired power cannot exceed the TR average"""
    _check_positive(M=M, N=N, rho=rho, gamma=gamma)
    return TheoreticalPrediction(
        signal_power=M * rho * gamma / N,
        basis=PredictionBasis.ETR_BOUND,
        inputs={'M': M, 'N': N, 'rho': rho, 'gamma': gamma},
    )


def tr_interference_prediction(moments, M, N, rho=1.0, gamma=1.0):
    """
    Approximate TR ISI and IUI powers from a cross-antenna moment table.

    moments[m, m', l] = E[h_{m,n}(l) conj(h_{m',n}(l))], the same for every
    user. With S(d) = sum_{m,m',l} R(l) conj(R(l + d)),

        P_isi = rho / (M N gamma) * sum_{d != 0} S(d)
        P_iui = (N - 1) * rho / (M N gamma) * sum_d S(d)

    and sum_d S(d) collapses to sum_{m,m'} |sum_l R(l)|^2.
    """
    _check_positive(M=M, N=N, rho=rho, gamma=gamma)
    moments = np.asarray(moments, dtype=np.complex128)
    if moments.ndim != 3 or moments.shape[:2] != (M, M):
        raise InvalidArgumentError(
            f'moment table must be ({M}, {M}, L), got {moments.shape}'
        )
    all_lags = float(np.sum(np.abs(moments.sum(axis=2)) ** 2))
    zero_lag = float(np.sum(np.abs(moments) ** 2))
    scale = rho / (M * N * gamma)
    return scale * (all_lags - zero_lag), (N - 1) * scale * all_lags


def sum_rate(decomposition, sigma_z2):
    """
    Sum over users of log2(1 + P_s / (P_isi + P_iui + sigma_z^2)), with
    ISI and IUI treated as Gaussian noise.
    """
    _check_positive(sigma_z2=sigma_z2)
    sinr = decomposition.signal / (
        decomposition.isi + decomposition.iui + sigma_z2
    )
    return SumRateResult(rates=(float(np.sum(np.log2(1 + sinr))),))


def rate_sanity_cap(M, N, rho, gamma, sigma_z2):
    """N log2(1 + M rho gamma / (N sigma_z^2)), interference-free TR"""
    _check_positive(M=M, N=N, rho=rho, gamma=gamma, sigma_z2=sigma_z2)
    return N * math.log2(1 + M * rho * gamma / (N * sigma_z2))


def summary_key(cell):
    """Render a cell tuple as 'technique|M|N|L_p|correlated|snr'"""
    return '|'.join(str(value) for value in cell)


def aggregate(records, key_fields=CELL_FIELDS, value_fields=None):
    """
    Mean, standard error, count and sum of each value field per cell.

    Sums use math.fsum, so the summary does not depend on record order.
    Returns {cell tuple: {field: {'mean', 'standard_error', 'count',
    'sum'}}}.
    """
    grouped = {}
    fields = None
    for record in records:
        if fields is None:
            fields = set(record)
            if value_fields is None:
                value_fields = [f for f in VALUE_FIELDS if f in record]
        elif set(record) != fields:
            raise InvalidArgumentError(
                'records do not share the same fields'
            )
        cell = tuple(record[name] for name in key_fields)
        bucket = grouped.setdefault(cell, {name: [] for name in value_fields})
        for name in value_fields:
            bucket[name].append(float(record[name]))

    if not grouped:
        raise InsufficientDataError('no records to aggregate')

    summary = {}
    for cell in sorted(grouped, key=lambda c: tuple(map(str, c))):
        summary[cell] = {}
        for name, values in grouped[cell].items():
            mean, standard_error = mean_and_standard_error(values)
            summary[cell][name] = {
                'mean': mean,
                'standard_error': standard_error,
                'count': len(values),
                'sum': math.fsum(values),
            }
    return summary
