"""
Reference-value checks of a finished run's summary.

Each check looks up the cells it needs; a summary that does not cover
them reports the check as skipped rather than failed.
"""
import math

import numpy as np

from harness.models import CheckResult, CheckStatus
from prefilters.models import Technique

# Desk-scale reference values of the power components, in units of rho*Gamma
TR_POWERS = {
    2: (32.0, 0.15, 0.51),
    10: (6.4, 0.03, 0.9),
}
INTR_IUI = {60: 0.17, 90: 0.02, 120: 0.004}
ETR_ISI = {90: 0.002, 120: 0.0003}
ETR_IUI = 0.9


class _Missing(Exception):
    pass


def find(summary, **criteria):
    """Summary entries whose cell matches every criterion, lowest SNR first"""
    entries = [
        entry for entry in summary.values()
        if all(entry['cell'][k] == v for k, v in criteria.items())
    ]
    return sorted(entries, key=lambda e: e['cell']['snr_db'])


def _first(summary, **criteria):
    entries = find(summary, **criteria)
    if not entries:
        rendered = ', '.join(f'{k}={v}' for k, v in criteria.items())
        raise _Missing(rendered)
    return entries[0]


def _mean(entry, field):
    return entry[field]['mean']


def _relative_error(value, target):
    return abs(value - target) / target


def _within_factor(value, target, factor):
    return target / factor <= value <= target * factor


def _result(name, failures, detail):
    if failures:
        return CheckResult(name, CheckStatus.FAIL, '; '.join(failures))
    return CheckResult(name, CheckStatus.PASS, detail)


def check_tr_powers(summary, num_users):
    """TR power components at M = 64, uncorrelated"""
    entry = _first(
        summary, technique=Technique.TR, M=64, N=num_users,
        correlated=False,
    )
    failures = []
    for field, target, tolerance in zip(
        ('P_s', 'P_isi', 'P_iui'), TR_POWERS[num_users], (0.05, 0.25, 0.25)
    ):
        value = _mean(entry, field)
        if _relative_error(value, target) > tolerance:
            failures.append(
                f'{field} = {value:.4g}, expected {target} '
                f'within {tolerance:.0%}'
            )
    return failures, f'N={num_users} powers within tolerance'


def check_intr_iui_trend(summary):
    """INTR IUI against L_p at N = 10, uncorrelated"""
    values = []
    failures = []
    for length, target in INTR_IUI.items():
        entry = _first(
            summary, technique=Technique.INTR, M=64, N=10, L_p=length,
            correlated=False,
        )
        value = _mean(entry, 'P_iui')
        values.append(value)
        if not _within_factor(value, target, 2):
            failures.append(f'L_p={length}: P_iui {value:.3g} vs {target}')
    if not all(a > b for a, b in zip(values, values[1:])):
        failures.append(f'P_iui not strictly decreasing: {values}')
    return failures, f'P_iui {values}'


def check_etr_isi_trend(summary):
    """ETR ISI against L_p at N = 10, and its TR-like IUI"""
    values = []
    failures = []
    for length, target in ETR_ISI.items():
        entry = _first(
            summary, technique=Technique.ETR, M=64, N=10, L_p=length,
            correlated=False,
        )
        value = _mean(entry, 'P_isi')
        values.append(value)
        if not _within_factor(value, target, 2):
            failures.append(f'L_p={length}: P_isi {value:.3g} vs {target}')
        iui = _mean(entry, 'P_iui')
        if _relative_error(iui, ETR_IUI) > 0.25:
            failures.append(f'L_p={length}: P_iui {iui:.3g} vs {ETR_IUI}')
    if not all(a > b for a, b in zip(values, values[1:])):
        failures.append(f'P_isi not strictly decreasing: {values}')
    return failures, f'P_isi {values}'


def check_correlation_gap(summary):
    """Correlated channels raise TR IUI by at least three sigma"""
    correlated = _first(
        summary, technique=Technique.TR, M=64, N=10, correlated=True
    )
    uncorrelated = _first(
        summary, technique=Technique.TR, M=64, N=10, correlated=False
    )
    gap = _mean(correlated, 'P_iui') - _mean(uncorrelated, 'P_iui')
    sigma = math.hypot(
        correlated['P_iui']['standard_error'] or 0.0,
        uncorrelated['P_iui']['standard_error'] or 0.0,
    )
    detail = f'gap {gap:.4g}, sigma {sigma:.3g}'
    if not gap > 3 * sigma:
        return [f'P_iui gap below 3 sigma ({detail})'], detail
    return [], detail


def check_signal_scaling(summary):
    """Slope of TR P_s over M = 16, 32, 64 is 1/N at N = 5"""
    antennas = (16, 32, 64)
    powers = [
        _mean(_first(
            summary, technique=Technique.TR, M=m, N=5, correlated=False
        ), 'P_s')
        for m in antennas
    ]
    slope = np.polyfit(antennas, powers, 1)[0]
    detail = f'slope {slope:.4f}, expected {1 / 5}'
    if _relative_error(slope, 1 / 5) > 0.10:
        return [detail], detail
    return [], detail


def _ber(summary, technique, snr_db, **cell):
    entry = _first(
        summary, technique=technique, snr_db=snr_db, **cell
    )
    if entry['ber'] is None:
        raise _Missing(f'{technique} BER at {snr_db} dB')
    return entry['ber']


def check_ber_ordering(summary):
    """INTR beats TR at high SNR; TR and ETR share an IUI floor"""
    cell = {'M': 32, 'N': 5, 'correlated': True}
    high_snr = sorted({
        entry['cell']['snr_db']
        for entry in find(summary, technique=Technique.TR, **cell)
        if entry['cell']['snr_db'] >= 20
    })
    if not high_snr:
        raise _Missing('TR BER at 20 dB or more')

    failures = []
    for snr_db in high_snr:
        tr = _ber(summary, Technique.TR, snr_db, **cell)
        intr = _ber(summary, Technique.INTR, snr_db, L_p=120, **cell)
        etr = _ber(summary, Technique.ETR, snr_db, L_p=120, **cell)
        if not intr['high'] < tr['low']:
            failures.append(f'{snr_db} dB: INTR interval not below TR')
        if etr['high'] < tr['low'] or tr['high'] < etr['low']:
            failures.append(f'{snr_db} dB: TR and ETR intervals disjoint')
    if 20.0 in high_snr and 30.0 in high_snr:
        at_20 = _ber(summary, Technique.TR, 20.0, **cell)['value']
        at_30 = _ber(summary, Technique.TR, 30.0, **cell)['value']
        if not (at_20 > 0 and at_30 / at_20 > 0.5):
            failures.append(
                f'TR BER does not flatten: {at_20:.3g} -> {at_30:.3g}'
            )
    return failures, f'checked {high_snr} dB'


def check_sum_rate(summary):
    """INTR sum rate above TR everywhere, by 1.5x at the top SNR"""
    cell = {'M': 128, 'N': 30, 'correlated': True}
    tr_entries = find(summary, technique=Technique.TR, **cell)
    intr_entries = find(summary, technique=Technique.INTR, **cell)
    if not tr_entries or not intr_entries:
        raise _Missing('M=128 N=30 correlated rates')
    longest = max(entry['cell']['L_p'] for entry in intr_entries)
    intr_by_snr = {
        entry['cell']['snr_db']: _mean(entry, 'rate')
        for entry in intr_entries if entry['cell']['L_p'] == longest
    }

    failures = []
    for entry in tr_entries:
        snr_db = entry['cell']['snr_db']
        if snr_db not in intr_by_snr:
            raise _Missing(f'INTR rate at {snr_db} dB')
        tr_rate = _mean(entry, 'rate')
        if not intr_by_snr[snr_db] > tr_rate:
            failures.append(f'{snr_db} dB: INTR rate not above TR')
    top = tr_entries[-1]['cell']['snr_db']
    ratio = intr_by_snr[top] / _mean(tr_entries[-1], 'rate')
    if ratio < 1.5:
        failures.append(f'{top} dB: INTR/TR rate ratio {ratio:.2f} < 1.5')
    return failures, f'INTR/TR rate ratio {ratio:.2f} at {top} dB'


CHECKS = (
    ('tr_powers_n2', lambda s: check_tr_powers(s, 2)),
    ('tr_powers_n10', lambda s: check_tr_powers(s, 10)),
    ('intr_iui_trend', check_intr_iui_trend),
    ('etr_isi_trend', check_etr_isi_trend),
    ('correlation_gap', check_correlation_gap),
    ('signal_scaling', check_signal_scaling),
    ('ber_ordering', check_ber_ordering),
    ('sum_rate_ordering', check_sum_rate),
)


def run_acceptance(summary):
    """CheckResult of every reference check against one summary mapping"""
    results = []
    for name, check in CHECKS:
        try:
            failures, detail = check(summary)
        except _Missing as exc:
            results.append(
                CheckResult(name, CheckStatus.SKIP, f'no cell {exc}')
            )
            continue
        results.append(_result(name, failures, detail))
    return results
