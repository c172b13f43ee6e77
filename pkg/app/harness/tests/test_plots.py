"""
Unit Test Suite for plot data and reference checks on summaries.
"""
import csv
import json
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from core.exceptions import CoverageError, InvalidArgumentError
from harness import plots
from harness.acceptance import run_acceptance
from harness.models import CheckStatus
from metrics.analysis import summary_key


def create_entry(technique='TR', M=64, N=2, L_p=60, correlated=False,
                 snr_db=20.0, ber=None, **means):
    """One summary entry with the given field means"""
    cell = {
        'technique': technique, 'M': M, 'N': N, 'L_p': L_p,
        'correlated': correlated, 'snr_db': snr_db,
    }
    entry = {'cell': cell, 'ber': None}
    for field in ('P_s', 'P_isi', 'P_iui', 'rate'):
        entry[field] = {
            'mean': means.get(field, 0.0),
            'standard_error': means.get(f'{field}_se', 0.001),
            'count': 100,
            'sum': 100 * means.get(field, 0.0),
        }
    if ber is not None:
        value, low, high = ber
        entry['ber'] = {'value': value, 'low': low, 'high': high}
    return entry


def create_summary(*entries):
    return {
        summary_key(tuple(entry['cell'].values())): entry
        for entry in entries
    }


class PlotRowsTests(SimpleTestCase):
    """Test plot_rows and emit_plot_data"""

    def test_fig5b_columns(self):
        """Test the IUI sweep gives (series, L_p, P_iui, SE) rows"""
        summary = create_summary(
            create_entry('INTR', N=10, L_p=60, P_iui=0.17),
            create_entry('INTR', N=10, L_p=90, P_iui=0.02),
            create_entry('INTR', N=10, L_p=90, P_iui=0.02, snr_db=30.0),
            create_entry('TR', N=10, L_p=60, P_iui=0.9),
        )

        rows = plots.plot_rows(summary, 'fig5b')

        self.assertEqual(
            plots.figure_header(plots.FIGURES['fig5b']),
            ('series', 'L_p [samples]', 'P_iui [rho*Gamma]',
             'standard_error'),
        )
        self.assertEqual([row[1:3] for row in rows], [(60, 0.17), (90, 0.02)])
        self.assertTrue(rows[0][0].startswith('technique=INTR'))

    def test_fig6_series_per_technique_and_correlation(self):
        """Test BER rows carry the Wilson interval"""
        entries = [
            create_entry(t, M=32, N=5, L_p=120, correlated=c, snr_db=s,
                         ber=(0.01, 0.009, 0.011))
            for t in ('TR', 'INTR')
            for c in (False, True)
            for s in (0.0, 10.0)
        ]

        rows = plots.plot_rows(create_summary(*entries), 'fig6')

        self.assertEqual(len(rows), 8)
        self.assertEqual(len({row[0] for row in rows}), 4)
        self.assertEqual(rows[0][1:], (0.0, 0.01, 0.009, 0.011))

    def test_missing_cell_raises_coverage_error(self):
        """Test a series without every x value is reported"""
        summary = create_summary(
            create_entry('ETR', N=10, L_p=90),
            create_entry('ETR', N=10, L_p=120),
            create_entry('INTR', N=10, L_p=90),
        )

        with self.assertRaises(CoverageError) as context:
            plots.plot_rows(summary, 'fig5a')

        self.assertEqual(len(context.exception.missing), 1)
        self.assertIn('L_p=120', context.exception.missing[0])
        self.assertIn('technique=INTR', context.exception.missing[0])

    def test_no_ber_data_raises_coverage_error(self):
        """Test a power-only run cannot feed a BER figure"""
        summary = create_summary(create_entry('TR'))

        with self.assertRaises(CoverageError):
            plots.plot_rows(summary, 'fig7a')

    def test_unknown_figure_raises_error(self):
        """Test figure ids are checked"""
        with self.assertRaises(InvalidArgumentError):
            plots.plot_rows(create_summary(create_entry()), 'fig9')

    def test_emit_merges_summary_files(self):
        """Test two summary files feed one fig8 CSV"""
        with tempfile.TemporaryDirectory() as tmp:
            paths = []
            for name, M, rate in (('a', 64, 50.0), ('b', 128, 80.0)):
                path = Path(tmp) / f'{name}.json'
                path.write_text(json.dumps(create_summary(
                    create_entry('INTR', M=M, N=30, L_p=120, rate=rate)
                )))
                paths.append(path)

            output = plots.emit_plot_data(
                paths, 'fig8', Path(tmp) / 'out' / 'fig8.csv'
            )
            with open(output, newline='') as fh:
                table = list(csv.reader(fh))

        self.assertEqual(table[0][1:3], ['snr [dB]', 'sum rate [bit/s/Hz]'])
        self.assertEqual([row[2] for row in table[1:]], ['50.0', '80.0'])


class AcceptanceTests(SimpleTestCase):
    """Test run_acceptance"""

    def results_by_name(self, summary):
        return {r.name: r for r in run_acceptance(summary)}

    def test_empty_summary_skips_everything(self):
        """Test checks without their cells are skipped, not failed"""
        results = self.results_by_name({})

        self.assertTrue(
            all(r.status == CheckStatus.SKIP for r in results.values())
        )

    def test_tr_powers_pass_and_fail(self):
        """Test the N = 2 tolerances on P_s, P_isi and P_iui"""
        good = create_summary(
            create_entry(P_s=31.0, P_isi=0.17, P_iui=0.5)
        )
        bad = create_summary(
            create_entry(P_s=28.0, P_isi=0.17, P_iui=0.5)
        )

        self.assertEqual(
            self.results_by_name(good)['tr_powers_n2'].status,
            CheckStatus.PASS,
        )
        result = self.results_by_name(bad)['tr_powers_n2']
        self.assertTrue(result.failed)
        self.assertIn('P_s', result.detail)

    def test_intr_trend_must_decrease(self):
        """Test the INTR IUI values must fall with L_p"""
        summary = create_summary(*[
            create_entry('INTR', N=10, L_p=length, P_iui=value)
            for length, value in ((60, 0.15), (90, 0.02), (120, 0.03))
        ])

        result = self.results_by_name(summary)['intr_iui_trend']

        self.assertTrue(result.failed)
        self.assertIn('decreasing', result.detail)

    def test_correlation_gap(self):
        """Test a 1.48 vs 0.9 IUI gap with small errors passes"""
        summary = create_summary(
            create_entry(N=10, correlated=True, P_iui=1.48, P_iui_se=0.05),
            create_entry(N=10, correlated=False, P_iui=0.9, P_iui_se=0.01),
        )

        self.assertEqual(
            self.results_by_name(summary)['correlation_gap'].status,
            CheckStatus.PASS,
        )

    def test_signal_scaling(self):
        """Test P_s = M / 5 gives slope 1/5"""
        summary = create_summary(*[
            create_entry(M=m, N=5, P_s=m / 5) for m in (16, 32, 64)
        ])

        self.assertEqual(
            self.results_by_name(summary)['signal_scaling'].status,
            CheckStatus.PASS,
        )

    def test_ber_ordering(self):
        """Test INTR below TR and TR overlapping ETR at 20 and 30 dB"""
        entries = []
        for snr_db, tr in ((20.0, 0.020), (30.0, 0.015)):
            cell = {'M': 32, 'N': 5, 'correlated': True, 'snr_db': snr_db}
            entries += [
                create_entry('TR', L_p=60, ber=(tr, tr - 0.001, tr + 0.001),
                             **cell),
                create_entry('ETR', L_p=120,
                             ber=(tr, tr - 0.0012, tr + 0.0008), **cell),
                create_entry('INTR', L_p=120, ber=(1e-4, 5e-5, 2e-4),
                             **cell),
            ]

        self.assertEqual(
            self.results_by_name(create_summary(*entries))[
                'ber_ordering'
            ].status,
            CheckStatus.PASS,
        )

    def test_sum_rate_ratio(self):
        """Test INTR must reach 1.5 times the TR rate at the top SNR"""
        entries = []
        for snr_db, tr, intr in ((0.0, 10.0, 12.0), (40.0, 40.0, 50.0)):
            cell = {'M': 128, 'N': 30, 'correlated': True, 'snr_db': snr_db}
            entries += [
                create_entry('TR', L_p=60, rate=tr, **cell),
                create_entry('INTR', L_p=120, rate=intr, **cell),
            ]

        result = self.results_by_name(create_summary(*entries))[
            'sum_rate_ordering'
        ]

        self.assertTrue(result.failed)
        self.assertIn('1.25', result.detail)
