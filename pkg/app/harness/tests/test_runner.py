"""
Unit Test Suite for experiment runs, resume and the channel cache.
"""
import json
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

from django.test import SimpleTestCase

from chanmodel.models import ArrayGeometry
from core.exceptions import (
    ConfigurationError,
    FormatError,
    HeaderMismatchError,
)
from harness import cache, runner
from harness.config import config_from_data
from harness.tests.test_config import create_config_data


def create_config(output_path, **sections):
    config = config_from_data(create_config_data(**sections))
    return replace(config, output_path=str(output_path))


class RunExperimentTests(SimpleTestCase):
    """Test run_experiment"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_writes_result_files(self):
        """Test CSV, summary, MANIFEST and config copy are written"""
        config = create_config(
            self.root / 'run', link={'snr_grid_db': [0, 20]}
        )

        result = runner.run_experiment(config)

        records = runner.read_realizations(result.realizations_path)
        # 2 realizations x (TR + ETR + INTR) x 2 SNR points
        self.assertEqual(len(records), 12)
        self.assertEqual(
            result.realizations_path.read_text().splitlines()[0],
            ','.join(runner.CSV_FIELDS),
        )
        self.assertEqual({r['technique'] for r in records},
                         {'TR', 'ETR', 'INTR'})
        self.assertEqual({r['bits'] for r in records}, {2000})
        self.assertEqual(
            {r['L_p'] for r in records if r['technique'] == 'TR'}, {8}
        )
        self.assertTrue((result.output_dir / runner.CONFIG_FILE).is_file())

        summary = json.loads(result.summary_path.read_text())
        self.assertEqual(summary, result.summary)
        self.assertIn('INTR|4|2|12|False|20.0', summary)
        entry = summary['INTR|4|2|12|False|20.0']
        self.assertEqual(entry['P_s']['count'], 2)
        self.assertLessEqual(entry['ber']['low'], entry['ber']['value'])

        _, status, done = runner.read_manifest(result.manifest_path)
        self.assertEqual(status, runner.STATUS_COMPLETE)
        self.assertEqual(
            done, ['M4_N2_uncorr_r0', 'M4_N2_uncorr_r1']
        )

    def test_powers_do_not_depend_on_snr(self):
        """Test the power columns repeat across SNR points"""
        config = create_config(
            self.root / 'run',
            link={'snr_grid_db': [0, 20], 'num_symbols': 0},
        )

        records = runner.read_realizations(
            runner.run_experiment(config).realizations_path
        )

        low, high = records[0], records[1]
        self.assertEqual(low['snr_db'], 0.0)
        self.assertEqual(high['snr_db'], 20.0)
        self.assertEqual(low['P_iui'], high['P_iui'])
        self.assertGreater(high['rate'], low['rate'])
        self.assertEqual(low['bits'], 0)
        self.assertIsNone(
            runner.summarize(records)['TR|4|2|8|False|0.0']['ber']
        )

    def test_fixed_equalizer_rows_carry_real_length(self):
        """Test ETR rows with a set L_E are labelled L + L_E - 1"""
        config = create_config(
            self.root / 'run',
            prefilter={'techniques': ['ETR'], 'equalizer_length': 3},
            link={'num_symbols': 0},
        )

        records = runner.read_realizations(
            runner.run_experiment(config).realizations_path
        )

        self.assertEqual({r['L_p'] for r in records}, {10})

    def test_same_seed_gives_identical_csv(self):
        """Test two runs of one config write byte-identical CSVs"""
        first = runner.run_experiment(create_config(self.root / 'a'))
        second = runner.run_experiment(create_config(self.root / 'b'))

        self.assertEqual(
            first.realizations_path.read_bytes(),
            second.realizations_path.read_bytes(),
        )

    def test_other_seed_gives_other_results(self):
        """Test the master seed reaches the channel draws"""
        first = runner.run_experiment(create_config(self.root / 'a'))
        second = runner.run_experiment(
            create_config(self.root / 'b', run={'master_seed': 4})
        )

        self.assertNotEqual(
            first.realizations_path.read_bytes(),
            second.realizations_path.read_bytes(),
        )

    def test_worker_pool_matches_serial_run(self):
        """Test two worker processes write the serial CSV"""
        serial = runner.run_experiment(create_config(self.root / 'a'))
        pooled = runner.run_experiment(
            create_config(self.root / 'b', run={'workers': 2})
        )

        self.assertEqual(
            serial.realizations_path.read_bytes(),
            pooled.realizations_path.read_bytes(),
        )

    def test_resume_matches_uninterrupted_run(self):
        """Test a run killed after one realization resumes identically"""
        config = create_config(
            self.root / 'full', run={'num_realizations': 3}
        )
        full = runner.run_experiment(config)

        # Keep the rows but forget the last two completed realizations
        killed = replace(config, output_path=str(self.root / 'killed'))
        runner.run_experiment(killed)
        manifest = killed.output_dir / runner.MANIFEST_FILE
        lines = manifest.read_text().splitlines()
        manifest.write_text('\n'.join(lines[:3]) + '\n')

        resumed = runner.run_experiment(killed, resume=True)

        self.assertEqual(resumed.resumed, 1)
        self.assertEqual(
            full.realizations_path.read_bytes(),
            resumed.realizations_path.read_bytes(),
        )
        self.assertEqual(
            full.summary_path.read_bytes(), resumed.summary_path.read_bytes()
        )

    def test_resume_after_half_written_row(self):
        """Test a run killed mid-row resumes into the uninterrupted CSV"""
        config = create_config(
            self.root / 'full', run={'num_realizations': 3}
        )
        full = runner.run_experiment(config)

        killed = replace(config, output_path=str(self.root / 'killed'))
        runner.run_experiment(killed)
        manifest = killed.output_dir / runner.MANIFEST_FILE
        lines = manifest.read_text().splitlines()
        manifest.write_text('\n'.join(lines[:4]) + '\n')
        csv_path = killed.output_dir / runner.REALIZATIONS_FILE
        text = csv_path.read_text()
        csv_path.write_text(text[:-25])

        with self.assertLogs('harness.runner', 'WARNING'):
            resumed = runner.run_experiment(killed, resume=True)

        self.assertEqual(resumed.resumed, 2)
        self.assertEqual(
            full.realizations_path.read_bytes(),
            resumed.realizations_path.read_bytes(),
        )

    def test_drop_partial_row_keeps_complete_lines(self):
        """Test only the unterminated tail of a CSV is removed"""
        path = self.root / 'rows.csv'
        path.write_text('a,b\n1,2\n3,')

        self.assertEqual(runner.drop_partial_row(path), 2)
        self.assertEqual(path.read_text(), 'a,b\n1,2\n')
        self.assertEqual(runner.drop_partial_row(path), 0)

    def test_incomplete_row_raises_error(self):
        """Test a row with missing values is a FormatError"""
        path = self.root / 'rows.csv'
        path.write_text(
            ','.join(runner.CSV_FIELDS) + '\nTR,CB,4,2,8,8\n'
        )

        with self.assertRaises(FormatError):
            runner.read_realizations(path)

    def test_resume_with_changed_config_raises_error(self):
        """Test resuming into results of another config is refused"""
        config = create_config(self.root / 'run')
        runner.run_experiment(config)

        with self.assertRaises(ConfigurationError):
            runner.run_experiment(
                replace(config, master_seed=8), resume=True
            )

    def test_resume_without_manifest_starts_over(self):
        """Test --resume on an empty directory runs everything"""
        config = create_config(self.root / 'fresh')

        with self.assertLogs('harness.runner', 'WARNING'):
            result = runner.run_experiment(config, resume=True)

        self.assertEqual(result.resumed, 0)
        self.assertEqual(len(runner.read_realizations(
            result.realizations_path
        )), 6)

    def test_failure_marks_manifest_incomplete(self):
        """Test a missing cache file stops the run with status incomplete"""
        config = create_config(self.root / 'run')

        with self.assertRaises(FormatError):
            runner.run_experiment(config, channel_dir=self.root / 'empty')

        _, status, done = runner.read_manifest(
            config.output_dir / runner.MANIFEST_FILE
        )
        self.assertEqual(status, runner.STATUS_INCOMPLETE)
        self.assertEqual(done, [])

    def test_bad_manifest_raises_error(self):
        """Test a file without experiment and status lines"""
        path = self.root / 'MANIFEST'
        path.write_text('hello\n')

        with self.assertRaises(FormatError):
            runner.read_manifest(path)


class ChannelCacheTests(SimpleTestCase):
    """Test cache_channels and load_channels"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_cache_writes_every_realization(self):
        """Test one file per (cell, realization), loaded back in order"""
        config = create_config(
            self.root / 'run', channel={'correlated': [False, True]}
        )

        written = cache.cache_channels(config, self.root / 'channels')
        loaded = list(cache.load_channels(self.root / 'channels'))

        self.assertEqual(len(written), 4)
        self.assertEqual(len(loaded), 4)
        self.assertTrue(all(c.taps.shape == (4, 2, 8) for c in loaded))

    def test_cached_channels_match_generated_ones(self):
        """Test a cached realization is the one the run would draw"""
        config = create_config(self.root / 'run')
        cache.cache_channels(config, self.root / 'channels')
        task = runner.build_tasks(config)[1]

        path = cache.channel_path(
            self.root / 'channels', 'CB', ArrayGeometry.rectangular(2, 2),
            2, False, 1,
        )
        (cached,) = cache.load_channels(path)

        np.testing.assert_array_equal(
            cached.taps, runner._load_or_generate(task).taps
        )

    def test_run_from_cache_matches_fresh_run(self):
        """Test reusing a cache changes nothing in the results"""
        fresh = runner.run_experiment(create_config(self.root / 'fresh'))
        config = create_config(self.root / 'cached')
        cache.cache_channels(config, self.root / 'channels')

        cached = runner.run_experiment(
            config, channel_dir=self.root / 'channels'
        )

        self.assertEqual(
            fresh.realizations_path.read_bytes(),
            cached.realizations_path.read_bytes(),
        )

    def test_load_with_wrong_antenna_count_raises_error(self):
        """Test the header is checked against the expected shape"""
        config = create_config(self.root / 'run')
        cache.cache_channels(config, self.root / 'channels')

        with self.assertRaises(HeaderMismatchError):
            list(cache.load_channels(
                self.root / 'channels', {'num_antennas': 8}
            ))

    def test_cache_of_another_seed_raises_error(self):
        """Test a cache drawn with another master seed is refused"""
        cache.cache_channels(
            create_config(self.root / 'a', run={'master_seed': 4}),
            self.root / 'channels',
        )
        config = create_config(self.root / 'run')

        with self.assertRaises(ConfigurationError):
            runner.run_experiment(config, channel_dir=self.root / 'channels')

    def test_cache_of_another_pdp_raises_error(self):
        """Test a cache drawn with other scenario parameters is refused"""
        cache.cache_channels(
            create_config(
                self.root / 'a', channel={'first_tap_fraction': 0.5}
            ),
            self.root / 'channels',
        )
        task = runner.build_tasks(create_config(self.root / 'run'),
                                  self.root / 'channels')[0]

        with self.assertRaisesRegex(ConfigurationError, 'scenario'):
            runner._load_or_generate(task)
