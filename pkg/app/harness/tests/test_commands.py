"""
Test the simulation management commands
"""
import tempfile
from io import StringIO
from pathlib import Path
from unittest.mock import patch

import yaml

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from harness import runner
from harness.models import CheckResult, CheckStatus
from harness.tests.test_config import create_config_data


class CommandTests(SimpleTestCase):
    """Test gen_channels, run, emit_plot and selftest"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        self.config_path = self.root / 'config.yaml'
        self.config_path.write_text(yaml.safe_dump(create_config_data()))

    def tearDown(self):
        self.tmp.cleanup()

    def test_run_writes_results(self):
        """Test run with --config, --seed and --out"""
        out = StringIO()

        call_command(
            'run', config=str(self.config_path), seed=11,
            out=str(self.root / 'results'), stdout=out,
        )

        self.assertIn('cells summarized', out.getvalue())
        written = yaml.safe_load(
            (self.root / 'results' / runner.CONFIG_FILE).read_text()
        )
        self.assertEqual(written['run']['master_seed'], 11)
        self.assertTrue(
            (self.root / 'results' / runner.SUMMARY_FILE).is_file()
        )

    def test_run_from_generated_cache(self):
        """Test gen_channels followed by run --channels"""
        call_command(
            'gen_channels', config=str(self.config_path),
            out=str(self.root / 'channels'), stdout=StringIO(),
        )

        call_command(
            'run', config=str(self.config_path),
            out=str(self.root / 'results'),
            channels=str(self.root / 'channels'), stdout=StringIO(),
        )

        self.assertEqual(len(list((self.root / 'channels').rglob('*.trch'))),
                         2)

    def test_invalid_config_exits_with_1(self):
        """Test configuration errors map to exit code 1"""
        self.config_path.write_text(yaml.safe_dump(create_config_data(
            channel={'users': [9]}
        )))

        with self.assertRaises(CommandError) as context:
            call_command('run', config=str(self.config_path))

        self.assertEqual(context.exception.returncode, 1)

    def test_unknown_preset_exits_with_1(self):
        """Test a preset that does not exist"""
        with self.assertRaises(CommandError) as context:
            call_command('gen_channels', preset='nope')

        self.assertEqual(context.exception.returncode, 1)

    def test_runtime_error_exits_with_2(self):
        """Test a missing channel cache maps to exit code 2"""
        with self.assertRaises(CommandError) as context:
            call_command(
                'run', config=str(self.config_path),
                out=str(self.root / 'results'),
                channels=str(self.root / 'missing'), stdout=StringIO(),
            )

        self.assertEqual(context.exception.returncode, 2)

    def test_emit_plot_coverage_error_exits_with_2(self):
        """Test a power-only summary cannot feed a BER figure"""
        summary = self.root / 'summary.json'
        summary.write_text('{}')

        with self.assertRaises(CommandError) as context:
            call_command(
                'emit_plot', 'fig6', summary=[str(summary)],
                out=str(self.root / 'fig6.csv'),
            )

        self.assertEqual(context.exception.returncode, 2)

    def test_emit_plot_writes_csv(self):
        """Test emit_plot from a real run summary"""
        call_command(
            'run', config=str(self.config_path),
            out=str(self.root / 'results'), stdout=StringIO(),
        )

        call_command(
            'emit_plot', 'fig6',
            summary=[str(self.root / 'results' / runner.SUMMARY_FILE)],
            out=str(self.root / 'fig6.csv'), stdout=StringIO(),
        )

        lines = (self.root / 'fig6.csv').read_text().splitlines()
        self.assertEqual(lines[0], 'series,snr [dB],ber,ber_low,ber_high')
        self.assertEqual(len(lines), 4)

    def test_selftest_kernel_suite_passes(self):
        """Test the kernel oracles through the command"""
        out = StringIO()

        call_command('selftest', suite=['kernels'], stdout=out)

        self.assertIn('PASS convolution_oracle', out.getvalue())
        self.assertNotIn('FAIL', out.getvalue())

    def test_selftest_prefilter_suite_passes(self):
        """Test unit energy, nulling and the energy partition"""
        out = StringIO()

        call_command('selftest', suite=['pre-filters'], stdout=out)

        self.assertIn('PASS intr_exact_nulling', out.getvalue())
        self.assertIn('PASS intr_single_user_is_tr', out.getvalue())

    @patch('harness.management.commands.selftest.run_selftest')
    def test_selftest_failure_exits_with_3(self, patched_selftest):
        """Test a failed check maps to exit code 3"""
        patched_selftest.return_value = [
            CheckResult('broken', CheckStatus.FAIL, 'off by one'),
        ]

        with self.assertRaises(CommandError) as context:
            call_command('selftest', stdout=StringIO())

        self.assertEqual(context.exception.returncode, 3)
        self.assertIn('broken', str(context.exception))
