"""
Django command to run the invariant self-tests
"""
from django.core.management.base import CommandError

from harness.acceptance import run_acceptance
from harness.management.base import CHECK_FAILURE, SimulationCommand
from harness.models import CheckStatus
from harness.plots import merge_summaries
from harness.selftest import SUITES, run_selftest


class Command(SimulationCommand):
    """Django command to check invariants and reference values"""

    help = 'Run the invariant suite and, given summaries, reference checks'

    def add_arguments(self, parser):
        parser.add_argument(
            '--suite', action='append', choices=[n for n, _ in SUITES],
            help='Run only this suite (repeatable)',
        )
        parser.add_argument(
            '--summary', nargs='+', default=None,
            help='Also check these run summaries against reference values',
        )
        parser.add_argument(
            '--skip-invariants', action='store_true',
            help='Only run the summary checks',
        )

    def run(self, **options):
        results = []
        if not options['skip_invariants']:
            results.extend(run_selftest(options['suite']))
        if options['summary']:
            results.extend(
                run_acceptance(merge_summaries(options['summary']))
            )

        styles = {
            CheckStatus.PASS: self.style.SUCCESS,
            CheckStatus.FAIL: self.style.ERROR,
            CheckStatus.SKIP: self.style.WARNING,
        }
        for result in results:
            self.stdout.write(styles[result.status](
                f'{result.status.upper():4} {result.name}: {result.detail}'
            ))

        failed = [result.name for result in results if result.failed]
        if failed:
            raise CommandError(
                f'{len(failed)} checks failed: {", ".join(failed)}',
                returncode=CHECK_FAILURE,
            )
        self.stdout.write(self.style.SUCCESS(f'{len(results)} checks done'))
