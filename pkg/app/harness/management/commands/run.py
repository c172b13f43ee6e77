"""
Django command to run an experiment
"""
from harness.management.base import SimulationCommand
from harness.runner import run_experiment


class Command(SimulationCommand):
    """Django command to run every realization of an experiment"""

    help = 'Run an experiment and write its CSV, summary and MANIFEST'

    def add_arguments(self, parser):
        self.add_config_arguments(parser)
        parser.add_argument('--out', default=None, help='Output directory')
        parser.add_argument(
            '--resume', action='store_true',
            help='Skip realizations an earlier run already completed',
        )
        parser.add_argument(
            '--channels', default=None,
            help='Channel cache written by gen-channels',
        )

    def run(self, **options):
        config = self.get_config(options, output_path=options['out'])
        self.stdout.write(f'Running into {config.output_dir}...')
        result = run_experiment(
            config, resume=options['resume'], channel_dir=options['channels']
        )
        if result.resumed:
            self.stdout.write(
                f'{result.resumed} realizations reused from the earlier run'
            )
        self.stdout.write(self.style.SUCCESS(
            f'{len(result.summary)} cells summarized in {result.summary_path}'
        ))
