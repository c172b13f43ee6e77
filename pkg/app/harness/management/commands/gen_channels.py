"""
Django command to generate and cache the channel realizations of a config
"""
from pathlib import Path

from harness.cache import cache_channels
from harness.management.base import SimulationCommand


class Command(SimulationCommand):
    """Django command to fill a channel cache"""

    help = 'Generate every channel realization of a config into a cache'

    def add_arguments(self, parser):
        self.add_config_arguments(parser)
        parser.add_argument(
            '--out', default=None,
            help='Cache directory (default: <output_path>/channels)',
        )

    def run(self, **options):
        config = self.get_config(options)
        out = Path(options['out'] or config.output_dir / 'channels')
        self.stdout.write(
            f'Caching {config.num_realizations} realizations '
            f'of {len(config.cells())} cells...'
        )
        written = cache_channels(config, out)
        self.stdout.write(self.style.SUCCESS(
            f'{len(written)} channel files written to {out}'
        ))
