"""
Shared plumbing of the simulation management commands.
"""
from django.core.management.base import BaseCommand, CommandError

from core.exceptions import ConfigurationError, SimulationError
from harness.config import apply_overrides, load_config, load_preset

# Exit codes
CONFIG_ERROR = 1
RUNTIME_ERROR = 2
CHECK_FAILURE = 3


class SimulationCommand(BaseCommand):
    """
    Base class translating simulation errors into exit codes.

    Subclasses implement run(**options) instead of handle().
    """

    def add_config_arguments(self, parser):
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--config', help='Path of a YAML config file')
        source.add_argument('--preset', help='Name of a shipped preset')
        parser.add_argument(
            '--seed', type=int, default=None, help='Override the master seed'
        )
        parser.add_argument(
            '--workers', type=int, default=None,
            help='Worker processes (default from the config)',
        )

    def get_config(self, options, output_path=None):
        """The selected config with command-line overrides applied"""
        if options.get('preset'):
            config = load_preset(options['preset'])
        else:
            config = load_config(options['config'])
        return apply_overrides(
            config,
            master_seed=options.get('seed'),
            workers=options.get('workers'),
            output_path=output_path,
        )

    def run(self, **options):
        raise NotImplementedError

    def handle(self, *args, **options):
        try:
            return self.run(**options)
        except ConfigurationError as exc:
            raise CommandError(
                f'Configuration error: {exc}', returncode=CONFIG_ERROR
            ) from exc
        except (SimulationError, OSError) as exc:
            raise CommandError(
                f'Simulation failed: {exc}', returncode=RUNTIME_ERROR
            ) from exc
