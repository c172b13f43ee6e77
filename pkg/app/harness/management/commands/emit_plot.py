"""
Django command to turn run summaries into a plot-ready CSV
"""
from harness.management.base import SimulationCommand
from harness.plots import FIGURES, emit_plot_data


class Command(SimulationCommand):
    """Django command to emit the data of one figure"""

    help = 'Write the plot CSV of one figure from summary files'

    def add_arguments(self, parser):
        parser.add_argument('figure', choices=sorted(FIGURES))
        parser.add_argument(
            '--summary', nargs='+', required=True,
            help='summary.json files of finished runs',
        )
        parser.add_argument(
            '--out', default=None, help='Output CSV (default <figure>.csv)'
        )

    def run(self, **options):
        figure = options['figure']
        output = emit_plot_data(
            options['summary'], figure, options['out'] or f'{figure}.csv'
        )
        self.stdout.write(self.style.SUCCESS(f'{figure} data in {output}'))
