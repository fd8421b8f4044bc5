import math

from harness.channels import load_channels
from harness.forms import CompareOptionsForm
from harness.management.base import BeamCommand
from harness.runner import SolveParams, compare_modes
from problem.exceptions import BeamformingError


class Command(BeamCommand):
    help = 'Print the branch-and-bound and AO objectives on one channel file'

    def add_arguments(self, parser):
        parser.add_argument('--channels', required=True)
        parser.add_argument('--m', type=int, help='Phase levels M; omit for continuous phases')
        parser.add_argument('--epsilon', type=float)
        self.add_power_arguments(parser)

    def handle(self, *args, **options):
        form = CompareOptionsForm({
            'm': options['m'],
            'epsilon': options['epsilon'],
            'power_linear': options['power_linear'],
            'power_dbm': options['power_dbm'],
        })
        if not form.is_valid():
            raise self.form_errors(form)
        try:
            ch = load_channels(options['channels'])
            params = SolveParams.from_options(form.cleaned_data['power'], form.cleaned_data['epsilon'])
        except (OSError, ValueError, BeamformingError) as e:
            raise self.usage_error(str(e))

        exact, heuristic = form.cleaned_data['modes']
        try:
            comparison = compare_modes(ch, exact, heuristic, params)
        except BeamformingError as e:
            raise self.unsolved_error(str(e))

        self.stdout.write(f"{exact.tag} {comparison.exact.objective:.12g}")
        self.stdout.write(f"{heuristic.tag} {comparison.heuristic.objective:.12g}")
        gap = comparison.relative_gap
        self.stdout.write(f"relative_gap {gap:.12g}" if math.isfinite(gap) else f"relative_gap {gap}")
        self.check_status(comparison.exact)
