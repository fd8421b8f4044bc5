import logging

from harness.channels import load_channels, write_json
from harness.forms import SolveOptionsForm
from harness.management.base import BeamCommand
from harness.runner import SolveParams, solve
from harness.serializers import SolutionSerializer
from problem.exceptions import BeamformingError

logger = logging.getLogger('beamforming')


class Command(BeamCommand):
    help = 'Solve one channel file and write the solution JSON'

    def add_arguments(self, parser):
        parser.add_argument('--channels', required=True, help='Channel file (JSON)')
        parser.add_argument(
            '--mode',
            required=True,
            help='binary | mary | continuous, optionally prefixed with ao- or oracle-',
        )
        parser.add_argument('--m', type=int, help='Phase levels M for mary modes')
        parser.add_argument('--epsilon', type=float, help='Certified gap target for continuous BB')
        self.add_power_arguments(parser)
        parser.add_argument('--out', required=True, help='Solution file (JSON)')

    def handle(self, *args, **options):
        form = SolveOptionsForm({
            'mode': options['mode'],
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

        mode = form.cleaned_data['mode']
        try:
            solution = solve(ch, mode, params)
        except BeamformingError as e:
            logger.error(f"Solve {mode} failed: {e}")
            raise self.unsolved_error(str(e))

        write_json(SolutionSerializer(solution).data, options['out'])
        self.stdout.write(
            f"{mode}: objective={solution.objective:.12g} snr_floor={solution.snr_floor:.12g} "
            f"gap={solution.certificate.gap:.3g} nodes={solution.certificate.nodes_explored} "
            f"status={solution.status}"
        )
        self.check_status(solution)
