from harness.channels import generate_channels, save_channels
from harness.management.base import BeamCommand
from problem.exceptions import BeamformingError


class Command(BeamCommand):
    help = 'Draw i.i.d. Rayleigh channels for one (seed, trial) and write a channel file'

    def add_arguments(self, parser):
        parser.add_argument('--seed', type=int, required=True)
        parser.add_argument('--k', type=int, required=True, help='Number of users K')
        parser.add_argument('--n', type=int, required=True, help='Number of antennas N')
        parser.add_argument('--trial', type=int, default=0)
        parser.add_argument('--sigma2', type=float, default=1.0)
        parser.add_argument('--out', required=True)

    def handle(self, *args, **options):
        try:
            ch = generate_channels(options['seed'], options['trial'], options['k'], options['n'], options['sigma2'])
        except BeamformingError as e:
            raise self.usage_error(str(e))
        save_channels(ch, options['out'])
        self.stdout.write(f"Wrote {ch.K} x {ch.N} channels to {options['out']}")
