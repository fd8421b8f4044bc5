import json
import logging

from harness.forms import SweepConfigForm
from harness.management.base import BeamCommand
from harness.reporting import trend_report, write_summary_csv, write_sweep_csv
from harness.runner import run_sweep
from problem.exceptions import BeamformingError

logger = logging.getLogger('beamforming')


class Command(BeamCommand):
    help = (
        'Run a Monte Carlo sweep and write the per-row CSV. Without --config the default sweep runs '
        '(N 2..8, K 2..4, BB and AO for binary, 4-ary and continuous phases). wall_time_s is written '
        'as 0 unless --with-timing is given, so repeated sweeps produce byte-identical files.'
    )

    def add_arguments(self, parser):
        parser.add_argument('--config', help='Sweep configuration (JSON); omitted fields take default values')
        parser.add_argument('--out', required=True, help='Per-row CSV')
        parser.add_argument('--summary', help='Grouped summary CSV; also prints the trend checks')
        parser.add_argument(
            '--with-timing',
            action='store_true',
            help='Record measured wall times (the CSV then differs between runs)',
        )

    def load_payload(self, path):
        if not path:
            return {}
        try:
            with open(path, 'r', encoding='utf-8') as handle:
                payload = json.load(handle)
        except (OSError, ValueError) as e:
            raise self.usage_error(f"Cannot read sweep config: {e}")
        if not isinstance(payload, dict):
            raise self.usage_error('The sweep config must be a JSON object')
        return payload

    def handle(self, *args, **options):
        form = SweepConfigForm(self.load_payload(options['config']))
        if not form.is_valid():
            raise self.form_errors(form)
        try:
            cfg = form.to_config()
        except BeamformingError as e:
            raise self.usage_error(str(e))

        rows = run_sweep(cfg)
        write_sweep_csv(rows, options['out'], omit_timing=not options['with_timing'])
        if options['summary']:
            write_summary_csv(rows, options['summary'])
            for line in trend_report(rows):
                self.stdout.write(line)
        failed = sum(1 for row in rows if row.status.startswith('error'))
        self.stdout.write(f"{len(rows)} rows written to {options['out']} ({failed} failed)")
