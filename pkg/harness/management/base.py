from django.core.management.base import BaseCommand, CommandError

from problem.instance import STATUS_DEGRADED, STATUS_INFEASIBLE

EXIT_USAGE = 1
EXIT_UNSOLVED = 2


class BeamCommand(BaseCommand):
    """Shared options and exit codes for the solver commands."""

    def add_power_arguments(self, parser):
        group = parser.add_mutually_exclusive_group()
        group.add_argument('--power-linear', type=float, dest='power_linear', help='Total power P (linear)')
        group.add_argument('--power-dbm', type=float, dest='power_dbm', help='Total power in dBm, P = 10^(D/10)')

    def usage_error(self, message):
        return CommandError(message, returncode=EXIT_USAGE)

    def unsolved_error(self, message):
        return CommandError(message, returncode=EXIT_UNSOLVED)

    def check_status(self, solution):
        if solution.status in (STATUS_INFEASIBLE, STATUS_DEGRADED):
            raise self.unsolved_error(f"Solver finished with status '{solution.status}'")

    def form_errors(self, form):
        messages = []
        for field, errors in form.errors.items():
            label = 'options' if field == '__all__' else field
            messages.append(f"{label}: {' '.join(errors)}")
        return self.usage_error('; '.join(messages))
