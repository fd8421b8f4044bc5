import io
import json
import math
import tempfile
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings
from django.urls import reverse

from discrete.binary import solve_binary
from discrete.mary import solve_mary
from problem.exceptions import ContractViolation
from problem.instance import STATUS_INFEASIBLE, STATUS_OPTIMAL, ChannelSet, PhaseConstraint

from . import runner
from .channels import generate_channels, load_channels, save_channels, write_json
from .forms import SolveOptionsForm, SweepConfigForm
from .reporting import (
    CSV_COLUMNS, dominance, is_strictly_decreasing, mean_by_N, paired_ordering, phase_orderings, summarize_rows,
    trend_report, write_sweep_csv,
)
from .runner import Mode, SolveParams, SweepConfig, SweepRow, run_instance, run_sweep
from .serializers import ChannelFileSerializer
from .tasks import run_trial


def make_row(trial, objective, solver='bb', constraint='binary', N=4, K=2):
    return SweepRow(
        trial=trial, N=N, K=K, solver=solver, constraint=constraint,
        objective=objective, snr_floor=0.0 if math.isinf(objective) else 10.0 / (N * objective),
        gap=0.0, nodes=1, wall_time_s=0.01, status='optimal',
    )


class ChannelGenerationTests(SimpleTestCase):
    def test_same_key_same_channels(self):
        first = generate_channels(7, 3, 2, 4)
        second = generate_channels(7, 3, 2, 4)
        np.testing.assert_array_equal(first.h, second.h)
        self.assertFalse(np.array_equal(first.h, generate_channels(8, 3, 2, 4).h))

    def test_unit_variance_entries(self):
        h = generate_channels(11, 0, 100, 100).h
        self.assertTrue(0.97 <= float(np.mean(np.abs(h) ** 2)) <= 1.03)
        self.assertAlmostEqual(float(np.var(h.real)), 0.5, delta=0.03)
        self.assertAlmostEqual(float(np.var(h.imag)), 0.5, delta=0.03)
        self.assertLess(abs(float(np.mean(h.real * h.imag))), 0.03)

    def test_trials_are_uncorrelated(self):
        a = generate_channels(11, 0, 100, 100).h.ravel()
        b = generate_channels(11, 1, 100, 100).h.ravel()
        correlation = abs(np.vdot(a, b)) / math.sqrt(np.vdot(a, a).real * np.vdot(b, b).real)
        self.assertLess(correlation, 0.05)

    def test_rejects_empty_shapes(self):
        with self.assertRaises(ContractViolation):
            generate_channels(0, 0, 0, 3)


class ChannelFileTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.path = Path(self.tmp.name) / 'channels.json'

    def test_file_reload_keeps_channels(self):
        ch = generate_channels(1, 0, 3, 5, sigma2=2.0)
        save_channels(ch, self.path)
        loaded = load_channels(self.path)
        np.testing.assert_array_equal(loaded.h, ch.h)
        self.assertEqual(loaded.sigma2, 2.0)
        payload = json.loads(self.path.read_text())
        self.assertEqual((payload['K'], payload['N']), (3, 5))

    def test_shape_mismatch_is_rejected(self):
        write_json({'N': 3, 'K': 1, 'sigma2': 1.0, 'channels': [[[1, 0], [0, 1]]]}, self.path)
        with self.assertRaises(ContractViolation):
            load_channels(self.path)

    def test_serializer_rejects_nonpositive_noise(self):
        serializer = ChannelFileSerializer(data={'N': 1, 'K': 1, 'sigma2': 0.0, 'channels': [[[1, 0]]]})
        self.assertFalse(serializer.is_valid())
        self.assertIn('sigma2', serializer.errors)


class ModeTests(SimpleTestCase):
    def test_parse(self):
        self.assertEqual(Mode.parse('binary'), Mode('bb', PhaseConstraint.binary()))
        self.assertEqual(Mode.parse('ao-mary', 4), Mode('ao', PhaseConstraint.mary(4)))
        self.assertEqual(Mode.parse('oracle-mary8').constraint.levels, 8)
        self.assertEqual(Mode.parse('mary', 2).constraint, PhaseConstraint.binary())
        self.assertEqual(Mode.parse('ao-continuous').tag, 'ao-continuous')

    def test_parse_errors(self):
        with self.assertRaises(ContractViolation):
            Mode.parse('mary')
        with self.assertRaises(ContractViolation):
            Mode.parse('gradient-binary')


class RunInstanceTests(SimpleTestCase):
    def setUp(self):
        self.ch = generate_channels(5, 0, 3, 6)

    def test_dispatch_matches_solver(self):
        row = run_instance(self.ch, Mode.parse('binary'))
        self.assertEqual(row.objective, solve_binary(self.ch).objective)
        self.assertEqual((row.N, row.K, row.solver, row.constraint), (6, 3, 'bb', 'binary'))
        self.assertEqual(row.status, STATUS_OPTIMAL)
        self.assertGreater(row.wall_time_s, 0.0)

    def test_ao_never_beats_branch_and_bound(self):
        exact = run_instance(self.ch, Mode.parse('mary', 4))
        heuristic = run_instance(self.ch, Mode.parse('ao-mary', 4))
        self.assertAlmostEqual(exact.objective, solve_mary(self.ch, 4).objective)
        self.assertGreaterEqual(heuristic.objective, exact.objective - 1e-9)

    def test_nulled_user_row(self):
        ch = ChannelSet.from_rows([[0, 0], [1, 1]])
        row = run_instance(ch, Mode.parse('binary'))
        self.assertEqual(row.status, STATUS_INFEASIBLE)
        self.assertTrue(math.isinf(row.objective))

    @override_settings(BEAMFORMING={'ORACLE_SPACE_LIMIT': 4})
    def test_solver_error_lands_in_status(self):
        row = run_instance(self.ch, Mode.parse('oracle-mary4'))
        self.assertTrue(row.status.startswith('error: '))
        self.assertTrue(math.isinf(row.objective))

    def test_params_are_validated(self):
        with self.assertRaises(ContractViolation):
            SolveParams(power=0.0)


class RunSweepTests(SimpleTestCase):
    def config(self, **overrides):
        values = dict(seed=3, trials=3, N_values=(2, 3), K_values=(2,), modes=(Mode.parse('binary'),))
        values.update(overrides)
        return SweepConfig(**values)

    def test_row_count_and_order(self):
        rows = run_sweep(self.config())
        self.assertEqual(len(rows), 6)
        self.assertEqual([(r.trial, r.N) for r in rows], [(0, 2), (0, 3), (1, 2), (1, 3), (2, 2), (2, 3)])

    def test_modes_share_channels(self):
        cfg = self.config(trials=2, N_values=(3,), modes=(Mode.parse('binary'), Mode.parse('ao-binary')))
        with patch('harness.runner.run_instance', wraps=runner.run_instance) as spy:
            rows = run_sweep(cfg)
        by_trial = {}
        for call in spy.call_args_list:
            by_trial.setdefault(call.args[3], []).append(call.args[0])
        self.assertEqual(sorted(by_trial), [0, 1])
        for channels in by_trial.values():
            self.assertEqual(len(channels), 2)
            self.assertIs(channels[0], channels[1])
        np.testing.assert_array_equal(by_trial[1][0].h, generate_channels(3, 1, 2, 3).h)
        self.assertGreaterEqual(rows[1].objective, rows[0].objective - 1e-9)

    def test_default_config_is_the_default_grid(self):
        cfg = SweepConfig()
        self.assertEqual(cfg.N_values, (2, 3, 4, 5, 6, 7, 8))
        self.assertEqual(cfg.K_values, (2, 3, 4))
        self.assertEqual(
            [mode.tag for mode in cfg.modes],
            ['bb-binary', 'bb-mary4', 'bb-continuous', 'ao-binary', 'ao-mary4', 'ao-continuous'],
        )
        self.assertEqual((cfg.power, cfg.sigma2, cfg.epsilon), (10.0, 1.0, 1e-3))
        self.assertGreaterEqual(cfg.trials, 200)

    def test_exact_continuous_cells_are_capped(self):
        cfg = self.config(
            trials=1, N_values=(2, 3), continuous_max_N=2,
            modes=(Mode.parse('continuous'), Mode.parse('ao-continuous'), Mode.parse('binary')),
        )
        rows = run_sweep(cfg)
        cells = [(row.N, row.solver, row.constraint) for row in rows]
        self.assertEqual(cells, [
            (2, 'bb', 'continuous'), (2, 'ao', 'continuous'), (2, 'bb', 'binary'),
            (3, 'ao', 'continuous'), (3, 'bb', 'binary'),
        ])
        self.assertFalse(cfg.covers(Mode.parse('oracle-continuous'), 3))
        self.assertTrue(cfg.covers(Mode.parse('oracle-mary4'), 8))
        with self.assertRaises(ContractViolation):
            self.config(continuous_max_N=0)

    def test_worker_count_follows_settings(self):
        with self.settings(BEAMFORMING={'WORKERS': 2}):
            self.assertEqual(runner.sweep_workers(5), 2)
            self.assertEqual(runner.sweep_workers(1), 1)
        with self.settings(BEAMFORMING={'WORKERS': 0}), patch('harness.runner.os.cpu_count', return_value=3):
            self.assertEqual(runner.sweep_workers(10), 3)

    def test_rows_do_not_depend_on_worker_count(self):
        cfg = self.config(trials=4, modes=(Mode.parse('binary'), Mode.parse('ao-mary4')))
        results = []
        for workers in (1, 3):
            with self.settings(BEAMFORMING={'WORKERS': workers}):
                rows = run_sweep(cfg)
            results.append([(r.trial, r.N, r.K, r.solver, r.constraint, r.objective, r.status) for r in rows])
        self.assertEqual(results[0], results[1])

    @override_settings(CELERY_TASK_ALWAYS_EAGER=False)
    def test_broker_sweeps_go_through_celery(self):
        cfg = self.config(trials=2)
        with patch('harness.runner._run_on_celery', return_value=[]) as dispatch:
            self.assertEqual(run_sweep(cfg), [])
        dispatch.assert_called_once_with(cfg)

    @override_settings(CELERY_TASK_ALWAYS_EAGER=False)
    def test_missing_celery_runs_in_process(self):
        cfg = self.config(trials=2)
        with patch('harness.runner._run_on_celery', side_effect=ImportError('celery')):
            rows = run_sweep(cfg)
        self.assertEqual(len(rows), 4)

    def test_trial_task_matches_local_rows(self):
        cfg = self.config(modes=(Mode.parse('binary'), Mode.parse('ao-binary')))
        produced = run_trial.apply(args=(cfg.to_payload(), 1)).get()
        local = runner.trial_rows(cfg, 1)
        self.assertEqual(
            [(row['N'], row['solver'], row['objective']) for row in produced],
            [(row.N, row.solver, row.objective) for row in local],
        )

    def test_config_validation(self):
        with self.assertRaises(ContractViolation):
            self.config(trials=0)
        with self.assertRaises(ContractViolation):
            self.config(sigma2=-1.0)

    def test_payload_survives_the_task_boundary(self):
        cfg = self.config(modes=(Mode.parse('ao-mary', 4), Mode.parse('continuous')))
        self.assertEqual(SweepConfig.from_payload(json.loads(json.dumps(cfg.to_payload()))), cfg)


class ReportingTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def test_csv_format(self):
        rows = [make_row(0, 0.123456789012345), make_row(1, math.inf)]
        path = Path(self.tmp.name) / 'sweep.csv'
        write_sweep_csv(rows, path, omit_timing=True)
        lines = path.read_text().splitlines()
        self.assertEqual(lines[0], ','.join(CSV_COLUMNS))
        self.assertIn('0.123456789012', lines[1])
        self.assertEqual(lines[2].split(',')[5], 'inf')
        self.assertEqual(pd.read_csv(path)['wall_time_s'].tolist(), [0.0, 0.0])

    def test_summary_statistics(self):
        rows = [make_row(t, value) for t, value in enumerate([1.0, 2.0, 3.0])] + [make_row(3, math.inf)]
        summary = summarize_rows(rows)
        self.assertEqual(len(summary), 1)
        record = summary.iloc[0]
        self.assertEqual(record['trials'], 4)
        self.assertEqual(record['excluded'], 1)
        self.assertAlmostEqual(record['objective_mean'], 2.0)
        self.assertAlmostEqual(record['objective_std'], 1.0)
        # t(0.975, 2) = 4.302653
        self.assertAlmostEqual(record['objective_ci95'], 4.302653 / math.sqrt(3), places=5)

    def test_paired_ordering(self):
        rng = np.random.default_rng(0)
        base = rng.uniform(1.0, 2.0, 40)
        rows = [make_row(t, v, constraint='continuous') for t, v in enumerate(base)]
        rows += [make_row(t, v + 0.1 + 0.01 * rng.standard_normal(), constraint='mary4') for t, v in enumerate(base)]
        result = paired_ordering(rows, Mode.parse('continuous'), Mode.parse('mary4'))
        self.assertEqual(result.pairs, 40)
        self.assertTrue(result.holds)
        reverse_result = paired_ordering(rows, Mode.parse('mary4'), Mode.parse('continuous'))
        self.assertFalse(reverse_result.holds)

    def test_dominance_counts_violations(self):
        rows = [make_row(t, v) for t, v in enumerate([1.0, 2.0, math.inf])]
        rows += [make_row(t, v, solver='ao') for t, v in enumerate([1.0, 1.5, math.inf])]
        result = dominance(rows, Mode.parse('binary'), Mode.parse('ao-binary'))
        self.assertEqual((result.pairs, result.violations), (3, 1))
        self.assertFalse(result.holds)
        self.assertTrue(dominance(rows, Mode.parse('ao-binary'), Mode.parse('binary')).holds)

    def test_mean_by_N_skips_nulled_rows(self):
        rows = [make_row(0, 2.0, N=2), make_row(1, 4.0, N=2), make_row(0, 1.0, N=3), make_row(1, math.inf, N=3)]
        means = mean_by_N(rows, Mode.parse('binary'))
        self.assertEqual(means.to_dict(), {2: 3.0, 3: 1.0})
        self.assertTrue(is_strictly_decreasing(means))
        self.assertFalse(is_strictly_decreasing(means.iloc[:1]))

    def test_phase_orderings_run_fine_to_coarse(self):
        modes = [Mode.parse(tag) for tag in ('binary', 'ao-binary', 'continuous', 'mary8', 'mary4', 'ao-continuous')]
        pairs = [(finer.tag, coarser.tag) for finer, coarser in phase_orderings(modes)]
        self.assertEqual(pairs, [
            ('bb-continuous', 'bb-mary8'), ('bb-mary8', 'bb-mary4'), ('bb-mary4', 'bb-binary'),
            ('ao-continuous', 'ao-binary'),
        ])


class SweepTrendTests(SimpleTestCase):
    """Reduced-scale sweep: mean objective against N, phase-class ordering and BB against AO."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.cfg = SweepConfig(seed=2024, trials=20, N_values=(2, 3, 4), K_values=(2,))
        cls.rows = run_sweep(cls.cfg)

    def test_every_cell_is_solved(self):
        self.assertEqual(len(self.rows), 20 * 3 * 6)
        self.assertFalse([row for row in self.rows if row.status.startswith('error')])

    def test_mean_objective_decreases_with_N(self):
        for tag in ('binary', 'mary4', 'continuous'):
            with self.subTest(mode=tag):
                means = mean_by_N(self.rows, Mode.parse(tag), K=2)
                self.assertEqual(list(means.index), [2, 3, 4])
                self.assertTrue(is_strictly_decreasing(means), means.to_dict())

    def test_finer_phases_reach_lower_objectives(self):
        for finer, coarser in (('continuous', 'mary4'), ('mary4', 'binary')):
            with self.subTest(finer=finer, coarser=coarser):
                result = paired_ordering(self.rows, Mode.parse(finer), Mode.parse(coarser))
                self.assertEqual(result.pairs, 60)
                self.assertTrue(result.holds, result)

    def test_branch_and_bound_never_loses_to_ao(self):
        for tag in ('binary', 'mary4', 'continuous'):
            with self.subTest(mode=tag):
                result = dominance(self.rows, Mode.parse(tag), Mode.parse(f'ao-{tag}'))
                self.assertEqual(result.pairs, 60)
                self.assertEqual(result.violations, 0)

    def test_report_lines(self):
        lines = trend_report(self.rows)
        self.assertIn('(decreasing)', next(line for line in lines if line.startswith('trend bb-continuous K=2')))
        self.assertTrue(any(line.startswith('ordering bb-continuous < bb-mary4') for line in lines))
        self.assertEqual(sum(line.startswith('dominance') for line in lines), 3)


class FormTests(SimpleTestCase):
    def test_power_options(self):
        form = SolveOptionsForm({'mode': 'binary', 'power_dbm': 10})
        self.assertTrue(form.is_valid())
        self.assertAlmostEqual(form.cleaned_data['power'], 10.0)
        self.assertFalse(SolveOptionsForm({'mode': 'binary', 'power_dbm': 10, 'power_linear': 3}).is_valid())
        self.assertFalse(SolveOptionsForm({'mode': 'binary', 'power_linear': -1}).is_valid())

    def test_mary_needs_levels(self):
        form = SolveOptionsForm({'mode': 'mary'})
        self.assertFalse(form.is_valid())
        self.assertIn('mode', form.errors)
        form = SolveOptionsForm({'mode': 'ao-mary', 'm': 8})
        self.assertTrue(form.is_valid())
        self.assertEqual(form.cleaned_data['mode'].constraint.levels, 8)

    def test_sweep_config(self):
        form = SweepConfigForm({
            'seed': 1, 'trials': 2, 'N_values': [2, 3], 'K_values': [2],
            'modes': ['binary', 'ao-mary4'], 'power_dbm': 10,
        })
        self.assertTrue(form.is_valid(), form.errors)
        cfg = form.to_config()
        self.assertEqual(cfg.modes[1], Mode('ao', PhaseConstraint.mary(4)))
        self.assertAlmostEqual(cfg.power, 10.0)
        bad = SweepConfigForm({'seed': 1, 'trials': 2, 'N_values': [0], 'K_values': [2], 'modes': ['binary']})
        self.assertFalse(bad.is_valid())
        self.assertIn('N_values', bad.errors)

    def test_sweep_config_defaults(self):
        form = SweepConfigForm({})
        self.assertTrue(form.is_valid(), form.errors)
        self.assertEqual(form.to_config(), SweepConfig())
        form = SweepConfigForm({'trials': 5, 'K_values': [3], 'continuous_max_N': 6})
        self.assertTrue(form.is_valid(), form.errors)
        cfg = form.to_config()
        self.assertEqual((cfg.trials, cfg.K_values, cfg.continuous_max_N), (5, (3,), 6))
        self.assertEqual(cfg.N_values, SweepConfig().N_values)
        for empty in ({'N_values': []}, {'modes': []}):
            self.assertFalse(SweepConfigForm(empty).is_valid())


class CommandTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)
        self.channels = self.dir / 'channels.json'
        call_command('gen_channels', seed=4, k=2, n=5, out=str(self.channels), stdout=io.StringIO())

    def test_solve_writes_solution(self):
        out = self.dir / 'solution.json'
        stdout = io.StringIO()
        call_command('solve', channels=str(self.channels), mode='binary', out=str(out), stdout=stdout)
        payload = json.loads(out.read_text())
        self.assertEqual(payload['status'], 'optimal')
        self.assertAlmostEqual(payload['objective'], solve_binary(load_channels(self.channels)).objective)
        self.assertAlmostEqual(sum(payload['powers']), 10.0)
        self.assertEqual(len(payload['weights']), 5)
        self.assertIn('status=optimal', stdout.getvalue())

    def test_solve_is_repeatable(self):
        first, second = self.dir / 'a.json', self.dir / 'b.json'
        for target in (first, second):
            call_command('solve', channels=str(self.channels), mode='ao-mary', m=4, out=str(target), stdout=io.StringIO())
        self.assertEqual(first.read_bytes(), second.read_bytes())

    def test_usage_error(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('solve', channels=str(self.channels), mode='mary', out=str(self.dir / 'x.json'))
        self.assertEqual(ctx.exception.returncode, 1)
        with self.assertRaises(CommandError) as ctx:
            call_command(
                'solve', channels=str(self.channels), mode='binary', power_dbm=10, power_linear=10,
                out=str(self.dir / 'x.json'),
            )
        self.assertEqual(ctx.exception.returncode, 1)

    def test_infeasible_exit_code(self):
        nulled = self.dir / 'nulled.json'
        save_channels(ChannelSet.from_rows([[0, 0], [1, 1]]), nulled)
        out = self.dir / 'nulled_solution.json'
        with self.assertRaises(CommandError) as ctx:
            call_command('solve', channels=str(nulled), mode='binary', out=str(out), stdout=io.StringIO())
        self.assertEqual(ctx.exception.returncode, 2)
        payload = json.loads(out.read_text())
        self.assertEqual(payload['objective'], 'inf')
        self.assertEqual(payload['status'], 'infeasible')

    def test_compare_prints_both_objectives(self):
        stdout = io.StringIO()
        call_command('compare', channels=str(self.channels), m=4, stdout=stdout)
        lines = stdout.getvalue().splitlines()
        self.assertTrue(lines[0].startswith('bb-mary4 '))
        self.assertTrue(lines[1].startswith('ao-mary4 '))
        exact, heuristic = float(lines[0].split()[1]), float(lines[1].split()[1])
        self.assertGreaterEqual(heuristic, exact - 1e-9)
        self.assertGreaterEqual(float(lines[2].split()[1]), -1e-9)

    def test_sweep_is_byte_identical_by_default(self):
        config = self.dir / 'sweep.json'
        config.write_text(json.dumps({
            'seed': 9, 'trials': 2, 'N_values': [2, 3], 'K_values': [2],
            'modes': ['binary', 'ao-binary', 'mary4'],
        }))
        outputs = [self.dir / 'one.csv', self.dir / 'two.csv']
        for target in outputs:
            call_command('sweep', config=str(config), out=str(target), stdout=io.StringIO())
        self.assertEqual(outputs[0].read_bytes(), outputs[1].read_bytes())
        frame = pd.read_csv(outputs[0])
        self.assertEqual(len(frame), 12)
        self.assertEqual(list(frame.columns), CSV_COLUMNS)
        self.assertTrue((frame['wall_time_s'] == 0.0).all())

        timed = self.dir / 'timed.csv'
        call_command('sweep', config=str(config), out=str(timed), with_timing=True, stdout=io.StringIO())
        self.assertTrue((pd.read_csv(timed)['wall_time_s'] > 0.0).all())

    def test_sweep_without_config_runs_the_default_grid(self):
        with patch('harness.management.commands.sweep.run_sweep', return_value=[]) as sweep:
            call_command('sweep', out=str(self.dir / 'default.csv'), stdout=io.StringIO())
        cfg = sweep.call_args.args[0]
        self.assertEqual(cfg, SweepConfig())
        self.assertEqual(cfg.N_values, tuple(range(2, 9)))
        self.assertEqual(cfg.K_values, (2, 3, 4))

    def test_sweep_summary_prints_trend_checks(self):
        config = self.dir / 'sweep.json'
        config.write_text(json.dumps({
            'seed': 5, 'trials': 4, 'N_values': [2, 4], 'K_values': [2], 'modes': ['binary', 'ao-binary', 'mary4'],
        }))
        stdout = io.StringIO()
        call_command(
            'sweep', config=str(config), out=str(self.dir / 'rows.csv'),
            summary=str(self.dir / 'summary.csv'), stdout=stdout,
        )
        output = stdout.getvalue()
        self.assertIn('trend bb-binary K=2:', output)
        self.assertIn('ordering bb-mary4 < bb-binary:', output)
        self.assertIn('dominance bb-binary <= ao-binary: 0 violation(s) over 8 pairs', output)
        self.assertEqual(len(pd.read_csv(self.dir / 'summary.csv')), 6)

    def test_sweep_rejects_bad_config(self):
        config = self.dir / 'bad.json'
        config.write_text(json.dumps({'seed': 1, 'trials': 0, 'N_values': [2], 'K_values': [2], 'modes': ['binary']}))
        with self.assertRaises(CommandError) as ctx:
            call_command('sweep', config=str(config), out=str(self.dir / 'out.csv'))
        self.assertEqual(ctx.exception.returncode, 1)


class ApiTests(SimpleTestCase):
    def setUp(self):
        self.channels = ChannelFileSerializer(generate_channels(2, 0, 2, 4)).data

    def post(self, name, payload):
        return self.client.post(reverse(name), data=json.dumps(payload), content_type='application/json')

    def test_solve(self):
        response = self.post('harness:solve', {'channels': self.channels, 'mode': 'binary', 'power_dbm': 10})
        self.assertEqual(response.status_code, 200)
        body = response.json()
        self.assertTrue(body['success'])
        self.assertEqual(body['solution']['status'], 'optimal')
        self.assertAlmostEqual(sum(body['solution']['powers']), 10.0)

    def test_solve_validation(self):
        response = self.post('harness:solve', {'channels': self.channels, 'mode': 'mary'})
        self.assertEqual(response.status_code, 400)
        self.assertIn('mode', response.json()['errors'])
        response = self.post('harness:solve', {'mode': 'binary'})
        self.assertEqual(response.status_code, 400)
        self.assertIn('channels', response.json()['errors'])

    def test_compare(self):
        response = self.post('harness:compare', {'channels': self.channels, 'm': 2})
        self.assertEqual(response.status_code, 200)
        body = response.json()
        self.assertEqual(body['bb']['constraint'], 'binary')
        self.assertEqual(body['ao']['solver'], 'ao')
        self.assertGreaterEqual(body['ao']['objective'], body['bb']['objective'] - 1e-9)

    def test_get_is_not_allowed(self):
        self.assertEqual(self.client.get(reverse('harness:solve')).status_code, 405)
