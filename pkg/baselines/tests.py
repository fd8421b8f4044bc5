import math

import numpy as np
from django.test import SimpleTestCase

from discrete.binary import solve_binary
from discrete.mary import solve_mary
from problem.exceptions import ContractViolation, DimensionError, SearchSpaceTooLarge
from problem.instance import (
    STATUS_INFEASIBLE,
    STATUS_LOCAL,
    STATUS_OPTIMAL,
    TWO_PI,
    ChannelSet,
    PhaseConstraint,
    trivial_lower_bound,
)

from .alternating import INIT_GIVEN, INIT_MATCHED, AoConfig, ao_solve, coordinate_descent, initial_points
from .oracles import brute_force_discrete, grid_oracle_continuous


def rayleigh(rng, K, N):
    h = (rng.standard_normal((K, N)) + 1j * rng.standard_normal((K, N))) / math.sqrt(2)
    return ChannelSet(h)


class AoConfigTests(SimpleTestCase):
    def test_rejects_bad_values(self):
        with self.assertRaises(ContractViolation):
            AoConfig(restarts=0)
        with self.assertRaises(ContractViolation):
            AoConfig(rel_tol=0.0)
        with self.assertRaises(ContractViolation):
            AoConfig(init='sideways')
        with self.assertRaises(ContractViolation):
            AoConfig(init=INIT_GIVEN)

    def test_defaults_follow_settings(self):
        with self.settings(BEAMFORMING={'AO_RESTARTS': 3, 'AO_MAX_SWEEPS': 7}):
            cfg = AoConfig()
        self.assertEqual(cfg.restarts, 3)
        self.assertEqual(cfg.max_sweeps, 7)

    def test_initial_points_are_seeded(self):
        ch = rayleigh(np.random.default_rng(0), 2, 4)
        first = initial_points(ch, AoConfig(restarts=3, seed=9))
        second = initial_points(ch, AoConfig(restarts=3, seed=9))
        self.assertEqual(len(first), 3)
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a, b)
        self.assertFalse(np.array_equal(first[0], initial_points(ch, AoConfig(restarts=3, seed=10))[0]))

    def test_matched_user_out_of_range(self):
        ch = rayleigh(np.random.default_rng(0), 2, 3)
        with self.assertRaises(ContractViolation):
            initial_points(ch, AoConfig(init=INIT_MATCHED, user=2))


class CoordinateDescentTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(31)

    def test_single_user_matched_start_is_optimal(self):
        ch = rayleigh(self.rng, 1, 5)
        solution = ao_solve(ch, PhaseConstraint.continuous(), AoConfig(init=INIT_MATCHED, restarts=1))
        expected = 1.0 / float(np.sum(np.abs(ch.h[0]))) ** 2
        self.assertAlmostEqual(solution.objective, expected, delta=1e-12 * expected)

    def test_single_user_random_start_finds_alignment(self):
        ch = rayleigh(self.rng, 1, 4)
        solution = ao_solve(ch, PhaseConstraint.continuous(), AoConfig(restarts=1, seed=5))
        expected = 1.0 / float(np.sum(np.abs(ch.h[0]))) ** 2
        self.assertAlmostEqual(solution.objective, expected, delta=1e-6 * expected)

    def test_binary_escapes_null_start(self):
        ch = ChannelSet.from_rows([[1, 1]])
        cfg = AoConfig(init=INIT_GIVEN, phases=(0.0, math.pi), restarts=1)
        run = coordinate_descent(ch, [0.0, math.pi], PhaseConstraint.binary(), cfg, record_history=True)
        self.assertTrue(math.isinf(run.history[0]))
        self.assertAlmostEqual(run.objective, 0.25)
        solution = ao_solve(ch, PhaseConstraint.binary(), cfg)
        np.testing.assert_array_equal(solution.beamformer.w, [1, 1])

    def test_history_is_monotone(self):
        ch = rayleigh(self.rng, 4, 6)
        for constraint in (PhaseConstraint.binary(), PhaseConstraint.mary(4), PhaseConstraint.continuous()):
            start = self.rng.uniform(0, TWO_PI, 6)
            run = coordinate_descent(ch, start, constraint, AoConfig(restarts=1), record_history=True)
            finite = np.array([v for v in run.history if math.isfinite(v)])
            self.assertTrue(np.all(np.diff(finite) <= 0))
            self.assertEqual(run.theta[0], 0.0)

    def test_discrete_starts_are_snapped(self):
        ch = rayleigh(self.rng, 2, 5)
        run = coordinate_descent(ch, self.rng.uniform(0, TWO_PI, 5), PhaseConstraint.mary(8), AoConfig(restarts=1))
        steps = run.theta * 8 / TWO_PI
        np.testing.assert_allclose(steps, np.round(steps), atol=1e-9)

    def test_start_length_is_checked(self):
        ch = rayleigh(self.rng, 2, 3)
        with self.assertRaises(DimensionError):
            coordinate_descent(ch, [0.0, 1.0], PhaseConstraint.continuous(), AoConfig(restarts=1))

    def test_deterministic_for_fixed_seed(self):
        ch = rayleigh(self.rng, 3, 6)
        first = ao_solve(ch, PhaseConstraint.continuous(), AoConfig(seed=4, restarts=3))
        second = ao_solve(ch, PhaseConstraint.continuous(), AoConfig(seed=4, restarts=3))
        np.testing.assert_array_equal(first.beamformer.theta, second.beamformer.theta)
        self.assertEqual(first.objective, second.objective)

    def test_never_beats_the_exact_solvers(self):
        for _ in range(20):
            N, K = int(self.rng.integers(2, 8)), int(self.rng.integers(1, 5))
            ch = rayleigh(self.rng, K, N)
            heuristic = ao_solve(ch, PhaseConstraint.binary(), AoConfig(restarts=2))
            self.assertGreaterEqual(heuristic.objective, solve_binary(ch).objective - 1e-9)
            heuristic = ao_solve(ch, PhaseConstraint.mary(4), AoConfig(restarts=2))
            self.assertGreaterEqual(heuristic.objective, solve_mary(ch, 4).objective - 1e-9)

    def test_certificate_uses_trivial_bound(self):
        ch = rayleigh(self.rng, 3, 4)
        solution = ao_solve(ch, PhaseConstraint.continuous(), AoConfig(restarts=2))
        self.assertEqual(solution.status, STATUS_LOCAL)
        self.assertEqual(solution.solver, 'ao')
        self.assertAlmostEqual(solution.certificate.global_lower_bound, trivial_lower_bound(ch))
        self.assertAlmostEqual(
            solution.certificate.gap, solution.objective - solution.certificate.global_lower_bound
        )
        self.assertAlmostEqual(float(np.sum(solution.powers)), 10.0)

    def test_zero_channel_is_infeasible(self):
        solution = ao_solve(ChannelSet.from_rows([[0, 0], [1, 1]]), PhaseConstraint.continuous(), AoConfig(restarts=1))
        self.assertEqual(solution.status, STATUS_INFEASIBLE)
        self.assertEqual(solution.snr_floor, 0.0)
        np.testing.assert_array_equal(solution.powers, [0.0, 0.0])


class OracleTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(77)

    def test_single_antenna_has_one_candidate(self):
        solution = brute_force_discrete(ChannelSet.from_rows([[2j], [1]]), 4)
        self.assertAlmostEqual(solution.objective, 1.25)
        self.assertEqual(solution.certificate.nodes_explored, 1)
        self.assertEqual(solution.status, STATUS_OPTIMAL)

    def test_binary_weights_are_exact_signs(self):
        ch = ChannelSet.from_rows([[1, 1]])
        solution = brute_force_discrete(ch, 2)
        np.testing.assert_array_equal(solution.beamformer.w, [1, 1])
        self.assertEqual(solution.objective, 0.25)
        self.assertEqual(solution.constraint, PhaseConstraint.binary())

    def test_anchor_does_not_change_the_minimum(self):
        ch = rayleigh(self.rng, 3, 4)
        anchored = brute_force_discrete(ch, 4)
        full = brute_force_discrete(ch, 4, anchored=False)
        self.assertAlmostEqual(anchored.objective, full.objective, delta=1e-12 * full.objective)
        self.assertEqual(full.certificate.nodes_explored, 4**4)
        self.assertEqual(anchored.certificate.nodes_explored, 4**3)

    def test_first_minimizer_wins(self):
        # all four sign patterns of an orthogonal pair reach the same value
        ch = ChannelSet.from_rows([[1, 0, 0], [0, 1, 0]])
        solution = brute_force_discrete(ch, 2)
        np.testing.assert_array_equal(solution.beamformer.w, [1, 1, 1])

    def test_space_guard(self):
        with self.assertRaises(SearchSpaceTooLarge):
            brute_force_discrete(rayleigh(self.rng, 1, 4), 4, limit=10)
        with self.assertRaises(SearchSpaceTooLarge):
            grid_oracle_continuous(rayleigh(self.rng, 1, 3), 100, limit=1000)

    def test_grid_single_step(self):
        solution = grid_oracle_continuous(ChannelSet.from_rows([[1, 1]]), 1)
        np.testing.assert_allclose(solution.beamformer.w, [1, 1])
        self.assertAlmostEqual(solution.objective, 0.25)
        self.assertEqual(solution.status, STATUS_LOCAL)

    def test_fine_grid_alignment(self):
        solution = grid_oracle_continuous(ChannelSet.from_rows([[1, 1]]), 1024)
        self.assertAlmostEqual(solution.objective, 0.25, places=12)

    def test_grid_bounds_the_discrete_optimum(self):
        ch = rayleigh(self.rng, 2, 3)
        # the 8-step grid contains every 4-ary assignment
        self.assertLessEqual(
            grid_oracle_continuous(ch, 8).objective, brute_force_discrete(ch, 4).objective + 1e-12
        )

    def test_rejects_bad_arguments(self):
        ch = ChannelSet.from_rows([[1, 1]])
        with self.assertRaises(ContractViolation):
            brute_force_discrete(ch, 1)
        with self.assertRaises(ContractViolation):
            grid_oracle_continuous(ch, 0)
