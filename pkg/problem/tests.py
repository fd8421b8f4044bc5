import math

import numpy as np
from django.test import SimpleTestCase, override_settings

from .conf import DEFAULTS, beam_setting
from .exceptions import ContractViolation, ConvergenceError, DimensionError, InfeasibleUserError
from .instance import (
    STATUS_INFEASIBLE,
    Beamformer,
    Certificate,
    ChannelSet,
    PhaseConstraint,
    Solution,
    allocate_power,
    effective_gains,
    objective,
    objective_many,
    snr_floor,
)
from .linalg import (
    eigenvalue_ceiling,
    max_eigenvalue,
    outer_hermitian,
    quadratic_form,
    real_part_matrix,
)


def rayleigh(rng, K, N):
    return (rng.standard_normal((K, N)) + 1j * rng.standard_normal((K, N))) / math.sqrt(2)


class LinalgTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(7)

    def test_outer_hermitian_hand_expansion(self):
        np.testing.assert_allclose(outer_hermitian([1]), [[1]])
        np.testing.assert_allclose(outer_hermitian([1, 1j]), [[1, -1j], [1j, 1]])

    def test_outer_hermitian_is_rank_one(self):
        h = rayleigh(self.rng, 1, 4)[0]
        S = outer_hermitian(h)
        eig = np.linalg.eigvalsh(S)
        self.assertAlmostEqual(float(np.real(np.trace(S))), float(np.sum(np.abs(h) ** 2)), places=12)
        np.testing.assert_allclose(eig[:-1], 0.0, atol=1e-12)
        self.assertAlmostEqual(eig[-1], float(np.sum(np.abs(h) ** 2)), places=12)

    def test_outer_hermitian_rejects_empty(self):
        with self.assertRaises(DimensionError):
            outer_hermitian([])

    def test_real_part_matrix(self):
        np.testing.assert_array_equal(real_part_matrix([[1, -1j], [1j, 1]]), np.eye(2))
        np.testing.assert_array_equal(real_part_matrix(outer_hermitian([1, 1])), np.ones((2, 2)))

    def test_real_part_matches_binary_gain(self):
        for _ in range(100):
            h = rayleigh(self.rng, 1, 5)[0]
            w = self.rng.choice([-1.0, 1.0], size=5)
            R = real_part_matrix(outer_hermitian(h))
            self.assertAlmostEqual(w @ R @ w, abs(np.vdot(h, w)) ** 2, places=10)

    def test_max_eigenvalue_examples(self):
        self.assertAlmostEqual(max_eigenvalue(np.eye(2)), 1.0, places=12)
        self.assertAlmostEqual(max_eigenvalue([[5, 3], [3, 2]]), (7 + math.sqrt(45)) / 2, places=10)
        self.assertAlmostEqual(max_eigenvalue([[1, 1], [1, 1]]), 2.0, places=12)
        self.assertEqual(max_eigenvalue(np.zeros((3, 3))), 0.0)

    def test_max_eigenvalue_start_in_null_space(self):
        # all-ones is orthogonal to the principal eigenvector here
        S = outer_hermitian([1, -1])
        self.assertAlmostEqual(max_eigenvalue(S), 2.0, places=12)

    def test_max_eigenvalue_rejects_non_hermitian(self):
        with self.assertRaises(ContractViolation):
            max_eigenvalue([[1, 2], [0, 1]])

    def test_max_eigenvalue_iteration_cap(self):
        S = np.diag([1.0, 0.999999])
        S = S + 1e-3 * np.ones((2, 2))
        with self.assertRaises(ConvergenceError) as ctx:
            max_eigenvalue(S, tol=1e-15, max_iter=2)
        self.assertIsNotNone(ctx.exception.best_estimate)

    def test_eigenvalue_ceiling_dominates(self):
        for _ in range(20):
            h = rayleigh(self.rng, 3, 5)
            S = h.T @ h.conj()
            exact = np.linalg.eigvalsh(S)[-1]
            ceiling = eigenvalue_ceiling(S)
            self.assertGreaterEqual(ceiling, exact)
            self.assertLess(ceiling - exact, 1e-8 * max(1.0, exact))

    def test_quadratic_form(self):
        S = np.ones((2, 2))
        self.assertEqual(quadratic_form([1, 1], S), 4.0)
        self.assertEqual(quadratic_form([1, -1], S), 0.0)
        with self.assertRaises(DimensionError):
            quadratic_form([1, 1, 1], S)

    def test_rayleigh_and_submatrix_bounds(self):
        for _ in range(20):
            h = rayleigh(self.rng, 2, 4)
            S = h.T @ h.conj()
            lam = max_eigenvalue(S)
            w = np.exp(1j * self.rng.uniform(0, 2 * math.pi, 4))
            q = quadratic_form(w, S)
            self.assertGreaterEqual(q, -1e-12)
            self.assertLessEqual(q, lam * 4 + 1e-9)
            self.assertLessEqual(max_eigenvalue(S[1:, 1:]), lam + 1e-9)
            self.assertAlmostEqual(
                quadratic_form(w, outer_hermitian(h[0])), abs(np.vdot(h[0], w)) ** 2, delta=1e-10 * q + 1e-12
            )


class InstanceTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(11)
        self.aligned = ChannelSet.from_rows([[1, 1]])

    def test_channel_set_validation(self):
        with self.assertRaises(ContractViolation):
            ChannelSet.from_rows([[1, 1]], sigma2=0.0)
        with self.assertRaises(DimensionError):
            ChannelSet(np.zeros((2, 0)))
        ch = ChannelSet(rayleigh(self.rng, 3, 4))
        self.assertEqual((ch.K, ch.N), (3, 4))

    def test_gram_matrices(self):
        ch = ChannelSet(rayleigh(self.rng, 3, 4))
        expected = sum(outer_hermitian(h) for h in ch.h)
        np.testing.assert_allclose(ch.gram, expected, atol=1e-12)
        self.assertEqual(ch.real_gram.dtype, np.float64)
        np.testing.assert_allclose(ch.real_gram, np.real(expected), atol=1e-12)
        np.testing.assert_allclose(ch.real_gram, ch.real_gram.T, atol=1e-12)

    def test_phase_constraint_binary_is_two_level_mary(self):
        self.assertEqual(PhaseConstraint.mary(2), PhaseConstraint.binary())
        self.assertEqual(PhaseConstraint.parse('mary4').levels, 4)
        self.assertEqual(PhaseConstraint.parse('mary', M=8).tag, 'mary8')
        self.assertIsNone(PhaseConstraint.continuous().phase_levels())
        with self.assertRaises(ContractViolation):
            PhaseConstraint.parse('mary')

    def test_beamformer_wraps_phases(self):
        bf = Beamformer.from_phases([-math.pi / 2, 5 * math.pi])
        self.assertTrue(np.all(bf.theta >= 0) and np.all(bf.theta < 2 * math.pi))
        np.testing.assert_allclose(np.abs(bf.w), 1.0, atol=1e-12)
        np.testing.assert_allclose(bf.w, np.exp(1j * bf.theta))

    def test_objective_examples(self):
        self.assertAlmostEqual(objective(Beamformer.from_phases([0, 0]), self.aligned), 0.25, places=15)
        self.assertTrue(math.isinf(objective(Beamformer.from_phases([0, math.pi]), self.aligned)))

    def test_objective_matches_quadratic_forms(self):
        ch = ChannelSet(rayleigh(self.rng, 3, 5))
        bf = Beamformer.from_phases(self.rng.uniform(0, 2 * math.pi, 5))
        expected = sum(1.0 / quadratic_form(bf.w, outer_hermitian(h)) for h in ch.h)
        self.assertAlmostEqual(objective(bf, ch), expected, delta=1e-10 * expected)
        batch = objective_many(np.vstack([bf.w, bf.w]), ch)
        np.testing.assert_allclose(batch, expected, rtol=1e-12)

    def test_objective_dimension_mismatch(self):
        with self.assertRaises(DimensionError):
            objective(Beamformer.from_phases([0, 0, 0]), self.aligned)

    def test_global_phase_invariance(self):
        ch = ChannelSet(rayleigh(self.rng, 2, 4))
        bf = Beamformer.from_phases(self.rng.uniform(0, 2 * math.pi, 4))
        f = objective(bf, ch)
        self.assertAlmostEqual(objective(bf.rotated(1.234), ch), f, delta=1e-12 * f)
        self.assertEqual(bf.anchored().theta[0], 0.0)

    def test_effective_gains(self):
        np.testing.assert_allclose(effective_gains(Beamformer.from_phases([0, 0]), self.aligned), [2.0])
        single = ChannelSet.from_rows([[2 - 1j]], sigma2=0.5)
        np.testing.assert_allclose(effective_gains(Beamformer.from_phases([1.3]), single), [5 / 0.5])
        self.assertEqual(effective_gains(Beamformer.from_phases([0, math.pi]), self.aligned)[0], 0.0)

    def test_allocate_power_examples(self):
        powers, t_star = allocate_power([1, 1], 10)
        np.testing.assert_allclose(powers, [5, 5])
        self.assertAlmostEqual(t_star, 5)
        powers, t_star = allocate_power([1, 4], 10)
        np.testing.assert_allclose(powers, [8, 2])
        self.assertAlmostEqual(t_star, 8)
        powers, t_star = allocate_power([3.0], 2.0)
        np.testing.assert_allclose(powers, [2.0])
        self.assertAlmostEqual(t_star, 6.0)

    def test_allocate_power_rejects_nulled_user(self):
        with self.assertRaises(InfeasibleUserError) as ctx:
            allocate_power([1.0, 0.0, 2.0], 10)
        self.assertEqual(ctx.exception.users, (1,))

    def test_equal_snr_and_budget(self):
        for _ in range(1000):
            K = int(self.rng.integers(1, 6))
            G = self.rng.exponential(size=K) + 1e-3
            P = float(self.rng.uniform(0.1, 100))
            powers, t_star = allocate_power(G, P)
            snr = powers * G
            self.assertLessEqual(snr.max() - snr.min(), 1e-9 * t_star)
            self.assertAlmostEqual(powers.sum(), P, delta=1e-9 * P)

    def test_allocation_beats_grid_search(self):
        for _ in range(100):
            G = self.rng.exponential(size=2) + 1e-2
            _, t_star = allocate_power(G, 10.0)
            split = np.linspace(0, 10.0, 201)
            grid_best = np.max(np.minimum(split * G[0], (10.0 - split) * G[1]))
            self.assertLessEqual(grid_best, t_star * (1 + 1e-6))

    def test_allocation_scales_with_power(self):
        G = np.array([0.5, 2.0, 3.0])
        powers, t_star = allocate_power(G, 1.0)
        scaled, scaled_t = allocate_power(G, 7.0)
        np.testing.assert_allclose(scaled, 7.0 * powers)
        self.assertAlmostEqual(scaled_t, 7.0 * t_star)

    def test_snr_floor(self):
        self.assertAlmostEqual(snr_floor(0.25, 10, 2, 1), 20.0)
        self.assertEqual(snr_floor(math.inf, 10, 2, 1), 0.0)
        self.assertEqual(snr_floor(1, 1, 1, 1), 1.0)
        with self.assertRaises(ContractViolation):
            snr_floor(1, 0, 1, 1)
        bf = Beamformer.from_phases([0, 0])
        _, t_star = allocate_power(effective_gains(bf, self.aligned), 10)
        self.assertAlmostEqual(t_star, snr_floor(objective(bf, self.aligned), 10, 2, 1))

    def test_solution_assemble(self):
        ch = ChannelSet(rayleigh(self.rng, 3, 4))
        bf = Beamformer.from_phases(self.rng.uniform(0, 2 * math.pi, 4))
        solution = Solution.assemble(bf, ch, 10.0, Certificate(0.0, 0.0))
        self.assertAlmostEqual(solution.powers.sum(), 10.0, delta=1e-9 * 10)
        self.assertAlmostEqual(solution.snr_floor, snr_floor(solution.objective, 10.0, 4, 1.0), delta=1e-9)
        nulled = Solution.assemble(Beamformer.from_phases([0, math.pi]), self.aligned, 10.0, Certificate(0.0, 0.0))
        self.assertEqual(nulled.status, STATUS_INFEASIBLE)
        self.assertEqual(nulled.snr_floor, 0.0)
        self.assertFalse(nulled.is_feasible)


class ConfTests(SimpleTestCase):
    @override_settings(BEAMFORMING={'EPSILON': 0.5})
    def test_configured_value_wins(self):
        self.assertEqual(beam_setting('EPSILON'), 0.5)
        self.assertEqual(beam_setting('SDP_TOL'), DEFAULTS['SDP_TOL'])

    def test_unknown_setting(self):
        with self.assertRaises(KeyError):
            beam_setting('NOT_A_SETTING')
