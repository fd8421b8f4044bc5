import math

import numpy as np
from django.test import SimpleTestCase

from baselines.alternating import AoConfig, ao_solve
from baselines.oracles import grid_oracle_continuous
from problem.exceptions import ContractViolation
from problem.instance import (
    STATUS_DEGRADED,
    STATUS_OPTIMAL,
    TWO_PI,
    Beamformer,
    ChannelSet,
    PhaseConstraint,
    objective,
)

from .relaxation import PhaseBox, SdpOutcome, schur_snr_constraint, sector_constraint, solve_node
from .spatial import (
    SpatialSearch,
    branch_box,
    chord_lower_bound,
    initial_boxes,
    round_midpoint,
    round_projection,
    solve_continuous,
)


def rayleigh(rng, K, N):
    h = (rng.standard_normal((K, N)) + 1j * rng.standard_normal((K, N))) / math.sqrt(2)
    return ChannelSet(h)


def random_box(rng, N, max_width=math.pi):
    widths = rng.uniform(0.0, max_width, N)
    lo = rng.uniform(0.0, TWO_PI - widths)
    return PhaseBox(lo, lo + widths)


def sample_in_box(rng, box):
    return Beamformer.from_phases(rng.uniform(box.lo, box.hi))


class SectorTests(SimpleTestCase):
    def test_examples(self):
        self.assertEqual(sector_constraint(0.0, math.pi)[0], math.pi / 2)
        self.assertAlmostEqual(sector_constraint(0.0, math.pi)[1], 0.0, places=15)
        phi, rhs = sector_constraint(0.0, math.pi / 2)
        self.assertAlmostEqual(phi, math.pi / 4)
        self.assertAlmostEqual(rhs, math.sqrt(2) / 2)
        self.assertEqual(sector_constraint(1.0, 1.0), (1.0, 1.0))

    def test_rejects_wide_interval(self):
        with self.assertRaises(ContractViolation):
            sector_constraint(0.0, 4.0)

    def test_sector_soundness(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            lo = rng.uniform(0, math.pi)
            hi = lo + rng.uniform(0.01, math.pi - 0.01)
            phi, rhs = sector_constraint(lo, hi)
            inside = rng.uniform(lo, hi, 20)
            self.assertTrue(np.all(np.cos(inside - phi) >= rhs - 1e-12))
            outside = np.concatenate([lo - rng.uniform(1e-6, 0.5, 10), hi + rng.uniform(1e-6, 0.5, 10)])
            self.assertTrue(np.all(np.cos(outside - phi) < rhs))

    def test_schur_table(self):
        self.assertTrue(schur_snr_constraint(1, 1))
        self.assertFalse(schur_snr_constraint(0.5, 1))
        self.assertTrue(schur_snr_constraint(2, 0.5))
        self.assertFalse(schur_snr_constraint(-1, -1))


class PhaseBoxTests(SimpleTestCase):
    def test_validation(self):
        with self.assertRaises(ContractViolation):
            PhaseBox([1.0], [0.5])
        with self.assertRaises(ContractViolation):
            PhaseBox([0.0], [7.0])

    def test_bisect_partitions(self):
        box = PhaseBox([0.0, 0.0], [math.pi, math.pi / 2])
        left, right = box.bisect(0)
        self.assertEqual(left.hi[0], right.lo[0])
        self.assertAlmostEqual(left.volume() + right.volume(), box.volume())

    def test_initial_boxes_cover_region(self):
        boxes = initial_boxes(3)
        self.assertEqual(len(boxes), 4)
        self.assertAlmostEqual(sum(b.volume() for b in boxes), TWO_PI**2)
        self.assertTrue(all(b.lo[0] == 0.0 and b.hi[0] == 0.0 for b in boxes))


class SolveNodeTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(17)

    def test_single_antenna_gain_is_phase_invariant(self):
        outcome = solve_node(ChannelSet.from_rows([[1]]), PhaseBox([0.0], [math.pi / 2]))
        self.assertEqual(outcome.status, STATUS_OPTIMAL)
        self.assertAlmostEqual(outcome.dual_lower_bound, 1.0, delta=1e-5)
        self.assertAlmostEqual(outcome.primal_value, 1.0, delta=1e-5)

    def test_aligned_two_antenna_relaxation(self):
        ch = ChannelSet.from_rows([[1, 1]])
        box = PhaseBox([0.0, 0.0], [0.0, math.pi])
        outcome = solve_node(ch, box)
        self.assertEqual(outcome.status, STATUS_OPTIMAL)
        self.assertAlmostEqual(outcome.dual_lower_bound, 0.25, delta=1e-5)
        self.assertLessEqual(outcome.dual_lower_bound, outcome.primal_value + 1e-8)
        rounded = round_projection(box, outcome)
        np.testing.assert_allclose(rounded.w, [1, 1], atol=1e-3)
        self.assertAlmostEqual(objective(rounded, ch), 0.25, delta=1e-6)

    def test_dual_bound_is_valid_inside_box(self):
        for _ in range(10):
            N, K = int(self.rng.integers(2, 5)), int(self.rng.integers(1, 4))
            ch = rayleigh(self.rng, K, N)
            box = random_box(self.rng, N)
            outcome = solve_node(ch, box)
            for _ in range(100):
                w = sample_in_box(self.rng, box)
                self.assertLessEqual(outcome.dual_lower_bound, objective(w, ch) + 1e-6)

    def test_lifted_matrix_residuals(self):
        ch = rayleigh(self.rng, 3, 4)
        outcome = solve_node(ch, random_box(self.rng, 4))
        W = outcome.lifted
        self.assertEqual(W.shape, (5, 5))
        self.assertGreaterEqual(np.linalg.eigvalsh(W)[0], -1e-8)
        np.testing.assert_allclose(np.real(np.diag(W)), 1.0, atol=1e-8)

    def test_epigraph_matches_lifted_gains(self):
        ch = rayleigh(self.rng, 2, 3)
        box = PhaseBox([0.0, 0.5, 2.0], [0.0, 2.0, 4.0])
        outcome = solve_node(ch, box)
        gains = np.real(np.einsum('ka,ab,kb->k', ch.h.conj(), outcome.lifted[1:, 1:], ch.h))
        np.testing.assert_allclose(outcome.epigraph, 1.0 / gains, rtol=1e-6)
        self.assertTrue(all(schur_snr_constraint(t, g * (1 + 1e-9)) for t, g in zip(outcome.epigraph, gains)))

    def test_shrinking_box_is_exact(self):
        ch = rayleigh(self.rng, 2, 3)
        best = ao_solve(ch, PhaseConstraint.continuous(), AoConfig(restarts=4))
        centre = best.beamformer.theta
        half = 5e-4
        box = PhaseBox(np.maximum(centre - half, 0.0), np.minimum(centre + half, TWO_PI))
        outcome = solve_node(ch, box)
        self.assertLessEqual(outcome.dual_lower_bound, best.objective + 1e-8)
        self.assertAlmostEqual(outcome.dual_lower_bound, best.objective, delta=1e-3)

    def test_very_narrow_box_still_takes_newton_steps(self):
        ch = rayleigh(self.rng, 2, 3)
        best = ao_solve(ch, PhaseConstraint.continuous(), AoConfig(restarts=4))
        centre = best.beamformer.theta
        half = 5e-7
        box = PhaseBox(np.maximum(centre - half, 0.0), np.minimum(centre + half, TWO_PI))
        outcome = solve_node(ch, box)
        self.assertGreater(outcome.iterations, 0)
        self.assertLessEqual(outcome.dual_lower_bound, best.objective + 1e-8)
        self.assertAlmostEqual(outcome.dual_lower_bound, best.objective, delta=1e-3)

    def test_fully_fixed_box_is_exact(self):
        ch = rayleigh(self.rng, 2, 3)
        theta = np.array([0.0, 1.0, 2.5])
        outcome = solve_node(ch, PhaseBox(theta, theta))
        f = objective(Beamformer.from_phases(theta), ch)
        self.assertAlmostEqual(outcome.dual_lower_bound, f, delta=1e-12 * f)

    def test_zero_channel_gives_infinite_bound(self):
        ch = ChannelSet.from_rows([[0, 0], [1, 1]])
        self.assertTrue(math.isinf(solve_node(ch, PhaseBox([0.0, 0.0], [0.0, 1.0])).dual_lower_bound))

    def test_rejects_wide_boxes(self):
        with self.assertRaises(ContractViolation):
            solve_node(ChannelSet.from_rows([[1, 1]]), PhaseBox.anchored(2))


class RoundingTests(SimpleTestCase):
    def test_midpoint(self):
        bf = round_midpoint(PhaseBox([0.0, 0.0], [math.pi, math.pi]))
        np.testing.assert_allclose(bf.theta, [math.pi / 2, math.pi / 2])
        self.assertAlmostEqual(float(round_midpoint(PhaseBox([1.0], [1.0])).theta[0]), 1.0)

    def _lifted_outcome(self, column):
        w = np.concatenate([[1.0], column])
        return SdpOutcome(np.outer(w, w.conj()), 0.0, 0.0, STATUS_OPTIMAL, np.zeros(1))

    def test_projection_recovers_rank_one(self):
        box = PhaseBox([0.0, 0.5], [1.0, 1.5])
        theta = np.array([0.3, 1.2])
        bf = round_projection(box, self._lifted_outcome(np.exp(1j * theta)))
        np.testing.assert_allclose(bf.theta, theta, atol=1e-12)

    def test_projection_clamps_low_side(self):
        box = PhaseBox([1.0], [2.0])
        bf = round_projection(box, self._lifted_outcome(np.exp(1j * np.array([0.5]))))
        self.assertAlmostEqual(float(bf.theta[0]), 1.0)

    def test_projection_handles_box_at_two_pi(self):
        box = PhaseBox([3 * math.pi / 2], [TWO_PI])
        bf = round_projection(box, self._lifted_outcome(np.exp(1j * np.array([-0.01]))))
        self.assertAlmostEqual(float(bf.theta[0]), TWO_PI - 0.01)

    def test_projection_falls_back_to_midpoint(self):
        box = PhaseBox([0.0, 1.0], [0.0, 2.0])
        W = np.eye(3, dtype=np.complex128)
        W[1, 0] = W[0, 1] = 1.0
        bf = round_projection(box, SdpOutcome(W, 0.0, 0.0, STATUS_OPTIMAL, np.zeros(1)))
        self.assertAlmostEqual(float(bf.theta[1]), 1.5)


class BranchTests(SimpleTestCase):
    def test_full_square(self):
        left, right = branch_box(PhaseBox([0.0, 0.0], [TWO_PI, TWO_PI]))
        self.assertEqual(left.hi[0], math.pi)
        self.assertEqual(right.lo[0], math.pi)
        self.assertEqual(left.hi[1], TWO_PI)

    def test_widest_coordinate(self):
        left, _ = branch_box(PhaseBox([0.0, 0.0], [math.pi, math.pi / 2]))
        self.assertEqual(left.hi[0], math.pi / 2)

    def test_tie_goes_to_lowest_index(self):
        left, _ = branch_box(PhaseBox([0.0, 0.0], [math.pi / 2, math.pi / 2]))
        self.assertEqual(left.hi[0], math.pi / 4)
        self.assertEqual(left.hi[1], math.pi / 2)

    def test_point_cannot_branch(self):
        with self.assertRaises(ContractViolation):
            branch_box(PhaseBox([1.0, 2.0], [1.0, 2.0]))

    def test_chord_bound_is_valid(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            ch = rayleigh(rng, 3, 4)
            box = random_box(rng, 4)
            bound = chord_lower_bound(ch, box)
            for _ in range(50):
                self.assertLessEqual(bound, objective(sample_in_box(rng, box), ch) + 1e-12)


class SolveContinuousTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(23)

    def test_alignment_optimum(self):
        solution = solve_continuous(ChannelSet.from_rows([[1, 1]]), epsilon=1e-3)
        self.assertAlmostEqual(solution.objective, 0.25, delta=1e-3)
        self.assertLessEqual(solution.certificate.gap, 1e-3)
        self.assertEqual(solution.status, STATUS_OPTIMAL)

    def test_certified_gap_against_grid(self):
        for index in range(30):
            N, K = 2 + index % 2, 2 + (index // 2) % 2
            ch = rayleigh(self.rng, K, N)
            solution = solve_continuous(ch, epsilon=1e-3)
            grid = grid_oracle_continuous(ch, 1024 if N == 2 else 256)
            with self.subTest(index=index, N=N, K=K):
                self.assertEqual(solution.status, STATUS_OPTIMAL)
                self.assertLessEqual(solution.certificate.gap, 1e-3)
                self.assertLessEqual(solution.objective, grid.objective + 1e-6)
                self.assertGreaterEqual(solution.objective, solution.certificate.global_lower_bound)
                self.assertLessEqual(solution.certificate.global_lower_bound, grid.objective + 1e-9)

    def test_three_antennas_against_multistart(self):
        ch = rayleigh(self.rng, 2, 3)
        solution = solve_continuous(ch, epsilon=1e-2)
        multistart = ao_solve(ch, PhaseConstraint.continuous(), AoConfig(restarts=64, seed=1))
        self.assertLessEqual(solution.objective, multistart.objective * (1 + 1e-6))
        self.assertLessEqual(solution.certificate.gap, 1e-2)

    def test_anchor_is_lossless(self):
        ch = rayleigh(self.rng, 2, 2)
        anchored = grid_oracle_continuous(ch, 256).objective
        full = grid_oracle_continuous(ch, 256, anchored=False).objective
        self.assertAlmostEqual(anchored, full, delta=1e-12 * full)
        self.assertLessEqual(solve_continuous(ch, epsilon=1e-3).objective, full + 1e-6)

    def test_single_antenna(self):
        solution = solve_continuous(ChannelSet.from_rows([[2j], [1]]))
        self.assertAlmostEqual(solution.objective, 1.25)
        self.assertEqual(solution.certificate.gap, 0.0)

    def test_budget_exhaustion_is_degraded(self):
        ch = rayleigh(self.rng, 3, 3)
        solution = solve_continuous(ch, epsilon=1e-9, node_budget=6, warm_starts=0, polish=False)
        self.assertEqual(solution.status, STATUS_DEGRADED)
        self.assertGreater(solution.certificate.gap, 0.0)
        self.assertLessEqual(solution.certificate.global_lower_bound, solution.objective)

    def test_partition_is_preserved(self):
        ch = rayleigh(self.rng, 2, 3)
        search = SpatialSearch(ch=ch, epsilon=1e-6, node_budget=12, sdp_tol=1e-6)
        search.run(initial_boxes(3))
        open_volume = sum(node.box.volume() for _, _, node in search.open_nodes)
        self.assertAlmostEqual(open_volume + search.pruned_volume, TWO_PI**2, delta=1e-9 * TWO_PI**2)
        self.assertLessEqual(search.global_lower_bound(), search.incumbent)
