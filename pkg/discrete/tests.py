import dataclasses
import math
from unittest.mock import patch

import numpy as np
from django.test import SimpleTestCase

from baselines.alternating import ao_solve
from baselines.oracles import brute_force_discrete
from problem.exceptions import ContractViolation, ResourceLimitError
from problem.instance import Beamformer, ChannelSet, objective

from .binary import BinaryNode, binary_node_lb, binary_node_ub, solve_binary
from .mary import MaryNode, agg_lb, combined_lb, indiv_lb, solve_mary, unit_levels


def rayleigh(rng, K, N):
    h = (rng.standard_normal((K, N)) + 1j * rng.standard_normal((K, N))) / math.sqrt(2)
    return ChannelSet(h)


class BinaryBoundTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(2024)

    def test_upper_bound_single_user(self):
        ch = ChannelSet.from_rows([[1, 1]])
        node = BinaryNode.root(ch.real_gram)
        self.assertAlmostEqual(binary_node_ub(node, ch.real_gram), 4.0, places=8)
        self.assertAlmostEqual(binary_node_lb(4.0, 1), 0.25)

    def test_upper_bound_two_users(self):
        ch = ChannelSet.from_rows([[1, 1], [2, 1]])
        R = ch.real_gram
        np.testing.assert_allclose(R, [[5, 3], [3, 2]])
        ub = binary_node_ub(BinaryNode.root(R), R)
        self.assertAlmostEqual(ub, 13.0, places=8)
        # the best completion w = [1, 1] reaches wᵀRw = 13, so the bound is tight here
        completions = [np.array([1.0, s]) for s in (1.0, -1.0)]
        self.assertAlmostEqual(max(w @ R @ w for w in completions), 13.0)
        lb = binary_node_lb(ub, ch.K)
        self.assertAlmostEqual(lb, 4 / 13, places=8)
        self.assertLessEqual(lb, objective(Beamformer.from_signs([1, 1]), ch))
        self.assertAlmostEqual(objective(Beamformer.from_signs([1, 1]), ch), 13 / 36)

    def test_diagonal_gram_is_tight(self):
        R = np.diag([3.0, 2.0, 1.0])
        node = BinaryNode.from_signs([1, -1], R)
        self.assertAlmostEqual(binary_node_ub(node, R), 6.0, places=8)

    def test_nonpositive_upper_bound_prunes(self):
        self.assertTrue(math.isinf(binary_node_lb(0.0, 2)))

    def test_leaf_has_no_upper_bound(self):
        R = np.eye(2)
        with self.assertRaises(ContractViolation):
            binary_node_ub(BinaryNode.from_signs([1, 1], R), R)

    def test_node_requires_leading_plus_one(self):
        with self.assertRaises(ContractViolation):
            BinaryNode.from_signs([-1, 1], np.eye(2))

    def test_incremental_child_matches_recomputation(self):
        ch = rayleigh(self.rng, 3, 6)
        R = ch.real_gram
        node = BinaryNode.root(R)
        for sign in (1, -1, -1, 1):
            node = node.child(sign, R)
            fresh = BinaryNode.from_signs(node.fixed_signs, R)
            self.assertAlmostEqual(node.partial, fresh.partial, places=10)
            np.testing.assert_allclose(node.cross, fresh.cross, atol=1e-10)

    def test_bound_validity_on_random_completions(self):
        for _ in range(10):
            N, K = int(self.rng.integers(3, 8)), int(self.rng.integers(1, 5))
            ch = rayleigh(self.rng, K, N)
            R = ch.real_gram
            d = int(self.rng.integers(1, N))
            prefix = [1] + self.rng.choice([-1, 1], size=d - 1).tolist()
            lb = binary_node_lb(binary_node_ub(BinaryNode.from_signs(prefix, R), R), K)
            for _ in range(100):
                signs = prefix + self.rng.choice([-1, 1], size=N - d).tolist()
                self.assertLessEqual(lb, objective(Beamformer.from_signs(signs), ch) + 1e-8)


class SolveBinaryTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(99)

    def test_aligned_single_user(self):
        solution = solve_binary(ChannelSet.from_rows([[1, 1]]))
        np.testing.assert_array_equal(solution.beamformer.w, [1, 1])
        self.assertAlmostEqual(solution.objective, 0.25)
        self.assertEqual(solution.certificate.gap, 0.0)

    def test_three_antenna_example_matches_enumeration(self):
        ch = ChannelSet.from_rows([[1, 1, 1], [1, -1, 1]])
        expected = min(
            objective(Beamformer.from_signs([1, a, b]), ch) for a in (1, -1) for b in (1, -1)
        )
        self.assertAlmostEqual(solve_binary(ch).objective, expected, places=12)

    def test_matches_brute_force(self):
        for _ in range(100):
            N, K = int(self.rng.integers(2, 11)), int(self.rng.integers(1, 5))
            ch = rayleigh(self.rng, K, N)
            bb = solve_binary(ch)
            oracle = brute_force_discrete(ch, 2)
            self.assertAlmostEqual(bb.objective, oracle.objective, delta=1e-9 * oracle.objective)

    def test_cold_start_matches_warm_start(self):
        ch = rayleigh(self.rng, 3, 7)
        self.assertAlmostEqual(
            solve_binary(ch, warm_start=False).objective, solve_binary(ch).objective, places=12
        )

    def test_sign_symmetry_is_lossless(self):
        for _ in range(10):
            ch = rayleigh(self.rng, 2, 6)
            anchored = brute_force_discrete(ch, 2).objective
            full = brute_force_discrete(ch, 2, anchored=False).objective
            self.assertAlmostEqual(anchored, full, delta=1e-12 * full)

    def test_every_pattern_nulls_a_user(self):
        ch = ChannelSet.from_rows([[0, 0], [1, 1]])
        solution = solve_binary(ch, warm_start=False)
        self.assertTrue(math.isinf(solution.objective))
        self.assertEqual(solution.snr_floor, 0.0)

    def test_single_antenna(self):
        ch = ChannelSet.from_rows([[2], [1j]])
        self.assertAlmostEqual(solve_binary(ch).objective, 0.25 + 1.0)


class MaryBoundTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(5)
        self.ch = ChannelSet.from_rows([[1, 1j]])

    def test_individual_bound_example(self):
        node = MaryNode.from_prefix((0,), self.ch, 4)
        self.assertAlmostEqual(complex(node.partial_sums[0]), 1.0)
        self.assertAlmostEqual(float(node.residuals[0]), 1.0)
        self.assertAlmostEqual(indiv_lb(node), 0.25)

    def test_aggregate_bound_example(self):
        np.testing.assert_allclose(self.ch.gram, [[1, -1j], [1j, 1]])
        node = MaryNode.from_prefix((0,), self.ch, 4)
        self.assertAlmostEqual(agg_lb(node, self.ch.gram), 0.25, places=8)
        self.assertAlmostEqual(combined_lb(node, self.ch.gram), 0.25, places=8)

    def test_zero_channel_is_sentinel(self):
        ch = ChannelSet.from_rows([[0, 0], [1, 1]])
        self.assertTrue(math.isinf(indiv_lb(MaryNode.from_prefix((0,), ch, 4))))

    def test_identity_gram_gives_trace(self):
        ch = ChannelSet(np.eye(3))
        for prefix in [(0,), (0, 1), (0, 3, 2)]:
            node = MaryNode.from_prefix(prefix, ch, 4)
            self.assertAlmostEqual(agg_lb(node, ch.gram), 9 / 3, places=8)

    def test_individual_layer_can_dominate(self):
        ch = ChannelSet.from_rows([[1, 0, 0], [0, 0, 1]])
        node = MaryNode.from_prefix((0,), ch, 4)
        self.assertAlmostEqual(indiv_lb(node), 2.0)
        self.assertAlmostEqual(agg_lb(node, ch.gram), 4 / 3, places=8)
        self.assertAlmostEqual(combined_lb(node, ch.gram), 2.0)

    def test_leaf_collapse(self):
        ch = rayleigh(self.rng, 3, 4)
        prefix = (0, 3, 1, 2)
        node = MaryNode.from_prefix(prefix, ch, 4)
        f = objective(Beamformer.from_levels(prefix, 4), ch)
        self.assertAlmostEqual(indiv_lb(node), f, delta=1e-12 * f)
        self.assertAlmostEqual(combined_lb(node, ch.gram), f, delta=1e-12 * f)

    def test_incremental_child_matches_recomputation(self):
        ch = rayleigh(self.rng, 2, 5)
        levels = unit_levels(4)
        suffix = [np.sum(np.abs(ch.h[:, d:]), axis=1) for d in range(ch.N + 1)]
        node = MaryNode.from_prefix((0,), ch, 4)
        for level in (2, 1, 3):
            node = node.child(level, levels[level], ch, suffix[node.depth + 1])
            fresh = MaryNode.from_prefix(node.prefix, ch, 4)
            np.testing.assert_allclose(node.partial_sums, fresh.partial_sums, atol=1e-12)
            np.testing.assert_allclose(node.residuals, fresh.residuals, atol=1e-12)
            self.assertAlmostEqual(node.quad, fresh.quad, places=10)
            np.testing.assert_allclose(node.cross, fresh.cross, atol=1e-10)

    def test_prefix_sums_match_direct_formulas(self):
        ch = rayleigh(self.rng, 3, 4)
        prefix = (0, 3, 1)
        node = MaryNode.from_prefix(prefix, ch, 4)
        w = unit_levels(4)[list(prefix)]
        self.assertEqual(
            [f.name for f in dataclasses.fields(node)],
            ['prefix', 'partial_sums', 'residuals', 'quad', 'cross'],
        )
        self.assertAlmostEqual(node.quad, float(np.real(w.conj() @ ch.gram[:3, :3] @ w)), places=10)
        np.testing.assert_allclose(node.partial_sums, ch.h[:, :3].conj() @ w, atol=1e-12)
        np.testing.assert_allclose(node.residuals, np.abs(ch.h[:, 3]), atol=1e-12)

    def test_dual_layer_validity(self):
        M = 4
        for _ in range(10):
            N, K = 4, int(self.rng.integers(1, 5))
            ch = rayleigh(self.rng, K, N)
            d = int(self.rng.integers(1, N))
            prefix = (0,) + tuple(self.rng.integers(0, M, size=d - 1).tolist())
            node = MaryNode.from_prefix(prefix, ch, M)
            lb = combined_lb(node, ch.gram)
            for _ in range(100):
                levels = prefix + tuple(self.rng.integers(0, M, size=N - d).tolist())
                self.assertLessEqual(lb, objective(Beamformer.from_levels(levels, M), ch) + 1e-8)

    def test_prefix_validation(self):
        with self.assertRaises(ContractViolation):
            MaryNode.from_prefix((1,), self.ch, 4)
        with self.assertRaises(ContractViolation):
            MaryNode.from_prefix((0, 4), self.ch, 4)


class SolveMaryTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(31)

    def test_phase_alignment(self):
        solution = solve_mary(ChannelSet.from_rows([[1, 1j]]), 4)
        np.testing.assert_allclose(solution.beamformer.w, [1, 1j], atol=1e-12)
        self.assertAlmostEqual(solution.objective, 0.25)

    def test_two_levels_match_binary(self):
        for _ in range(50):
            ch = rayleigh(self.rng, int(self.rng.integers(1, 5)), int(self.rng.integers(2, 8)))
            self.assertAlmostEqual(
                solve_mary(ch, 2).objective, solve_binary(ch).objective, delta=1e-12 * solve_binary(ch).objective
            )

    def test_matches_brute_force(self):
        for _ in range(100):
            N, K = int(self.rng.integers(2, 7)), int(self.rng.integers(1, 5))
            ch = rayleigh(self.rng, K, N)
            bb = solve_mary(ch, 4)
            oracle = brute_force_discrete(ch, 4)
            self.assertAlmostEqual(bb.objective, oracle.objective, delta=1e-9 * oracle.objective)
            self.assertEqual(bb.certificate.gap, 0.0)

    def test_cold_start_matches_oracle(self):
        ch = rayleigh(self.rng, 3, 5)
        self.assertAlmostEqual(
            solve_mary(ch, 8, warm_start=False).objective,
            brute_force_discrete(ch, 8).objective,
            places=10,
        )

    def test_rotation_anchor_is_lossless(self):
        for _ in range(10):
            ch = rayleigh(self.rng, 2, 4)
            anchored = brute_force_discrete(ch, 4).objective
            full = brute_force_discrete(ch, 4, anchored=False).objective
            self.assertAlmostEqual(anchored, full, delta=1e-12 * full)

    def test_node_cap(self):
        ch = rayleigh(self.rng, 3, 6)
        with self.assertRaises(ResourceLimitError):
            solve_mary(ch, 4, warm_start=False, node_cap=0)

    def test_warm_start_uses_alternating_optimization(self):
        ch = rayleigh(self.rng, 2, 4)
        with patch('discrete.mary.ao_solve', wraps=ao_solve) as ao:
            solve_mary(ch, 4)
        ao.assert_called_once()
