"""
Branch-and-bound for binary phases w ∈ {−1, +1}ᴺ with w₁ = 1.

For real w the total gain Σ_k |h_kᴴw|² equals wᵀRw with R = Σ_k Re{h_k h_kᴴ}.
A prefix of fixed signs bounds that quadratic from above, and the
arithmetic-harmonic mean inequality turns the bound into K²/UB ≤ f(w).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from baselines.alternating import AoConfig, ao_solve
from problem.conf import beam_setting
from problem.exceptions import ContractViolation
from problem.instance import Beamformer, Certificate, ChannelSet, PhaseConstraint, Solution, objective
from problem.linalg import eigenvalue_ceiling

logger = logging.getLogger('beamforming')

PRUNE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BinaryNode:
    """
    Prefix assignment (w₁..w_d) together with C = w_𝒢ᵀR_𝒢𝒢w_𝒢 and the
    accumulated cross row r = w_𝒢ᵀR_𝒢,: so that children update in O(N).
    """

    fixed_signs: tuple[int, ...]
    partial: float
    cross: NDArray[np.float64]

    def __post_init__(self):
        if not self.fixed_signs or self.fixed_signs[0] != 1:
            raise ContractViolation("Binary nodes fix w₁ = +1")
        if self.depth > self.cross.size:
            raise ContractViolation("Node depth exceeds the antenna count")

    @classmethod
    def from_signs(cls, signs, R: NDArray):
        signs = tuple(int(s) for s in signs)
        w = np.asarray(signs, dtype=np.float64)
        d = w.size
        return cls(signs, float(w @ R[:d, :d] @ w), w @ R[:d, :])

    @classmethod
    def root(cls, R: NDArray):
        return cls.from_signs((1,), R)

    @property
    def depth(self) -> int:
        return len(self.fixed_signs)

    def child(self, sign: int, R: NDArray):
        d = self.depth
        return BinaryNode(
            self.fixed_signs + (sign,),
            self.partial + 2.0 * sign * self.cross[d] + R[d, d],
            self.cross + sign * R[d, :],
        )


def binary_node_ub(node: BinaryNode, R: NDArray, ceiling: float | None = None) -> float:
    """
    UB = C + 2‖r_ℋ‖₁ + (N−d)·λ_max(R_ℋℋ) ≥ wᵀRw for every completion.

    `ceiling` may carry a precomputed bound on λ_max(R_ℋℋ); it depends only on d.
    """
    N, d = R.shape[0], node.depth
    if d >= N:
        raise ContractViolation("A full assignment is a leaf; evaluate it exactly")
    if ceiling is None:
        ceiling = eigenvalue_ceiling(R[d:, d:])
    return node.partial + 2.0 * float(np.sum(np.abs(node.cross[d:]))) + (N - d) * ceiling


def binary_node_lb(ub_tot: float, K: int) -> float:
    """K²/UB; a nonpositive UB means every completion nulls some user."""
    if ub_tot <= 0:
        return math.inf
    return K * K / ub_tot


def _warm_start(ch: ChannelSet) -> tuple[tuple[int, ...] | None, float]:
    solution = ao_solve(ch, PhaseConstraint.binary(), AoConfig(restarts=1))
    if not solution.is_feasible:
        return None, math.inf
    w = solution.beamformer.w
    signs = tuple(np.where(np.real(w * np.conj(w[0])) > 0, 1, -1).tolist())
    return signs, objective(Beamformer.from_signs(signs), ch)


def solve_binary(ch: ChannelSet, power: float | None = None, warm_start: bool = True) -> Solution:
    """Global minimizer over {−1, +1}ᴺ with w₁ = 1, by depth-first branch-and-bound."""
    power = beam_setting('DEFAULT_POWER') if power is None else power
    N, K = ch.N, ch.K
    R = ch.real_gram
    ceilings = [eigenvalue_ceiling(R[d:, d:]) for d in range(N)]

    best_signs, best_f = _warm_start(ch) if warm_start else (None, math.inf)
    stack = [BinaryNode.root(R)]
    explored = 0
    while stack:
        node = stack.pop()
        explored += 1
        d = node.depth
        if d == N:
            value = objective(Beamformer.from_signs(node.fixed_signs), ch)
            if value < best_f:
                best_signs, best_f = node.fixed_signs, value
                logger.debug(f"Binary BB incumbent f={best_f:.12g} at node {explored}")
            continue
        lb = binary_node_lb(binary_node_ub(node, R, ceilings[d]), K)
        if lb >= best_f - PRUNE_TOL:
            continue
        preferred = 1 if node.cross[d] >= 0 else -1
        stack.append(node.child(-preferred, R))
        stack.append(node.child(preferred, R))

    if best_signs is None:
        best_signs = (1,) * N
        logger.warning(f"Binary BB: every sign pattern nulls a user (N={N}, K={K})")
    logger.info(f"Binary BB N={N} K={K}: f*={best_f:.12g}, {explored} nodes")
    return Solution.assemble(
        Beamformer.from_signs(best_signs),
        ch,
        power,
        Certificate(global_lower_bound=best_f, gap=0.0, nodes_explored=explored),
        solver='bb',
        constraint=PhaseConstraint.binary(),
        objective_value=best_f,
    )
