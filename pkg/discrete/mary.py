"""
Best-first branch-and-bound over M-ary phases w_n ∈ {e^{j2πm/M}} with w₁ = 1.

Two lower bounds are kept per node and combined by max:
  individual  Σ_k 1/(|A_k| + ρ_k)², from |h_kᴴw| ≤ |A_k| + Σ_{n∈𝒰}|h_kn|;
  aggregate   K²/UB with UB ≥ wᴴR∘w = Σ_k |h_kᴴw|² over all completions.
"""

import heapq
import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from baselines.alternating import AoConfig, ao_solve
from problem.conf import beam_setting
from problem.exceptions import ContractViolation, ResourceLimitError
from problem.instance import (
    TWO_PI,
    Beamformer,
    Certificate,
    ChannelSet,
    PhaseConstraint,
    Solution,
    sum_inverse,
)
from problem.linalg import eigenvalue_ceiling, quadratic_form

logger = logging.getLogger('beamforming')

PRUNE_TOL = 1e-12


def unit_levels(M: int) -> NDArray[np.complex128]:
    if M == 2:
        return np.array([1.0, -1.0], dtype=np.complex128)
    return np.exp(1j * TWO_PI * np.arange(M) / M)


@dataclass(frozen=True, eq=False)
class MaryNode:
    """
    Prefix of phase levels with its cached sums.

    partial_sums  A_k = Σ_{n≤d} h*_kn w_n
    residuals     ρ_k = Σ_{n>d} |h_kn|
    quad          w_ℱᴴ R∘_ℱℱ w_ℱ
    cross         w_ℱᴴ R∘_ℱ,: (full row; only entries past the prefix are used)
    """

    prefix: tuple[int, ...]
    partial_sums: NDArray[np.complex128]
    residuals: NDArray[np.float64]
    quad: float
    cross: NDArray[np.complex128]

    @property
    def depth(self) -> int:
        return len(self.prefix)

    @classmethod
    def from_prefix(cls, prefix, ch: ChannelSet, M: int):
        prefix = tuple(int(m) for m in prefix)
        if not prefix or prefix[0] != 0:
            raise ContractViolation("M-ary nodes fix w₁ = 1 (level 0)")
        if len(prefix) > ch.N:
            raise ContractViolation("Prefix is longer than the antenna count")
        if any(not 0 <= m < M for m in prefix):
            raise ContractViolation(f"Phase levels must lie in 0..{M - 1}")
        d = len(prefix)
        w = unit_levels(M)[list(prefix)]
        R = ch.gram
        return cls(
            prefix=prefix,
            partial_sums=ch.h[:, :d].conj() @ w,
            residuals=np.sum(np.abs(ch.h[:, d:]), axis=1),
            quad=quadratic_form(w, R[:d, :d]),
            cross=w.conj() @ R[:d, :],
        )

    def child(self, level: int, v: complex, ch: ChannelSet, residuals: NDArray) -> 'MaryNode':
        """Append w_{d+1} = v; `residuals` are the precomputed suffix sums for the child's depth."""
        d = self.depth
        R = ch.gram
        return MaryNode(
            prefix=self.prefix + (level,),
            partial_sums=self.partial_sums + ch.h[:, d].conj() * v,
            residuals=residuals,
            quad=self.quad + 2.0 * float(np.real(self.cross[d] * v)) + float(np.real(R[d, d])),
            cross=self.cross + np.conj(v) * R[d, :],
        )


def indiv_lb(node: MaryNode) -> float:
    """Σ_k 1/(|A_k| + ρ_k)²; +∞ when some user is nulled on the whole subtree."""
    peak = np.abs(node.partial_sums) + node.residuals
    if np.any(peak <= 0):
        return math.inf
    return float(np.sum(1.0 / peak**2))


def agg_lb(node: MaryNode, R_circ: NDArray, ceiling: float | None = None) -> float:
    """K²/UB with UB = C + 2‖w_ℱᴴR∘_ℱ𝒰‖₁ + (N−d)·λ_max(R∘_𝒰𝒰)."""
    N, d = R_circ.shape[0], node.depth
    K = node.partial_sums.size
    if ceiling is None:
        ceiling = eigenvalue_ceiling(R_circ[d:, d:])
    ub_tot = node.quad + 2.0 * float(np.sum(np.abs(node.cross[d:]))) + (N - d) * ceiling
    if ub_tot <= 0:
        return math.inf
    return K * K / ub_tot


def combined_lb(node: MaryNode, R_circ: NDArray, ceiling: float | None = None) -> float:
    return max(indiv_lb(node), agg_lb(node, R_circ, ceiling))


def _warm_start(ch: ChannelSet, M: int) -> tuple[tuple[int, ...] | None, float]:
    solution = ao_solve(ch, PhaseConstraint.mary(M), AoConfig(restarts=1))
    if not solution.is_feasible:
        return None, math.inf
    levels = np.round(solution.beamformer.theta * M / TWO_PI).astype(np.int64) % M
    node = MaryNode.from_prefix(tuple(((levels - levels[0]) % M).tolist()), ch, M)
    return node.prefix, sum_inverse(np.abs(node.partial_sums) ** 2, ch.null_floors)


def solve_mary(
    ch: ChannelSet,
    M: int,
    power: float | None = None,
    warm_start: bool = True,
    node_cap: int | None = None,
) -> Solution:
    """
    Global minimizer over the M-ary phase set with w₁ = 1.

    Nodes are popped in order of (lower bound, deeper first, prefix). Leaves
    enter the heap keyed by their exact objective, so the first leaf popped
    is optimal. Raises ResourceLimitError when the open set exceeds node_cap.
    """
    if M < 2:
        raise ContractViolation("solve_mary needs M >= 2")
    power = beam_setting('DEFAULT_POWER') if power is None else power
    node_cap = beam_setting('MARY_NODE_CAP') if node_cap is None else node_cap
    N = ch.N
    R = ch.gram
    floors = ch.null_floors
    levels = unit_levels(M)
    ceilings = [eigenvalue_ceiling(R[d:, d:]) for d in range(N + 1)]
    suffix = np.concatenate(
        [np.cumsum(np.abs(ch.h[:, ::-1]), axis=1)[:, ::-1], np.zeros((ch.K, 1))], axis=1
    )

    best_prefix, best_f = _warm_start(ch, M) if warm_start else (None, math.inf)
    root = MaryNode.from_prefix((0,), ch, M)
    if N == 1:
        best_prefix, best_f = root.prefix, sum_inverse(np.abs(root.partial_sums) ** 2, floors)
        heap = []
    else:
        heap = [(combined_lb(root, R, ceilings[1]), -1, root.prefix, root)]

    explored = 0
    while heap:
        lb, _, prefix, node = heapq.heappop(heap)
        if lb >= best_f - PRUNE_TOL:
            break
        explored += 1
        d = node.depth
        if d == N:
            best_prefix, best_f = prefix, lb
            logger.debug(f"M-ary BB leaf popped, f={best_f:.12g}")
            break
        for level in range(M):
            child = node.child(level, levels[level], ch, suffix[:, d + 1])
            if child.depth == N:
                value = sum_inverse(np.abs(child.partial_sums) ** 2, floors)
                if value < best_f:
                    heapq.heappush(heap, (value, -child.depth, child.prefix, child))
            else:
                bound = combined_lb(child, R, ceilings[child.depth])
                if bound < best_f - PRUNE_TOL:
                    heapq.heappush(heap, (bound, -child.depth, child.prefix, child))
        if len(heap) > node_cap:
            raise ResourceLimitError(f"M-ary BB open set exceeded {node_cap} nodes (N={N}, M={M})")

    if best_prefix is None:
        best_prefix = (0,) * N
        logger.warning(f"M-ary BB: every assignment nulls a user (N={N}, K={ch.K}, M={M})")
    beamformer = Beamformer.from_levels(best_prefix, M)
    logger.info(f"M-ary BB M={M} N={N} K={ch.K}: f*={best_f:.12g}, {explored} nodes")
    return Solution.assemble(
        beamformer,
        ch,
        power,
        Certificate(global_lower_bound=best_f, gap=0.0, nodes_explored=explored),
        solver='bb',
        constraint=PhaseConstraint.mary(M),
        objective_value=best_f,
    )
