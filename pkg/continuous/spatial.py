"""
Spatial branch-and-bound over phase boxes for continuous phases.

Each node carries a certified lower bound (the larger of the relaxation's dual
bound and a chord bound) and is rounded to two feasible beamformers whose
objective values feed the incumbent. Boxes are bisected along their widest
coordinate until every open box is within ε of the incumbent.
"""

import heapq
import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from baselines.alternating import AoConfig, ao_solve, coordinate_descent
from problem.conf import beam_setting
from problem.exceptions import ContractViolation, DimensionError
from problem.instance import (
    STATUS_DEGRADED,
    STATUS_OPTIMAL,
    TWO_PI,
    Beamformer,
    Certificate,
    ChannelSet,
    PhaseConstraint,
    Solution,
    objective,
)

from .relaxation import WIDTH_FLOOR, PhaseBox, SdpOutcome, solve_node

logger = logging.getLogger('beamforming')

ZERO_ENTRY = 1e-12


@dataclass(eq=False)
class SbbNode:
    box: PhaseBox
    lb: float
    depth: int
    relaxation: SdpOutcome | None = None


def round_midpoint(box: PhaseBox) -> Beamformer:
    return Beamformer.from_phases(box.midpoint)


def round_projection(box: PhaseBox, lifted: SdpOutcome) -> Beamformer:
    """
    Phase of the anchor column W̃_{n,0}, clamped into the box.

    The phase is taken on the branch nearest the box centre before clamping,
    so a box touching 2π still recovers phases just past 0. A vanishing
    entry falls back to the centre.
    """
    column = np.asarray(lifted.lifted)[1:, 0]
    if column.size != box.N:
        raise DimensionError("Lifted matrix does not match the phase box")
    centre = box.midpoint
    offset = np.mod(np.angle(column) - centre + math.pi, TWO_PI) - math.pi
    theta = np.clip(centre + offset, box.lo, box.hi)
    theta = np.where(np.abs(column) > ZERO_ENTRY, theta, centre)
    return Beamformer.from_phases(theta)


def branch_box(box: PhaseBox) -> tuple[PhaseBox, PhaseBox]:
    """Bisect the widest coordinate; the lowest index wins ties."""
    widths = box.widths
    if np.max(widths) <= WIDTH_FLOOR:
        raise ContractViolation("A box of zero widths is a single point and cannot be branched")
    return box.bisect(int(np.argmax(widths)))


def chord_lower_bound(ch: ChannelSet, box: PhaseBox) -> float:
    """
    Σ_k 1/(|h_kᴴw̄| + Σ_n |h_kn|·2 sin(Δθ_n/4))², valid for every w in the box
    since |e^{jθ} − e^{jθ̄}| ≤ 2 sin(Δθ/4) within an interval of width Δθ.
    """
    centre = np.exp(1j * box.midpoint)
    chords = 2.0 * np.sin(box.widths / 4.0)
    peak = np.abs(ch.h.conj() @ centre) + np.abs(ch.h) @ chords
    if np.any(peak <= 0):
        return math.inf
    return float(np.sum(1.0 / peak**2))


def initial_boxes(N: int) -> list[PhaseBox]:
    """θ₁ = 0 and each other coordinate pre-split into [0, π] and [π, 2π]."""
    boxes = []
    for halves in itertools.product((0, 1), repeat=N - 1):
        lo = np.zeros(N)
        hi = np.zeros(N)
        lo[1:] = math.pi * np.asarray(halves, dtype=np.float64)
        hi[1:] = lo[1:] + math.pi
        boxes.append(PhaseBox(lo, hi))
    return boxes


@dataclass
class SpatialSearch:
    """Best-first search state; `run` drives it to an ε-certified incumbent or the node budget."""

    ch: ChannelSet
    epsilon: float
    node_budget: int
    sdp_tol: float
    incumbent: float = math.inf
    incumbent_theta: np.ndarray | None = None
    explored: int = 0
    pruned_floor: float = math.inf
    pruned_volume: float = 0.0
    exhausted: bool = False
    open_nodes: list = field(default_factory=list)
    _counter: itertools.count = field(default_factory=itertools.count)

    def offer(self, beamformer: Beamformer) -> None:
        value = objective(beamformer, self.ch)
        if value < self.incumbent:
            self.incumbent = value
            self.incumbent_theta = beamformer.theta.copy()
            logger.debug(f"SBB incumbent f={value:.12g} after {self.explored} nodes")

    def evaluate(self, box: PhaseBox, depth: int) -> SbbNode:
        relaxation = solve_node(self.ch, box, self.sdp_tol)
        self.explored += 1
        lb = max(relaxation.dual_lower_bound, chord_lower_bound(self.ch, box))
        self.offer(round_midpoint(box))
        self.offer(round_projection(box, relaxation))
        return SbbNode(box=box, lb=lb, depth=depth, relaxation=relaxation)

    def prune(self, node: SbbNode) -> None:
        self.pruned_floor = min(self.pruned_floor, node.lb)
        self.pruned_volume += node.box.volume()

    def admit(self, node: SbbNode) -> None:
        if node.lb < self.incumbent - self.epsilon:
            heapq.heappush(self.open_nodes, (node.lb, next(self._counter), node))
        else:
            self.prune(node)

    def global_lower_bound(self) -> float:
        open_floor = self.open_nodes[0][0] if self.open_nodes else math.inf
        return min(self.pruned_floor, open_floor, self.incumbent)

    def run(self, boxes: list[PhaseBox]) -> None:
        for box in boxes:
            self.admit(self.evaluate(box, 0))
        while self.open_nodes:
            lb, _, node = self.open_nodes[0]
            if lb >= self.incumbent - self.epsilon:
                # the heap minimum already meets the gap; everything left does too
                for _, _, rest in self.open_nodes:
                    self.prune(rest)
                self.open_nodes.clear()
                break
            if self.explored + 2 > self.node_budget:
                self.exhausted = True
                break
            heapq.heappop(self.open_nodes)
            if np.max(node.box.widths) <= WIDTH_FLOOR:
                self.prune(node)
                continue
            for child in branch_box(node.box):
                self.admit(self.evaluate(child, node.depth + 1))


def solve_continuous(
    ch: ChannelSet,
    epsilon: float | None = None,
    power: float | None = None,
    node_budget: int | None = None,
    warm_starts: int | None = None,
    polish: bool = True,
    sdp_tol: float | None = None,
) -> Solution:
    """
    ε-optimal continuous-phase beamformer with a certified gap.

    On budget exhaustion the incumbent is returned with status 'degraded' and
    the remaining certified gap. An incumbent that nulls a user comes back
    infeasible with an infinite gap.
    """
    epsilon = beam_setting('EPSILON') if epsilon is None else epsilon
    if not epsilon > 0:
        raise ContractViolation("solve_continuous needs epsilon > 0")
    power = beam_setting('DEFAULT_POWER') if power is None else power
    node_budget = beam_setting('SBB_NODE_BUDGET') if node_budget is None else node_budget
    warm_starts = beam_setting('SBB_WARM_STARTS') if warm_starts is None else warm_starts
    sdp_tol = beam_setting('SDP_TOL') if sdp_tol is None else sdp_tol
    constraint = PhaseConstraint.continuous()

    search = SpatialSearch(ch=ch, epsilon=epsilon, node_budget=node_budget, sdp_tol=sdp_tol)
    if warm_starts > 0:
        warm = ao_solve(ch, constraint, AoConfig(restarts=warm_starts), power=power)
        search.offer(warm.beamformer)
    if ch.N == 1:
        search.offer(Beamformer.from_phases([0.0]))
        search.pruned_floor = search.incumbent
    else:
        search.run(initial_boxes(ch.N))

    lower = search.global_lower_bound()
    theta = search.incumbent_theta if search.incumbent_theta is not None else np.zeros(ch.N)
    beamformer = Beamformer.from_phases(theta)
    if polish and math.isfinite(search.incumbent):
        polished = coordinate_descent(ch, theta, constraint, AoConfig(restarts=1))
        candidate = Beamformer.from_phases(polished.theta)
        if objective(candidate, ch) < objective(beamformer, ch):
            beamformer = candidate

    value = objective(beamformer, ch)
    gap = max(0.0, value - lower) if math.isfinite(value) else math.inf
    status = STATUS_OPTIMAL
    if search.exhausted:
        status = STATUS_DEGRADED
        logger.warning(f"SBB node budget {node_budget} exhausted; remaining gap {gap:.3g}")
    logger.info(f"SBB N={ch.N} K={ch.K}: f={value:.12g}, lb={lower:.12g}, {search.explored} nodes")
    return Solution.assemble(
        beamformer,
        ch,
        power,
        Certificate(global_lower_bound=lower, gap=gap, nodes_explored=search.explored),
        status=status,
        solver='bb',
        constraint=constraint,
        objective_value=value,
    )
