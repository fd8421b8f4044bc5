"""
Alternating optimization (cyclic coordinate descent) over the phase shifters.

Each pass fixes every phase but one and minimizes the objective exactly over
that phase: by enumeration for discrete phase sets, by a coarse grid refined
with a bounded scalar search for continuous phases. θ₁ stays at 0 throughout.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize_scalar

from problem.conf import beam_setting
from problem.exceptions import ContractViolation, DimensionError
from problem.instance import (
    STATUS_LOCAL,
    TWO_PI,
    Beamformer,
    Certificate,
    ChannelSet,
    PhaseConstraint,
    Solution,
    objective,
    sum_inverse,
    trivial_lower_bound,
)

logger = logging.getLogger('beamforming')

INIT_RANDOM = 'uniform_random'
INIT_MATCHED = 'matched_to_user'
INIT_GIVEN = 'given'
INIT_CHOICES = (INIT_RANDOM, INIT_MATCHED, INIT_GIVEN)

LINE_SEARCH_XATOL = 1e-10
# Stand-in for +∞ inside the bounded line search.
LINE_SEARCH_CAP = 1e300


@dataclass(frozen=True)
class AoConfig:
    max_sweeps: int = field(default_factory=lambda: beam_setting('AO_MAX_SWEEPS'))
    rel_tol: float = field(default_factory=lambda: beam_setting('AO_REL_TOL'))
    init: str = INIT_RANDOM
    seed: int = 0
    user: int = 0
    phases: tuple[float, ...] | None = None
    restarts: int = field(default_factory=lambda: beam_setting('AO_RESTARTS'))
    grid_points: int = field(default_factory=lambda: beam_setting('AO_GRID_POINTS'))

    def __post_init__(self):
        if self.max_sweeps < 1:
            raise ContractViolation("AO needs max_sweeps >= 1")
        if not self.rel_tol > 0:
            raise ContractViolation("AO needs a positive rel_tol")
        if self.restarts < 1:
            raise ContractViolation("AO needs at least one start")
        if self.grid_points < 1:
            raise ContractViolation("AO needs at least one grid point")
        if self.init not in INIT_CHOICES:
            raise ContractViolation(f"Unknown AO initialization: {self.init}")
        if self.init == INIT_GIVEN and self.phases is None:
            raise ContractViolation("A given AO initialization needs its phases")


@dataclass
class DescentRun:
    theta: NDArray[np.float64]
    objective: float
    sweeps: int
    history: list[float] = field(default_factory=list)


def _candidate_values(a, b, phases, floors) -> NDArray[np.float64]:
    """Objective for each candidate phase of one coordinate, given h_kᴴw = a_k + b_k e^{jφ}."""
    gains = np.abs(a[:, np.newaxis] + b[:, np.newaxis] * np.exp(1j * phases)[np.newaxis, :]) ** 2
    nulled = np.any(gains <= floors[:, np.newaxis], axis=0)
    with np.errstate(divide='ignore'):
        values = np.sum(1.0 / gains, axis=0)
    values[nulled] = math.inf
    return values


def _snap(theta: NDArray, constraint: PhaseConstraint) -> NDArray:
    if not constraint.is_discrete:
        return theta
    M = constraint.levels
    return TWO_PI * (np.round(theta * M / TWO_PI) % M) / M


def _best_continuous(a, b, floors, grid_points: int) -> tuple[float, float]:
    grid = TWO_PI * np.arange(grid_points) / grid_points
    values = _candidate_values(a, b, grid, floors)
    index = int(np.argmin(values))
    phase, value = float(grid[index]), float(values[index])
    if math.isinf(value):
        return phase, value

    def along(phi):
        return min(float(_candidate_values(a, b, np.array([phi]), floors)[0]), LINE_SEARCH_CAP)

    step = TWO_PI / grid_points
    refined = minimize_scalar(
        along,
        bounds=(phase - step, phase + step),
        method='bounded',
        options={'xatol': LINE_SEARCH_XATOL},
    )
    if refined.fun < value:
        return float(refined.x) % TWO_PI, float(refined.fun)
    return phase, value


def coordinate_descent(
    ch: ChannelSet,
    theta0,
    constraint: PhaseConstraint,
    cfg: AoConfig,
    record_history: bool = False,
) -> DescentRun:
    """
    Cyclic exact coordinate minimization from one start.

    The start is rotated so that θ₁ = 0 (snapped to the phase set first for
    discrete constraints); coordinates 2..N are then updated in order. An
    update is taken only when it strictly lowers the objective.
    """
    theta = np.array(theta0, dtype=np.float64)
    if theta.shape != (ch.N,):
        raise DimensionError(f"AO start of length {theta.size} does not match N={ch.N}")
    theta = _snap(np.mod(theta - theta[0], TWO_PI), constraint)
    theta[0] = 0.0
    levels = constraint.phase_levels()
    floors = ch.null_floors
    hc = ch.h.conj()

    w = np.exp(1j * theta)
    f = sum_inverse(np.abs(hc @ w) ** 2, floors)
    history = [f] if record_history else []
    sweeps = 0
    for sweeps in range(1, cfg.max_sweeps + 1):
        f_start = f
        y = hc @ w
        for n in range(1, ch.N):
            b = hc[:, n]
            a = y - b * w[n]
            if levels is not None:
                values = _candidate_values(a, b, levels, floors)
                index = int(np.argmin(values))
                phase, value = float(levels[index]), float(values[index])
            else:
                phase, value = _best_continuous(a, b, floors, cfg.grid_points)
            if value < f:
                theta[n] = phase
                w[n] = np.exp(1j * phase)
                y = a + b * w[n]
                f = value
            if record_history:
                history.append(f)
        if math.isinf(f) or f_start - f < cfg.rel_tol * f:
            break
    return DescentRun(theta=theta, objective=f, sweeps=sweeps, history=history)


def initial_points(ch: ChannelSet, cfg: AoConfig) -> list[NDArray[np.float64]]:
    """Deterministic start points; extra restarts are seeded uniform draws."""
    streams = [np.random.default_rng(child) for child in np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)]
    starts = [rng.uniform(0.0, TWO_PI, ch.N) for rng in streams]
    if cfg.init == INIT_MATCHED:
        if not 0 <= cfg.user < ch.K:
            raise ContractViolation(f"User index {cfg.user} is out of range for K={ch.K}")
        starts[0] = np.angle(ch.h[cfg.user])
    elif cfg.init == INIT_GIVEN:
        starts[0] = np.asarray(cfg.phases, dtype=np.float64)
    return starts


def _beamformer(theta: NDArray, constraint: PhaseConstraint) -> Beamformer:
    if constraint.is_discrete:
        M = constraint.levels
        return Beamformer.from_levels(np.round(theta * M / TWO_PI).astype(np.int64) % M, M)
    return Beamformer.from_phases(theta)


def ao_solve(
    ch: ChannelSet,
    constraint: PhaseConstraint,
    cfg: AoConfig | None = None,
    power: float | None = None,
) -> Solution:
    """Multistart alternating optimization; the best start wins, earliest on ties."""
    cfg = cfg or AoConfig()
    power = beam_setting('DEFAULT_POWER') if power is None else power

    best = None
    total_sweeps = 0
    for start in initial_points(ch, cfg):
        run = coordinate_descent(ch, start, constraint, cfg)
        total_sweeps += run.sweeps
        if best is None or run.objective < best.objective:
            best = run

    beamformer = _beamformer(best.theta, constraint)
    value = objective(beamformer, ch)
    lower = trivial_lower_bound(ch)
    gap = 0.0 if math.isinf(value) else max(0.0, value - lower)
    solution = Solution.assemble(
        beamformer,
        ch,
        power,
        Certificate(global_lower_bound=lower, gap=gap, nodes_explored=total_sweeps),
        status=STATUS_LOCAL,
        solver='ao',
        constraint=constraint,
        objective_value=value,
    )
    logger.debug(f"AO [{constraint}] N={ch.N} K={ch.K}: f={solution.objective:.6g} after {total_sweeps} sweeps")
    return solution
