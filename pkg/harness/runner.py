"""
Monte Carlo sweeps: dispatch one (channels, mode) pair to its solver and
collect paired rows over the (trial, N, K, mode) grid.
"""

import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial

from django.conf import settings

from baselines.alternating import ao_solve
from baselines.oracles import brute_force_discrete, grid_oracle_continuous
from continuous.spatial import solve_continuous
from discrete.binary import solve_binary
from discrete.mary import solve_mary
from problem.conf import beam_setting
from problem.exceptions import BeamformingError, ContractViolation
from problem.instance import ChannelSet, PhaseConstraint, Solution

from .channels import generate_channels

logger = logging.getLogger('beamforming')

SOLVER_BB = 'bb'
SOLVER_AO = 'ao'
SOLVER_ORACLE = 'oracle'
SOLVERS = (SOLVER_BB, SOLVER_AO, SOLVER_ORACLE)

DEFAULT_GRID_STEPS = 64

# Default sweep: desk-scale grid, 10 dBm with unit noise.
DEFAULT_SWEEP_SEED = 2024
DEFAULT_TRIALS = 200
DEFAULT_N_VALUES = tuple(range(2, 9))
DEFAULT_K_VALUES = (2, 3, 4)
DEFAULT_MODE_TAGS = ('binary', 'mary4', 'continuous', 'ao-binary', 'ao-mary4', 'ao-continuous')
# Exact continuous solvers (bb, oracle) only run up to this many antennas.
DEFAULT_CONTINUOUS_MAX_N = 4


def dbm_to_linear(dbm: float) -> float:
    """P[mW] = 10^(dBm/10); with σ² = 1 this is the normalized linear power."""
    return 10.0 ** (dbm / 10.0)


@dataclass(frozen=True)
class Mode:
    """A (solver, phase constraint) pair such as bb-binary or ao-mary4."""

    solver: str
    constraint: PhaseConstraint

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ContractViolation(f"Unknown solver '{self.solver}'; expected one of {', '.join(SOLVERS)}")

    @classmethod
    def parse(cls, text: str, M: int | None = None):
        """
        Accepts 'binary', 'mary', 'continuous' (branch-and-bound) or the same
        tags prefixed with 'ao-', 'oracle-' or 'bb-'. 'mary' takes M from the
        argument unless written as 'mary4'.
        """
        text = text.strip().lower()
        solver, _, tag = text.partition('-')
        if not tag:
            solver, tag = SOLVER_BB, text
        return cls(solver, PhaseConstraint.parse(tag, M))

    @property
    def tag(self) -> str:
        return f"{self.solver}-{self.constraint.tag}"

    def __str__(self):
        return self.tag


@dataclass(frozen=True)
class SolveParams:
    power: float = field(default_factory=lambda: beam_setting('DEFAULT_POWER'))
    epsilon: float = field(default_factory=lambda: beam_setting('EPSILON'))
    grid_steps: int = DEFAULT_GRID_STEPS

    def __post_init__(self):
        if not self.power > 0:
            raise ContractViolation(f"Power budget must be positive, got {self.power}")
        if not self.epsilon > 0:
            raise ContractViolation(f"epsilon must be positive, got {self.epsilon}")
        if self.grid_steps < 1:
            raise ContractViolation("The grid oracle needs at least one step per dimension")

    @classmethod
    def from_options(cls, power=None, epsilon=None, grid_steps=None):
        """Fill unset options from the BEAMFORMING settings."""
        return cls(
            power=beam_setting('DEFAULT_POWER') if power is None else power,
            epsilon=beam_setting('EPSILON') if epsilon is None else epsilon,
            grid_steps=DEFAULT_GRID_STEPS if grid_steps is None else grid_steps,
        )


@dataclass(frozen=True)
class SweepConfig:
    seed: int = DEFAULT_SWEEP_SEED
    trials: int = DEFAULT_TRIALS
    N_values: tuple[int, ...] = DEFAULT_N_VALUES
    K_values: tuple[int, ...] = DEFAULT_K_VALUES
    modes: tuple[Mode, ...] = field(default_factory=lambda: tuple(Mode.parse(tag) for tag in DEFAULT_MODE_TAGS))
    power: float = 10.0
    sigma2: float = 1.0
    epsilon: float = 1e-3
    grid_steps: int = DEFAULT_GRID_STEPS
    continuous_max_N: int = DEFAULT_CONTINUOUS_MAX_N

    def __post_init__(self):
        if self.trials < 1:
            raise ContractViolation("A sweep needs at least one trial")
        if not self.power > 0:
            raise ContractViolation(f"Power budget must be positive, got {self.power}")
        if not self.sigma2 > 0:
            raise ContractViolation(f"Noise power must be positive, got {self.sigma2}")
        if not self.epsilon > 0:
            raise ContractViolation(f"epsilon must be positive, got {self.epsilon}")
        if not (self.N_values and self.K_values and self.modes):
            raise ContractViolation("A sweep needs at least one N, one K and one mode")
        if min(self.N_values) < 1 or min(self.K_values) < 1:
            raise ContractViolation("N and K values must be positive")
        if self.continuous_max_N < 1:
            raise ContractViolation("continuous_max_N must be positive")

    @property
    def params(self) -> SolveParams:
        return SolveParams(power=self.power, epsilon=self.epsilon, grid_steps=self.grid_steps)

    def covers(self, mode: Mode, N: int) -> bool:
        """False for exact continuous solvers above continuous_max_N antennas."""
        if mode.solver == SOLVER_AO or mode.constraint.is_discrete:
            return True
        return N <= self.continuous_max_N

    def to_payload(self) -> dict:
        """JSON-safe form used to ship the config to workers."""
        payload = asdict(self)
        payload['N_values'] = list(self.N_values)
        payload['K_values'] = list(self.K_values)
        payload['modes'] = [mode.tag for mode in self.modes]
        return payload

    @classmethod
    def from_payload(cls, payload: dict):
        return cls(
            seed=int(payload['seed']),
            trials=int(payload['trials']),
            N_values=tuple(int(n) for n in payload['N_values']),
            K_values=tuple(int(k) for k in payload['K_values']),
            modes=tuple(Mode.parse(tag) for tag in payload['modes']),
            power=float(payload.get('power', 10.0)),
            sigma2=float(payload.get('sigma2', 1.0)),
            epsilon=float(payload.get('epsilon', 1e-3)),
            grid_steps=int(payload.get('grid_steps', DEFAULT_GRID_STEPS)),
            continuous_max_N=int(payload.get('continuous_max_N', DEFAULT_CONTINUOUS_MAX_N)),
        )


@dataclass
class SweepRow:
    trial: int
    N: int
    K: int
    solver: str
    constraint: str
    objective: float
    snr_floor: float
    gap: float
    nodes: int
    wall_time_s: float
    status: str


def solve(ch: ChannelSet, mode: Mode, params: SolveParams | None = None) -> Solution:
    """Route one instance to the solver for its mode."""
    params = params or SolveParams()
    constraint = mode.constraint
    if mode.solver == SOLVER_AO:
        return ao_solve(ch, constraint, power=params.power)
    if mode.solver == SOLVER_ORACLE:
        if constraint.is_discrete:
            return brute_force_discrete(ch, constraint.levels, power=params.power)
        return grid_oracle_continuous(ch, params.grid_steps, power=params.power)
    if constraint.kind == PhaseConstraint.BINARY:
        return solve_binary(ch, power=params.power)
    if constraint.kind == PhaseConstraint.MARY:
        return solve_mary(ch, constraint.levels, power=params.power)
    return solve_continuous(ch, epsilon=params.epsilon, power=params.power)


def run_instance(ch: ChannelSet, mode: Mode, params: SolveParams | None = None, trial: int = 0) -> SweepRow:
    """Solve and time one instance; solver errors land in the row's status."""
    started = time.perf_counter()
    try:
        solution = solve(ch, mode, params)
    except BeamformingError as exc:
        elapsed = time.perf_counter() - started
        logger.error(f"Trial {trial} {mode} (N={ch.N}, K={ch.K}) failed: {exc}")
        return SweepRow(
            trial=trial,
            N=ch.N,
            K=ch.K,
            solver=mode.solver,
            constraint=mode.constraint.tag,
            objective=math.inf,
            snr_floor=0.0,
            gap=math.inf,
            nodes=0,
            wall_time_s=elapsed,
            status=f"error: {exc}",
        )
    elapsed = time.perf_counter() - started
    return SweepRow(
        trial=trial,
        N=ch.N,
        K=ch.K,
        solver=mode.solver,
        constraint=mode.constraint.tag,
        objective=solution.objective,
        snr_floor=solution.snr_floor,
        gap=solution.certificate.gap,
        nodes=solution.certificate.nodes_explored,
        wall_time_s=elapsed,
        status=solution.status,
    )


def trial_rows(cfg: SweepConfig, trial: int) -> list[SweepRow]:
    """Every covered (N, K, mode) cell of one trial; modes in a cell share one channel draw."""
    rows = []
    params = cfg.params
    for N in cfg.N_values:
        for K in cfg.K_values:
            ch = generate_channels(cfg.seed, trial, K, N, cfg.sigma2)
            for mode in cfg.modes:
                if cfg.covers(mode, N):
                    rows.append(run_instance(ch, mode, params, trial))
    return rows


def sweep_workers(trials: int) -> int:
    """Threads for an in-process sweep: the WORKERS setting (0 = one per CPU), at most one per trial."""
    configured = int(beam_setting('WORKERS'))
    workers = configured if configured > 0 else (os.cpu_count() or 1)
    return max(1, min(workers, trials))


def _run_in_process(cfg: SweepConfig) -> list[SweepRow]:
    workers = sweep_workers(cfg.trials)
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix='sweep') as pool:
        batches = list(pool.map(partial(trial_rows, cfg), range(cfg.trials)))
    return [row for batch in batches for row in batch]


def _run_on_celery(cfg: SweepConfig) -> list[SweepRow]:
    from celery import group

    from .tasks import run_trial

    payload = cfg.to_payload()
    job = group(run_trial.s(payload, trial) for trial in range(cfg.trials))
    return [SweepRow(**row) for batch in job.apply_async().get() for row in batch]


def run_sweep(cfg: SweepConfig) -> list[SweepRow]:
    """
    Run the full grid, one unit of work per trial.

    With a real broker every trial is a Celery task. Without one (eager mode,
    or Celery not installed) trials run on a local thread pool capped by the
    WORKERS setting. Rows come back in (trial, N, K, mode) order whatever
    order the trials finish in.
    """
    logger.info(
        f"Sweep seed={cfg.seed}: {cfg.trials} trials x N{list(cfg.N_values)} x K{list(cfg.K_values)} "
        f"x {len(cfg.modes)} modes"
    )
    if getattr(settings, 'CELERY_TASK_ALWAYS_EAGER', True):
        rows = _run_in_process(cfg)
    else:
        try:
            rows = _run_on_celery(cfg)
        except ImportError:
            logger.warning("Celery is not installed; running the sweep in-process")
            rows = _run_in_process(cfg)
    failures = sum(1 for row in rows if row.status.startswith('error'))
    if failures:
        logger.warning(f"Sweep finished with {failures} failed row(s) out of {len(rows)}")
    return rows


@dataclass(frozen=True)
class Comparison:
    exact: Solution
    heuristic: Solution

    @property
    def relative_gap(self) -> float:
        """(f_ao − f_bb) / f_bb; 0 when both null a user."""
        exact, heuristic = self.exact.objective, self.heuristic.objective
        if math.isinf(exact):
            return 0.0 if math.isinf(heuristic) else -math.inf
        return (heuristic - exact) / exact


def compare_modes(ch: ChannelSet, exact: Mode, heuristic: Mode, params: SolveParams | None = None) -> Comparison:
    comparison = Comparison(solve(ch, exact, params), solve(ch, heuristic, params))
    logger.info(
        f"Compare {exact} vs {heuristic} (N={ch.N}, K={ch.K}): "
        f"{comparison.exact.objective:.12g} vs {comparison.heuristic.objective:.12g}"
    )
    return comparison
