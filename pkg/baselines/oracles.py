"""
Exhaustive oracles used to certify the branch-and-bound solvers on small instances.
"""

import logging
import math

import numpy as np

from problem.conf import beam_setting
from problem.exceptions import ContractViolation, SearchSpaceTooLarge
from problem.instance import (
    STATUS_LOCAL,
    STATUS_OPTIMAL,
    TWO_PI,
    Beamformer,
    Certificate,
    ChannelSet,
    PhaseConstraint,
    Solution,
    objective_many,
    trivial_lower_bound,
)

logger = logging.getLogger('beamforming')

CHUNK = 1 << 16


def _enumerate_levels(ch: ChannelSet, levels: int, phase_of, anchored: bool, limit: int):
    """
    Scan every level assignment in lexicographic order (first coordinate most
    significant) and return (best level vector, best value, candidate count).
    The first minimizer is kept on ties.
    """
    free = ch.N - 1 if anchored else ch.N
    count = levels ** free
    if count > limit:
        raise SearchSpaceTooLarge(f"{levels}^{free} = {count} candidates exceeds the limit of {limit}")

    place = levels ** np.arange(free - 1, -1, -1, dtype=np.int64)
    best_digits = np.zeros(ch.N, dtype=np.int64)
    best_value = math.inf
    for start in range(0, count, CHUNK):
        index = np.arange(start, min(start + CHUNK, count), dtype=np.int64)
        digits = (index[:, np.newaxis] // place[np.newaxis, :]) % levels
        if anchored:
            digits = np.hstack([np.zeros((index.size, 1), dtype=np.int64), digits])
        values = objective_many(phase_of(digits), ch)
        position = int(np.argmin(values))
        if values[position] < best_value:
            best_value = float(values[position])
            best_digits = digits[position].copy()
    return best_digits, best_value, count


def brute_force_discrete(
    ch: ChannelSet,
    M: int,
    anchored: bool = True,
    power: float | None = None,
    limit: int | None = None,
) -> Solution:
    """Exact minimum over the M-ary phase set; anchored scans only w₁ = 1."""
    if M < 2:
        raise ContractViolation("brute_force_discrete needs M >= 2")
    power = beam_setting('DEFAULT_POWER') if power is None else power
    limit = beam_setting('ORACLE_SPACE_LIMIT') if limit is None else limit

    if M == 2:
        def phase_of(digits):
            return np.where(digits == 0, 1.0, -1.0).astype(np.complex128)
    else:
        def phase_of(digits):
            return np.exp(1j * TWO_PI * digits / M)

    digits, value, count = _enumerate_levels(ch, M, phase_of, anchored, limit)
    logger.debug(f"Brute force M={M} N={ch.N}: {count} candidates, f*={value:.12g}")
    return Solution.assemble(
        Beamformer.from_levels(digits, M),
        ch,
        power,
        Certificate(global_lower_bound=value, gap=0.0, nodes_explored=count),
        status=STATUS_OPTIMAL,
        solver='oracle',
        constraint=PhaseConstraint.mary(M),
        objective_value=value,
    )


def grid_oracle_continuous(
    ch: ChannelSet,
    steps_per_dim: int,
    anchored: bool = True,
    power: float | None = None,
    limit: int | None = None,
) -> Solution:
    """Best point of the uniform phase grid 2πg/steps; an upper bound on the continuous optimum."""
    if steps_per_dim < 1:
        raise ContractViolation("grid_oracle_continuous needs at least one step per dimension")
    power = beam_setting('DEFAULT_POWER') if power is None else power
    limit = beam_setting('ORACLE_SPACE_LIMIT') if limit is None else limit

    def phase_of(digits):
        return np.exp(1j * TWO_PI * digits / steps_per_dim)

    digits, value, count = _enumerate_levels(ch, steps_per_dim, phase_of, anchored, limit)
    lower = trivial_lower_bound(ch)
    gap = 0.0 if math.isinf(value) else max(0.0, value - lower)
    return Solution.assemble(
        Beamformer.from_phases(TWO_PI * digits / steps_per_dim),
        ch,
        power,
        Certificate(global_lower_bound=lower, gap=gap, nodes_explored=count),
        status=STATUS_LOCAL,
        solver='oracle',
        constraint=PhaseConstraint.continuous(),
    )
