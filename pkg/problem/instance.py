"""
Problem instances, the reduced sum-of-inverse-gains objective and the
closed-form max-min power allocation.

For a fixed beamformer w the fair power split gives every user the same SNR
t* = P / Σ_k 1/G_k, so the joint design reduces to minimizing
f(w) = Σ_k 1/|h_kᴴw|² over the feasible phase set.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import ContractViolation, DimensionError, InfeasibleUserError
from .linalg import real_part_matrix

TWO_PI = 2.0 * math.pi
# |h_kᴴw|² at or below NULL_RATIO·‖h_k‖²·N counts as an exact null.
NULL_RATIO = 1e-12
UNIT_MODULUS_ATOL = 1e-12

STATUS_OPTIMAL = 'optimal'
STATUS_DEGRADED = 'degraded'
STATUS_INFEASIBLE = 'infeasible'
# heuristic result with no optimality claim
STATUS_LOCAL = 'local'


def wrap_phases(theta: ArrayLike) -> NDArray[np.float64]:
    """Map phases into [0, 2π)."""
    wrapped = np.mod(np.asarray(theta, dtype=np.float64), TWO_PI)
    wrapped[wrapped >= TWO_PI] = 0.0
    return wrapped


@dataclass(frozen=True)
class PhaseConstraint:
    """Feasible phase set: binary {0, π}, M-ary {2πm/M} or continuous [0, 2π)."""

    kind: str
    levels: int | None = None

    BINARY = 'binary'
    MARY = 'mary'
    CONTINUOUS = 'continuous'

    def __post_init__(self):
        if self.kind == self.MARY and self.levels == 2:
            object.__setattr__(self, 'kind', self.BINARY)
        if self.kind == self.BINARY:
            object.__setattr__(self, 'levels', 2)
        elif self.kind == self.MARY:
            if self.levels is None or self.levels < 2:
                raise ContractViolation("M-ary phase sets need M >= 2 levels")
        elif self.kind == self.CONTINUOUS:
            object.__setattr__(self, 'levels', None)
        else:
            raise ContractViolation(f"Unknown phase constraint kind: {self.kind}")

    @classmethod
    def binary(cls):
        return cls(cls.BINARY)

    @classmethod
    def mary(cls, M: int):
        return cls(cls.MARY, int(M))

    @classmethod
    def continuous(cls):
        return cls(cls.CONTINUOUS)

    @classmethod
    def parse(cls, tag: str, M: int | None = None):
        """Parse 'binary', 'mary' (with M), 'mary4' or 'continuous'."""
        tag = tag.strip().lower()
        if tag == cls.BINARY:
            return cls.binary()
        if tag == cls.CONTINUOUS:
            return cls.continuous()
        if tag.startswith(cls.MARY):
            suffix = tag[len(cls.MARY):]
            if suffix:
                return cls.mary(int(suffix))
            if M is None:
                raise ContractViolation("An M-ary constraint needs its level count M")
            return cls.mary(M)
        raise ContractViolation(f"Unknown phase constraint: {tag}")

    @property
    def is_discrete(self) -> bool:
        return self.kind != self.CONTINUOUS

    @property
    def tag(self) -> str:
        if self.kind == self.MARY:
            return f"mary{self.levels}"
        return self.kind

    def phase_levels(self) -> NDArray[np.float64] | None:
        if not self.is_discrete:
            return None
        return TWO_PI * np.arange(self.levels) / self.levels

    def __str__(self):
        return self.tag


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """K channel vectors of length N (rows of h) and a common noise power."""

    h: NDArray[np.complex128]
    sigma2: float = 1.0

    def __post_init__(self):
        channels = np.array(self.h, dtype=np.complex128)
        if channels.ndim == 1:
            channels = channels[np.newaxis, :]
        if channels.ndim != 2 or channels.shape[0] < 1 or channels.shape[1] < 1:
            raise DimensionError(f"Channels must form a nonempty K x N array, got {channels.shape}")
        if not np.all(np.isfinite(channels)):
            raise ContractViolation("Channel entries must be finite")
        if not self.sigma2 > 0:
            raise ContractViolation(f"Noise power must be positive, got {self.sigma2}")
        channels.flags.writeable = False
        object.__setattr__(self, 'h', channels)
        object.__setattr__(self, 'sigma2', float(self.sigma2))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[complex]], sigma2: float = 1.0):
        return cls(np.asarray(rows, dtype=np.complex128), sigma2)

    @property
    def K(self) -> int:
        return self.h.shape[0]

    @property
    def N(self) -> int:
        return self.h.shape[1]

    @cached_property
    def norms2(self) -> NDArray[np.float64]:
        return np.sum(np.abs(self.h) ** 2, axis=1)

    @cached_property
    def null_floors(self) -> NDArray[np.float64]:
        return NULL_RATIO * self.norms2 * self.N

    @cached_property
    def gram(self) -> NDArray[np.complex128]:
        """R∘ = Σ_k h_k h_kᴴ."""
        return self.h.T @ self.h.conj()

    @cached_property
    def real_gram(self) -> NDArray[np.float64]:
        """R = Σ_k Re{h_k h_kᴴ}, the binary-phase quadratic."""
        return real_part_matrix(self.gram)


@dataclass(frozen=True, eq=False)
class Beamformer:
    """Unit-modulus weights w_n = e^{jθ_n}; the 1/√N factor is kept out of w."""

    theta: NDArray[np.float64]
    w: NDArray[np.complex128] | None = field(default=None)

    def __post_init__(self):
        theta = wrap_phases(np.atleast_1d(self.theta))
        if self.w is None:
            weights = np.exp(1j * theta)
        else:
            weights = np.array(self.w, dtype=np.complex128)
            if weights.shape != theta.shape:
                raise DimensionError("Beamformer phases and weights differ in length")
            if np.any(np.abs(np.abs(weights) - 1.0) > UNIT_MODULUS_ATOL):
                raise ContractViolation("Beamformer weights must have unit modulus")
        theta.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, 'theta', theta)
        object.__setattr__(self, 'w', weights)

    @classmethod
    def from_phases(cls, theta: ArrayLike):
        return cls(np.asarray(theta, dtype=np.float64))

    @classmethod
    def from_signs(cls, signs: ArrayLike):
        signs = np.asarray(signs, dtype=np.float64)
        if not np.all(np.abs(signs) == 1.0):
            raise ContractViolation("Binary beamformers take signs in {-1, +1}")
        return cls(np.where(signs > 0, 0.0, math.pi), signs.astype(np.complex128))

    @classmethod
    def from_levels(cls, levels: ArrayLike, M: int):
        if M == 2:
            return cls.from_signs(np.where(np.asarray(levels) == 0, 1.0, -1.0))
        levels = np.asarray(levels, dtype=np.int64) % M
        return cls(TWO_PI * levels / M)

    @property
    def N(self) -> int:
        return self.theta.size

    def rotated(self, offset: float):
        """Common phase rotation; the objective is invariant to it."""
        return Beamformer.from_phases(self.theta + offset)

    def anchored(self):
        """Rotate so that θ₁ = 0."""
        return self.rotated(-self.theta[0])


@dataclass(frozen=True)
class Certificate:
    global_lower_bound: float
    gap: float
    nodes_explored: int = 0


@dataclass(frozen=True, eq=False)
class Solution:
    beamformer: Beamformer
    objective: float
    powers: NDArray[np.float64]
    snr_floor: float
    certificate: Certificate
    status: str = STATUS_OPTIMAL
    solver: str = ''
    constraint: PhaseConstraint | None = None

    @classmethod
    def assemble(
        cls,
        beamformer: Beamformer,
        ch: ChannelSet,
        power: float,
        certificate: Certificate,
        status: str = STATUS_OPTIMAL,
        solver: str = '',
        constraint: PhaseConstraint | None = None,
        objective_value: float | None = None,
    ):
        """Attach the closed-form power allocation to a beamformer."""
        value = objective(beamformer, ch) if objective_value is None else objective_value
        if math.isinf(value):
            return cls(
                beamformer=beamformer,
                objective=math.inf,
                powers=np.zeros(ch.K),
                snr_floor=0.0,
                certificate=certificate,
                status=STATUS_INFEASIBLE,
                solver=solver,
                constraint=constraint,
            )
        powers, t_star = allocate_power(effective_gains(beamformer, ch), power)
        return cls(
            beamformer=beamformer,
            objective=value,
            powers=powers,
            snr_floor=t_star,
            certificate=certificate,
            status=status,
            solver=solver,
            constraint=constraint,
        )

    @property
    def is_feasible(self) -> bool:
        return not math.isinf(self.objective)


def _weights(w) -> NDArray[np.complex128]:
    if isinstance(w, Beamformer):
        return w.w
    return np.asarray(w, dtype=np.complex128)


def received_gains(w, ch: ChannelSet) -> NDArray[np.float64]:
    """|h_kᴴw|² for every user."""
    weights = _weights(w)
    if weights.shape != (ch.N,):
        raise DimensionError(f"Beamformer of length {weights.size} does not match N={ch.N}")
    return np.abs(ch.h.conj() @ weights) ** 2


def sum_inverse(gains: NDArray, floors: NDArray) -> float:
    """Σ 1/gains, or +∞ when any gain is at or below its null floor."""
    if np.any(gains <= floors):
        return math.inf
    return float(np.sum(1.0 / gains))


def objective(w, ch: ChannelSet) -> float:
    """f(w) = Σ_k 1/|h_kᴴw|² with the +∞ sentinel for nulled users."""
    return sum_inverse(received_gains(w, ch), ch.null_floors)


def objective_many(W: ArrayLike, ch: ChannelSet) -> NDArray[np.float64]:
    """Objective for each row of a (m, N) array of weights."""
    weights = np.asarray(W, dtype=np.complex128)
    if weights.ndim != 2 or weights.shape[1] != ch.N:
        raise DimensionError(f"Expected an (m, {ch.N}) weight array, got {weights.shape}")
    gains = np.abs(weights @ ch.h.conj().T) ** 2
    nulled = np.any(gains <= ch.null_floors, axis=1)
    with np.errstate(divide='ignore'):
        values = np.sum(1.0 / gains, axis=1)
    values[nulled] = math.inf
    return values


def trivial_lower_bound(ch: ChannelSet) -> float:
    """Σ_k 1/(N‖h_k‖²), from |h_kᴴw|² ≤ N‖h_k‖² for unit-modulus w."""
    if np.any(ch.norms2 == 0):
        return math.inf
    return float(np.sum(1.0 / (ch.N * ch.norms2)))


def effective_gains(w, ch: ChannelSet) -> NDArray[np.float64]:
    """G_k = |h_kᴴw|² / (Nσ²); a nulled user gets exactly 0."""
    gains = received_gains(w, ch)
    gains = np.where(gains <= ch.null_floors, 0.0, gains)
    return gains / (ch.N * ch.sigma2)


def allocate_power(G: ArrayLike, P: float) -> tuple[NDArray[np.float64], float]:
    """
    Closed-form max-min power split for fixed gains.

    Returns (powers, t_star) with t* = P / Σ_k 1/G_k and P_k = t*/G_k, so every
    user reaches the same SNR and the budget is used in full.
    """
    gains = np.asarray(G, dtype=np.float64)
    if gains.ndim != 1 or gains.size == 0:
        raise DimensionError("allocate_power needs a nonempty gain vector")
    if not P > 0:
        raise ContractViolation(f"Power budget must be positive, got {P}")
    nulled = np.flatnonzero(gains <= 0)
    if nulled.size:
        raise InfeasibleUserError(
            f"Beam nulls user(s) {nulled.tolist()}; the max-min SNR is 0",
            users=nulled.tolist(),
        )
    inverse = 1.0 / gains
    total = float(np.sum(inverse))
    t_star = P / total
    powers = P * inverse / total
    return powers, t_star


def snr_floor(objective_value: float, P: float, N: int, sigma2: float) -> float:
    """t* = P / (N σ² f); a nulled beam (f = +∞) maps to 0."""
    if not (P > 0 and N > 0 and sigma2 > 0):
        raise ContractViolation("snr_floor needs positive P, N and sigma2")
    if math.isinf(objective_value):
        return 0.0
    if not objective_value > 0:
        raise ContractViolation(f"Objective must be positive, got {objective_value}")
    return P / (N * sigma2 * objective_value)
