"""
Semidefinite relaxation of the objective over a phase box.

With the lifted vector w̃ = [1; w] and W̃ = w̃w̃ᴴ the node problem relaxes to

    minimize    Σ_k 1/Tr(H̃_k W̃)
    subject to  W̃ ⪰ 0,  W̃_ii = 1,  Re{W̃_{n,0} e^{−jφ_n}} ≥ cos(Δθ_n/2)

where φ_n and Δθ_n are the centre and width of the n-th phase interval. The
epigraph variables t_k ≥ 1/Tr(H̃_k W̃) are eliminated analytically.

The relaxation is solved through its dual,

    maximize    Σ_k 2√λ_k + Σ_n c_n μ_n − Σ_i y_i
    subject to  Z = Diag(y) − Σ_n μ_n A_n − Σ_k λ_k H̃_k ⪰ 0,  λ, μ ≥ 0,

by a primal log-barrier Newton method on (y, μ, λ). Every iterate keeps Z ≻ 0
so its dual value is a certified lower bound; the primal matrix is recovered
from the central path as W̃ ≈ Z⁻¹/t.

Coordinates whose interval has (numerically) zero width are folded into the
anchor column before solving, which keeps the cone at size r+1 for r free
phases.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from problem.conf import beam_setting
from problem.exceptions import ContractViolation, DimensionError
from problem.instance import TWO_PI, ChannelSet, sum_inverse
from problem.linalg import outer_hermitian

logger = logging.getLogger('beamforming')

STATUS_OPTIMAL = 'optimal'
STATUS_MAX_ITERATIONS = 'max_iterations'

WIDTH_FLOOR = 1e-12
BOX_ATOL = 1e-12
GAIN_FLOOR = 1e-10

T_INITIAL = 1.0
T_GROWTH = 20.0
NEWTON_MAX_STEPS = 60
NEWTON_DECREMENT_TOL = 1e-10
ARMIJO_SLOPE = 0.01
BACKTRACK_RATIO = 0.5
MIN_STEP = 1e-14
# Diagonal shift for a Newton system that fails Cholesky, relative to its largest diagonal entry.
REGULARIZE_START = 1e-14
REGULARIZE_GROWTH = 100.0
REGULARIZE_TRIES = 10


@dataclass(frozen=True, eq=False)
class PhaseBox:
    """Product of phase intervals [lo_n, hi_n] inside [0, 2π]."""

    lo: NDArray[np.float64]
    hi: NDArray[np.float64]

    def __post_init__(self):
        lo = np.array(self.lo, dtype=np.float64)
        hi = np.array(self.hi, dtype=np.float64)
        if lo.ndim != 1 or lo.shape != hi.shape or lo.size == 0:
            raise DimensionError("Phase box bounds must be nonempty vectors of equal length")
        if np.any(lo < -BOX_ATOL) or np.any(hi > TWO_PI + BOX_ATOL) or np.any(lo > hi + BOX_ATOL):
            raise ContractViolation("Phase box needs 0 <= lo <= hi <= 2π")
        hi = np.maximum(hi, lo)
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, 'lo', lo)
        object.__setattr__(self, 'hi', hi)

    @classmethod
    def anchored(cls, N: int):
        """θ₁ pinned to 0, every other phase free over [0, 2π]."""
        lo = np.zeros(N)
        hi = np.full(N, TWO_PI)
        hi[0] = 0.0
        return cls(lo, hi)

    @property
    def N(self) -> int:
        return self.lo.size

    @property
    def widths(self) -> NDArray[np.float64]:
        return self.hi - self.lo

    @property
    def midpoint(self) -> NDArray[np.float64]:
        return 0.5 * (self.lo + self.hi)

    def volume(self) -> float:
        """Product of the nonzero widths; a single point has volume 0."""
        widths = self.widths[self.widths > WIDTH_FLOOR]
        return float(np.prod(widths)) if widths.size else 0.0

    def bisect(self, index: int) -> tuple['PhaseBox', 'PhaseBox']:
        cut = 0.5 * (self.lo[index] + self.hi[index])
        left_hi = self.hi.copy()
        left_hi[index] = cut
        right_lo = self.lo.copy()
        right_lo[index] = cut
        return PhaseBox(self.lo, left_hi), PhaseBox(right_lo, self.hi)


@dataclass(frozen=True, eq=False)
class SdpOutcome:
    lifted: NDArray[np.complex128]
    primal_value: float
    dual_lower_bound: float
    status: str
    epigraph: NDArray[np.float64]
    iterations: int = 0


def sector_constraint(lo_n: float, hi_n: float) -> tuple[float, float]:
    """
    Halfspace Re{x e^{−jφ}} ≥ cos(Δ/2) containing e^{jθ} for all θ ∈ [lo, hi].
    Returns (φ, cos(Δ/2)) with φ the interval centre.
    """
    width = hi_n - lo_n
    if width > math.pi + BOX_ATOL:
        raise ContractViolation(f"Sector width {width} exceeds π; split the interval first")
    if width < -BOX_ATOL:
        raise ContractViolation("Sector needs lo <= hi")
    return 0.5 * (lo_n + hi_n), math.cos(0.5 * max(width, 0.0))


def schur_snr_constraint(t_k: float, g_k: float) -> bool:
    """[[t, 1], [1, g]] ⪰ 0, i.e. t ≥ 0, g ≥ 0 and t·g ≥ 1."""
    return t_k >= 0 and g_k >= 0 and t_k * g_k >= 1


@dataclass
class _Reduction:
    hhat: NDArray[np.complex128]  # (K, r+1): anchor column then free coordinates
    transfer: NDArray[np.complex128]  # (N+1, r+1): full lifted vector = transfer @ reduced
    phi: NDArray[np.float64]
    rhs: NDArray[np.float64]


def _reduce(ch: ChannelSet, box: PhaseBox) -> _Reduction:
    fixed = box.widths <= WIDTH_FLOOR
    free = np.flatnonzero(~fixed)
    fixed_idx = np.flatnonzero(fixed)
    fixed_w = np.exp(1j * box.midpoint[fixed_idx])
    anchor = ch.h[:, fixed_idx].conj() @ fixed_w
    hhat = np.hstack([np.conj(anchor)[:, np.newaxis], ch.h[:, free]])

    transfer = np.zeros((ch.N + 1, free.size + 1), dtype=np.complex128)
    transfer[0, 0] = 1.0
    transfer[1 + fixed_idx, 0] = fixed_w
    transfer[1 + free, 1 + np.arange(free.size)] = 1.0

    sectors = [sector_constraint(box.lo[n], box.hi[n]) for n in free]
    phi = np.array([s[0] for s in sectors], dtype=np.float64)
    rhs = np.array([s[1] for s in sectors], dtype=np.float64)
    return _Reduction(hhat, transfer, phi, rhs)


def _solve_positive_definite(A: NDArray, b: NDArray) -> NDArray:
    """
    Solve A s = b for a symmetric positive definite A. Narrow boxes leave A
    badly conditioned, so a growing diagonal shift is added until Cholesky
    succeeds; any shift still gives an ascent direction.
    """
    scale = max(float(np.max(np.abs(np.diag(A)))), np.finfo(np.float64).tiny)
    shift = 0.0
    for _ in range(REGULARIZE_TRIES):
        try:
            factor = scipy.linalg.cho_factor(A + shift * np.eye(A.shape[0]))
        except np.linalg.LinAlgError:
            shift = REGULARIZE_START * scale if shift == 0.0 else shift * REGULARIZE_GROWTH
            continue
        if shift:
            logger.debug(f"Newton system regularized with shift {shift:.3g}")
        return scipy.linalg.cho_solve(factor, b)
    raise np.linalg.LinAlgError(f"Newton system is not positive definite even with shift {shift:.3g}")


class _DualBarrier:
    """Newton log-barrier on the dual variables x = (y, μ, λ), with Z = Σ x_i M_i."""

    def __init__(self, hhat: NDArray, phi: NDArray, rhs: NDArray):
        K, n = hhat.shape
        r = n - 1
        self.K, self.n, self.r = K, n, r
        self.hhat = hhat
        self.rhs = rhs

        basis = np.zeros((n + r + K, n, n), dtype=np.complex128)
        basis[np.arange(n), np.arange(n), np.arange(n)] = 1.0
        for j in range(r):
            basis[n + j, 0, j + 1] = -0.5 * np.exp(-1j * phi[j])
            basis[n + j, j + 1, 0] = -0.5 * np.exp(1j * phi[j])
        basis[n + r:] = -np.einsum('ka,kb->kab', hhat, hhat.conj())
        self.basis = basis
        self.y = slice(0, n)
        self.mu = slice(n, n + r)
        self.lam = slice(n + r, n + r + K)

    def start(self) -> NDArray[np.float64]:
        x = np.zeros(self.basis.shape[0])
        x[self.mu] = 1.0
        x[self.lam] = 1.0
        load = -np.tensordot(x, self.basis, axes=1)
        x[self.y] = float(np.linalg.eigvalsh(load)[-1]) + 1.0
        return x

    def z_matrix(self, x: NDArray) -> NDArray[np.complex128]:
        return np.tensordot(x, self.basis, axes=1)

    def dual_value(self, x: NDArray) -> float:
        return float(-np.sum(x[self.y]) + self.rhs @ x[self.mu] + 2.0 * np.sum(np.sqrt(x[self.lam])))

    def certified_value(self, x: NDArray) -> float:
        """Dual value after shifting y so that Z ⪰ 0 holds exactly in floating point."""
        floor = float(np.linalg.eigvalsh(self.z_matrix(x))[0])
        return self.dual_value(x) - self.n * max(0.0, -floor)

    def barrier(self, x: NDArray, t: float) -> float:
        if np.any(x[self.mu] <= 0) or np.any(x[self.lam] <= 0):
            return -math.inf
        try:
            chol = np.linalg.cholesky(self.z_matrix(x))
        except np.linalg.LinAlgError:
            return -math.inf
        logdet = 2.0 * float(np.sum(np.log(np.real(np.diag(chol)))))
        return t * self.dual_value(x) + logdet + float(np.sum(np.log(x[self.mu])) + np.sum(np.log(x[self.lam])))

    def newton_step(self, x: NDArray, t: float) -> tuple[NDArray, float]:
        S = np.linalg.inv(self.z_matrix(x))
        P = np.einsum('ab,ibc->iac', S, self.basis)
        grad = np.real(np.einsum('iaa->i', P))
        hess = -np.real(np.einsum('iab,jba->ij', P, P))

        mu, lam = x[self.mu], x[self.lam]
        grad[self.y] -= t
        grad[self.mu] += t * self.rhs + 1.0 / mu
        grad[self.lam] += t / np.sqrt(lam) + 1.0 / lam
        diag = np.zeros_like(x)
        diag[self.mu] = -1.0 / mu**2
        diag[self.lam] = -t / (2.0 * lam**1.5) - 1.0 / lam**2
        hess[np.diag_indices_from(hess)] += diag

        step = _solve_positive_definite(-hess, grad)
        return step, float(grad @ step)

    def center(self, x: NDArray, t: float) -> tuple[NDArray, int]:
        current = self.barrier(x, t)
        steps = 0
        for steps in range(1, NEWTON_MAX_STEPS + 1):
            direction, decrement = self.newton_step(x, t)
            if decrement / 2.0 <= NEWTON_DECREMENT_TOL:
                break
            size = 1.0
            while size > MIN_STEP:
                candidate = x + size * direction
                value = self.barrier(candidate, t)
                if value >= current + ARMIJO_SLOPE * size * decrement:
                    x, current = candidate, value
                    break
                size *= BACKTRACK_RATIO
            else:
                break
        return x, steps

    def recover_primal(self, x: NDArray, t: float) -> NDArray[np.complex128]:
        X = np.linalg.inv(self.z_matrix(x)) / t
        X = 0.5 * (X + X.conj().T)
        scale = 1.0 / np.sqrt(np.real(np.diag(X)))
        return X * scale[:, np.newaxis] * scale[np.newaxis, :]

    def gains(self, X: NDArray) -> NDArray[np.float64]:
        return np.real(np.einsum('ka,ab,kb->k', self.hhat.conj(), X, self.hhat))


def solve_node(
    ch: ChannelSet,
    box: PhaseBox,
    tol: float | None = None,
    max_outer: int | None = None,
) -> SdpOutcome:
    """
    Solve the relaxation over `box` and return the lifted matrix together with
    a certified lower bound on f over every unit-modulus w inside the box.
    """
    tol = beam_setting('SDP_TOL') if tol is None else tol
    max_outer = beam_setting('SDP_MAX_OUTER') if max_outer is None else max_outer
    if not tol > 0:
        raise ContractViolation("solve_node needs a positive tolerance")
    if box.N != ch.N:
        raise DimensionError(f"Phase box of length {box.N} does not match N={ch.N}")
    if np.any(box.widths > math.pi + BOX_ATOL):
        raise ContractViolation("Every box width must be at most π before solving")

    reduced = _reduce(ch, box)
    hhat = reduced.hhat
    norms2 = np.sum(np.abs(hhat) ** 2, axis=1)

    if hhat.shape[1] == 1:
        gains = np.abs(hhat[:, 0]) ** 2
        value = sum_inverse(gains, ch.null_floors)
        lifted = outer_hermitian(reduced.transfer[:, 0])
        with np.errstate(divide='ignore'):
            epigraph = 1.0 / gains
        return SdpOutcome(lifted, value, value, STATUS_OPTIMAL, epigraph)

    if np.any(norms2 == 0):
        X = np.eye(hhat.shape[1], dtype=np.complex128)
        lifted = reduced.transfer @ X @ reduced.transfer.conj().T
        return SdpOutcome(lifted, math.inf, math.inf, STATUS_OPTIMAL, np.full(ch.K, math.inf))

    # rescale channels so the relaxed objective is of order one
    scale = float(np.sum(1.0 / norms2))
    barrier = _DualBarrier(hhat * math.sqrt(scale), reduced.phi, reduced.rhs)

    x = barrier.start()
    t = T_INITIAL
    best_dual = -math.inf
    X = None
    primal = math.inf
    status = STATUS_MAX_ITERATIONS
    iterations = 0
    try:
        for _ in range(max_outer):
            x, steps = barrier.center(x, t)
            iterations += steps
            best_dual = max(best_dual, barrier.certified_value(x))
            X = barrier.recover_primal(x, t)
            gains = barrier.gains(X)
            primal = math.inf if np.any(gains <= GAIN_FLOOR) else float(np.sum(1.0 / gains))
            if primal - best_dual <= tol * max(1.0, primal):
                status = STATUS_OPTIMAL
                break
            t *= T_GROWTH
    except np.linalg.LinAlgError as exc:
        logger.warning(f"Relaxation solve stalled after {iterations} Newton steps: {exc}")

    if X is None:
        X = np.eye(hhat.shape[1], dtype=np.complex128)
        gains = barrier.gains(X)
        best_dual = max(best_dual, barrier.certified_value(x))
    if status != STATUS_OPTIMAL:
        logger.warning(f"Relaxation ended with status {status}; gap {primal - best_dual:.3g} (scaled)")

    lifted = reduced.transfer @ X @ reduced.transfer.conj().T
    with np.errstate(divide='ignore'):
        epigraph = scale / np.maximum(gains, 0.0)
    return SdpOutcome(
        lifted=0.5 * (lifted + lifted.conj().T),
        primal_value=scale * primal,
        dual_lower_bound=scale * best_dual,
        status=status,
        epigraph=epigraph,
        iterations=iterations,
    )
