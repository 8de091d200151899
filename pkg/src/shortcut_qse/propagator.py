"""Time-ordered propagation of ``i d/dt |psi> = H(t) |psi>`` in normalized time.

Each step is an exact exponential of a Hermitian matrix, so the propagator
is unitary to round-off whatever the step size. Two rules are available:

``midpoint``
    ``U_k = exp(-i H(tau_k + h/2) T h)``, second order.
``cfm4``
    Fourth-order commutator-free Magnus step built from two exponentials
    evaluated at the Gauss-Legendre nodes.

``substeps`` subdivides every recorded grid interval; states and cumulative
unitaries are only stored on the recorded grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import ContractViolationError, DiagnosticError, RejectedInputError
from .invariant import InvariantParams, h_invariant, invariant_operator, phi4_batch
from .quantum_core import HERMITIAN_RTOL, as_pure_state, dagger, expm_hermitian_batch

_SQRT3 = np.sqrt(3.0)
_CFM4_NODES = (0.5 - _SQRT3 / 6.0, 0.5 + _SQRT3 / 6.0)
_CFM4_WEIGHTS = (0.25 + _SQRT3 / 6.0, 0.25 - _SQRT3 / 6.0)
METHODS = ("midpoint", "cfm4")
CHUNK = 1 << 15


@dataclass(frozen=True)
class Schedule:
    """A normalized-time Hamiltonian ``tau -> H(tau)`` run for ``total_time``.

    ``hamiltonian_at`` must accept a 1-d array of tau values and return the
    stack of Hamiltonians, shape ``(len(taus), d, d)``.
    """

    hamiltonian_at: Callable[[np.ndarray], np.ndarray]
    total_time: float
    steps: int

    def __post_init__(self):
        if not self.total_time > 0:
            raise RejectedInputError("total_time must be positive")
        if int(self.steps) != self.steps or self.steps < 10:
            raise RejectedInputError("steps must be an integer >= 10")

    @classmethod
    def from_scalar(cls, func: Callable[[float], np.ndarray], total_time: float, steps: int) -> "Schedule":
        """Wrap a one-tau-at-a-time Hamiltonian function."""
        return cls(lambda taus: np.stack([func(float(t)) for t in np.atleast_1d(taus)]), total_time, steps)

    @classmethod
    def constant(cls, h: np.ndarray, total_time: float, steps: int) -> "Schedule":
        h = np.asarray(h, dtype=complex)
        return cls(lambda taus: np.broadcast_to(h, np.shape(taus) + h.shape), total_time, steps)

    def reversed(self) -> "Schedule":
        """Schedule whose propagator is the adjoint of this one's."""
        return Schedule(lambda taus: -self.hamiltonian_at(1.0 - np.asarray(taus)), self.total_time, self.steps)

    @property
    def taus(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.steps + 1)


@dataclass
class Trajectory:
    """Simulation record on the uniform grid ``taus`` (length ``N + 1``)."""

    taus: np.ndarray
    states: np.ndarray
    total_time: float
    unitaries: np.ndarray | None = None
    field_values: np.ndarray | None = None
    distances: np.ndarray | None = None
    method: str = "midpoint"
    substeps: int = 1

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def index_at(self, tau: float) -> int:
        """Index of the first grid point at or after ``tau``."""
        return int(min(len(self.taus) - 1, np.searchsorted(self.taus, tau - 1e-15)))


def _hamiltonians(schedule: Schedule, taus: np.ndarray) -> np.ndarray:
    hs = np.asarray(schedule.hamiltonian_at(taus), dtype=complex)
    if hs.shape[:1] != taus.shape:
        raise ContractViolationError("hamiltonian_at returned the wrong number of matrices")
    skew = np.max(np.abs(hs - dagger(hs)), axis=(-2, -1))
    scale = np.linalg.norm(hs, axis=(-2, -1))
    bad = ~(skew <= HERMITIAN_RTOL * scale) | ~np.all(np.isfinite(hs), axis=(-2, -1))
    if np.any(bad):
        tau = float(taus[np.argmax(bad)])
        raise ContractViolationError(f"schedule Hamiltonian is not Hermitian at tau={tau:.12g}")
    return hs


def _step_unitaries(schedule: Schedule, left: np.ndarray, h: float, method: str) -> np.ndarray:
    dt = schedule.total_time * h
    if method == "midpoint":
        return expm_hermitian_batch(_hamiltonians(schedule, left + 0.5 * h), dt)
    h1 = _hamiltonians(schedule, left + _CFM4_NODES[0] * h)
    h2 = _hamiltonians(schedule, left + _CFM4_NODES[1] * h)
    w1, w2 = _CFM4_WEIGHTS
    first = expm_hermitian_batch(w1 * h1 + w2 * h2, dt)
    second = expm_hermitian_batch(w2 * h1 + w1 * h2, dt)
    return second @ first


def prefix_products(factors: np.ndarray) -> np.ndarray:
    """Cumulative products ``P[k] = F[k] @ ... @ F[0]`` by log-depth doubling."""
    out = np.array(factors, copy=True)
    shift = 1
    while shift < len(out):
        out[shift:] = out[shift:] @ out[:-shift]
        shift *= 2
    return out


def grid_step_unitaries(schedule: Schedule, method: str = "midpoint", substeps: int = 1) -> np.ndarray:
    """Unitaries of the ``N`` recorded grid intervals, each a product of substeps."""
    if method not in METHODS:
        raise RejectedInputError(f"unknown method {method!r}; expected one of {METHODS}")
    if int(substeps) != substeps or substeps < 1:
        raise RejectedInputError("substeps must be a positive integer")
    n, m = schedule.steps, int(substeps)
    h = 1.0 / (n * m)
    per_chunk = max(1, CHUNK // m)
    blocks = []
    for start in range(0, n, per_chunk):
        stop = min(n, start + per_chunk)
        left = np.arange(start * m, stop * m) * h
        sub = _step_unitaries(schedule, left, h, method)
        d = sub.shape[-1]
        sub = sub.reshape(stop - start, m, d, d)
        block = sub[:, 0]
        for j in range(1, m):
            block = sub[:, j] @ block
        blocks.append(block)
    return np.concatenate(blocks)


def propagate(
    schedule: Schedule,
    initial,
    method: str = "midpoint",
    substeps: int = 1,
    store_unitaries: bool = True,
) -> Trajectory:
    """Integrate from ``initial`` over the whole schedule.

    Raises :class:`ContractViolationError` naming the first tau at which the
    schedule produced a non-Hermitian matrix.
    """
    psi0 = as_pure_state(initial)
    steps = grid_step_unitaries(schedule, method, substeps)
    cumulative = prefix_products(steps)
    eye = np.eye(psi0.size, dtype=complex)[None]
    cumulative = np.concatenate([eye, cumulative])
    states = cumulative @ psi0
    return Trajectory(
        taus=schedule.taus,
        states=states,
        total_time=schedule.total_time,
        unitaries=cumulative if store_unitaries else None,
        method=method,
        substeps=int(substeps),
    )


def invariant_schedule(p: InvariantParams, steps: int) -> Schedule:
    return Schedule(lambda taus: h_invariant(taus, p), p.T, steps)


# -- Lewis-Riesenfeld diagnostics ------------------------------------------------------


def lr_overlap_diagnostic(trajectory: Trajectory, p: InvariantParams) -> np.ndarray:
    """``|<phi_4(tau)|psi(tau)>|^2`` on the trajectory grid."""
    phis = phi4_batch(trajectory.taus, p)
    return np.abs(np.einsum("ti,ti->t", phis.conj(), trajectory.states)) ** 2


def invariant_expectation(trajectory: Trajectory, p: InvariantParams) -> np.ndarray:
    """``<psi(tau)|I(tau)|psi(tau)>``; constant along exact dynamics."""
    ops = invariant_operator(trajectory.taus, p)
    psi = trajectory.states
    return np.einsum("ti,tij,tj->t", psi.conj(), ops, psi).real


def lr_phase(
    trajectory: Trajectory,
    p: InvariantParams | None = None,
    eigenstate: Callable[[np.ndarray], np.ndarray] | None = None,
    hamiltonian: Callable[[np.ndarray], np.ndarray] | None = None,
    refine: int = 16,
    fd_step: float = 1e-7,
    min_overlap: float = 0.99,
) -> np.ndarray:
    """Accumulated phase of the coefficient on a tracked invariant eigenstate.

    Integrates ``-(Im<phi|d_tau phi> + T <phi|H|phi>)`` with the trapezoid
    rule on the trajectory grid refined ``refine`` times, the derivative of
    ``phi`` by central differences. By default ``phi`` is ``phi_4`` and
    ``H`` the invariant-driven Hamiltonian of ``p``; both can be overridden
    with batched callables.
    """
    if eigenstate is None or hamiltonian is None:
        if p is None:
            raise RejectedInputError("either p or both eigenstate and hamiltonian are required")
        eigenstate = eigenstate or (lambda taus: phi4_batch(taus, p))
        hamiltonian = hamiltonian or (lambda taus: h_invariant(taus, p))
    taus = trajectory.taus
    tracked = eigenstate(taus)
    dominance = np.abs(np.einsum("ti,ti->t", tracked.conj(), trajectory.states)) ** 2
    if np.min(dominance) < min_overlap:
        worst = int(np.argmin(dominance))
        raise DiagnosticError(
            f"tracked eigenstate population {dominance[worst]:.4g} < {min_overlap} at tau={taus[worst]:.6g}"
        )
    fine = np.linspace(0.0, 1.0, (len(taus) - 1) * int(refine) + 1)
    phi = eigenstate(fine)
    up = eigenstate(np.clip(fine + fd_step, 0.0, 1.0))
    down = eigenstate(np.clip(fine - fd_step, 0.0, 1.0))
    width = np.clip(fine + fd_step, 0.0, 1.0) - np.clip(fine - fd_step, 0.0, 1.0)
    dphi = (up - down) / width[:, None]
    geometric = np.einsum("ti,ti->t", phi.conj(), dphi).imag
    dynamic = np.einsum("ti,tij,tj->t", phi.conj(), hamiltonian(fine), phi).real
    rate = -(geometric + trajectory.total_time * dynamic)
    alpha = cumulative_trapezoid(rate, fine, initial=0.0)
    return alpha[:: int(refine)]


def wrap_phase(x):
    """Map angles to ``(-pi, pi]``."""
    return np.angle(np.exp(1j * np.asarray(x)))
