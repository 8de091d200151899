"""Projector-interpolation baseline and its brachistochrone schedule.

The adiabatic route interpolates ``H(s) = (1 - s) H0 + s Hf`` between two
rank-deficient projector Hamiltonians. The time-optimal schedule obeying the
local adiabatic condition has a closed form (:func:`s_qab`) and a total time
(:func:`t_adiabatic`) set by the excitation budget ``epsilon``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import RejectedInputError, SingularGapError, SingularParameterError
from .quantum_core import (
    DEGENERACY_RTOL,
    as_pure_state,
    basis_state,
    bell_phi_plus,
    degenerate_clusters,
    herm_eigensystem,
    projector,
)


@dataclass(frozen=True)
class AdiabaticSpec:
    omega: float
    epsilon: float
    psi0: np.ndarray
    psif: np.ndarray
    alpha0_abs: float | None = None

    def __post_init__(self):
        if not self.omega > 0:
            raise RejectedInputError("omega must be positive")
        if not 0 < self.epsilon < 1:
            raise RejectedInputError("epsilon must lie in (0, 1)")
        psi0 = as_pure_state(self.psi0)
        psif = as_pure_state(self.psif)
        alpha = abs(np.vdot(psi0, psif))
        if self.alpha0_abs is not None and abs(self.alpha0_abs - alpha) > 1e-12:
            raise RejectedInputError(
                f"alpha0_abs={self.alpha0_abs!r} disagrees with |<psi0|psif>|={alpha!r}"
            )
        if not 0 < alpha < 1:
            raise SingularParameterError("|<psi0|psif>| must lie strictly inside (0, 1)")
        object.__setattr__(self, "psi0", psi0)
        object.__setattr__(self, "psif", psif)
        object.__setattr__(self, "alpha0_abs", float(alpha))

    @classmethod
    def bell(cls, omega: float = 1.0, epsilon: float = np.pi / 2 * 1e-2) -> "AdiabaticSpec":
        """|00> -> (|00> + |11>)/sqrt(2)."""
        return cls(omega, epsilon, basis_state(0), bell_phi_plus())

    @property
    def total_time(self) -> float:
        return t_adiabatic(self.epsilon, self.omega)


def projector_hamiltonians(omega: float, psi0, psif):
    """``H0 = omega (1 - |psi0><psi0|)`` and ``Hf = omega (1 - |psif><psif|)``."""
    if not omega > 0:
        raise RejectedInputError("omega must be positive")
    psi0 = as_pure_state(psi0)
    psif = as_pure_state(psif)
    eye = np.eye(psi0.size, dtype=complex)
    return omega * (eye - projector(psi0)), omega * (eye - projector(psif))


def h_adiabatic(s: float, spec: AdiabaticSpec) -> np.ndarray:
    if not 0.0 <= s <= 1.0:
        raise RejectedInputError(f"interpolation parameter s={s!r} outside [0, 1]")
    h0, hf = projector_hamiltonians(spec.omega, spec.psi0, spec.psif)
    return (1.0 - s) * h0 + s * hf


def h_adiabatic_batch(s: np.ndarray, spec: AdiabaticSpec) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if np.any((s < 0.0) | (s > 1.0)):
        raise RejectedInputError("interpolation parameter outside [0, 1]")
    h0, hf = projector_hamiltonians(spec.omega, spec.psi0, spec.psif)
    return (1.0 - s)[..., None, None] * h0 + s[..., None, None] * hf


def _check_alpha(alpha0_abs: float) -> None:
    if not 0.0 < alpha0_abs < 1.0:
        raise SingularParameterError(f"|alpha0|={alpha0_abs!r} must lie strictly inside (0, 1)")


def s_qab(tau, alpha0_abs: float):
    """Brachistochrone interpolation ``s(tau)`` for overlap ``|alpha0|``."""
    _check_alpha(alpha0_abs)
    tau = np.asarray(tau, dtype=float)
    if np.any((tau < 0.0) | (tau > 1.0)):
        raise RejectedInputError("tau outside [0, 1]")
    beta = np.sqrt(1.0 - alpha0_abs**2)
    theta = np.arccos(alpha0_abs)
    s = 0.5 - alpha0_abs / (2.0 * beta) * np.tan((1.0 - 2.0 * tau) * theta)
    s = np.clip(s, 0.0, 1.0)
    return float(s) if s.ndim == 0 else s


def s_qab_rate(tau, alpha0_abs: float):
    """Analytic ``ds/dtau`` of :func:`s_qab`."""
    _check_alpha(alpha0_abs)
    beta = np.sqrt(1.0 - alpha0_abs**2)
    theta = np.arccos(alpha0_abs)
    return alpha0_abs * theta / beta / np.cos((1.0 - 2.0 * np.asarray(tau)) * theta) ** 2


def tau_of_s_qab(s, alpha0_abs: float):
    """Inverse of :func:`s_qab` for any admissible ``|alpha0|``."""
    _check_alpha(alpha0_abs)
    beta = np.sqrt(1.0 - alpha0_abs**2)
    theta = np.arccos(alpha0_abs)
    s = np.asarray(s, dtype=float)
    return 0.5 * (1.0 - np.arctan((1.0 - 2.0 * s) * beta / alpha0_abs) / theta)


def tau_of_s_bell(s):
    """Closed-form inverse valid only for ``|alpha0| = 1/sqrt(2)``."""
    return 2.0 / np.pi * (np.pi / 4.0 + np.arctan(2.0 * np.asarray(s, dtype=float) - 1.0))


def t_adiabatic(epsilon: float, omega: float) -> float:
    """Total brachistochrone time ``pi / (2 epsilon omega)``."""
    if not epsilon > 0 or not omega > 0:
        raise RejectedInputError("epsilon and omega must be positive")
    if not epsilon < 1:
        raise RejectedInputError("epsilon must be below 1")
    return np.pi / (2.0 * epsilon * omega)


@dataclass
class AdiabaticMargin:
    """Per-grid-point local adiabatic ratios.

    ``ratio_bound`` replaces the matrix element by the energy scale ``omega``
    (the uniform bound the closed-form schedule is built against);
    ``ratio_exact`` uses ``|<1|dH/ds|0>|`` between the instantaneous levels.
    """

    taus: np.ndarray
    s: np.ndarray
    ds_dt: np.ndarray
    gap: np.ndarray
    matrix_element: np.ndarray
    ratio_bound: np.ndarray
    ratio_exact: np.ndarray
    element: str = "bound"
    tolerance: float = 1e-2
    ratio: np.ndarray = field(init=False)

    def __post_init__(self):
        self.ratio = self.ratio_bound if self.element == "bound" else self.ratio_exact

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.ratio))

    @property
    def passed(self) -> bool:
        return self.max_ratio <= 1.0 + self.tolerance


def _lowest_gap_and_element(h: np.ndarray, dh: np.ndarray):
    values, vectors = herm_eigensystem(h)
    clusters = degenerate_clusters(values, DEGENERACY_RTOL * max(np.linalg.norm(h), 1.0))
    if len(clusters[0]) > 1 or len(clusters) < 2:
        raise SingularGapError("ground level is degenerate")
    gap = values[clusters[1][0]] - values[0]
    if gap <= 1e-12:
        raise SingularGapError(f"gap {gap!r} between the two lowest levels vanished")
    # project dH/ds|0> onto the whole first excited level; basis independent
    excited = vectors[:, clusters[1]]
    element = np.linalg.norm(excited.conj().T @ (dh @ vectors[:, 0]))
    return gap, element


def check_local_adiabatic(
    spec: AdiabaticSpec,
    schedule: Callable,
    grid_points: int = 1001,
    total_time: float | None = None,
    element: str = "bound",
    tolerance: float = 1e-2,
) -> AdiabaticMargin:
    """Evaluate ``|ds/dt| <dH/ds>_{1,0} / (epsilon Omega^2)`` on a uniform tau grid.

    ``schedule`` maps tau (array) to s; ``ds/dtau`` is taken by central
    differences on the grid. ``total_time`` defaults to :func:`t_adiabatic`.
    """
    if grid_points < 100:
        raise RejectedInputError("grid_points must be at least 100")
    if element not in ("bound", "exact"):
        raise RejectedInputError("element must be 'bound' or 'exact'")
    total = spec.total_time if total_time is None else float(total_time)
    taus = np.linspace(0.0, 1.0, grid_points)
    s = np.asarray(schedule(taus), dtype=float)
    ds_dt = np.gradient(s, taus, edge_order=2) / total
    h0, hf = projector_hamiltonians(spec.omega, spec.psi0, spec.psif)
    dh = hf - h0
    gap = np.empty(grid_points)
    elem = np.empty(grid_points)
    for i, si in enumerate(s):
        gap[i], elem[i] = _lowest_gap_and_element(h_adiabatic(float(np.clip(si, 0, 1)), spec), dh)
    denom = spec.epsilon * gap**2
    return AdiabaticMargin(
        taus=taus,
        s=s,
        ds_dt=ds_dt,
        gap=gap,
        matrix_element=elem,
        ratio_bound=np.abs(ds_dt) * spec.omega / denom,
        ratio_exact=np.abs(ds_dt) * elem / denom,
        element=element,
        tolerance=tolerance,
    )


def spectral_gap(s: float, spec: AdiabaticSpec) -> float:
    """Gap between the two lowest distinct levels of ``H(s)``."""
    h0, hf = projector_hamiltonians(spec.omega, spec.psi0, spec.psif)
    return _lowest_gap_and_element(h_adiabatic(s, spec), hf - h0)[0]
