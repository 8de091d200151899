"""Two-point-measurement work statistics.

The first projective energy measurement is taken in the eigenbasis of the
initial Hamiltonian, the second in that of the final one. Degenerate levels
are measured as whole eigenspaces, so the result does not depend on the
basis chosen inside a degenerate level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RejectedInputError
from .quantum_core import (
    as_density_matrix,
    degenerate_clusters,
    herm_eigensystem,
    require_hermitian,
    require_unitary,
)

DEGENERACY_RTOL = 1e-9


@dataclass(frozen=True)
class EnergyLevel:
    energy: float
    projector: np.ndarray
    degeneracy: int


def energy_levels(h: np.ndarray, rtol: float = DEGENERACY_RTOL) -> list[EnergyLevel]:
    """Distinct levels of ``h`` with eigenspace projectors.

    Eigenvalues closer than ``rtol * max|eps|`` are merged into one level.
    """
    values, vectors = herm_eigensystem(require_hermitian(h, "Hamiltonian"))
    atol = rtol * max(np.max(np.abs(values)), np.finfo(float).tiny)
    levels = []
    for cluster in degenerate_clusters(values, atol):
        block = vectors[:, cluster]
        levels.append(EnergyLevel(float(np.mean(values[cluster])), block @ block.conj().T, len(cluster)))
    return levels


def dephase(rho: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Block-diagonal part of ``rho`` in the eigenspaces of ``h``."""
    rho = as_density_matrix(rho)
    return sum(level.projector @ rho @ level.projector for level in energy_levels(h))


@dataclass
class WorkDistribution:
    """Merged ``(w, probability)`` pairs sorted by ``w``."""

    work: np.ndarray
    probability: np.ndarray

    @property
    def transitions(self) -> list[tuple[float, float]]:
        return list(zip(self.work.tolist(), self.probability.tolist()))

    def support(self, atol: float = 1e-12) -> list[tuple[float, float]]:
        """Transitions with probability above ``atol``."""
        keep = self.probability > atol
        return list(zip(self.work[keep].tolist(), self.probability[keep].tolist()))

    def weight_at(self, w: float, atol: float = 1e-9) -> float:
        return float(np.sum(self.probability[np.abs(self.work - w) <= atol]))


def _merge(works: np.ndarray, probs: np.ndarray, atol: float) -> WorkDistribution:
    order = np.argsort(works, kind="stable")
    works, probs = works[order], probs[order]
    merged_w: list[float] = []
    merged_p: list[float] = []
    for cluster in degenerate_clusters(works, atol):
        weight = float(np.sum(probs[cluster]))
        merged_w.append(float(np.dot(works[cluster], probs[cluster]) / weight) if weight > 0 else float(np.mean(works[cluster])))
        merged_p.append(weight)
    return WorkDistribution(np.array(merged_w), np.array(merged_p))


def tpm_distribution(h_initial, h_final, u, rho0) -> WorkDistribution:
    """Work distribution of the two-point measurement scheme.

    The joint weight of the outcome pair ``(n, m')`` is
    ``tr[Q_m' U P_n rho0 P_n U^dagger]``, which reduces to
    ``p_n |<m'|U|n>|^2`` for nondegenerate levels.
    """
    rho0 = as_density_matrix(rho0)
    u = require_unitary(u, "evolution operator", tol=1e-8)
    first = energy_levels(h_initial)
    second = energy_levels(h_final)
    works, probs = [], []
    for level_n in first:
        branch = u @ level_n.projector @ rho0 @ level_n.projector @ u.conj().T
        for level_m in second:
            works.append(level_m.energy - level_n.energy)
            probs.append(max(0.0, float(np.trace(level_m.projector @ branch).real)))
    works_arr = np.array(works)
    probs_arr = np.array(probs)
    scale = max(
        max(abs(lv.energy) for lv in first),
        max(abs(lv.energy) for lv in second),
        np.finfo(float).tiny,
    )
    return _merge(works_arr, probs_arr, DEGENERACY_RTOL * scale)


def conditional_probabilities(h_initial, h_final, u) -> np.ndarray:
    """Matrix ``C[m', n] = |<m'|U|n>|^2`` in the two eigenbases (nondegenerate case)."""
    _, vi = herm_eigensystem(require_hermitian(h_initial))
    _, vf = herm_eigensystem(require_hermitian(h_final))
    return np.abs(vf.conj().T @ np.asarray(u) @ vi) ** 2


def average_work(dist: WorkDistribution) -> float:
    return float(np.dot(dist.work, dist.probability))


def dephased_work(h_initial, h_final, u, rho0) -> float:
    """``tr[Hf U D(rho0) U^dagger] - tr[Hi D(rho0)]`` with ``D`` the dephasing in Hi's eigenspaces.

    Independent closed form of the TPM average work.
    """
    d = dephase(rho0, h_initial)
    u = np.asarray(u)
    return float(np.trace(h_final @ u @ d @ u.conj().T).real - np.trace(h_initial @ d).real)


def average_power(avg_work: float, delta_t: float) -> float:
    if not delta_t > 0:
        raise RejectedInputError("delta_t must be positive")
    return avg_work / delta_t
