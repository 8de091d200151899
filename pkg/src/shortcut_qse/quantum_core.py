"""Dense linear algebra for small (two-qubit) Hilbert spaces.

Operators are plain complex ``numpy`` arrays of shape ``(d, d)`` and pure
states are arrays of shape ``(d,)`` in the computational basis ordering
``|00>, |01>, |10>, |11>``. Nothing here is specific to ``d = 4`` except the
Pauli helpers.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractViolationError, RejectedInputError

PAULI = {
    "I": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

HERMITIAN_RTOL = 1e-12
UNITARY_TOL = 1e-10
NORM_TOL = 1e-10
JACOBI_TOL = 1e-12
DEGENERACY_RTOL = 1e-9
PHASE_FLOOR = 1e-8

_AXIS_ALIASES = {"i": "I", "1": "I", "id": "I", "X": "x", "Y": "y", "Z": "z"}


def _axis(label) -> str:
    key = str(label)
    key = _AXIS_ALIASES.get(key, key)
    if key not in PAULI:
        raise RejectedInputError(f"invalid Pauli axis {label!r}; expected one of I, x, y, z")
    return key


def pauli_product(k1, k2) -> np.ndarray:
    """Return the two-site operator ``sigma_k1 (x) sigma_k2``.

    >>> pauli_product("x", "x") @ basis_state(0)
    array([0.+0.j, 0.+0.j, 0.+0.j, 1.+0.j])
    """
    return np.kron(PAULI[_axis(k1)], PAULI[_axis(k2)])


def basis_state(index: int, dim: int = 4) -> np.ndarray:
    psi = np.zeros(dim, dtype=complex)
    psi[index] = 1.0
    return psi


def bell_phi_plus() -> np.ndarray:
    return np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2.0)


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


# -- classification ----------------------------------------------------------


def is_hermitian(a: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    if not np.all(np.isfinite(a)):
        return False
    scale = np.linalg.norm(a)
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= rtol * scale)


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) <= tol)


def require_hermitian(a: np.ndarray, what: str = "operator") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if not is_hermitian(a):
        raise ContractViolationError(f"{what} is not Hermitian")
    return a


def require_unitary(u: np.ndarray, what: str = "operator", tol: float = UNITARY_TOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u, tol):
        raise ContractViolationError(f"{what} is not unitary")
    return u


def as_pure_state(psi, tol: float = NORM_TOL) -> np.ndarray:
    """Validate a normalized state vector and return it as a complex array."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or not np.all(np.isfinite(psi)):
        raise ContractViolationError("state must be a finite 1-d amplitude vector")
    if abs(np.vdot(psi, psi).real - 1.0) > tol:
        raise ContractViolationError(f"state is not normalized (norm^2 = {np.vdot(psi, psi).real!r})")
    return psi


def as_density_matrix(rho, tol: float = NORM_TOL) -> np.ndarray:
    """Validate ``rho`` as a density matrix.

    A 1-d input is treated as a pure state and turned into its projector.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        return projector(as_pure_state(rho, tol))
    if not is_hermitian(rho):
        raise ContractViolationError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise ContractViolationError("density matrix does not have unit trace")
    if np.linalg.eigvalsh(rho)[0] < -tol:
        raise ContractViolationError("density matrix has a negative eigenvalue")
    return rho


# -- eigensystem ---------------------------------------------------------------


def _jacobi_rotation(app: float, aqq: float, apq: complex) -> tuple[float, complex]:
    """Cosine and complex sine that annihilate ``apq`` in a 2x2 Hermitian block.

    The rotation acts as ``R = [[c, -s], [conj(s), c]]`` on columns (p, q).
    """
    mod = abs(apq)
    phase = apq / mod
    theta = (aqq - app) / (2.0 * mod)
    t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
    c = 1.0 / np.sqrt(t * t + 1.0)
    return c, -t * c * phase


def jacobi_eigh(a: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = 100):
    """Cyclic complex Jacobi diagonalization of a Hermitian matrix.

    Sweeps until the off-diagonal Frobenius mass drops below ``tol * ||A||_F``.
    Returns unsorted eigenvalues and the matrix whose columns are eigenvectors.
    """
    a = np.array(a, dtype=complex)
    d = a.shape[0]
    v = np.eye(d, dtype=complex)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(d), v
    offdiag = ~np.eye(d, dtype=bool)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a[offdiag])
        if off <= tol * scale:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                if abs(a[p, q]) <= 1e-300:
                    continue
                c, s = _jacobi_rotation(a[p, p].real, a[q, q].real, a[p, q])
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p + np.conj(s) * col_q
                a[:, q] = -s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p + s * row_q
                a[q, :] = -np.conj(s) * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp + np.conj(s) * vq
                v[:, q] = -s * vp + c * vq
    else:  # pragma: no cover - Jacobi converges quadratically for d = 4
        raise ArithmeticError("Jacobi iteration did not converge")
    return np.diag(a).real.copy(), v


def fix_phase(vectors: np.ndarray, floor: float = PHASE_FLOOR) -> np.ndarray:
    """Rotate each column so its first component above ``floor`` is real and >= 0."""
    vectors = np.array(vectors, dtype=complex)
    for k in range(vectors.shape[1]):
        col = vectors[:, k]
        idx = np.flatnonzero(np.abs(col) > floor)
        if idx.size:
            lead = col[idx[0]]
            vectors[:, k] = col * (abs(lead) / lead)
    return vectors


def degenerate_clusters(values: np.ndarray, atol: float) -> list[list[int]]:
    """Group indices of sorted ``values`` whose consecutive gaps are <= ``atol``."""
    clusters: list[list[int]] = []
    for i, val in enumerate(values):
        if clusters and val - values[clusters[-1][-1]] <= atol:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return clusters


def herm_eigensystem(a: np.ndarray):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    Eigenvectors are the columns of the second return value. Within a
    numerically degenerate cluster the vectors are re-orthonormalized, so
    their order inside the cluster carries no meaning. Each column obeys the
    phase convention of :func:`fix_phase`.
    """
    a = require_hermitian(a)
    a = 0.5 * (a + a.conj().T)
    values, vectors = jacobi_eigh(a)
    order = np.argsort(values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    atol = DEGENERACY_RTOL * np.linalg.norm(a)
    for cluster in degenerate_clusters(values, atol):
        if len(cluster) > 1:
            q, _ = np.linalg.qr(vectors[:, cluster])
            vectors[:, cluster] = q
    return values, fix_phase(vectors)


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i h t)`` by spectral decomposition."""
    values, vectors = herm_eigensystem(h)
    return (vectors * np.exp(-1j * values * t)) @ vectors.conj().T


def expm_hermitian_batch(hs: np.ndarray, t) -> np.ndarray:
    """Vectorized ``exp(-i h t)`` for a stack of Hermitian matrices.

    Uses LAPACK through :func:`numpy.linalg.eigh`; the propagator calls this
    hundreds of thousands of times per run.
    """
    values, vectors = np.linalg.eigh(hs)
    phases = np.exp(-1j * values * np.asarray(t)[..., None])
    return (vectors * phases[..., None, :]) @ dagger(vectors)


# -- distances -------------------------------------------------------------------


def trace_distance(rho, sigma) -> float:
    """Half the trace norm of ``rho - sigma``; accepts pure states too."""
    rho = as_density_matrix(rho)
    sigma = as_density_matrix(sigma)
    values, _ = herm_eigensystem(rho - sigma)
    return float(min(1.0, 0.5 * np.sum(np.abs(values))))


def pure_trace_distance(psis: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Trace distance between pure states, ``sqrt(1 - |<phi|psi>|^2)``.

    ``psis`` may be a stack of shape ``(..., d)``.
    """
    overlap = np.abs(np.asarray(psis) @ np.conj(phi)) ** 2
    return np.sqrt(np.clip(1.0 - overlap, 0.0, 1.0))


def overlap(phi: np.ndarray, psi: np.ndarray) -> complex:
    return complex(np.vdot(phi, psi))
