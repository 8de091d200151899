"""Dynamic-invariant construction of the two-spin quench protocol.

The invariant is written on two commuting su(2) copies with coefficients
``g1..g6``. Only ``(g1, g2, g6)`` couple to the control field ``f(tau)``;
their closed forms come from a cosine ansatz for ``g1`` with quench index
``n``. The driving Hamiltonian is

    H(tau) = J pi sx(x)sx + f(tau) (sz(x)1 + 1(x)sz)

and the invariant eigenstate ``phi_4`` carries ``|00>`` (tau = 0) to the
Bell state ``(|00> + |11>)/sqrt(2)`` (tau = 1) as ``Delta -> 0``.

Everything here is vectorized over ``tau`` unless noted otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ProtocolInfeasibleError, RejectedInputError
from .quantum_core import basis_state, bell_phi_plus, pauli_product

SX_SX = pauli_product("x", "x")
SY_SY = pauli_product("y", "y")
SY_SX = pauli_product("y", "x")
SX_SY = pauli_product("x", "y")
SZ_1 = pauli_product("z", "I")
S1_Z = pauli_product("I", "z")

DENOMINATOR_FLOOR = 1e-12


@dataclass(frozen=True)
class InvariantParams:
    """Parameters of the invariant family.

    ``spectator_init`` holds ``(g3(0), g4(0), g5(0))``; ``None`` selects
    ``(gamma / 3, 0, 0)``.
    """

    gamma: float
    delta: float
    n: int
    J: float
    T: float
    spectator_init: tuple[float, float, float] | None = None

    def __post_init__(self):
        if not self.gamma > 0:
            raise RejectedInputError("gamma must be positive")
        if not self.delta > 0:
            raise RejectedInputError("delta must be positive")
        if self.J == 0 or not np.isfinite(self.J):
            raise RejectedInputError("coupling J must be finite and nonzero")
        if not self.T > 0:
            raise RejectedInputError("total time T must be positive")
        if int(self.n) != self.n or self.n < 1:
            raise RejectedInputError("quench index n must be a positive integer")
        object.__setattr__(self, "n", int(self.n))
        if self.spectator_init is None:
            object.__setattr__(self, "spectator_init", (self.gamma / 3.0, 0.0, 0.0))
        else:
            object.__setattr__(self, "spectator_init", tuple(float(x) for x in self.spectator_init))
        radius = self.spectator_radius
        if radius <= 1e-9 or abs(radius - self.lam4) <= 1e-9:
            raise RejectedInputError(
                "spectator radius must differ from 0 and lambda_4 (invariant spectrum would be degenerate)"
            )

    @classmethod
    def from_delta_sq(cls, gamma, delta_sq, n, J, T, spectator_init=None) -> "InvariantParams":
        if not delta_sq > 0:
            raise RejectedInputError("delta_sq must be positive")
        return cls(gamma, float(np.sqrt(delta_sq)), n, J, T, spectator_init)

    @property
    def delta_sq(self) -> float:
        return self.delta**2

    @property
    def lam4(self) -> float:
        return float(np.sqrt(self.gamma**2 + self.delta**4 / (4.0 * self.gamma**2)))

    @property
    def spectator_radius(self) -> float:
        return float(np.sqrt(sum(x * x for x in self.spectator_init)))

    @property
    def frequency(self) -> float:
        """Angular rate ``(2n - 1) pi`` of the g1 ansatz in tau."""
        return (2 * self.n - 1) * np.pi

    def with_n(self, n: int) -> "InvariantParams":
        return InvariantParams(self.gamma, self.delta, n, self.J, self.T, self.spectator_init)


@dataclass(frozen=True)
class GCoefficients:
    g1: np.ndarray
    g2: np.ndarray
    g3: np.ndarray
    g4: np.ndarray
    g5: np.ndarray
    g6: np.ndarray

    def pauli_weights(self):
        """Map to the six Pauli-product weights ``G1..G6``."""
        return (
            (self.g1 + self.g4) / 2,
            (self.g1 - self.g4) / 2,
            (self.g2 + self.g5) / 2,
            (self.g2 - self.g5) / 2,
            (self.g3 + self.g6) / 2,
            (self.g3 - self.g6) / 2,
        )


def _as_tau(tau):
    return np.asarray(tau, dtype=float)


def _g1_g2(tau, p: InvariantParams):
    m = 2 * p.n - 1
    phase = p.frequency * tau
    g1 = 0.5 * p.gamma * (1.0 + np.cos(phase)) - p.delta_sq / (2.0 * p.gamma)
    g2 = -m * p.gamma / (4.0 * p.J * p.T) * np.sin(phase)
    return g1, g2


def _radicand(tau, p: InvariantParams):
    g1, g2 = _g1_g2(tau, p)
    # lam4^2 - g1^2 rewritten with c = gamma cos^2(phase/2), d = delta^2/(2 gamma):
    # (gamma - c)(gamma + c) + 2 c d, where gamma - c = gamma sin^2(phase/2) has no cancellation
    half = 0.5 * p.frequency * tau
    c = p.gamma * np.cos(half) ** 2
    d = p.delta_sq / (2.0 * p.gamma)
    rad = p.gamma * np.sin(half) ** 2 * (p.gamma + c) + 2.0 * c * d - g2**2
    bad = rad < -1e-14 * p.lam4**2
    if np.any(bad):
        where = float(np.atleast_1d(tau)[np.argmax(np.atleast_1d(bad))])
        raise ProtocolInfeasibleError(
            f"invariant radicand negative at tau={where:.6g} for n={p.n}; "
            f"increase T (now {p.T:g}) or decrease n",
            tau=where,
        )
    return g1, g2, np.clip(rad, 0.0, None)


def g_dynamic(tau, p: InvariantParams):
    """Field-coupled coefficients ``(g1, g2, g6)`` on the positive branch of g6."""
    g1, g2, rad = _radicand(_as_tau(tau), p)
    return g1, g2, np.sqrt(rad)


def g_dynamic_rates(tau, p: InvariantParams):
    """Analytic tau-derivatives ``(g1', g2', g6')``."""
    tau = _as_tau(tau)
    m = 2 * p.n - 1
    phase = p.frequency * tau
    g1, g2, g6 = g_dynamic(tau, p)
    dg1 = -0.5 * p.gamma * p.frequency * np.sin(phase)
    dg2 = -(m**2) * np.pi * p.gamma / (4.0 * p.J * p.T) * np.cos(phase)
    dg6 = -(g1 * dg1 + g2 * dg2) / g6
    return dg1, dg2, dg6


def g_spectator(tau, p: InvariantParams):
    """Spectator coefficients ``(g3, g4, g5)``: constant and a rigid rotation."""
    tau = _as_tau(tau)
    g30, g40, g50 = p.spectator_init
    angle = 2.0 * np.pi * p.J * p.T * tau
    c, s = np.cos(angle), np.sin(angle)
    return np.full_like(tau, g30), g40 * c + g50 * s, g50 * c - g40 * s


def g_coefficients(tau, p: InvariantParams) -> GCoefficients:
    g1, g2, g6 = g_dynamic(tau, p)
    g3, g4, g5 = g_spectator(tau, p)
    return GCoefficients(g1, g2, g3, g4, g5, g6)


def f_modulation(tau, p: InvariantParams):
    """Control field ``f(tau)`` in the units of ``J``."""
    tau = _as_tau(tau)
    g1, g2, rad = _radicand(tau, p)
    if np.any(rad <= 0.0):
        where = float(np.atleast_1d(tau)[np.argmax(np.atleast_1d(rad <= 0.0))])
        raise ProtocolInfeasibleError(f"invariant radicand vanishes at tau={where:.6g}", tau=where)
    dg2 = g_dynamic_rates(tau, p)[1]
    return (2.0 * np.pi * p.T * p.J * g1 + dg2) / (4.0 * p.T * np.sqrt(rad))


# -- operators -------------------------------------------------------------------


def su2_generators():
    """The two commuting su(2) triples ``(Sigma^(1), Sigma^(2))``."""
    first = (
        (SZ_1 + S1_Z) / 2,
        -(SY_SX + SX_SY) / 2,
        (SX_SX - SY_SY) / 2,
    )
    second = (
        (SX_SX + SY_SY) / 2,
        (SZ_1 - S1_Z) / 2,
        -(SY_SX - SX_SY) / 2,
    )
    return first, second


def _combine(weights, ops):
    out = 0
    for w, op in zip(weights, ops):
        out = out + np.asarray(w)[..., None, None] * op
    return out


def invariant_from_coefficients(g: GCoefficients, form: str = "pauli") -> np.ndarray:
    if form == "pauli":
        return _combine(g.pauli_weights(), (SZ_1, S1_Z, SY_SX, SX_SY, SX_SX, SY_SY))
    if form == "su2":
        (a1, a2, a3), (b1, b2, b3) = su2_generators()
        return _combine((g.g1, -g.g2, g.g6, g.g3, g.g4, -g.g5), (a1, a2, a3, b1, b2, b3))
    raise RejectedInputError("form must be 'pauli' or 'su2'")


def invariant_operator(tau, p: InvariantParams, form: str = "pauli") -> np.ndarray:
    """``I(tau)`` assembled from Pauli products (or equivalently su(2) generators)."""
    return invariant_from_coefficients(g_coefficients(tau, p), form)


def h_invariant(tau, p: InvariantParams, field=None) -> np.ndarray:
    """Two-spin driving Hamiltonian; ``field`` overrides ``f(tau)`` when given."""
    f = f_modulation(tau, p) if field is None else np.asarray(field, dtype=float)
    return np.pi * p.J * SX_SX + np.asarray(f)[..., None, None] * (SZ_1 + S1_Z)


def exchange_hamiltonian(p: InvariantParams) -> np.ndarray:
    """The field-free part ``J pi sx(x)sx`` left once the control is switched off."""
    return np.pi * p.J * SX_SX


# -- closed-form eigensystem -------------------------------------------------------


def _sector_vector(lam, upper, denom, idx_a, idx_b):
    """Normalized ``eta ((upper + lam)/denom) |a> + eta |b>`` with the limiting rule.

    When ``|denom|`` vanishes the vector collapses onto ``|a>`` (if
    ``upper + lam`` survives) or ``|b>``.
    """
    vec = np.zeros(4, dtype=complex)
    if abs(denom) < DENOMINATOR_FLOOR:
        vec[idx_a if abs(upper + lam) > DENOMINATOR_FLOOR else idx_b] = 1.0
        return vec
    # lam^2 = upper^2 + |denom|^2, so upper + lam = -|denom|^2 / (upper - lam) without cancellation
    num = upper + lam if upper * lam >= 0 else -abs(denom) ** 2 / (upper - lam)
    eta = np.sqrt(abs(denom) ** 2 / (2.0 * lam * num))
    vec[idx_a] = eta * num / denom
    vec[idx_b] = eta
    return vec


def invariant_eigensystem(tau: float, p: InvariantParams):
    """Closed-form eigenpairs of ``I(tau)`` at a single ``tau``.

    Returns ``(values, vectors)`` with ``values = (l1, l2, l3, l4)`` where
    ``l1 = -l2`` live on ``{|01>, |10>}`` and ``l3 = -l4`` on
    ``{|00>, |11>}``; ``vectors[:, j]`` pairs with ``values[j]``.
    """
    g = g_coefficients(float(tau), p)
    g1, g2, g3, g4, g5, g6 = (float(x) for x in (g.g1, g.g2, g.g3, g.g4, g.g5, g.g6))
    r = np.sqrt(g3**2 + g4**2 + g5**2)
    lam4 = np.sqrt(g1**2 + g2**2 + g6**2)
    values = np.array([-r, r, -lam4, lam4])
    vectors = np.empty((4, 4), dtype=complex)
    for j, lam in enumerate(values[:2]):
        vectors[:, j] = _sector_vector(lam, g4, g3 + 1j * g5, 1, 2)
    for j, lam in enumerate(values[2:], start=2):
        vectors[:, j] = _sector_vector(lam, g1, g6 + 1j * g2, 0, 3)
    return values, vectors


def phi4(tau: float, p: InvariantParams) -> np.ndarray:
    """The invariant eigenstate that carries the protocol."""
    return invariant_eigensystem(tau, p)[1][:, 3]


def phi4_batch(taus, p: InvariantParams) -> np.ndarray:
    """Vectorized :func:`phi4` (stack of shape ``(len(taus), 4)``)."""
    taus = _as_tau(taus)
    g1, g2, g6 = g_dynamic(taus, p)
    lam = np.sqrt(g1**2 + g2**2 + g6**2)
    denom = g6 + 1j * g2
    eta = np.sqrt(np.abs(denom) ** 2 / (2.0 * lam * (lam + g1)))
    out = np.zeros(taus.shape + (4,), dtype=complex)
    out[..., 0] = eta * (g1 + lam) / denom
    out[..., 3] = eta
    return out


# -- defining-equation check ---------------------------------------------------------


def invariant_residual(tau: float, p: InvariantParams, dtau: float = 1e-7, field_scale: float = 1.0) -> float:
    """Frobenius norm of ``dI/dtau + i T [H, I]`` at ``tau``.

    ``dI/dtau`` is a central difference, shifted to a one-sided three-point
    stencil near the ends of ``[0, 1]``. ``field_scale`` multiplies ``f``
    (used to corrupt the field in negative controls).
    """
    tau = float(tau)
    if tau - dtau < 0.0:
        i0, i1, i2 = (invariant_operator(tau + k * dtau, p) for k in range(3))
        d_inv = (-3 * i0 + 4 * i1 - i2) / (2 * dtau)
    elif tau + dtau > 1.0:
        i0, i1, i2 = (invariant_operator(tau - k * dtau, p) for k in range(3))
        d_inv = (3 * i0 - 4 * i1 + i2) / (2 * dtau)
    else:
        d_inv = (invariant_operator(tau + dtau, p) - invariant_operator(tau - dtau, p)) / (2 * dtau)
    inv = invariant_operator(tau, p)
    h = h_invariant(tau, p, field=field_scale * f_modulation(tau, p))
    return float(np.linalg.norm(d_inv + 1j * p.T * (h @ inv - inv @ h)))


# -- other Bell targets ----------------------------------------------------------------


def bell_frame(j: int, k: int) -> np.ndarray:
    """Local frame ``(X^j (x) X^k)(Z^k (x) 1)`` mapping the j=k=0 protocol to target (j, k).

    It sends ``|00> -> |jk>`` and ``(|00>+|11>)/sqrt(2)`` to
    ``(|jk> + (-1)^k |j+1, k+1>)/sqrt(2)`` (indices mod 2).
    """
    if j not in (0, 1) or k not in (0, 1):
        raise RejectedInputError("j and k must be 0 or 1")
    x = {0: "I", 1: "x"}
    z = {0: "I", 1: "z"}
    return pauli_product(x[j], x[k]) @ pauli_product(z[k], "I")


def bell_initial(j: int, k: int) -> np.ndarray:
    return basis_state(2 * j + k)


def bell_target(j: int, k: int) -> np.ndarray:
    out = np.zeros(4, dtype=complex)
    out[2 * j + k] = 1.0
    out[2 * (1 - j) + (1 - k)] = (-1) ** k
    return out / np.sqrt(2.0)


def framed_h_invariant(tau, p: InvariantParams, j: int, k: int) -> np.ndarray:
    frame = bell_frame(j, k)
    return frame @ h_invariant(tau, p) @ frame.conj().T


def reference_target() -> np.ndarray:
    return bell_phi_plus()
