import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_density, random_hermitian
from shortcut_qse.errors import ContractViolationError, RejectedInputError
from shortcut_qse.quantum_core import (
    as_density_matrix,
    as_pure_state,
    basis_state,
    bell_phi_plus,
    expm_hermitian,
    expm_hermitian_batch,
    fix_phase,
    herm_eigensystem,
    is_hermitian,
    is_unitary,
    jacobi_eigh,
    pauli_product,
    projector,
    pure_trace_distance,
    trace_distance,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)
SINGLE = {"I": np.eye(2, dtype=complex), "x": SX, "y": SY, "z": SZ}

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
complex_4x4 = st.tuples(arrays(float, (4, 4), elements=finite), arrays(float, (4, 4), elements=finite))


def _hermitian(pair):
    a = pair[0] + 1j * pair[1]
    return (a + a.conj().T) / 2


class TestPauli:
    def test_z_identity_on_00(self):
        psi = pauli_product("z", "I") @ basis_state(0)
        assert np.allclose(psi, basis_state(0))

    def test_xx_flips_both(self):
        assert np.allclose(pauli_product("x", "x") @ basis_state(0), basis_state(3))

    def test_traceless(self):
        assert np.trace(pauli_product("y", "x")) == 0

    @pytest.mark.parametrize("k1,k2", list(itertools.product("Ixyz", repeat=2)))
    def test_matches_kron(self, k1, k2):
        assert np.array_equal(pauli_product(k1, k2), np.kron(SINGLE[k1], SINGLE[k2]))

    def test_aliases(self):
        assert np.array_equal(pauli_product("X", 1), pauli_product("x", "I"))

    @pytest.mark.parametrize("bad", ["w", "xx", 2, None])
    def test_bad_label(self, bad):
        with pytest.raises(RejectedInputError):
            pauli_product(bad, "x")

    def test_nine_pairs_commutation(self):
        # sign of P Q = s Q P: one factor -1 per site where the axes differ
        for a, b, c, d in itertools.product("xyz", repeat=4):
            p, q = pauli_product(a, b), pauli_product(c, d)
            sign = (-1) ** ((a != c) + (b != d))
            assert np.array_equal(p @ q, sign * (q @ p))


class TestPredicates:
    def test_hermitian_threshold(self):
        a = random_hermitian(np.random.default_rng(0))
        scale = np.linalg.norm(a)
        a_bad = a.copy()
        a_bad[0, 1] += 1e-10 * scale
        assert is_hermitian(a)
        assert not is_hermitian(a_bad)

    def test_unitary(self):
        assert is_unitary(pauli_product("x", "y"))
        assert not is_unitary(1.001 * np.eye(4))

    def test_pure_state_norm(self):
        with pytest.raises(ContractViolationError):
            as_pure_state([1, 1, 0, 0])

    def test_density_checks(self):
        with pytest.raises(ContractViolationError):
            as_density_matrix(np.diag([1.5, -0.5, 0, 0]))
        assert np.allclose(as_density_matrix(basis_state(1)), projector(basis_state(1)))


class TestEigensystem:
    def test_diagonal(self):
        w, v = herm_eigensystem(np.diag([3.0, 1.0, 4.0, 2.0]).astype(complex))
        assert np.allclose(w, [1, 2, 3, 4])
        assert np.allclose(np.abs(v), np.eye(4)[:, [1, 3, 0, 2]])

    def test_zz_spectrum(self):
        w, _ = herm_eigensystem(pauli_product("z", "z"))
        assert np.allclose(w, [-1, -1, 1, 1])

    def test_projector_complement_spectrum(self):
        phi = bell_phi_plus()
        w, _ = herm_eigensystem(np.eye(4) - projector(phi))
        assert np.allclose(w, [0, 1, 1, 1], atol=1e-14)
        assert np.allclose(w, np.linalg.eigvalsh(np.eye(4) - projector(phi)), atol=1e-14)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ContractViolationError):
            herm_eigensystem(np.triu(np.ones((4, 4))))

    def test_agrees_with_lapack(self, rng):
        for _ in range(20):
            a = random_hermitian(rng, scale=rng.uniform(1e-3, 1e3))
            w, v = herm_eigensystem(a)
            assert np.allclose(w, np.linalg.eigvalsh(a), rtol=0, atol=1e-11 * np.linalg.norm(a))
            assert np.allclose(v.conj().T @ v, np.eye(4), atol=1e-12)

    def test_phase_convention(self, rng):
        _, v = herm_eigensystem(random_hermitian(rng))
        for col in v.T:
            lead = col[np.flatnonzero(np.abs(col) > 1e-8)[0]]
            assert abs(lead.imag) < 1e-14 and lead.real > 0

    def test_degenerate_cluster_orthonormal(self, rng):
        u, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        a = u @ np.diag([2.0, 2.0, 2.0, -1.0]) @ u.conj().T
        w, v = herm_eigensystem(a)
        assert np.allclose(w, [-1, 2, 2, 2])
        assert np.allclose(v.conj().T @ v, np.eye(4), atol=1e-12)
        assert np.allclose((v * w) @ v.conj().T, a, atol=1e-12)

    def test_jacobi_converges_on_zero(self):
        w, v = jacobi_eigh(np.zeros((4, 4), dtype=complex))
        assert np.allclose(w, 0) and np.allclose(v, np.eye(4))

    def test_fix_phase_idempotent(self, rng):
        _, v = herm_eigensystem(random_hermitian(rng))
        assert np.allclose(fix_phase(v * np.exp(0.7j)), v)

    @settings(max_examples=100, deadline=None)
    @given(complex_4x4)
    def test_reconstruction_property(self, pair):
        a = _hermitian(pair)
        w, v = herm_eigensystem(a)
        assert np.all(np.diff(w) >= 0)
        assert np.linalg.norm((v * w) @ v.conj().T - a) <= 1e-9 * max(np.linalg.norm(a), 1e-300)


class TestExponential:
    def test_zero_time(self, rng):
        assert np.allclose(expm_hermitian(random_hermitian(rng), 0.0), np.eye(4))

    def test_sz_full_and_half_turn(self):
        # exp(-i t) on the +1 eigenspace and exp(+i t) on the -1 one
        h = pauli_product("z", "I")
        assert np.allclose(expm_hermitian(h, np.pi), -np.eye(4), atol=1e-15)
        assert np.allclose(expm_hermitian(h, np.pi / 2), np.diag([-1j, -1j, 1j, 1j]), atol=1e-15)

    def test_inverse(self, rng):
        h = random_hermitian(rng)
        assert np.linalg.norm(expm_hermitian(h, 0.37) @ expm_hermitian(h, -0.37) - np.eye(4)) <= 1e-10

    def test_group_property(self, rng):
        h = random_hermitian(rng)
        lhs = expm_hermitian(h, 0.3) @ expm_hermitian(h, 1.1)
        assert np.linalg.norm(lhs - expm_hermitian(h, 1.4)) <= 1e-9

    def test_against_taylor(self, rng):
        h = random_hermitian(rng, scale=0.1)
        taylor = sum(np.linalg.matrix_power(-1j * h, k) / math.factorial(k) for k in range(30))
        assert np.allclose(expm_hermitian(h, 1.0), taylor, atol=1e-14)

    def test_batch_matches_single(self, rng):
        hs = np.stack([random_hermitian(rng) for _ in range(5)])
        batch = expm_hermitian_batch(hs, 0.8)
        for h, u in zip(hs, batch):
            assert np.allclose(u, expm_hermitian(h, 0.8), atol=1e-13)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ContractViolationError):
            expm_hermitian(np.triu(np.ones((4, 4))), 1.0)


class TestTraceDistance:
    def test_identical(self, rng):
        rho = random_density(rng)
        assert trace_distance(rho, rho) == pytest.approx(0, abs=1e-15)

    def test_orthogonal(self):
        assert trace_distance(projector(basis_state(0)), projector(basis_state(3))) == pytest.approx(1)

    def test_bell_vs_00(self):
        d = trace_distance(projector(basis_state(0)), projector(bell_phi_plus()))
        oracle = 0.5 * np.abs(np.linalg.eigvalsh(projector(basis_state(0)) - projector(bell_phi_plus()))).sum()
        assert d == pytest.approx(np.sqrt(0.5), abs=1e-14)
        assert d == pytest.approx(oracle, abs=1e-14)

    def test_pure_vectorized_matches_general(self, rng):
        psis = rng.normal(size=(6, 4)) + 1j * rng.normal(size=(6, 4))
        psis /= np.linalg.norm(psis, axis=1, keepdims=True)
        fast = pure_trace_distance(psis, bell_phi_plus())
        slow = [trace_distance(projector(p), projector(bell_phi_plus())) for p in psis]
        assert np.allclose(fast, slow, atol=1e-12)

    def test_rejects_bad_trace(self):
        with pytest.raises(ContractViolationError):
            trace_distance(np.eye(4), np.eye(4) / 4)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_triangle_and_range(self, seed):
        r = np.random.default_rng(seed)
        a, b, c = (random_density(r, rank=int(r.integers(1, 5))) for _ in range(3))
        dab, dbc, dac = trace_distance(a, b), trace_distance(b, c), trace_distance(a, c)
        assert 0 <= dab <= 1
        assert dac <= dab + dbc + 1e-9
        assert dab == pytest.approx(trace_distance(b, a), abs=1e-12)
