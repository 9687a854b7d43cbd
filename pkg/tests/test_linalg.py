"""Kernel linear algebra: norms, decompositions, fidelity."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minkit.linalg import (
    PAULIS,
    HermEig,
    dagger,
    fidelity,
    hermitian_eig,
    hs_norm,
    partial_trace,
    psd_sqrt,
    random_unitary,
    tensor_product,
    trace_norm,
)


def _random_matrix(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def _random_hermitian(rng, n):
    m = _random_matrix(rng, n)
    return (m + dagger(m)) / 2


def _random_density(rng, n):
    g = _random_matrix(rng, n)
    m = g @ dagger(g)
    return m / np.trace(m).real


class TestTensorProduct:
    def test_identity_identity(self):
        np.testing.assert_allclose(tensor_product(np.eye(2), np.eye(2)), np.eye(4))

    def test_pauli_x_squared_is_antidiagonal(self):
        out = tensor_product(PAULIS[0], PAULIS[0])
        np.testing.assert_allclose(out, np.fliplr(np.eye(4)))

    def test_hs_norm_multiplicative(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            a, b = _random_matrix(rng, 2), _random_matrix(rng, 2)
            assert abs(hs_norm(tensor_product(a, b)) - hs_norm(a) * hs_norm(b)) <= 1e-12

    def test_trace_norm_multiplicative(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            a, b = _random_matrix(rng, 2), _random_matrix(rng, 3)
            got = trace_norm(tensor_product(a, b))
            assert abs(got - trace_norm(a) * trace_norm(b)) <= 1e-10


class TestPartialTrace:
    def test_product_state_marginal(self):
        rng = np.random.default_rng(2)
        rho_a, rho_b = _random_density(rng, 2), _random_density(rng, 3)
        joint = tensor_product(rho_a, rho_b)
        np.testing.assert_allclose(partial_trace(joint, (2, 3), "B"), rho_a, atol=1e-12)
        np.testing.assert_allclose(partial_trace(joint, (2, 3), "A"), rho_b, atol=1e-12)

    def test_bell_marginal_is_maximally_mixed(self):
        bell = np.zeros(4, dtype=complex)
        bell[0] = bell[3] = 1 / np.sqrt(2)
        rho = np.outer(bell, bell.conj())
        np.testing.assert_allclose(partial_trace(rho, (2, 2), "B"), np.eye(2) / 2, atol=1e-12)

    def test_trace_preserved(self):
        rng = np.random.default_rng(3)
        rho = _random_density(rng, 6)
        for party in ("A", "B"):
            out = partial_trace(rho, (2, 3), party)
            assert abs(np.trace(out) - 1.0) <= 1e-12

    def test_linear(self):
        rng = np.random.default_rng(4)
        a, b = _random_matrix(rng, 6), _random_matrix(rng, 6)
        lhs = partial_trace(2.0 * a + 3.0 * b, (2, 3), "A")
        rhs = 2.0 * partial_trace(a, (2, 3), "A") + 3.0 * partial_trace(b, (2, 3), "A")
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="incompatible"):
            partial_trace(np.eye(5), (2, 3), "A")


class TestTraceNorm:
    def test_identity(self):
        assert trace_norm(np.eye(5, dtype=complex)) == pytest.approx(5.0, abs=1e-12)

    def test_hermitian_sign_mix(self):
        assert trace_norm(np.diag([1.0, -1.0]).astype(complex)) == pytest.approx(2.0, abs=1e-12)

    def test_eig_route_matches_svd_route(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            m = _random_hermitian(rng, 4)
            by_eig = float(np.abs(np.linalg.eigvalsh(m)).sum())
            by_svd = float(np.linalg.svd(m, compute_uv=False).sum())
            assert abs(by_eig - by_svd) <= 1e-10
            assert trace_norm(m) == pytest.approx(by_eig, abs=1e-10)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_unitarily_invariant(self, seed):
        rng = np.random.default_rng(seed)
        m = _random_matrix(rng, 4)
        u, v = random_unitary(4, rng), random_unitary(4, rng)
        assert abs(trace_norm(u @ m @ v) - trace_norm(m)) <= 1e-10


class TestHsNorm:
    def test_small_cases(self):
        assert hs_norm(np.eye(2, dtype=complex)) == pytest.approx(np.sqrt(2), abs=1e-12)
        assert hs_norm(np.zeros((3, 3), dtype=complex)) == 0.0
        assert hs_norm(PAULIS[2]) == pytest.approx(np.sqrt(2), abs=1e-12)


class TestHermitianEig:
    def test_pauli_z(self):
        eig = hermitian_eig(PAULIS[2])
        np.testing.assert_allclose(eig.eigenvalues, [1.0, -1.0], atol=1e-12)

    def test_degenerate(self):
        eig = hermitian_eig(np.eye(2, dtype=complex) / 2)
        np.testing.assert_allclose(eig.eigenvalues, [0.5, 0.5], atol=1e-12)

    def test_reconstruction_and_orthonormality(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            m = _random_hermitian(rng, 5)
            eig = hermitian_eig(m)
            assert isinstance(eig, HermEig)
            v = eig.eigenvectors
            rebuilt = (v * eig.eigenvalues) @ dagger(v)
            assert hs_norm(m - rebuilt) <= 1e-10 * max(1.0, hs_norm(m))
            assert np.abs(dagger(v) @ v - np.eye(5)).max() <= 1e-12

    def test_descending_order(self):
        rng = np.random.default_rng(7)
        w = hermitian_eig(_random_hermitian(rng, 6)).eigenvalues
        assert np.all(np.diff(w) <= 0)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))


class TestPsdSqrt:
    def test_identity(self):
        np.testing.assert_allclose(psd_sqrt(np.eye(3, dtype=complex)), np.eye(3), atol=1e-12)

    def test_diagonal(self):
        np.testing.assert_allclose(
            psd_sqrt(np.diag([4.0, 9.0]).astype(complex)), np.diag([2.0, 3.0]), atol=1e-12
        )

    def test_square_residual(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            g = _random_matrix(rng, 4)
            m = g @ dagger(g)
            root = psd_sqrt(m)
            assert hs_norm(root @ root - m) <= 1e-9 * max(1.0, hs_norm(m))

    def test_rejects_negative(self):
        with pytest.raises(ValueError, match="negative eigenvalue"):
            psd_sqrt(np.diag([1.0, -0.5]).astype(complex))


class TestFidelity:
    def test_self_fidelity(self):
        rng = np.random.default_rng(9)
        rho = _random_density(rng, 4)
        assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-10)

    def test_orthogonal_pure_states(self):
        zero = np.diag([1.0, 0.0]).astype(complex)
        one = np.diag([0.0, 1.0]).astype(complex)
        assert fidelity(zero, one) == pytest.approx(0.0, abs=1e-12)

    def test_pure_vs_maximally_mixed(self):
        zero = np.diag([1.0, 0.0]).astype(complex)
        assert fidelity(zero, np.eye(2, dtype=complex) / 2) == pytest.approx(0.5, abs=1e-12)

    def test_symmetric(self):
        rng = np.random.default_rng(10)
        for _ in range(5):
            rho, sigma = _random_density(rng, 3), _random_density(rng, 3)
            assert abs(fidelity(rho, sigma) - fidelity(sigma, rho)) <= 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            fidelity(np.eye(2) / 2, np.eye(3) / 3)
