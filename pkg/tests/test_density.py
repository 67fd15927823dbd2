import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import logm, sqrtm

from weakrealism.density import (
    DimensionError, NotHermitianError, Subsystem, density_matrix, eig_hermitian, entropy_of_spectrum,
    fidelity, from_json, hermitian, mutual_information, partial_trace, relative_entropy, tensor, to_json,
    von_neumann_entropy,
)
from weakrealism.states import SIGMA_X, SIGMA_Z, bell_state, werner_state
from weakrealism.channels import monitoring

from conftest import random_density

KET0 = np.diag([1.0, 0.0]).astype(complex)
KET1 = np.diag([0.0, 1.0]).astype(complex)


def ptrace_loops(rho, keep):
    """Index-by-index reference for the partial trace."""
    out = np.zeros((2, 2), dtype=complex)
    for a in range(2):
        for b in range(2):
            for k in range(2):
                if keep == "A":
                    out[a, b] += rho[2 * a + k, 2 * b + k]
                else:
                    out[a, b] += rho[2 * k + a, 2 * k + b]
    return out


class TestTensor:
    def test_identity(self):
        assert np.array_equal(tensor(np.eye(2), np.eye(2)), np.eye(4))

    def test_sigma_z_identity(self):
        assert np.allclose(tensor(SIGMA_Z, np.eye(2)), np.diag([1, 1, -1, -1]))

    def test_basis_projector(self):
        expected = np.zeros((4, 4))
        expected[1, 1] = 1
        assert np.array_equal(tensor(KET0, KET1), expected)


class TestPartialTrace:
    @pytest.mark.parametrize("mu", [0.0, 0.25, 0.5, 0.75, 1.0])
    def test_werner_marginal_is_maximally_mixed(self, mu):
        assert np.allclose(partial_trace(werner_state(mu), "A"), np.eye(2) / 2, atol=1e-15)

    def test_product_state(self, rng):
        s, t = random_density(rng, 2), random_density(rng, 2)
        assert np.max(np.abs(partial_trace(tensor(s, t), Subsystem.A) - s)) <= 1e-12
        assert np.max(np.abs(partial_trace(tensor(s, t), Subsystem.B) - t)) <= 1e-12

    def test_bell_keep_b(self):
        assert np.allclose(partial_trace(bell_state("phi-"), "B"), np.eye(2) / 2)

    @pytest.mark.parametrize("keep", ["A", "B"])
    def test_matches_index_loops(self, rng, keep):
        rho = random_density(rng)
        assert np.allclose(partial_trace(rho, keep), ptrace_loops(rho, keep), atol=1e-15)
        assert np.trace(partial_trace(rho, keep)) == pytest.approx(np.trace(rho), abs=1e-15)

    def test_rejects_single_qubit(self):
        with pytest.raises(DimensionError):
            partial_trace(np.eye(2) / 2)


class TestEig:
    def test_identity(self):
        assert np.allclose(eig_hermitian(np.eye(4)).eigenvalues, 1)

    def test_sigma_x(self):
        assert np.allclose(eig_hermitian(SIGMA_X).eigenvalues, [1, -1])

    def test_monitored_bell(self):
        w = eig_hermitian(monitoring(werner_state(1.0), eps=0.5)).eigenvalues
        assert np.allclose(w, [0.75, 0.25, 0, 0], atol=1e-14)

    def test_round_trip_and_orthonormality(self, rng):
        for _ in range(20):
            g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            h = g + g.conj().T
            w, v = eig_hermitian(h)
            assert np.linalg.norm(v @ np.diag(w) @ v.conj().T - h) <= 1e-10 * np.linalg.norm(h)
            assert np.allclose(v.conj().T @ v, np.eye(4), atol=1e-10)
            assert np.all(np.diff(w) <= 0)

    def test_deterministic_phase(self, rng):
        h = hermitian(random_density(rng))
        a, b = eig_hermitian(h), eig_hermitian(h.copy())
        assert np.array_equal(a.eigenvectors, b.eigenvectors)
        first = a.eigenvectors[0]
        assert np.all(np.abs(first.imag) < 1e-12) and np.all(first.real > 0)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            eig_hermitian(np.array([[0, 1], [0, 0]]))


class TestEntropy:
    def test_pure(self):
        assert von_neumann_entropy(bell_state()) == pytest.approx(0, abs=1e-14)

    def test_maximally_mixed(self):
        assert von_neumann_entropy(np.eye(4) / 4) == pytest.approx(math.log(4), abs=1e-14)

    def test_werner_half(self):
        expected = -(5 / 8) * math.log(5 / 8) - 3 * (1 / 8) * math.log(1 / 8)
        assert von_neumann_entropy(werner_state(0.5)) == pytest.approx(expected, abs=1e-14)

    def test_basis_independence(self, random_states):
        for rho in random_states[:20]:
            w = np.linalg.eigvalsh(rho)
            assert abs(von_neumann_entropy(rho) - entropy_of_spectrum(w)) <= 1e-10
            assert 0 <= von_neumann_entropy(rho) <= math.log(4) + 1e-12

    def test_against_matrix_logarithm(self, random_states):
        for rho in random_states[:10]:
            ref = -np.trace(rho @ logm(rho)).real
            assert von_neumann_entropy(rho) == pytest.approx(ref, abs=1e-9)


class TestRelativeEntropy:
    def test_self(self, rng):
        rho = random_density(rng)
        assert relative_entropy(rho, rho) == pytest.approx(0, abs=1e-12)

    def test_pure_vs_mixed(self):
        assert relative_entropy(KET0, np.eye(2) / 2) == pytest.approx(math.log(2), abs=1e-14)

    def test_disjoint_support(self):
        assert relative_entropy(KET0, KET1) == math.inf

    def test_against_logm(self, rng):
        for _ in range(5):
            rho, sigma = random_density(rng), random_density(rng)
            ref = np.trace(rho @ (logm(rho) - logm(sigma))).real
            assert relative_entropy(rho, sigma) == pytest.approx(ref, abs=1e-9)

    def test_mutual_information_as_relative_entropy(self, random_states):
        for rho in random_states[:30]:
            prod = tensor(partial_trace(rho, "A"), partial_trace(rho, "B"))
            assert abs(relative_entropy(rho, prod) - mutual_information(rho)) <= 1e-9


class TestMutualInformation:
    def test_product(self, rng):
        assert mutual_information(tensor(random_density(rng, 2), random_density(rng, 2))) == pytest.approx(0, abs=1e-12)

    def test_bell(self):
        assert mutual_information(bell_state()) == pytest.approx(2 * math.log(2), abs=1e-14)

    def test_maximally_mixed(self):
        assert mutual_information(np.eye(4) / 4) == pytest.approx(0, abs=1e-14)


def uhlmann_reference(rho, sigma):
    s = sqrtm(rho)
    return np.trace(sqrtm(s @ sigma @ s)).real ** 2


class TestFidelity:
    def test_self(self, rng):
        rho = random_density(rng)
        assert fidelity(rho, rho) == pytest.approx(1, abs=1e-10)

    def test_orthogonal(self):
        assert fidelity(KET0, KET1) == 0

    def test_bell_vs_werner(self):
        assert fidelity(bell_state(), werner_state(0.5)) == pytest.approx(5 / 8, abs=1e-14)

    def test_against_scipy_sqrtm(self, rng):
        for _ in range(10):
            rho, sigma = random_density(rng), random_density(rng)
            assert fidelity(rho, sigma) == pytest.approx(uhlmann_reference(rho, sigma), abs=1e-8)

    def test_symmetric(self, random_states):
        for a, b in zip(random_states[:20], random_states[20:40]):
            assert abs(fidelity(a, b) - fidelity(b, a)) <= 1e-10

    def test_unity_iff_equal(self, rng):
        rho = random_density(rng)
        other = 0.999 * rho + 0.001 * random_density(rng)
        assert fidelity(rho, other) < 1 - 1e-8


class TestValidationAndJson:
    def test_round_trip(self, rng):
        rho = random_density(rng)
        back = from_json(to_json(rho))
        assert np.allclose(back, rho, atol=1e-15)

    def test_json_layout(self):
        obj = to_json(bell_state())
        assert obj["dim"] == 4 and len(obj["re"]) == 16 and obj["re"][3] == pytest.approx(-0.5)

    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError):
            density_matrix(np.eye(2))

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            density_matrix(np.diag([1.1, -0.1]))

    def test_clamps_roundoff_negatives(self):
        rho = density_matrix(np.diag([1.0 + 1e-11, -1e-11, 0, 0]))
        assert np.linalg.eigvalsh(rho).min() >= 0

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_random_states_valid(self, seed):
        rho = random_density(np.random.default_rng(seed))
        assert np.allclose(density_matrix(rho), rho, atol=1e-12)
