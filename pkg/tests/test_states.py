import json
import math

import numpy as np
import pytest

from weakrealism.density import to_json, von_neumann_entropy
from weakrealism.states import (
    COMPUTATIONAL, SIGMA_X, SIGMA_Y, SIGMA_Z, BellLabel, ObservableBasis, bell_state, bell_vector,
    parse_state, werner_state,
)


def test_pauli_constants_read_only():
    with pytest.raises(ValueError):
        SIGMA_X[0, 0] = 5


def test_phi_minus_vector():
    assert np.allclose(bell_vector(), np.array([1, 0, 0, -1]) / math.sqrt(2))


def test_bell_states_orthonormal():
    vecs = np.array([bell_vector(lab) for lab in BellLabel])
    assert np.allclose(vecs.conj() @ vecs.T, np.eye(4), atol=1e-15)


@pytest.mark.parametrize("mu", [0.0, 0.3, 1.0])
def test_werner_trace_and_endpoints(mu):
    rho = werner_state(mu)
    assert np.trace(rho).real == pytest.approx(1)
    assert np.allclose(rho, (1 - mu) * np.eye(4) / 4 + mu * bell_state(), atol=1e-15)


def test_werner_spectrum():
    w = np.sort(np.linalg.eigvalsh(werner_state(0.5)))
    assert np.allclose(w, [1 / 8, 1 / 8, 1 / 8, 5 / 8])


def test_werner_endpoint_entropies():
    assert von_neumann_entropy(werner_state(0)) == pytest.approx(math.log(4))
    assert von_neumann_entropy(werner_state(1)) == pytest.approx(0, abs=1e-14)


@pytest.mark.parametrize("mu", [-0.01, 1.01, math.nan])
def test_werner_rejects_out_of_range(mu):
    with pytest.raises(ValueError):
        werner_state(mu)


def test_werner_local_unitary_invariance(rng):
    # phi- = (Z x I) phi+, so the U x U* symmetry of phi+ becomes U x Z U* Z
    from conftest import random_unitary
    rho = werner_state(0.6)
    for _ in range(5):
        u = random_unitary(rng)
        big = np.kron(u, SIGMA_Z @ u.conj() @ SIGMA_Z)
        assert np.allclose(big @ rho @ big.conj().T, rho, atol=1e-12)
    plus = 0.6 * bell_state("phi+") + 0.1 * np.eye(4)
    big = np.kron(u, u.conj())
    assert np.allclose(big @ plus @ big.conj().T, plus, atol=1e-12)


class TestObservableBasis:
    def test_default_is_z(self):
        plus, minus = COMPUTATIONAL.projectors()
        assert np.allclose(plus, np.diag([1, 0])) and np.allclose(minus, np.diag([0, 1]))

    @pytest.mark.parametrize("name,pauli", [("x", SIGMA_X), ("y", SIGMA_Y), ("z", SIGMA_Z)])
    def test_named_bases_diagonalize_paulis(self, name, pauli):
        plus, minus = ObservableBasis.parse(name).projectors()
        assert np.allclose(plus - minus, pauli, atol=1e-15)

    def test_projectors_complete(self, rng):
        for _ in range(20):
            b = ObservableBasis(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi))
            plus, minus = b.projectors()
            assert np.allclose(plus + minus, np.eye(2), atol=1e-15)
            assert np.allclose(plus @ minus, 0, atol=1e-15)
            n = b.bloch_vector()
            assert np.allclose(plus - minus, n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z, atol=1e-14)

    def test_parse_angles(self):
        assert ObservableBasis.parse("0.5, 1.25") == ObservableBasis(0.5, 1.25)

    @pytest.mark.parametrize("text", ["", "1", "a,b", "1,2,3"])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            ObservableBasis.parse(text)

    def test_normalized_same_measurement(self, rng):
        for _ in range(20):
            b = ObservableBasis(rng.uniform(-10, 10), rng.uniform(-10, 10))
            n = b.normalized()
            assert 0 <= n.theta <= np.pi and 0 <= n.phi < 2 * np.pi
            pb, pn = b.projectors()[0], n.projectors()[0]
            assert np.allclose(pb, pn, atol=1e-12) or np.allclose(pb, np.eye(2) - pn, atol=1e-12)


class TestParseState:
    def test_bell(self):
        assert np.allclose(parse_state("bell:psi+"), bell_state("psi+"))

    def test_werner(self):
        assert np.allclose(parse_state("werner:0.25"), werner_state(0.25))

    def test_json_file(self, tmp_path):
        path = tmp_path / "s.json"
        path.write_text(json.dumps(to_json(werner_state(0.4))))
        assert np.allclose(parse_state(str(path)), werner_state(0.4))

    @pytest.mark.parametrize("spec", ["bell:xyz", "werner:abc", "werner:2", "missing.json"])
    def test_rejects(self, spec):
        with pytest.raises(ValueError):
            parse_state(spec)
