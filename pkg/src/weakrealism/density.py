"""Hermitian matrix calculus and entropic functionals for one and two qubits.

States are plain complex ``numpy`` arrays of shape ``(2, 2)`` or ``(4, 4)``.
Functions never modify their inputs. Entropies are in nats.
"""
from __future__ import annotations

from enum import Enum
from typing import NamedTuple

import numpy as np

HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-12
PSD_ATOL = 1e-10
# eigenvalues at or below this are treated as zero in matrix functions
CLAMP = 1e-12
# rank-1 detection for the fidelity fast path
PURE_THRESHOLD = 1.0 - 1e-9


class Subsystem(str, Enum):
    """Qubit label of a two-qubit state (A = mode 1, B = mode 2)."""

    A = "A"
    B = "B"

    @classmethod
    def parse(cls, value: "Subsystem | str") -> "Subsystem":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown subsystem {value!r}; expected 'A' or 'B'") from None

    @property
    def other(self) -> "Subsystem":
        return Subsystem.B if self is Subsystem.A else Subsystem.A


class DimensionError(ValueError):
    """Operator has the wrong shape for the requested operation."""


class NotHermitianError(ValueError):
    """Operator deviates from its conjugate transpose beyond tolerance."""


class Spectrum(NamedTuple):
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns


def _square(m, dims=(2, 4)) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in dims:
        raise DimensionError(f"expected a square matrix of size {dims}, got shape {m.shape}")
    return m


def hermitian(m, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Validate ``m`` as a Hermitian operator and return its symmetrized copy."""
    m = _square(m)
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m - m.conj().T)) > atol * scale:
        raise NotHermitianError("operator is not Hermitian within tolerance")
    return 0.5 * (m + m.conj().T)


def density_matrix(m, *, clamp: bool = True) -> np.ndarray:
    """Validate ``m`` as a density matrix.

    Checks Hermiticity, unit trace and positivity (smallest eigenvalue no
    lower than ``-PSD_ATOL``). With ``clamp`` the tiny negative eigenvalues
    are set to zero and the result renormalized.
    """
    h = hermitian(m)
    tr = np.trace(h).real
    if abs(tr - 1.0) > TRACE_ATOL:
        raise ValueError(f"trace is {tr!r}, expected 1")
    w, v = np.linalg.eigh(h)
    if w[0] < -PSD_ATOL:
        raise ValueError(f"not positive semidefinite: smallest eigenvalue {w[0]:.3e}")
    if clamp and w[0] < 0:
        w = np.clip(w, 0.0, None)
        h = (v * (w / w.sum())) @ v.conj().T
        h = 0.5 * (h + h.conj().T)
    return h


def is_density_matrix(m) -> bool:
    try:
        density_matrix(m, clamp=False)
    except ValueError:
        return False
    return True


def tensor(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace(rho, keep: Subsystem | str = Subsystem.A) -> np.ndarray:
    """Reduced state of the ``keep`` qubit of a two-qubit operator."""
    rho = _square(rho, dims=(4,))
    r = rho.reshape(2, 2, 2, 2)
    if Subsystem.parse(keep) is Subsystem.A:
        return np.einsum("ijkj->ik", r)
    return np.einsum("ijil->jl", r)


def _phase_fix(v: np.ndarray) -> np.ndarray:
    # make the first non-negligible component of each column real positive
    v = v.copy()
    for k in range(v.shape[1]):
        col = v[:, k]
        idx = int(np.argmax(np.abs(col) > 1e-10))
        ph = col[idx] / abs(col[idx])
        v[:, k] = col / ph
    return v


def eig_hermitian(h) -> Spectrum:
    """Eigendecomposition with descending eigenvalues and a fixed phase convention."""
    h = hermitian(h)
    w, v = np.linalg.eigh(h)
    order = np.argsort(-w, kind="stable")
    return Spectrum(w[order], _phase_fix(v[:, order]))


def entropy_of_spectrum(p, threshold: float = 1e-15) -> float:
    """Shannon entropy ``-sum p ln p`` with ``0 ln 0 = 0``."""
    p = np.asarray(p, dtype=float)
    p = p[p > threshold]
    return float(-np.sum(p * np.log(p)))


def von_neumann_entropy(rho) -> float:
    w = np.linalg.eigvalsh(_square(rho))
    return entropy_of_spectrum(np.clip(w, 0.0, None))


def relative_entropy(rho, sigma) -> float:
    """``Tr[rho (ln rho - ln sigma)]``; ``inf`` when supp(rho) is not inside supp(sigma)."""
    rho, sigma = _square(rho), _square(sigma)
    if rho.shape != sigma.shape:
        raise DimensionError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    ws, vs = np.linalg.eigh(sigma)
    # weights of rho along sigma's eigenvectors
    q = np.einsum("ij,ik,kj->j", vs.conj(), rho, vs).real
    null = ws <= CLAMP
    if np.any(q[null] > CLAMP):
        return float("inf")
    cross = float(np.sum(q[~null] * np.log(ws[~null])))
    value = -von_neumann_entropy(rho) - cross
    return max(value, 0.0)


def mutual_information(rho) -> float:
    rho = _square(rho, dims=(4,))
    value = (
        von_neumann_entropy(partial_trace(rho, Subsystem.A))
        + von_neumann_entropy(partial_trace(rho, Subsystem.B))
        - von_neumann_entropy(rho)
    )
    return max(value, 0.0)


def _sqrtm_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    w = np.sqrt(np.where(w > CLAMP, w, 0.0))
    return (v * w) @ v.conj().T


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``.

    If either argument is pure the overlap ``<psi|other|psi>`` is returned
    directly.
    """
    rho, sigma = _square(rho), _square(sigma)
    if rho.shape != sigma.shape:
        raise DimensionError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    for pure, other in ((rho, sigma), (sigma, rho)):
        w, v = np.linalg.eigh(pure)
        if w[-1] >= PURE_THRESHOLD:
            psi = v[:, -1]
            return float(np.clip((psi.conj() @ other @ psi).real, 0.0, 1.0))
    s = _sqrtm_psd(rho)
    inner = s @ sigma @ s
    w = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    f = float(np.sum(np.sqrt(np.clip(w, 0.0, None)))) ** 2
    return float(np.clip(f, 0.0, 1.0))


def to_json(rho) -> dict:
    """Serialize as ``{dim, re, im}`` with row-major Hermitian-symmetrized entries."""
    m = _square(rho)
    m = 0.5 * (m + m.conj().T)
    return {
        "dim": int(m.shape[0]),
        "re": m.real.ravel().tolist(),
        "im": m.imag.ravel().tolist(),
    }


def from_json(obj: dict, *, validate: bool = True) -> np.ndarray:
    try:
        dim = int(obj["dim"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed density matrix object: {exc}") from None
    if re.size != dim * dim or im.size != dim * dim:
        raise DimensionError(f"expected {dim * dim} entries for dim={dim}")
    m = (re + 1j * im).reshape(dim, dim)
    return density_matrix(m) if validate else hermitian(m)
