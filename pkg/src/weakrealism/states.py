"""Bell states, Werner states and qubit observables.

Polarization is encoded as H -> |0>, V -> |1> throughout.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .density import from_json

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
for _m in (I2, SIGMA_X, SIGMA_Y, SIGMA_Z):
    _m.flags.writeable = False


class BellLabel(str, Enum):
    PHI_MINUS = "phi-"
    PHI_PLUS = "phi+"
    PSI_MINUS = "psi-"
    PSI_PLUS = "psi+"


_S = 1 / np.sqrt(2)
_BELL_VECTORS = {
    BellLabel.PHI_MINUS: np.array([_S, 0, 0, -_S], dtype=complex),
    BellLabel.PHI_PLUS: np.array([_S, 0, 0, _S], dtype=complex),
    BellLabel.PSI_MINUS: np.array([0, _S, -_S, 0], dtype=complex),
    BellLabel.PSI_PLUS: np.array([0, _S, _S, 0], dtype=complex),
}


def bell_vector(label: BellLabel | str = BellLabel.PHI_MINUS) -> np.ndarray:
    return _BELL_VECTORS[BellLabel(label)].copy()


def bell_state(label: BellLabel | str = BellLabel.PHI_MINUS) -> np.ndarray:
    v = _BELL_VECTORS[BellLabel(label)]
    return np.outer(v, v.conj())


def _check_unit(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


def werner_state(mu: float) -> np.ndarray:
    """``(1 - mu) I/4 + mu |phi-><phi-|``."""
    mu = _check_unit("mu", mu)
    return (1 - mu) * np.eye(4, dtype=complex) / 4 + mu * bell_state(BellLabel.PHI_MINUS)


@dataclass(frozen=True)
class ObservableBasis:
    """Measurement direction on the Bloch sphere.

    The ``+`` eigenstate is ``cos(theta/2)|0> + exp(i phi) sin(theta/2)|1>``.
    """

    theta: float = 0.0
    phi: float = 0.0

    @classmethod
    def parse(cls, text: str) -> "ObservableBasis":
        """Parse ``"theta,phi"`` in radians, or one of ``z``, ``x``, ``y``."""
        named = {"z": COMPUTATIONAL, "x": cls(np.pi / 2, 0.0), "y": cls(np.pi / 2, np.pi / 2)}
        key = text.strip().lower()
        if key in named:
            return named[key]
        try:
            theta, phi = (float(s) for s in key.split(","))
        except ValueError:
            raise ValueError(f"basis must be 'theta,phi' in radians or x/y/z, got {text!r}") from None
        return cls(theta, phi)

    def vectors(self) -> tuple[np.ndarray, np.ndarray]:
        c, s = np.cos(self.theta / 2), np.sin(self.theta / 2)
        e = np.exp(1j * self.phi)
        return np.array([c, e * s]), np.array([s, -e * c])

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        plus, minus = self.vectors()
        return np.outer(plus, plus.conj()), np.outer(minus, minus.conj())

    def bloch_vector(self) -> np.ndarray:
        st = np.sin(self.theta)
        return np.array([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])

    def normalized(self) -> "ObservableBasis":
        """Equivalent basis with theta in [0, pi] and phi in [0, 2 pi)."""
        theta = float(np.mod(self.theta, 2 * np.pi))
        phi = float(self.phi)
        if theta > np.pi:
            theta = 2 * np.pi - theta
            phi += np.pi
        return ObservableBasis(theta, float(np.mod(phi, 2 * np.pi)))


COMPUTATIONAL = ObservableBasis(0.0, 0.0)


def observable_projectors(basis: ObservableBasis) -> tuple[np.ndarray, np.ndarray]:
    return basis.projectors()


def parse_state(spec: str) -> np.ndarray:
    """Build a state from ``bell:<label>``, ``werner:<mu>`` or a JSON file path."""
    kind, sep, arg = spec.partition(":")
    if sep and kind == "bell":
        try:
            return bell_state(BellLabel(arg))
        except ValueError:
            raise ValueError(f"unknown Bell label {arg!r}") from None
    if sep and kind == "werner":
        try:
            mu = float(arg)
        except ValueError:
            raise ValueError(f"bad Werner parameter {arg!r}") from None
        return werner_state(mu)
    path = Path(spec)
    if not path.is_file():
        raise ValueError(f"state spec {spec!r} is neither bell:/werner: nor an existing file")
    with path.open() as fh:
        return from_json(json.load(fh))
