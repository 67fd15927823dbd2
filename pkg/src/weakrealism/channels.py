"""Local mixed-unitary channels, monitoring maps and acquisition-time schedules.

A channel acting on one qubit is realized experimentally by splitting the
acquisition window into slices, each applying one unitary; the fraction of
time spent on a unitary is its weight in the channel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .density import DimensionError, Subsystem
from .states import COMPUTATIONAL, I2, SIGMA_X, SIGMA_Y, SIGMA_Z, ObservableBasis, _check_unit

WEIGHT_ATOL = 1e-12
UNITARY_ATOL = 1e-12
DURATION_ATOL = 1e-9

PAULI_OPS: Mapping[str, np.ndarray] = {"I": I2, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}


@dataclass(frozen=True)
class KrausChannel:
    """Mixed-unitary channel ``rho -> sum_k w_k U_k rho U_k^dagger`` on one qubit."""

    operators: tuple[tuple[float, np.ndarray], ...]
    subsystem: Subsystem = Subsystem.A

    def __post_init__(self):
        ops = []
        for w, u in self.operators:
            u = np.asarray(u, dtype=complex)
            if u.shape != (2, 2):
                raise DimensionError(f"Kraus unitaries must be 2x2, got {u.shape}")
            if w < 0:
                raise ValueError(f"negative channel weight {w}")
            if np.max(np.abs(u.conj().T @ u - I2)) > UNITARY_ATOL:
                raise ValueError("channel operator is not unitary")
            u = u.copy()
            u.flags.writeable = False
            ops.append((float(w), u))
        total = sum(w for w, _ in ops)
        if abs(total - 1.0) > WEIGHT_ATOL:
            raise ValueError(f"channel weights sum to {total!r}, expected 1")
        object.__setattr__(self, "operators", tuple(ops))
        object.__setattr__(self, "subsystem", Subsystem.parse(self.subsystem))

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(w for w, _ in self.operators)

    def kraus_operators(self) -> list[np.ndarray]:
        """``K_k = sqrt(w_k) U_k`` as single-qubit matrices."""
        return [math.sqrt(w) * u for w, u in self.operators]


def _lift(op: np.ndarray, sub: Subsystem) -> np.ndarray:
    return np.kron(op, I2) if sub is Subsystem.A else np.kron(I2, op)


def _local(rho, sub):
    """Return (rho, lift) where lift embeds single-qubit operators for ``rho``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape == (4, 4):
        s = Subsystem.parse(sub)
        return rho, lambda op: _lift(op, s)
    if rho.shape == (2, 2):
        return rho, lambda op: op
    raise DimensionError(f"expected a 2x2 or 4x4 state, got shape {rho.shape}")


def depolarizing_channel(mu: float, subsystem: Subsystem | str = Subsystem.A) -> KrausChannel:
    """Channel that maps ``|phi-><phi-|`` onto the Werner state of parameter ``mu``."""
    mu = _check_unit("mu", mu)
    p0, p = (1 + 3 * mu) / 4, (1 - mu) / 4
    return KrausChannel(((p0, I2), (p, SIGMA_X), (p, SIGMA_Y), (p, SIGMA_Z)), Subsystem.parse(subsystem))


def apply_channel(rho, ch: KrausChannel) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionError(f"apply_channel expects a 4x4 state, got {rho.shape}")
    out = np.zeros_like(rho)
    for w, u in ch.operators:
        if w == 0.0:
            continue
        big = _lift(u, ch.subsystem)
        out += w * (big @ rho @ big.conj().T)
    return out


def phi_map(rho, basis: ObservableBasis = COMPUTATIONAL, sub: Subsystem | str = Subsystem.A) -> np.ndarray:
    """Nonselective projective measurement of ``basis`` on qubit ``sub``.

    A 2x2 input is treated as the single measured qubit.
    """
    rho, lift = _local(rho, sub)
    out = np.zeros_like(rho)
    for proj in basis.projectors():
        big = lift(proj)
        out += big @ rho @ big
    return out


def monitoring(rho, basis: ObservableBasis = COMPUTATIONAL, eps: float = 1.0,
               sub: Subsystem | str = Subsystem.A) -> np.ndarray:
    """Weak nonselective measurement ``(1 - eps) rho + eps Phi(rho)``."""
    eps = _check_unit("eps", eps)
    rho = np.asarray(rho, dtype=complex)
    return (1 - eps) * rho + eps * phi_map(rho, basis, sub)


def monitoring_as_dephasing(rho, eps: float, sub: Subsystem | str = Subsystem.A) -> np.ndarray:
    """Computational-basis monitoring written as ``(1 - eps/2) rho + eps/2 Z rho Z``."""
    eps = _check_unit("eps", eps)
    rho, lift = _local(rho, sub)
    z = lift(SIGMA_Z)
    return (1 - eps / 2) * rho + (eps / 2) * (z @ rho @ z)


@dataclass(frozen=True)
class TimeSchedule:
    """Split of a total acquisition time into labelled slices (seconds)."""

    total: float
    slices: tuple[tuple[str, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        slices = tuple((str(lab), float(d)) for lab, d in self.slices)
        if any(d < 0 for _, d in slices):
            raise ValueError("slice durations must be non-negative")
        if abs(sum(d for _, d in slices) - self.total) > DURATION_ATOL:
            raise ValueError(f"slice durations do not sum to total {self.total}")
        object.__setattr__(self, "total", float(self.total))
        object.__setattr__(self, "slices", slices)

    @property
    def durations(self) -> tuple[float, ...]:
        return tuple(d for _, d in self.slices)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.slices)

    def to_json(self) -> dict:
        return {
            "total_s": self.total,
            "slices": [{"label": lab, "duration_s": d} for lab, d in self.slices],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TimeSchedule":
        return cls(obj["total_s"], tuple((s["label"], s["duration_s"]) for s in obj["slices"]))


def _check_total(total: float) -> float:
    total = float(total)
    if not total > 0:
        raise ValueError(f"total acquisition time must be positive, got {total}")
    return total


def werner_schedule(mu: float, total: float = 16.0) -> TimeSchedule:
    mu, total = _check_unit("mu", mu), _check_total(total)
    t0, t = total * (1 + 3 * mu) / 4, total * (1 - mu) / 4
    return TimeSchedule(total, (("I", t0), ("X", t), ("Y", t), ("Z", t)))


def monitoring_schedule(eps: float, total: float = 16.0) -> TimeSchedule:
    eps, total = _check_unit("eps", eps), _check_total(total)
    return TimeSchedule(total, (("I", total * (1 - eps / 2)), ("Z", total * eps / 2)))


def quantize(sched: TimeSchedule, granularity: float = 1.0) -> tuple[TimeSchedule, float]:
    """Round slice durations to multiples of ``granularity`` keeping the total.

    Uses largest-remainder rounding. Returns the quantized schedule and the
    largest absolute change it induces on any channel weight. The total must
    itself be a multiple of ``granularity``.
    """
    if not granularity > 0:
        raise ValueError("granularity must be positive")
    units_total = sched.total / granularity
    n_total = round(units_total)
    if abs(units_total - n_total) > 1e-9:
        raise ValueError(f"total {sched.total} s is not a multiple of {granularity} s")
    units = np.array(sched.durations) / granularity
    base = np.floor(units + 1e-9)
    remainder = units - base
    missing = int(n_total - base.sum())
    for idx in np.argsort(-remainder, kind="stable")[:missing]:
        base[idx] += 1
    new = TimeSchedule(sched.total, tuple(zip(sched.labels, (base * granularity).tolist())))
    err = float(np.max(np.abs(np.array(new.durations) - np.array(sched.durations)))) / sched.total
    return new, err


def channel_from_schedule(sched: TimeSchedule, ops: Mapping[str, np.ndarray] | None = None,
                          sub: Subsystem | str = Subsystem.A) -> KrausChannel:
    """Mixed-unitary channel whose weights are the slice fractions of ``sched``."""
    ops = PAULI_OPS if ops is None else ops
    if not sched.total > 0:
        raise ValueError("schedule has zero total time")
    operators = []
    for label, duration in sched.slices:
        if label not in ops:
            raise ValueError(f"schedule label {label!r} has no unitary; known: {sorted(ops)}")
        operators.append((duration / sched.total, ops[label]))
    return KrausChannel(tuple(operators), Subsystem.parse(sub))


def compose(rho, channels: Sequence[KrausChannel]) -> np.ndarray:
    for ch in channels:
        rho = apply_channel(rho, ch)
    return rho
