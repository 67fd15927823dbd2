"""Realism, irrealism and (weak) quantum discord of two-qubit states.

Every quantity is in nats. Measurements act on one qubit ``sub``; the other
qubit is left untouched. The qubit dimension ``d`` is 2, so irrealism lies in
``[0, ln 2]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import monitoring, phi_map
from .density import Subsystem, entropy_of_spectrum, mutual_information, partial_trace, von_neumann_entropy
from .minimize import MinimizationResult, MinimizerOptions, minimize_over_bases
from .states import COMPUTATIONAL, ObservableBasis, _check_unit

LN2 = math.log(2.0)
INCOMPATIBLE_ATOL = 1e-9
LOG_THRESHOLD = 1e-15


def irrealism(rho, basis: ObservableBasis = COMPUTATIONAL, sub: Subsystem | str = Subsystem.A) -> float:
    """Entropy gained by an unrevealed projective measurement of ``basis``.

    Works on two-qubit states and on single-qubit states alike.
    """
    value = von_neumann_entropy(phi_map(rho, basis, sub)) - von_neumann_entropy(rho)
    return max(value, 0.0)


def realism(rho, basis: ObservableBasis = COMPUTATIONAL, sub: Subsystem | str = Subsystem.A) -> float:
    return LN2 - irrealism(rho, basis, sub)


def delta_realism(rho, basis: ObservableBasis = COMPUTATIONAL, eps: float = 1.0,
                  sub: Subsystem | str = Subsystem.A) -> float:
    """Realism gained by monitoring: ``S(M(rho)) - S(rho)``."""
    return von_neumann_entropy(monitoring(rho, basis, eps, sub)) - von_neumann_entropy(rho)


def local_coherence_variation(rho, basis: ObservableBasis = COMPUTATIONAL, eps: float = 1.0,
                              sub: Subsystem | str = Subsystem.A) -> float:
    """Realism variation of the measured qubit's reduced state alone."""
    return delta_realism(partial_trace(rho, sub), basis, eps, sub)


def weak_discord_unminimized(rho, basis: ObservableBasis = COMPUTATIONAL, eps: float = 1.0,
                             sub: Subsystem | str = Subsystem.A) -> float:
    """Mutual information destroyed by monitoring ``basis`` with strength ``eps``."""
    return mutual_information(rho) - mutual_information(monitoring(rho, basis, eps, sub))


# Batched objective ----------------------------------------------------------

def _batch_plus_projectors(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    e = np.exp(1j * phi)
    p = np.empty(theta.shape + (2, 2), dtype=complex)
    p[..., 0, 0] = c * c
    p[..., 0, 1] = c * s * np.conj(e)
    p[..., 1, 0] = c * s * e
    p[..., 1, 1] = s * s
    return p


def _batch_entropy(mats: np.ndarray) -> np.ndarray:
    w = np.clip(np.linalg.eigvalsh(mats), 0.0, None)
    logs = np.log(np.where(w > LOG_THRESHOLD, w, 1.0))
    return -np.sum(w * logs, axis=-1)


def _binary_entropy_from_radius(r: np.ndarray) -> np.ndarray:
    lam = np.clip(np.stack([(1 + r) / 2, (1 - r) / 2], axis=-1), 0.0, None)
    logs = np.log(np.where(lam > LOG_THRESHOLD, lam, 1.0))
    return -np.sum(lam * logs, axis=-1)


def _bloch(rho2: np.ndarray) -> np.ndarray:
    return np.array([2 * rho2[0, 1].real, -2 * rho2[0, 1].imag, (rho2[0, 0] - rho2[1, 1]).real])


def weak_discord_objective(rho, eps: float, sub: Subsystem | str = Subsystem.A):
    """Return ``f(theta, phi)`` giving ``I(rho) - I(M(rho))`` for arrays of directions."""
    rho = np.asarray(rho, dtype=complex)
    sub = Subsystem.parse(sub)
    eps = _check_unit("eps", eps)
    s_rho = von_neumann_entropy(rho)
    local = partial_trace(rho, sub)
    bloch = _bloch(local)
    r2 = float(bloch @ bloch)
    s_local = entropy_of_spectrum(np.clip(np.linalg.eigvalsh(local), 0.0, None))

    def objective(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
        p = _batch_plus_projectors(theta, phi)
        n = p.shape[0]
        lifted = np.zeros((n, 4, 4), dtype=complex)
        if sub is Subsystem.A:
            lifted[:, 0::2, 0::2] = p
            lifted[:, 1::2, 1::2] = p
        else:
            lifted[:, :2, :2] = p
            lifted[:, 2:, 2:] = p
        # Phi(rho) = rho - P rho - rho P + 2 P rho P
        pr = lifted @ rho
        measured = rho - pr - pr.conj().transpose(0, 2, 1) + 2 * (pr @ lifted)
        m = (1 - eps) * rho + eps * measured
        s_m = _batch_entropy(m)
        # locally, monitoring keeps the Bloch component along n and shrinks the rest by (1 - eps)
        nvec = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1)
        par2 = (nvec @ bloch) ** 2
        rad = np.sqrt(np.clip(par2 + (1 - eps) ** 2 * (r2 - par2), 0.0, None))
        s_mlocal = _binary_entropy_from_radius(rad)
        return (s_m - s_rho) - (s_mlocal - s_local)

    def scalar(theta: float, phi: float) -> float:
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        e = complex(math.cos(phi), math.sin(phi))
        p = np.array([[c * c, c * s * e.conjugate()], [c * s * e, s * s]])
        big = np.zeros((4, 4), dtype=complex)
        if sub is Subsystem.A:
            big[0::2, 0::2] = p
            big[1::2, 1::2] = p
        else:
            big[:2, :2] = p
            big[2:, 2:] = p
        pr = big @ rho
        m = rho + eps * (2 * (pr @ big) - pr - pr.conj().T)
        w = np.linalg.eigvalsh(m)
        w = w[w > LOG_THRESHOLD]
        s_m = -float(w @ np.log(w))
        st = math.sin(theta)
        par = st * math.cos(phi) * bloch[0] + st * math.sin(phi) * bloch[1] + math.cos(theta) * bloch[2]
        rad = math.sqrt(max(par * par + (1 - eps) ** 2 * (r2 - par * par), 0.0))
        s_mlocal = sum(-x * math.log(x) for x in ((1 + rad) / 2, (1 - rad) / 2) if x > LOG_THRESHOLD)
        return (s_m - s_rho) - (s_mlocal - s_local)

    objective.scalar = scalar
    return objective


def weak_discord(rho, eps: float, sub: Subsystem | str = Subsystem.A,
                 opts: MinimizerOptions | None = None) -> MinimizationResult:
    """Weak quantum discord: minimum over bases of the mutual information lost to monitoring."""
    return minimize_over_bases(weak_discord_objective(rho, eps, sub), opts)


def discord(rho, sub: Subsystem | str = Subsystem.A, opts: MinimizerOptions | None = None) -> MinimizationResult:
    return weak_discord(rho, 1.0, sub, opts)


def discord_irrealism_gap(rho, basis: ObservableBasis = COMPUTATIONAL, sub: Subsystem | str = Subsystem.A) -> float:
    """Irrealism of the joint state in excess of the reduced state's irrealism."""
    return irrealism(rho, basis, sub) - irrealism(partial_trace(rho, sub), basis, sub)


@dataclass(frozen=True)
class ComplementarityReport:
    lhs: float
    rhs: float
    slack: float
    pure: bool


def complementarity_check(rho, basis_a: ObservableBasis, basis_b: ObservableBasis,
                          sub: Subsystem | str = Subsystem.A) -> ComplementarityReport:
    """Compare realism of two incompatible observables with their joint upper bound.

    ``basis_a`` and ``basis_b`` must have orthogonal Bloch vectors.
    """
    overlap = float(basis_a.bloch_vector() @ basis_b.bloch_vector())
    if abs(overlap) > INCOMPATIBLE_ATOL:
        raise ValueError(f"bases are not maximally incompatible (Bloch overlap {overlap:.3e})")
    lhs = realism(rho, basis_a, sub) + realism(rho, basis_b, sub)
    local_entropy = von_neumann_entropy(partial_trace(rho, sub))
    pure = float(np.linalg.eigvalsh(np.asarray(rho, dtype=complex))[-1]) >= 1 - 1e-9
    if pure:
        rhs = LN2 - local_entropy
    else:
        rhs = LN2 + local_entropy - mutual_information(rho)
    return ComplementarityReport(lhs, rhs, rhs - lhs, pure)


@dataclass(frozen=True)
class QuantifierReport:
    irrealism: float
    realism: float
    delta_realism: float
    weak_discord_unmin: float
    local_coherence_variation: float
    bound_eps_times_irrealism: float
    basis: ObservableBasis
    eps: float
    weak_discord_min: float | None = None
    discord_e1: float | None = None
    mu: float | None = None
    extras: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.delta_realism - self.bound_eps_times_irrealism

    CSV_FIELDS = ("mu", "eps", "irrealism", "realism", "delta_realism", "weak_discord_unmin",
                  "weak_discord_min", "discord_e1", "bound", "slack")

    def csv_row(self) -> dict:
        return {
            "mu": self.mu, "eps": self.eps, "irrealism": self.irrealism, "realism": self.realism,
            "delta_realism": self.delta_realism, "weak_discord_unmin": self.weak_discord_unmin,
            "weak_discord_min": self.weak_discord_min, "discord_e1": self.discord_e1,
            "bound": self.bound_eps_times_irrealism, "slack": self.slack,
        }


def quantify(rho, basis: ObservableBasis = COMPUTATIONAL, eps: float = 1.0,
             sub: Subsystem | str = Subsystem.A, *, minimize: bool = True,
             opts: MinimizerOptions | None = None, mu: float | None = None) -> QuantifierReport:
    irr = irrealism(rho, basis, sub)
    extras = {}
    wmin = dis = None
    if minimize:
        w = weak_discord(rho, eps, sub, opts)
        d = discord(rho, sub, opts)
        wmin, dis = w.value, d.value
        extras = {"weak_discord_argmin": w.argmin, "discord_argmin": d.argmin,
                  "converged": w.converged and d.converged}
    return QuantifierReport(
        irrealism=irr,
        realism=LN2 - irr,
        delta_realism=delta_realism(rho, basis, eps, sub),
        weak_discord_unmin=weak_discord_unminimized(rho, basis, eps, sub),
        local_coherence_variation=local_coherence_variation(rho, basis, eps, sub),
        bound_eps_times_irrealism=eps * irr,
        basis=basis, eps=eps, weak_discord_min=wmin, discord_e1=dis, mu=mu, extras=extras,
    )


# Werner closed forms -----------------------------------------------------

def werner_monitored_eigenvalues(mu: float, eps: float) -> tuple[float, float, float, float]:
    """Spectrum of the monitored Werner state; independent of the measured direction."""
    mu, eps = _check_unit("mu", mu), _check_unit("eps", eps)
    return ((1 - mu) / 4, (1 - mu) / 4, (1 + 3 * mu - 2 * mu * eps) / 4, (1 - mu + 2 * mu * eps) / 4)


def werner_delta_realism_closed_form(mu: float, eps: float) -> float:
    """``1/4 sum_{i=-1..1} sum_{j=0,1} (-1)^j l_ij ln l_ij`` with ``l_ij = 1 + mu (1 + 2 i (1 - j eps))``."""
    mu, eps = _check_unit("mu", mu), _check_unit("eps", eps)
    total = 0.0
    for i in (-1, 0, 1):
        for j in (0, 1):
            lam = 1 + mu * (1 + 2 * i * (1 - j * eps))
            if lam > LOG_THRESHOLD:
                total += (-1) ** j * lam * math.log(lam)
    return total / 4
