"""Coincidence-count tomography of two polarization qubits.

Each qubit is projected onto one of the six Pauli eigenstates (H, V, D, A,
R, L); the 36 product settings overcompletely span the two-qubit operator
space. Counts are Poisson with mean ``rate * exposure * Tr[rho P_A (x) P_B]``.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .density import DimensionError, hermitian
from .states import I2, SIGMA_X, SIGMA_Y, SIGMA_Z

log = logging.getLogger(__name__)

_S = 1 / np.sqrt(2)
POLARIZATIONS: Mapping[str, np.ndarray] = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([_S, _S], dtype=complex),
    "A": np.array([_S, -_S], dtype=complex),
    "R": np.array([_S, 1j * _S], dtype=complex),
    "L": np.array([_S, -1j * _S], dtype=complex),
}

_PAULI_BASIS = np.array([np.kron(a, b) for a in (I2, SIGMA_X, SIGMA_Y, SIGMA_Z)
                         for b in (I2, SIGMA_X, SIGMA_Y, SIGMA_Z)])


class ReconstructionError(RuntimeError):
    """Reconstruction failed or did not converge."""


@dataclass(frozen=True)
class TomographySetting:
    basis_a: str
    basis_b: str

    @property
    def label(self) -> str:
        return f"{self.basis_a}⊗{self.basis_b}"

    @property
    def projector_a(self) -> np.ndarray:
        v = POLARIZATIONS[self.basis_a]
        return np.outer(v, v.conj())

    @property
    def projector_b(self) -> np.ndarray:
        v = POLARIZATIONS[self.basis_b]
        return np.outer(v, v.conj())

    @property
    def projector(self) -> np.ndarray:
        return np.kron(self.projector_a, self.projector_b)


def standard_settings() -> list[TomographySetting]:
    return [TomographySetting(a, b) for a in POLARIZATIONS for b in POLARIZATIONS]


def _projectors(settings: Sequence[TomographySetting]) -> np.ndarray:
    return np.array([s.projector for s in settings])


def gram_rank(settings: Sequence[TomographySetting]) -> int:
    flat = _projectors(settings).reshape(len(settings), 16)
    return int(np.linalg.matrix_rank(flat @ flat.conj().T))


@dataclass(frozen=True)
class CountsTable:
    """Counts per setting. ``rate`` is the coincidence rate at unit probability.

    ``counts`` may be non-integer for noiseless (expected-value) tables.
    ``rate`` is ``None`` for tables read from CSV.
    """

    settings: tuple[TomographySetting, ...]
    counts: np.ndarray
    exposure: np.ndarray
    rate: float | None = None

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=float)
        exposure = np.broadcast_to(np.asarray(self.exposure, dtype=float), counts.shape).copy()
        if counts.shape != (len(self.settings),):
            raise DimensionError("one count per setting is required")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        if np.any(exposure <= 0):
            raise ValueError("exposure must be positive")
        counts.flags.writeable = False
        exposure.flags.writeable = False
        object.__setattr__(self, "settings", tuple(self.settings))
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "exposure", exposure)

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    def resample(self, rng: np.random.Generator) -> "CountsTable":
        """Parametric Poisson resample around the observed counts."""
        return replace(self, counts=rng.poisson(self.counts).astype(float))

    def to_csv(self, path: str | Path) -> None:
        path = Path(path)
        try:
            with path.open("w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(["setting_label", "basis_a", "basis_b", "exposure_s", "counts"])
                for s, e, n in zip(self.settings, self.exposure, self.counts):
                    w.writerow([s.label, s.basis_a, s.basis_b, repr(float(e)),
                                int(n) if float(n).is_integer() else repr(float(n))])
        except OSError as exc:
            raise OSError(f"cannot write counts table {path}: {exc}") from exc

    @classmethod
    def from_csv(cls, path: str | Path, rate: float | None = None) -> "CountsTable":
        path = Path(path)
        settings, exposure, counts = [], [], []
        with path.open(newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                try:
                    a, b = row["basis_a"].strip(), row["basis_b"].strip()
                    if a not in POLARIZATIONS or b not in POLARIZATIONS:
                        raise ValueError(f"unknown polarization in {row}")
                    settings.append(TomographySetting(a, b))
                    exposure.append(float(row["exposure_s"]))
                    counts.append(float(row["counts"]))
                except (KeyError, TypeError, ValueError) as exc:
                    raise ValueError(f"{path}: bad counts row {row}: {exc}") from None
        return cls(tuple(settings), np.array(counts), np.array(exposure), rate)


def expected_counts(rho, settings: Sequence[TomographySetting] | None = None, exposure: float = 16.0,
                    rate: float = 625.0) -> CountsTable:
    """Noise-free table holding the Poisson means."""
    settings = tuple(settings or standard_settings())
    p = _probabilities(_projectors(settings), np.asarray(rho, dtype=complex))
    exp = np.full(len(settings), float(exposure))
    return CountsTable(settings, rate * exp * np.clip(p, 0.0, None), exp, rate)


def simulate_counts(rho, settings: Sequence[TomographySetting] | None = None, exposure: float = 16.0,
                    rate: float = 625.0, seed: int | np.random.SeedSequence | None = 0) -> CountsTable:
    """Poisson coincidence counts from a seeded generator."""
    if not (exposure > 0 and rate > 0):
        raise ValueError("exposure and rate must be positive")
    mean = expected_counts(rho, settings, exposure, rate)
    rng = np.random.default_rng(seed)
    return replace(mean, counts=rng.poisson(mean.counts).astype(float))


def _probabilities(proj: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return np.einsum("kij,ji->k", proj, rho).real


def linear_inversion(counts: CountsTable) -> np.ndarray:
    """Least-squares operator reproducing the observed count ratios, with unit trace.

    The result is Hermitian but need not be positive.
    """
    proj = _projectors(counts.settings)
    design = np.einsum("kij,mji->km", proj, _PAULI_BASIS).real
    if np.linalg.matrix_rank(design) < 16:
        raise ReconstructionError("tomography settings do not span the two-qubit operator space")
    coef, *_ = np.linalg.lstsq(design, counts.counts / counts.exposure, rcond=None)
    y = np.einsum("m,mij->ij", coef, _PAULI_BASIS)
    tr = np.trace(y).real
    if not tr > 0:
        raise ReconstructionError("counts carry no signal (non-positive trace)")
    return hermitian(y / tr, atol=1e-9)


def _simplex_projection(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, len(u) + 1)
    r = np.nonzero(u - css / k > 0)[0][-1]
    return np.clip(v - css[r] / (r + 1), 0.0, None)


def project_to_physical(x) -> np.ndarray:
    """Frobenius-closest density matrix: eigenvalues projected onto the simplex."""
    x = np.asarray(x, dtype=complex)
    x = 0.5 * (x + x.conj().T)
    w, v = np.linalg.eigh(x)
    w = _simplex_projection(w)
    out = (v * w) @ v.conj().T
    return 0.5 * (out + out.conj().T)


@dataclass(frozen=True)
class ReconstructionResult:
    rho_hat: np.ndarray
    method: str
    loglik: float | None = None
    residual: float = 0.0
    converged: bool = True
    iterations: int = 0


class _Likelihood:
    """Poisson log-likelihood (up to count-only constants) and its gradient.

    Without a known rate the intensity is profiled out.
    """

    def __init__(self, counts: CountsTable):
        self.proj = _projectors(counts.settings)
        self.n = counts.counts
        self.positive = self.n > 0
        self.exposure = counts.exposure
        self.rate = counts.rate
        self.total = max(counts.total, 1.0)
        self.exposure_op = np.einsum("k,kij->ij", self.exposure, self.proj)

    def __call__(self, rho: np.ndarray) -> float:
        p = _probabilities(self.proj, rho)
        if np.any(p[self.positive] <= 0):
            return -np.inf
        npos = self.n[self.positive]
        mean = self.exposure * p
        if self.rate is None:
            scale = float(mean.sum())
            return float(npos @ np.log(mean[self.positive] / scale))
        mean = self.rate * mean
        return float(npos @ np.log(mean[self.positive]) - mean.sum())

    def gradient(self, rho: np.ndarray) -> np.ndarray:
        p = _probabilities(self.proj, rho)
        ratio = np.zeros_like(p)
        ratio[self.positive] = self.n[self.positive] / p[self.positive]
        g = np.einsum("k,kij->ij", ratio, self.proj)
        if self.rate is None:
            return g - self.total * self.exposure_op / float(self.exposure @ p)
        return g - self.rate * self.exposure_op


def loglikelihood(rho, counts: CountsTable) -> float:
    return _Likelihood(counts)(np.asarray(rho, dtype=complex))


def _residual(rho: np.ndarray, counts: CountsTable) -> float:
    p = np.clip(_probabilities(_projectors(counts.settings), rho), 0.0, None) * counts.exposure
    f = counts.counts
    return float(np.linalg.norm(f / max(f.sum(), 1e-300) - p / max(p.sum(), 1e-300)))


def mle_reconstruct(counts: CountsTable, max_iter: int = 10_000, tol: float = 1e-10) -> ReconstructionResult:
    """Maximum-likelihood density matrix by accelerated projected gradient ascent.

    Starts from the projected linear-inversion estimate and only accepts
    iterates that improve on the incumbent, so the result never has lower
    likelihood than that start. Stops when an accepted step improves the
    log-likelihood by less than ``tol``; hitting ``max_iter`` first is
    reported through ``converged=False``.
    """
    like = _Likelihood(counts)
    x = project_to_physical(linear_inversion(counts))
    lx = like(x)
    delta = 1e-8
    while not np.isfinite(lx):
        x = (1 - delta) * x + delta * np.eye(4) / 4
        lx = like(x)
        delta *= 10
    scale = 1.0 / like.total
    y, ly, theta, step = x, lx, 1.0, 1.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        gy = like.gradient(y) * scale
        while True:
            z = project_to_physical(y + step * gy)
            lz = like(z)
            d = z - y
            model = ly * scale + float(np.vdot(gy, d).real) - float(np.vdot(d, d).real) / (2 * step)
            if np.isfinite(lz) and lz * scale >= model - 1e-15:
                break
            step *= 0.5
            if step < 1e-18:
                break
        if not np.isfinite(lz) or lz < lx:
            if y is x:
                # no ascent from the incumbent: stationary to working precision
                converged = True
                break
            y, ly, theta = x, lx, 1.0
            continue
        gain = lz - lx
        theta_next = (1 + np.sqrt(1 + 4 * theta * theta)) / 2
        y_next = z + ((theta - 1) / theta_next) * (z - x)
        x, lx, theta = z, lz, theta_next
        ly = like(y_next)
        if np.isfinite(ly):
            y = y_next
        else:
            y, ly, theta = x, lx, 1.0
        step *= 1.5
        if gain < tol:
            converged = True
            break
    if not converged:
        log.warning("MLE stopped at the iteration cap (%d) without converging", max_iter)
    return ReconstructionResult(x, "mle", lx, _residual(x, counts), converged, it)


METHODS = ("linear-inversion", "projected", "mle")


def reconstruct(counts: CountsTable, method: str = "mle", **kwargs) -> ReconstructionResult:
    if method == "mle":
        return mle_reconstruct(counts, **kwargs)
    x = linear_inversion(counts)
    if method == "linear-inversion":
        return ReconstructionResult(x, method, None, _residual(x, counts))
    if method == "projected":
        rho = project_to_physical(x)
        return ReconstructionResult(rho, method, loglikelihood(rho, counts), _residual(rho, counts))
    raise ValueError(f"unknown reconstruction method {method!r}; choose from {METHODS}")


@dataclass(frozen=True)
class BootstrapStats:
    mean: dict
    std: dict
    samples: dict = field(repr=False)
    unconverged: int = 0


def trial_rng(seed: int, *stream: int) -> np.random.Generator:
    """Independent generator for one trial, fixed by ``(seed, *stream)``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, stream)]))


def bootstrap_errorbars(counts: CountsTable | Sequence[CountsTable], n_resamples: int, seed: int,
                        quantifiers: Callable[..., Mapping[str, float]], method: str = "mle",
                        stream: Sequence[int] = ()) -> BootstrapStats:
    """Poisson-parametric bootstrap of quantities derived from reconstructed states.

    ``quantifiers`` receives one reconstructed state per table in ``counts``
    and returns named values. Resample ``b`` draws from ``trial_rng(seed,
    *stream, b)`` so results do not depend on evaluation order.
    """
    if n_resamples < 2:
        raise ValueError("n_resamples must be at least 2")
    tables = [counts] if isinstance(counts, CountsTable) else list(counts)
    samples: dict[str, list[float]] = {}
    unconverged = 0
    for b in range(n_resamples):
        rng = trial_rng(seed, *stream, b)
        rhos = []
        for table in tables:
            res = reconstruct(table.resample(rng), method)
            unconverged += not res.converged
            rhos.append(res.rho_hat)
        for name, value in quantifiers(*rhos).items():
            samples.setdefault(name, []).append(float(value))
    arrays = {k: np.array(v) for k, v in samples.items()}
    return BootstrapStats(
        mean={k: float(v.mean()) for k, v in arrays.items()},
        std={k: float(v.std(ddof=1)) for k, v in arrays.items()},
        samples=arrays,
        unconverged=unconverged,
    )
