"""Global minimization of smooth functions of a qubit measurement direction."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .states import ObservableBasis


@dataclass(frozen=True)
class MinimizerOptions:
    n_theta: int = 64
    n_phi: int = 128
    n_starts: int = 3
    fatol: float = 1e-8
    xatol: float = 1e-6
    maxiter: int = 2000
    antipodal_symmetric: bool = True


@dataclass(frozen=True)
class MinimizationResult:
    value: float
    argmin: ObservableBasis
    evaluations: int
    converged: bool


def grid(opts: MinimizerOptions) -> tuple[np.ndarray, np.ndarray]:
    """Flattened (theta, phi) cell centres in theta and left edges in phi.

    With ``antipodal_symmetric`` only phi in [0, pi) is returned: the theta
    grid is mirror symmetric and n_phi even, so the other half consists of
    exact antipodes, which define the same measurement.
    """
    theta = (np.arange(opts.n_theta) + 0.5) * np.pi / opts.n_theta
    n_phi = opts.n_phi
    if opts.antipodal_symmetric:
        if n_phi % 2:
            raise ValueError("antipodal grid reduction needs an even n_phi")
        n_phi //= 2
    phi = np.arange(n_phi) * 2 * np.pi / opts.n_phi
    t, p = np.meshgrid(theta, phi, indexing="ij")
    return t.ravel(), p.ravel()


def minimize_over_bases(batch_objective: Callable[[np.ndarray, np.ndarray], np.ndarray],
                        opts: MinimizerOptions | None = None) -> MinimizationResult:
    """Grid search then Nelder-Mead refinement from the best grid cells.

    ``batch_objective(theta, phi)`` takes equal-length arrays and returns the
    objective for each direction; an optional ``batch_objective.scalar(theta, phi)``
    attribute is used for the refinement. Grid ties resolve to the lowest
    flat index.
    """
    opts = opts or MinimizerOptions()
    theta, phi = grid(opts)
    values = np.asarray(batch_objective(theta, phi), dtype=float)
    evaluations = values.size
    order = np.argsort(values, kind="stable")[: opts.n_starts]

    fast = getattr(batch_objective, "scalar", None)

    def scalar(x):
        if fast is not None:
            return fast(float(x[0]), float(x[1]))
        return float(batch_objective(np.array([x[0]]), np.array([x[1]]))[0])

    dt, dp = np.pi / opts.n_theta, 2 * np.pi / opts.n_phi
    best_value, best_x, converged = float(values[order[0]]), (theta[order[0]], phi[order[0]]), True
    for idx in order:
        x0 = np.array([theta[idx], phi[idx]])
        simplex = np.array([x0, x0 + [dt, 0.0], x0 + [0.0, dp]])
        res = minimize(scalar, x0, method="Nelder-Mead",
                       options={"initial_simplex": simplex, "fatol": opts.fatol,
                                "xatol": opts.xatol, "maxiter": opts.maxiter})
        evaluations += int(res.nfev)
        converged = converged and bool(res.success)
        if res.fun < best_value:
            best_value, best_x = float(res.fun), (float(res.x[0]), float(res.x[1]))
    argmin = ObservableBasis(float(best_x[0]), float(best_x[1])).normalized()
    return MinimizationResult(best_value, argmin, evaluations, converged)
