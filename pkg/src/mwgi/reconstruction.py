"""Scene recovery from a :class:`~mwgi.forward.MeasurementSet`.

Scattering coefficients are real and nonnegative, so the complex system
``rho * E @ delta = R`` is handled as the real system of stacked real and
imaginary parts wherever a solver works over real unknowns.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .errors import DomainError, IllConditionedError

__all__ = [
    "GPConfig",
    "Method",
    "ReconstructionResult",
    "mse",
    "relative_error",
    "solve_direct",
    "solve_gradient_projection",
    "solve_least_squares",
    "solve_with_fallback",
]

log = logging.getLogger(__name__)

DEFAULT_CONDITION_CEILING = 1e10


class Method(str, Enum):
    DIRECT = "direct"
    LEAST_SQUARES = "least_squares"
    GRADIENT_PROJECTION = "gradient_projection"


@dataclass
class ReconstructionResult:
    coefficients: np.ndarray
    method: Method
    iterations: int
    residual_norm: float
    condition_estimate: float | None = None
    converged: bool = True
    objective_history: list = field(default_factory=list, repr=False)
    fallback_from: Method | None = None


@dataclass(frozen=True)
class GPConfig:
    """Gradient-projection settings.

    ``tolerance`` is the relative objective decrease below which iteration
    stops; ``regularization`` weights an l1 penalty, which on the
    nonnegative orthant is simply the coefficient sum.
    """

    regularization: float = 0.0
    max_iterations: int = 10_000
    tolerance: float = 1e-8
    step_rule: str = "backtracking_armijo"

    def __post_init__(self):
        if self.regularization < 0:
            raise DomainError("regularization must be >= 0")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be >= 1")
        if not self.tolerance > 0:
            raise DomainError("tolerance must be > 0")
        if self.step_rule != "backtracking_armijo":
            raise DomainError(f"unknown step rule {self.step_rule!r}")


def _stacked(ms):
    E = ms.rho * ms.field_matrix
    A = np.vstack([E.real, E.imag])
    y = np.concatenate([ms.received.real, ms.received.imag])
    return A, y


def _as_grid(x, ms):
    return np.maximum(x, 0.0).reshape(ms.grid_shape)


def solve_direct(ms, condition_ceiling: float = DEFAULT_CONDITION_CEILING) -> ReconstructionResult:
    """Invert the square field matrix: ``delta = Re(E^-1 R) / rho``, clamped at 0.

    The condition number is estimated (1-norm) from the LU factorization.
    ``residual_norm`` is measured before clamping.

    Raises:
        DomainError: if E is not square.
        IllConditionedError: if the condition estimate exceeds ``condition_ceiling``.
    """
    E = ms.field_matrix
    n, m = E.shape
    if n != m:
        raise DomainError(f"direct inversion needs a square field matrix, got {n}x{m}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(E, check_finite=False)
    anorm = np.abs(E).sum(axis=0).max()
    gecon = lapack.zgecon if np.iscomplexobj(lu) else lapack.dgecon
    rcond, info = gecon(lu, anorm, norm="1")
    cond = math.inf if rcond == 0 else 1.0 / rcond
    if info != 0 or cond > condition_ceiling:
        raise IllConditionedError(
            f"field matrix condition estimate {cond:.3g} exceeds {condition_ceiling:.3g}",
            condition_estimate=cond,
        )
    x = scipy.linalg.lu_solve((lu, piv), ms.received, check_finite=False)
    delta = x.real / ms.rho
    residual = float(np.linalg.norm(ms.rho * (E @ delta) - ms.received))
    return ReconstructionResult(_as_grid(delta, ms), Method.DIRECT, 0, residual, cond)


def solve_least_squares(ms) -> ReconstructionResult:
    """Minimum-norm least-squares solution over real coefficients, clamped at 0."""
    A, y = _stacked(ms)
    x, _, _, s = np.linalg.lstsq(A, y, rcond=None)
    cond = float(s[0] / s[-1]) if s.size and s[-1] > 0 else math.inf
    residual = float(np.linalg.norm(A @ x - y))
    return ReconstructionResult(_as_grid(x, ms), Method.LEAST_SQUARES, 0, residual, cond)


def solve_gradient_projection(ms, config: GPConfig = GPConfig(), x0=None) -> ReconstructionResult:
    """Projected gradient descent for

        min_{delta >= 0}  1/2 ||R - rho E delta||^2 + regularization * sum(delta)

    Steps start from the Barzilai-Borwein estimate (clipped to [1e-12, 1e12])
    and are halved until the Armijo condition holds along the projection arc,
    so accepted iterates never increase the objective.  Iteration stops when
    the relative decrease drops below ``config.tolerance``, when the
    projected gradient vanishes, or after ``config.max_iterations``
    iterations (``converged`` is then False).
    """
    A, y = _stacked(ms)
    lam = config.regularization
    G = A.T @ A
    c = A.T @ y
    x = np.zeros(A.shape[1]) if x0 is None else np.maximum(np.asarray(x0, float).ravel(), 0.0)
    Gx = G @ x
    r = y - A @ x
    F = 0.5 * float(r @ r) + lam * float(x.sum())
    history = [F]
    grad = Gx - c + lam
    alpha = None
    converged = False
    it = 0
    mu = 1e-4
    scale = max(float(np.abs(c).max(initial=0.0)), 1e-300)
    while it < config.max_iterations:
        pg = x - np.maximum(x - grad, 0.0)
        if np.abs(pg).max(initial=0.0) <= 1e-15 * scale:
            converged = True
            break
        if alpha is None:
            Gpg = G @ pg
            curv = float(pg @ Gpg)
            alpha = float(pg @ pg) / curv if curv > 0 else 1.0
        alpha = min(max(alpha, 1e-12), 1e12)
        for _ in range(100):
            x_new = np.maximum(x - alpha * grad, 0.0)
            d = x_new - x
            Gd = G @ d
            gd = float(grad @ d)
            dGd = float(d @ Gd)
            # exact change of a quadratic; avoids cancellation near the optimum
            dF = gd + 0.5 * dGd
            if dF <= mu * gd:
                break
            alpha *= 0.5
        else:
            break
        x = x_new
        Gx = Gx + Gd
        grad = Gx - c + lam
        F_old = F
        F = max(F + dF, 0.0)
        history.append(F)
        it += 1
        alpha = float(d @ d) / dGd if dGd > 0 else 1e12
        if F_old <= 0 or (F_old - F) / F_old < config.tolerance:
            converged = True
            break
    if not converged:
        log.warning("gradient projection stopped after %d iterations without converging", it)
    residual = float(np.linalg.norm(A @ x - y))
    return ReconstructionResult(
        _as_grid(x, ms), Method.GRADIENT_PROJECTION, it, residual, None, converged, history
    )


def solve_with_fallback(ms, method=Method.DIRECT, config: GPConfig = GPConfig(),
                        condition_ceiling: float = DEFAULT_CONDITION_CEILING) -> ReconstructionResult:
    """Run ``method``; an ill-conditioned direct solve falls back to least squares."""
    method = Method(method)
    if method is Method.GRADIENT_PROJECTION:
        return solve_gradient_projection(ms, config)
    if method is Method.LEAST_SQUARES:
        return solve_least_squares(ms)
    try:
        return solve_direct(ms, condition_ceiling)
    except IllConditionedError as exc:
        log.warning("%s; falling back to least squares", exc)
        result = solve_least_squares(ms)
        result.fallback_from = Method.DIRECT
        result.condition_estimate = exc.condition_estimate
        return result


def _max_normalized(m):
    m = np.asarray(m, dtype=float)
    peak = np.abs(m).max(initial=0.0)
    return m / peak if peak > 0 else m


def mse(estimate, truth) -> float:
    """Mean squared error after scaling each map by its own peak magnitude."""
    estimate = np.asarray(estimate, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if estimate.shape != truth.shape:
        raise DomainError(f"shape mismatch {estimate.shape} vs {truth.shape}")
    return float(np.mean((_max_normalized(estimate) - _max_normalized(truth)) ** 2))


def relative_error(estimate, truth) -> float:
    truth = np.asarray(truth, dtype=float)
    return float(np.linalg.norm(np.asarray(estimate, float) - truth) / np.linalg.norm(truth))
