"""Damped Gauss-Newton iteration with equality-constrained landmark altitudes.

Each iteration solves the saddle-point system

    [ H    J_h^T ] [ delta  ]   [ -g ]
    [ J_h  0     ] [ lambda ] = [ -c ]

with H = J^T W J + alpha I and g = J^T W e, then retracts delta through
boxplus. The altitude constraint is linear in a linear variable, so it is
met exactly after the first constrained step. Damping alpha is constant for
the whole run; iteration count is fixed unless a convergence tolerance is set.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List

import numpy as np

from .graph import Problem, WindowState, altitude_constraint, assemble, boxplus
from .vision import DegenerateDepthError


@dataclass
class SolverConfig:
    damping: float = 0.1
    max_iterations: int = 50
    constrain_altitude: bool = True
    convergence_tol: float = 0.0  # 0 runs all iterations


@dataclass
class SolveReport:
    cost_history: List[float]  # weighted cost before each step
    final_window: WindowState
    iterations_run: int
    step_norms: List[float]


class RankDeficientError(RuntimeError):
    """The KKT (or damped normal) matrix is singular."""

    def __init__(self, size: int, rank: int):
        self.deficiency = size - rank
        super().__init__(f"linear system of size {size} is rank deficient by {self.deficiency}")


class IterationError(RuntimeError):
    """An iterate could not be completed; carries the progress made so far."""

    def __init__(self, cause: Exception, iteration: int, cost_history, step_norms):
        self.cause = cause
        self.iteration = iteration
        self.cost_history = list(cost_history)
        self.step_norms = list(step_norms)
        super().__init__(f"iteration {iteration} aborted: {cause}")


def build_normal_system(problem: Problem, damping: float = 0.1):
    """Damped normal equations (H, g) of the weighted least-squares problem."""
    residual, jacobian, weights = assemble(problem)
    return _normal_system(residual, jacobian, weights, damping)


def _normal_system(residual, jacobian, weights, damping):
    H = jacobian.T @ (weights[:, None] * jacobian) + damping * np.eye(jacobian.shape[1])
    g = jacobian.T @ (weights * residual)
    return H, g


def constrained_step(H: np.ndarray, g: np.ndarray, J_h: np.ndarray, c: np.ndarray):
    """Solve the KKT system; with no constraint rows this is plain H delta = -g.

    Returns (delta, lambda). The returned delta satisfies J_h @ delta = -c to
    solver precision.
    """
    dim = H.shape[0]
    m = 0 if J_h is None else J_h.shape[0]
    if m == 0:
        try:
            return np.linalg.solve(H, -g), np.zeros(0)
        except np.linalg.LinAlgError:
            raise RankDeficientError(dim, int(np.linalg.matrix_rank(H))) from None
    K = np.zeros((dim + m, dim + m))
    K[:dim, :dim] = H
    K[:dim, dim:] = J_h.T
    K[dim:, :dim] = J_h
    rhs = np.concatenate([-g, -np.asarray(c, dtype=float)])
    try:
        solution = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError:
        raise RankDeficientError(dim + m, int(np.linalg.matrix_rank(K))) from None
    return solution[:dim], solution[dim:]


def solve(problem: Problem, config: SolverConfig | None = None) -> SolveReport:
    """Run the damped, optionally constrained Gauss-Newton loop.

    Deterministic: identical problem and config give bit-identical reports.
    Degenerate projection depth or a singular system aborts the run with an
    IterationError naming the iterate and carrying partial histories.
    """
    if config is None:
        config = SolverConfig()
    if config.damping < 0:
        raise ValueError("damping must be >= 0")
    if config.max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")

    window = problem.window
    cost_history: List[float] = []
    step_norms: List[float] = []
    for iteration in range(1, config.max_iterations + 1):
        current = replace(problem, window=window)
        try:
            residual, jacobian, weights = assemble(current)
            H, g = _normal_system(residual, jacobian, weights, config.damping)
            cost_history.append(float(residual @ (weights * residual)))
            if config.constrain_altitude:
                J_h, c = altitude_constraint(current)
            else:
                J_h, c = np.zeros((0, window.dim)), np.zeros(0)
            delta, _ = constrained_step(H, g, J_h, c)
        except (DegenerateDepthError, RankDeficientError, ValueError) as err:
            # ValueError covers the log map degenerating when a diverging
            # iterate pushes a relative rotation to pi
            raise IterationError(err, iteration, cost_history, step_norms) from err
        step_norms.append(float(np.linalg.norm(delta)))
        window = boxplus(window, delta)
        if config.constrain_altitude:
            # the KKT step satisfies the constraint to solver precision;
            # snap off the remaining roundoff so altitudes are exactly zero
            landmarks = window.landmarks.copy()
            landmarks[:, 2] = 0.0
            window = WindowState(window.poses, landmarks)
        if step_norms[-1] < config.convergence_tol:
            break
    return SolveReport(cost_history, window, len(cost_history), step_norms)
