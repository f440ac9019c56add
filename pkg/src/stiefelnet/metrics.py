"""Run diagnostics: consensus spread, stationarity at the induced mean, and
distance to a known optimum.

These are evaluated with full (deterministic) local gradients, which the
metrics layer is allowed to use even though the solvers only ever see sample
batches; the full-gradient work is therefore never charged to the SFO
counters. All functions are pure and leave solver state untouched.
"""

from dataclasses import dataclass

import numpy as np

from .manifold import induced_mean, procrustes_distance, project_to_tangent


@dataclass(frozen=True)
class RunRecord:
    """One metrics row of a run."""

    k: int
    consensus_error: float
    grad_norm_sq: float
    objective: float
    dist_to_opt: float | None
    sfo_batches: int
    wall_ns: int


def consensus_error(points: np.ndarray) -> float:
    """Mean squared spread around the induced mean: (1/n) sum_i ||x_i - xbar||^2."""
    stack = np.asarray(points)
    xbar = induced_mean(stack)
    return float(np.sum((stack - xbar) ** 2) / stack.shape[0])


def stationarity(problem, points: np.ndarray) -> float:
    """Squared norm of the averaged full Riemannian gradient at the induced mean."""
    xbar = induced_mean(np.asarray(points))
    mean_grad = sum(problem.full_grad(i, xbar) for i in range(problem.n)) / problem.n
    # full_grad returns tangent vectors at xbar; re-projecting guards against
    # rounding drift when the terms are summed.
    mean_grad = project_to_tangent(xbar, mean_grad)
    return float(np.sum(mean_grad * mean_grad))


def distance_to_optimum(points: np.ndarray, xstar: np.ndarray) -> float:
    """Rotation-invariant distance from the induced mean to a reference point."""
    return procrustes_distance(induced_mean(np.asarray(points)), xstar)


def make_record(problem, state, k: int, wall_ns: int) -> RunRecord:
    """Evaluate all diagnostics on the current node points of a solver state."""
    xbar = induced_mean(state.x)
    err = float(np.sum((state.x - xbar) ** 2) / state.n)
    mean_grad = sum(problem.full_grad(i, xbar) for i in range(problem.n)) / problem.n
    mean_grad = project_to_tangent(xbar, mean_grad)
    ref = problem.reference()
    return RunRecord(
        k=k,
        consensus_error=err,
        grad_norm_sq=float(np.sum(mean_grad * mean_grad)),
        objective=problem.objective(xbar),
        dist_to_opt=None if ref is None else procrustes_distance(xbar, ref),
        sfo_batches=state.sfo_batches,
        wall_ns=int(wall_ns),
    )
