"""Geometry of the Stiefel manifold St(d, r) = {x in R^{d x r} : x^T x = I_r}.

All operations use the Euclidean metric of the embedding space. Points and
vectors are plain float64 ndarrays of shape (d, r); validity is checked with
the predicates below rather than wrapper types. Everything here is a pure
function and safe to call concurrently.
"""

import numpy as np

from .errors import DimensionMismatchError, RankDeficientError

# Orthonormality drift tolerated before a point no longer counts as feasible
# (~100x double-precision SVD error at the matrix sizes this library targets).
FEASIBILITY_TOL = 1e-10

# Below this smallest singular value the polar factor is numerically
# meaningless and projection raises RankDeficientError.
RANK_TOL = 1e-12


def is_on_manifold(x: np.ndarray, tol: float = FEASIBILITY_TOL) -> bool:
    """True if x has (numerically) orthonormal columns and finite entries."""
    if not np.all(np.isfinite(x)):
        return False
    r = x.shape[1]
    return np.linalg.norm(x.T @ x - np.eye(r)) <= tol


def is_tangent_at(x: np.ndarray, v: np.ndarray, tol: float = FEASIBILITY_TOL) -> bool:
    """True if v satisfies the tangent condition x^T v + v^T x = 0 at x."""
    return np.linalg.norm(x.T @ v + v.T @ x) <= tol


def project_to_manifold(y: np.ndarray) -> np.ndarray:
    """Metric projection onto the manifold: the polar factor of y.

    For a full-column-rank y with thin SVD y = U S V^T this returns U V^T,
    the nearest point of St(d, r) in Frobenius norm.

    Raises RankDeficientError when the smallest singular value of y is at or
    below ``RANK_TOL`` (the nearest point is not unique there).
    """
    u, sigma, vt = np.linalg.svd(y, full_matrices=False)
    if sigma[-1] <= RANK_TOL:
        raise RankDeficientError(
            f"projection undefined: smallest singular value {sigma[-1]:.3e} <= {RANK_TOL:.0e}"
        )
    return u @ vt


def project_to_tangent(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Orthogonal projection of an ambient matrix g onto the tangent space at x.

    Computes g - x sym(x^T g) with sym(M) = (M + M^T)/2. Idempotent and
    self-adjoint in the trace inner product.
    """
    if g.shape != x.shape:
        raise DimensionMismatchError(f"gradient shape {g.shape} != point shape {x.shape}")
    xtg = x.T @ g
    return g - x @ ((xtg + xtg.T) / 2.0)


def induced_mean(points: list[np.ndarray] | np.ndarray) -> np.ndarray:
    """Manifold-valued mean: the projection of the Euclidean average.

    Among all manifold points y this minimizes sum_i ||y - x_i||^2, so it is
    the natural consensus point of a collection of node variables.
    Raises RankDeficientError when the points are spread so far apart that
    their average loses rank.
    """
    stack = np.asarray(points)
    if stack.ndim != 3 or stack.shape[0] < 1:
        raise DimensionMismatchError("expected a nonempty list of (d, r) matrices")
    return project_to_manifold(stack.mean(axis=0))


def procrustes_distance(x: np.ndarray, xstar: np.ndarray) -> float:
    """Distance up to orthogonal right-rotation: min_Q ||x Q - xstar||_F.

    The minimizer over orthogonal Q (rotations and reflections) is the polar
    factor U V^T of x^T xstar.
    """
    if x.shape != xstar.shape:
        raise DimensionMismatchError(f"shapes differ: {x.shape} vs {xstar.shape}")
    u, _, vt = np.linalg.svd(x.T @ xstar)
    q = u @ vt
    return float(np.linalg.norm(x @ q - xstar))


def random_stiefel(d: int, r: int, rng: np.random.Generator) -> np.ndarray:
    """Random point: polar factor of a d x r standard Gaussian matrix.

    The resulting distribution is invariant under left-multiplication by
    orthogonal matrices. A Gaussian matrix is full rank almost surely; on the
    (never observed in practice) rank-deficient draw we simply redraw.
    """
    if r > d:
        raise DimensionMismatchError(f"need r <= d, got ({d}, {r})")
    while True:
        try:
            return project_to_manifold(rng.standard_normal((d, r)))
        except RankDeficientError:  # pragma: no cover - measure-zero event
            continue


def random_tangent(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Random tangent vector at x (projected Gaussian, unnormalized)."""
    return project_to_tangent(x, rng.standard_normal(x.shape))
