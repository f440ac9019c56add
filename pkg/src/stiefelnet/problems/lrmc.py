"""Decentralized low-rank matrix completion with a column-split observation mask.

The observed matrix is split by columns over the nodes. Node i scores a basis
candidate x in St(d, r) through the partially observed residual

    f_i(x) = scale_i * (1/2) || mask_i * (x V_i(x) - A_i) ||_F^2,

where V_i(x) solves the per-column damped least-squares problem over the
observed rows. The gradient treats V_i(x) as fixed, which is exact to first
order because V_i(x) minimizes the inner problem. Stochastic gradients sample
columns with replacement; the inner solve only runs on the sampled columns.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import BatchTooLargeError, DimensionMismatchError, InvalidDimsError
from ..manifold import project_to_tangent
from .pca import _node_scale

# Tikhonov damping for the per-column inner solves; columns with fewer than r
# observed entries would otherwise be singular.
INNER_DAMPING = 1e-8


@dataclass(eq=False)
class LrmcInstance:
    """Column-sharded matrix completion problem with known ground truth."""

    shards: list  # n blocks, each (d, T_i), zero where unobserved
    masks: list  # n binary blocks matching shard shapes
    d: int
    T: int
    r: int
    ground_truth: np.ndarray | None = None  # (d, T) full low-rank matrix
    scaling: str = "per_sample"

    def __post_init__(self):
        for a, m in zip(self.shards, self.masks):
            if a.shape != m.shape:
                raise InvalidDimsError("shard and mask shapes differ")
            if np.any(a[m == 0] != 0.0):
                raise InvalidDimsError("shard has data outside its mask")

    @property
    def n(self) -> int:
        return len(self.shards)

    def local_samples(self, i: int) -> int:
        return self.shards[i].shape[1]

    # oracle surface used by solvers and metrics ---------------------------

    def stochastic_grad(self, i: int, x: np.ndarray, batch: np.ndarray | None) -> np.ndarray:
        return lrmc_riemannian_gradient(x, self.shards[i], self.masks[i], batch,
                                        scaling=self.scaling)

    def full_grad(self, i: int, x: np.ndarray) -> np.ndarray:
        return lrmc_riemannian_gradient(x, self.shards[i], self.masks[i], None,
                                        scaling=self.scaling)

    def objective(self, x: np.ndarray) -> float:
        total = 0.0
        for i in range(self.n):
            v = lrmc_inner_solve(x, self.shards[i], self.masks[i])
            res = self.masks[i] * (x @ v - self.shards[i])
            total += _node_scale(self.local_samples(i), self.scaling) * 0.5 * float(
                np.sum(res * res))
        return total / self.n

    def reference(self) -> None:
        return None  # no Stiefel-valued optimum; see relative_fit

    def relative_fit(self, x: np.ndarray) -> float:
        """||mask*(x V(x) - truth)||_F / ||mask*truth||_F over all observed entries."""
        num = 0.0
        den = 0.0
        col = 0
        for i in range(self.n):
            v = lrmc_inner_solve(x, self.shards[i], self.masks[i])
            t_i = self.shards[i].shape[1]
            truth = self.ground_truth[:, col:col + t_i]
            diff = self.masks[i] * (x @ v - truth)
            num += float(np.sum(diff * diff))
            den += float(np.sum((self.masks[i] * truth) ** 2))
            col += t_i
        return np.sqrt(num / den)


def gen_lrmc(n: int, d: int, T: int, r: int, rng: np.random.Generator,
             scaling: str = "per_sample") -> LrmcInstance:
    """Random rank-r instance observed at rate r(d + T - r) / (d T).

    Generates Gaussian factors L (d x r) and R (r x T), keeps each entry of
    L R independently with the probability above, and splits the observed
    matrix into n equal column blocks.
    """
    if T % n != 0:
        raise InvalidDimsError(f"T={T} must be divisible by n={n}")
    if r > min(d, T):
        raise InvalidDimsError(f"rank {r} exceeds min({d}, {T})")
    nu = r * (d + T - r) / (d * T)
    low = rng.standard_normal((d, r))
    right = rng.standard_normal((r, T))
    truth = low @ right
    mask = (rng.random((d, T)) <= nu).astype(np.float64)
    observed = mask * truth
    return LrmcInstance(
        shards=[np.ascontiguousarray(b) for b in np.split(observed, n, axis=1)],
        masks=[np.ascontiguousarray(b) for b in np.split(mask, n, axis=1)],
        d=d, T=T, r=r, ground_truth=truth, scaling=scaling,
    )


def observation_rate(d: int, T: int, r: int) -> float:
    """The mask keep-probability used by :func:`gen_lrmc`."""
    return r * (d + T - r) / (d * T)


def lrmc_inner_solve(x: np.ndarray, shard: np.ndarray, mask: np.ndarray,
                     cols: np.ndarray | None = None) -> np.ndarray:
    """Per-column damped least squares: argmin_v ||mask_t * (x v - a_t)||^2.

    Each column t is solved independently over its observed rows via the
    normal equations with damping ``INNER_DAMPING`` (columns observed in fewer
    than r entries stay solvable). Returns an (r, len(cols)) matrix; ``cols``
    defaults to all columns of the shard.
    """
    if shard.shape[0] != x.shape[0]:
        raise DimensionMismatchError(f"shard rows {shard.shape[0]} != point rows {x.shape[0]}")
    r = x.shape[1]
    if cols is None:
        cols = np.arange(shard.shape[1])
    v = np.zeros((r, len(cols)))
    damp = INNER_DAMPING * np.eye(r)
    for out_idx, t in enumerate(cols):
        obs = mask[:, t] > 0
        if not np.any(obs):
            continue  # damped solution of an empty system is zero
        xo = x[obs]
        v[:, out_idx] = np.linalg.solve(xo.T @ xo + damp, xo.T @ shard[obs, t])
    return v


def lrmc_riemannian_gradient(x: np.ndarray, shard: np.ndarray, mask: np.ndarray,
                             batch: np.ndarray | None = None,
                             scaling: str = "raw") -> np.ndarray:
    """Riemannian gradient of the masked completion objective at x.

    Uses the residual formula mask * (x V - a) V^T with V from the inner solve
    (V held fixed: the inner optimality kills its first-order contribution).
    ``batch`` holds column indices sampled with replacement; the estimate is
    rescaled to stay unbiased for the full gradient.
    """
    t_i = shard.shape[1]
    scale = _node_scale(t_i, scaling)
    if batch is None:
        cols = np.arange(t_i)
        factor = scale
    else:
        cols = np.asarray(batch)
        if cols.size > t_i:
            raise BatchTooLargeError(f"batch of {cols.size} from {t_i} columns")
        factor = scale * t_i / cols.size
    v = lrmc_inner_solve(x, shard, mask, cols)
    res = mask[:, cols] * (x @ v - shard[:, cols])
    return project_to_tangent(x, factor * (res @ v.T))
