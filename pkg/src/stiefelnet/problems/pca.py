"""Decentralized principal component analysis instances and oracles.

Each of n nodes holds a private data shard A_i (rows are samples). The shared
variable x in St(d, r) is scored by the consensus objective

    -(1/2n) sum_i scale_i * tr(x^T A_i^T A_i x),

where scale_i is 1 under ``raw`` scaling and 1/m_i under ``per_sample``
scaling (m_i = rows of A_i). Per-sample scaling keeps gradient magnitudes
independent of shard size, so step sizes transfer across data sets; raw
scaling matches the plain trace objective. Stochastic gradients sample shard
rows with replacement and rescale so the estimate is unbiased.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import BatchTooLargeError, DimensionMismatchError, InvalidDimsError
from ..manifold import project_to_tangent

SCALINGS = ("per_sample", "raw")


def _node_scale(m_i: int, scaling: str) -> float:
    if scaling == "raw":
        return 1.0
    if scaling == "per_sample":
        return 1.0 / m_i
    raise InvalidDimsError(f"unknown scaling {scaling!r}")


@dataclass(eq=False)
class PcaInstance:
    """Sharded PCA problem: per-node data blocks plus an optional optimum."""

    shards: list  # n matrices, each (m_i, d)
    d: int
    r: int
    optimum: np.ndarray | None = None  # (d, r), top right-singular subspace
    scaling: str = "per_sample"
    _covariances: list = field(default=None, repr=False)  # cached A_i^T A_i

    def __post_init__(self):
        if any(s.shape[1] != self.d for s in self.shards):
            raise InvalidDimsError("all shards must share column count d")
        if self.scaling not in SCALINGS:
            raise InvalidDimsError(f"scaling must be one of {SCALINGS}")

    @property
    def n(self) -> int:
        return len(self.shards)

    def local_samples(self, i: int) -> int:
        return self.shards[i].shape[0]

    def covariance(self, i: int) -> np.ndarray:
        if self._covariances is None:
            self._covariances = [a.T @ a for a in self.shards]
        return self._covariances[i]

    # oracle surface used by solvers and metrics ---------------------------

    def stochastic_grad(self, i: int, x: np.ndarray, batch: np.ndarray | None) -> np.ndarray:
        return pca_riemannian_gradient(self, i, x, batch, scaling=self.scaling)

    def full_grad(self, i: int, x: np.ndarray) -> np.ndarray:
        return pca_riemannian_gradient(self, i, x, None, scaling=self.scaling)

    def objective(self, x: np.ndarray) -> float:
        return pca_objective(self, x, scaling=self.scaling)

    def reference(self) -> np.ndarray | None:
        return self.optimum


def gen_synthetic_pca(
    n: int,
    m_per_node: int,
    d: int,
    r: int,
    gamma: float,
    rng: np.random.Generator,
    scaling: str = "per_sample",
) -> PcaInstance:
    """Synthetic instance with an exactly known spectrum and optimum.

    Draws a Gaussian (n*m_per_node, d) matrix, replaces its singular values
    with gamma^1, ..., gamma^d, splits the rows evenly over the nodes, and
    records the top-r right-singular subspace as the optimum.
    """
    if not (0.0 < gamma < 1.0):
        raise InvalidDimsError(f"gamma must lie in (0, 1), got {gamma}")
    if n * m_per_node < d:
        raise InvalidDimsError("need at least d total samples")
    b = rng.standard_normal((n * m_per_node, d))
    u, _, vt = np.linalg.svd(b, full_matrices=False)
    spectrum = gamma ** np.arange(1, d + 1)
    a = (u * spectrum) @ vt
    shards = [np.ascontiguousarray(block) for block in np.split(a, n, axis=0)]
    return PcaInstance(shards=shards, d=d, r=r, optimum=vt.T[:, :r].copy(), scaling=scaling)


def pca_objective(inst: PcaInstance, x: np.ndarray, scaling: str = "raw") -> float:
    """Consensus objective -(1/2n) sum_i scale_i tr(x^T A_i^T A_i x) at a common x."""
    if x.shape != (inst.d, inst.r):
        raise DimensionMismatchError(f"point shape {x.shape} != ({inst.d}, {inst.r})")
    total = 0.0
    for i in range(inst.n):
        cx = inst.covariance(i) @ x
        total += _node_scale(inst.local_samples(i), scaling) * float(np.sum(x * cx))
    return -total / (2.0 * inst.n)


def pca_riemannian_gradient(
    inst: PcaInstance,
    i: int,
    x: np.ndarray,
    batch: np.ndarray | None = None,
    scaling: str = "raw",
) -> np.ndarray:
    """Riemannian gradient of node i's local objective at x.

    With ``batch`` (row indices sampled with replacement) the shard is
    replaced by the sampled rows and the scale adjusted so the estimator is
    unbiased for the full gradient. The Euclidean gradient is tangent-projected
    at x.
    """
    if x.shape != (inst.d, inst.r):
        raise DimensionMismatchError(f"point shape {x.shape} != ({inst.d}, {inst.r})")
    m_i = inst.local_samples(i)
    scale = _node_scale(m_i, scaling)
    if batch is None:
        egrad = -scale * (inst.covariance(i) @ x)
    else:
        batch = np.asarray(batch)
        if batch.size > m_i:
            raise BatchTooLargeError(f"batch of {batch.size} from shard of {m_i}")
        rows = inst.shards[i][batch]
        egrad = -(scale * m_i / batch.size) * (rows.T @ (rows @ x))
    return project_to_tangent(x, egrad)


def split_rows(data: np.ndarray, n: int, shuffle_seed: int) -> list[np.ndarray]:
    """Deterministically permute rows and split them into n equal shards.

    Rows beyond the largest multiple of n are dropped (callers record the
    dropped count in run metadata).
    """
    perm = np.random.default_rng(shuffle_seed).permutation(data.shape[0])
    keep = (data.shape[0] // n) * n
    return [np.ascontiguousarray(block) for block in np.split(data[perm[:keep]], n, axis=0)]
