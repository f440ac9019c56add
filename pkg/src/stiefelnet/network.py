"""Communication graphs and doubly stochastic mixing matrices.

A Graph is an undirected, connected topology over n nodes; a MixingMatrix is
the symmetric doubly stochastic weight matrix used for one synchronous
communication round, with its second-largest singular value cached (that value
governs how fast repeated mixing contracts disagreement). Both are immutable
after construction; ``mix`` is a pure function.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, NotConnectedError

# ER graphs are redrawn until connected; give up after this many attempts.
_ER_MAX_ATTEMPTS = 1000


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset  # of (i, j) pairs with i < j

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def neighbors(self, i: int) -> list[int]:
        out = [j for a, j in self.edges if a == i] + [a for a, j in self.edges if j == i]
        return sorted(out)


@dataclass(frozen=True, eq=False)
class MixingMatrix:
    w: np.ndarray
    sigma2: float = field(default=None)  # second-largest singular value

    def __post_init__(self):
        if self.sigma2 is None:
            object.__setattr__(self, "sigma2", second_largest_singular(self.w))

    @property
    def n(self) -> int:
        return self.w.shape[0]


def _is_connected(n: int, edges) -> bool:
    adj = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {0}
    frontier = [0]
    while frontier:
        i = frontier.pop()
        for j in adj[i]:
            if j not in seen:
                seen.add(j)
                frontier.append(j)
    return len(seen) == n


def build_topology(kind: str, n: int, rng: np.random.Generator = None, p: float = None) -> Graph:
    """Construct a connected topology: ``ring``, ``erdos_renyi`` or ``complete``.

    Ring connects i to (i +/- 1) mod n; Erdos-Renyi includes each pair
    independently with probability p and redraws until connected; complete
    includes all pairs. Deterministic for a fixed rng state.
    """
    if n < 2:
        raise DimensionMismatchError(f"need n >= 2 nodes, got {n}")
    if kind == "ring":
        edges = {(min(i, (i + 1) % n), max(i, (i + 1) % n)) for i in range(n)}
        return Graph(n, frozenset(edges))
    if kind == "complete":
        return Graph(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))
    if kind == "erdos_renyi":
        if p is None or not (0.0 < p <= 1.0):
            raise NotConnectedError(f"erdos_renyi needs edge probability in (0, 1], got {p}")
        for _ in range(_ER_MAX_ATTEMPTS):
            pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
            keep = rng.random(len(pairs)) <= p
            edges = frozenset(e for e, k in zip(pairs, keep) if k)
            if _is_connected(n, edges):
                return Graph(n, edges)
        raise NotConnectedError(
            f"no connected Erdos-Renyi draw in {_ER_MAX_ATTEMPTS} attempts (p={p}, n={n})"
        )
    raise NotConnectedError(f"unknown topology kind: {kind!r}")


def metropolis_weights(g: Graph) -> MixingMatrix:
    """Metropolis constant-edge-weight mixing matrix of a connected graph.

    w_ij = 1 / (1 + max(deg_i, deg_j)) on edges, diagonal absorbs the rest.
    On a connected graph the result is symmetric, doubly stochastic, with
    positive diagonal and second-largest singular value < 1.
    """
    if not _is_connected(g.n, g.edges):
        raise NotConnectedError("metropolis weights need a connected graph")
    deg = g.degrees()
    w = np.zeros((g.n, g.n))
    for i, j in g.edges:
        w[i, j] = w[j, i] = 1.0 / (1.0 + max(deg[i], deg[j]))
    np.fill_diagonal(w, 1.0 - w.sum(axis=1))
    return MixingMatrix(w=w)


def second_largest_singular(w: np.ndarray) -> float:
    """Second-largest singular value via dense SVD (networks here are small)."""
    return float(np.linalg.svd(w, compute_uv=False)[1])


def mix(w: MixingMatrix, values: np.ndarray) -> np.ndarray:
    """One communication round: output_i = sum_j w_ij values_j.

    ``values`` stacks one (d, r) matrix per node as an (n, d, r) array. Double
    stochasticity preserves the stack average exactly.
    """
    values = np.asarray(values)
    if values.shape[0] != w.n:
        raise DimensionMismatchError(f"{values.shape[0]} values for {w.n} nodes")
    return np.tensordot(w.w, values, axes=1)


def graph_to_edgelist(g: Graph) -> str:
    """Serialize to the pinning format: first line n, then ``i j`` per edge."""
    lines = [str(g.n)]
    lines += [f"{i} {j}" for i, j in sorted(g.edges)]
    return "\n".join(lines) + "\n"


def graph_from_edgelist(text: str) -> Graph:
    """Parse the edge-list format written by :func:`graph_to_edgelist`."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    n = int(lines[0])
    edges = set()
    for ln in lines[1:]:
        i, j = (int(tok) for tok in ln.split())
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise NotConnectedError(f"bad edge ({i}, {j}) for {n} nodes")
        edges.add((min(i, j), max(i, j)))
    return Graph(n, frozenset(edges))
