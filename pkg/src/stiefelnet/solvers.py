"""Decentralized solvers executed in synchronous rounds on a simulated network.

Three algorithms share one driver:

``dprsrm``
    Each node keeps a clipped hybrid-momentum gradient estimator and a
    network tracker. Per round, with a fresh sample batch evaluated at both
    the current and previous iterate,

        q_i = g_i(x_i, batch) + (1 - tau) * (d_i - g_i(x_prev_i, batch))
        d_i <- q_i rescaled to Frobenius norm at most B
        s_i <- sum_j w_ij s_j + d_i - d_i_old
        x_i <- polar( sum_j w_ij x_j - alpha * tangent_at_x_i(s_i) )

    The tracker mean equals the estimator mean at every round, so each node
    steers by an implicit network-wide average gradient while touching only
    one sample batch per round.

``drsgd``
    Stochastic Riemannian gradient step retracted from the node's own point:
    the consensus displacement and the gradient are projected to the tangent
    space at x_i and the sum is polar-retracted from x_i.

``dprgd``
    Projected variant: the mixed point minus the tangent stochastic gradient
    is projected straight back to the manifold.

Within a round the per-node oracle draws use independent RNG streams, so node
order never affects results; the mixing step is the only coupling point.
"""

from dataclasses import dataclass, field
import time

import numpy as np

from .errors import DimensionMismatchError, RankDeficientError, ValidationError
from .manifold import project_to_manifold, project_to_tangent, random_stiefel
from .network import MixingMatrix, mix
from .seeding import fanout

ALGORITHMS = ("dprsrm", "drsgd", "dprgd")


@dataclass
class SolverConfig:
    algorithm: str = "dprsrm"
    alpha: float = 0.1
    tau: float = 0.999
    clip_b: float = 1e8
    iterations: int = 2000
    batch_size: int | None = 10  # None = full local data (zero-variance oracle)
    consensus_rounds: int = 1  # extra mixing for the baselines only
    seed: int = 0

    def validate(self) -> "SolverConfig":
        if self.algorithm not in ALGORITHMS:
            raise ValidationError("algorithm", f"must be one of {ALGORITHMS}")
        if not self.alpha > 0:
            raise ValidationError("alpha", "must be positive")
        if not 0.0 <= self.tau <= 1.0:
            raise ValidationError("tau", "must lie in [0, 1]")
        if not self.clip_b > 0:
            raise ValidationError("clip_b", "must be positive")
        if self.iterations < 0:
            raise ValidationError("iterations", "must be nonnegative")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValidationError("batch_size", "must be positive or None")
        if self.consensus_rounds < 1:
            raise ValidationError("consensus_rounds", "must be >= 1")
        if self.consensus_rounds > 1 and self.algorithm == "dprsrm":
            raise ValidationError("consensus_rounds",
                                  "dprsrm always uses a single consensus round")
        return self


@dataclass
class NodeState:
    """Per-node snapshot: iterate, previous iterate, estimator, tracker."""

    x: np.ndarray
    x_prev: np.ndarray
    d: np.ndarray | None
    s: np.ndarray | None


@dataclass(eq=False)
class StackedState:
    """All node variables stacked on axis 0, plus run counters."""

    x: np.ndarray  # (n, d, r)
    x_prev: np.ndarray  # (n, d, r)
    d: np.ndarray | None  # (n, d, r), dprsrm only
    s: np.ndarray | None  # (n, d, r), dprsrm only
    rngs: list  # one Generator per node
    k: int = 0  # iteration index of x
    sfo_batches: int = 0  # sample batches drawn so far (all nodes)
    grad_evals: int = 0  # gradient evaluations so far (all nodes)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def node(self, i: int) -> NodeState:
        return NodeState(
            x=self.x[i].copy(),
            x_prev=self.x_prev[i].copy(),
            d=None if self.d is None else self.d[i].copy(),
            s=None if self.s is None else self.s[i].copy(),
        )


def momentum_estimator(grad_new: np.ndarray, grad_old: np.ndarray,
                       d_prev: np.ndarray, tau: float) -> np.ndarray:
    """Hybrid estimator q = grad_new + (1 - tau) * (d_prev - grad_old).

    ``grad_new`` and ``grad_old`` must be evaluated on the same sample batch
    (at the current and previous iterate); tau = 1 degenerates to the plain
    stochastic gradient, tau = 0 to the pure recursive correction.
    """
    if grad_new.shape != grad_old.shape or grad_new.shape != d_prev.shape:
        raise DimensionMismatchError("estimator operands must share one shape")
    return grad_new + (1.0 - tau) * (d_prev - grad_old)


def clip(q: np.ndarray, b: float) -> np.ndarray:
    """Rescale q to Frobenius norm at most b, preserving direction."""
    norm = np.linalg.norm(q)
    if norm <= b:
        return q
    return (b / norm) * q


def tracking_update(w: MixingMatrix, s_prev: np.ndarray, d_new: np.ndarray,
                    d_prev: np.ndarray) -> np.ndarray:
    """Gradient tracking: s_i = sum_j w_ij s_prev_j + d_new_i - d_prev_i.

    Double stochasticity of w makes the stack mean of s equal the stack mean
    of d whenever that held before the update.
    """
    if s_prev.shape != d_new.shape or s_prev.shape != d_prev.shape:
        raise DimensionMismatchError("tracking operands must share one shape")
    return mix(w, s_prev) + d_new - d_prev


def _draw_batch(problem, i: int, rng: np.random.Generator,
                batch_size: int | None) -> np.ndarray | None:
    if batch_size is None:
        return None
    return rng.integers(0, problem.local_samples(i), size=batch_size)


def _project_stack(points: np.ndarray, k: int) -> np.ndarray:
    try:
        return np.stack([project_to_manifold(p) for p in points])
    except RankDeficientError as err:
        raise RankDeficientError(
            f"iterate left the projection tube at iteration {k} "
            f"(step size too large): {err}", iteration=k) from err


def dprsrm_init(problem, w: MixingMatrix, cfg: SolverConfig,
                x0: np.ndarray | None = None) -> StackedState:
    """Round 0 of the momentum-tracked solver.

    All nodes start from one shared point x0 (drawn from the master seed's
    init stream when not given). The tracker and estimator are initialized to
    the first stochastic gradient, and each node takes its first projected
    step.
    """
    cfg.validate()
    n = problem.n
    streams = fanout(cfg.seed)
    if x0 is None:
        x0 = random_stiefel(problem.d, problem.r, streams.init_rng())
    rngs = streams.node_rngs(n)

    x = np.broadcast_to(x0, (n,) + x0.shape).copy()
    grads = []
    for i in range(n):
        batch = _draw_batch(problem, i, rngs[i], cfg.batch_size)
        grads.append(problem.stochastic_grad(i, x[i], batch))
    d = np.stack(grads)
    s = d.copy()

    v = np.stack([project_to_tangent(x[i], s[i]) for i in range(n)])
    x_new = _project_stack(mix(w, x) - cfg.alpha * v, k=0)
    return StackedState(x=x_new, x_prev=x, d=d, s=s, rngs=rngs, k=1,
                        sfo_batches=n, grad_evals=n)


def dprsrm_step(state: StackedState, problem, w: MixingMatrix,
                cfg: SolverConfig) -> StackedState:
    """One momentum-tracked round; mutates and returns ``state``.

    Draws one fresh batch per node and charges two gradient evaluations on it
    (current and previous iterate).
    """
    n = state.n
    g_new, g_old = [], []
    for i in range(n):
        batch = _draw_batch(problem, i, state.rngs[i], cfg.batch_size)
        g_new.append(problem.stochastic_grad(i, state.x[i], batch))
        g_old.append(problem.stochastic_grad(i, state.x_prev[i], batch))
    q = momentum_estimator(np.stack(g_new), np.stack(g_old), state.d, cfg.tau)
    d_new = np.stack([clip(q[i], cfg.clip_b) for i in range(n)])
    s_new = tracking_update(w, state.s, d_new, state.d)
    v = np.stack([project_to_tangent(state.x[i], s_new[i]) for i in range(n)])
    x_new = _project_stack(mix(w, state.x) - cfg.alpha * v, k=state.k)

    state.x_prev = state.x
    state.x = x_new
    state.d = d_new
    state.s = s_new
    state.k += 1
    state.sfo_batches += n
    state.grad_evals += 2 * n
    return state


def _baseline_init(problem, w: MixingMatrix, cfg: SolverConfig,
                   step_fn, x0: np.ndarray | None = None) -> StackedState:
    cfg.validate()
    streams = fanout(cfg.seed)
    if x0 is None:
        x0 = random_stiefel(problem.d, problem.r, streams.init_rng())
    x = np.broadcast_to(x0, (problem.n,) + x0.shape).copy()
    state = StackedState(x=x, x_prev=x.copy(), d=None, s=None,
                         rngs=streams.node_rngs(problem.n), k=0)
    return step_fn(state, problem, w, cfg)


def _mix_rounds(w: MixingMatrix, x: np.ndarray, rounds: int) -> np.ndarray:
    for _ in range(rounds):
        x = mix(w, x)
    return x


def drsgd_step(state: StackedState, problem, w: MixingMatrix,
               cfg: SolverConfig) -> StackedState:
    """Retraction-based baseline round.

    The consensus displacement toward the mixed point and the stochastic
    gradient are both taken in the tangent space at the node's own iterate,
    and the combined step is polar-retracted from that iterate.
    """
    n = state.n
    mixed = _mix_rounds(w, state.x, cfg.consensus_rounds)
    moved = np.empty_like(state.x)
    for i in range(n):
        batch = _draw_batch(problem, i, state.rngs[i], cfg.batch_size)
        g = problem.stochastic_grad(i, state.x[i], batch)
        u = project_to_tangent(state.x[i], mixed[i] - state.x[i]) - cfg.alpha * g
        moved[i] = state.x[i] + u
    x_new = _project_stack(moved, k=state.k)
    state.x_prev = state.x
    state.x = x_new
    state.k += 1
    state.sfo_batches += n
    state.grad_evals += n
    return state


def dprgd_step(state: StackedState, problem, w: MixingMatrix,
               cfg: SolverConfig) -> StackedState:
    """Projection-based baseline round: polar(mixed_i - alpha * gradient)."""
    n = state.n
    mixed = _mix_rounds(w, state.x, cfg.consensus_rounds)
    moved = np.empty_like(state.x)
    for i in range(n):
        batch = _draw_batch(problem, i, state.rngs[i], cfg.batch_size)
        g = problem.stochastic_grad(i, state.x[i], batch)
        moved[i] = mixed[i] - cfg.alpha * g
    x_new = _project_stack(moved, k=state.k)
    state.x_prev = state.x
    state.x = x_new
    state.k += 1
    state.sfo_batches += n
    state.grad_evals += n
    return state


_STEPS = {"dprsrm": dprsrm_step, "drsgd": drsgd_step, "dprgd": dprgd_step}


def init_state(problem, w: MixingMatrix, cfg: SolverConfig,
               x0: np.ndarray | None = None) -> StackedState:
    """Round 0 for any algorithm (every algorithm moves once during init)."""
    if cfg.algorithm == "dprsrm":
        return dprsrm_init(problem, w, cfg, x0=x0)
    return _baseline_init(problem, w, cfg, _STEPS[cfg.algorithm], x0=x0)


def run(problem, w: MixingMatrix, cfg: SolverConfig, metrics_sink=None,
        x0: np.ndarray | None = None, state_hook=None,
        metric_every: int = 1) -> StackedState:
    """Init plus ``cfg.iterations`` rounds, emitting one record per round.

    ``metrics_sink`` receives a RunRecord after every ``metric_every``-th
    round (round 0 is the init; the final round is always recorded).
    ``state_hook(state)`` runs after every round, for tests that watch
    internal quantities. A run with K iterations draws exactly n * (K + 1)
    sample batches. Deterministic for fixed (seed, config, instance) apart
    from the wall-clock field of the records.
    """
    from .metrics import make_record  # local import to avoid a cycle

    cfg.validate()
    step = _STEPS[cfg.algorithm]
    t0 = time.perf_counter_ns()

    def emit(state, k):
        if metrics_sink is not None and (k % metric_every == 0 or k == cfg.iterations):
            metrics_sink(make_record(problem, state, k=k,
                                     wall_ns=time.perf_counter_ns() - t0))
        if state_hook is not None:
            state_hook(state)

    state = init_state(problem, w, cfg, x0=x0)
    emit(state, 0)
    for k in range(1, cfg.iterations + 1):
        step(state, problem, w, cfg)
        emit(state, k)
    return state
