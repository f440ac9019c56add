"""Decentralized stochastic optimization on the Stiefel manifold.

A toolkit for minimizing a sum of private smooth costs over nodes of a
simulated communication network, with every node variable constrained to have
orthonormal columns. Ships a momentum-tracked stochastic solver (``dprsrm``)
and two classic baselines (``drsgd``, ``dprgd``), deterministic network and
problem generators (sharded PCA, low-rank matrix completion), diagnostics,
and a benchmark harness with CSV/figure reports.
"""

from . import harness, manifold, metrics, network, problems, solvers
from .errors import (
    BadMagicError,
    BatchTooLargeError,
    DimensionMismatchError,
    InsufficientPointsError,
    InvalidDimsError,
    NotConnectedError,
    ParseError,
    RankDeficientError,
    StiefelNetError,
    TruncatedFileError,
    ValidationError,
)
from .manifold import (
    induced_mean,
    is_on_manifold,
    is_tangent_at,
    procrustes_distance,
    project_to_manifold,
    project_to_tangent,
    random_stiefel,
    random_tangent,
)
from .metrics import RunRecord, consensus_error, distance_to_optimum, stationarity
from .network import (
    Graph,
    MixingMatrix,
    build_topology,
    graph_from_edgelist,
    graph_to_edgelist,
    metropolis_weights,
    mix,
    second_largest_singular,
)
from .seeding import SeedFanout, fanout
from .solvers import (
    ALGORITHMS,
    NodeState,
    SolverConfig,
    StackedState,
    clip,
    dprgd_step,
    dprsrm_init,
    dprsrm_step,
    drsgd_step,
    init_state,
    momentum_estimator,
    run,
    tracking_update,
)

__version__ = "0.1.0"
