"""Experiment driver: instance/topology construction, CSV persistence,
grid search over step-size numerators, and the convergence-rate check.
"""

import math
import os
from dataclasses import dataclass, replace

import numpy as np

from ..errors import (
    InsufficientPointsError,
    StiefelNetError,
    ValidationError,
)
from ..metrics import RunRecord
from ..network import MixingMatrix, build_topology, graph_to_edgelist, metropolis_weights
from ..problems import gen_lrmc, gen_synthetic_pca, load_idx_images, split_rows
from ..problems.pca import PcaInstance
from ..seeding import fanout
from ..solvers import SolverConfig, run
from .config import ExperimentConfig

CSV_HEADER = "k,consensus_error,grad_norm_sq,objective,dist_to_opt,sfo_batches,wall_ns"


def build_instance(cfg: ExperimentConfig):
    """Deterministically generate the problem instance for a config."""
    streams = fanout(cfg.seed)
    if cfg.problem == "pca_synthetic":
        return gen_synthetic_pca(cfg.n, cfg.m_per_node, cfg.d, cfg.r, cfg.gamma,
                                 streams.instance_rng(), scaling=cfg.objective_scaling)
    if cfg.problem == "pca_idx":
        if cfg.train_path is None:
            raise ValidationError("train_path", "pca_idx needs --train <idx file>")
        data = load_idx_images(cfg.train_path)
        shuffle_seed = int(streams.instance_rng().integers(0, 2**63))
        shards = split_rows(data, cfg.n, shuffle_seed)
        cov = sum(s.T @ s for s in shards)
        eigvals, eigvecs = np.linalg.eigh(cov)
        optimum = eigvecs[:, ::-1][:, :cfg.r].copy()
        return PcaInstance(shards=shards, d=data.shape[1], r=cfg.r, optimum=optimum,
                           scaling=cfg.objective_scaling)
    if cfg.problem == "lrmc":
        return gen_lrmc(cfg.n, cfg.d, cfg.T, cfg.r, streams.instance_rng(),
                        scaling=cfg.objective_scaling)
    raise ValidationError("problem", f"unknown problem {cfg.problem!r}")


def build_network(cfg: ExperimentConfig) -> tuple:
    """Deterministically build the topology and its Metropolis mixing matrix."""
    streams = fanout(cfg.seed)
    p = cfg.er_p if cfg.topology == "erdos_renyi" else None
    graph = build_topology(cfg.topology, cfg.n, streams.topology_rng(), p=p)
    return graph, metropolis_weights(graph)


def resolve_step(cfg: ExperimentConfig, total_samples: int) -> tuple[float, float]:
    """Apply the step-size rule; returns (alpha, tau)."""
    k = max(cfg.iterations, 1)
    if cfg.alpha_rule == "fixed":
        return (cfg.alpha if cfg.alpha is not None else cfg.beta_hat), cfg.tau
    if cfg.alpha_rule == "sqrt_k":
        return cfg.beta_hat / math.sqrt(k), cfg.tau
    if cfg.alpha_rule == "total_samples":
        return cfg.beta_hat / total_samples, cfg.tau
    if cfg.alpha_rule == "cube_root":
        return cfg.beta_hat * k ** (-1.0 / 3.0), k ** (-2.0 / 3.0)
    raise ValidationError("alpha_rule", f"unknown rule {cfg.alpha_rule!r}")


def solver_config(cfg: ExperimentConfig, total_samples: int) -> SolverConfig:
    alpha, tau = resolve_step(cfg, total_samples)
    return SolverConfig(
        algorithm=cfg.algorithm, alpha=alpha, tau=tau, clip_b=cfg.clip_b,
        iterations=cfg.iterations, batch_size=cfg.batch_size,
        consensus_rounds=cfg.consensus_rounds, seed=cfg.seed,
    ).validate()


def format_record(rec: RunRecord) -> str:
    def fmt(value):
        return "" if value is None else f"{value:.17g}"

    return (f"{rec.k},{fmt(rec.consensus_error)},{fmt(rec.grad_norm_sq)},"
            f"{fmt(rec.objective)},{fmt(rec.dist_to_opt)},{rec.sfo_batches},{rec.wall_ns}")


def write_csv(path: str, records: list[RunRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for rec in records:
            fh.write(format_record(rec) + "\n")


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list
    final_state: object
    sigma2: float
    alpha: float
    tau: float
    csv_path: str | None = None
    figure_path: str | None = None
    edges_path: str | None = None
    rel_fit: float | None = None

    @property
    def final(self) -> RunRecord:
        return self.records[-1]

    def summary(self) -> dict:
        out = {
            "problem": self.config.problem,
            "algorithm": self.config.algorithm,
            "seed": self.config.seed,
            "iterations": self.config.iterations,
            "alpha": self.alpha,
            "tau": self.tau,
            "sigma2": self.sigma2,
            "final_consensus_error": self.final.consensus_error,
            "final_grad_norm_sq": self.final.grad_norm_sq,
            "final_objective": self.final.objective,
            "final_dist_to_opt": self.final.dist_to_opt,
            "sfo_batches": self.final_state.sfo_batches,
            "grad_evals": self.final_state.grad_evals,
        }
        if self.rel_fit is not None:
            out["final_rel_fit"] = self.rel_fit
        return out

    def summary_line(self) -> str:
        parts = []
        for key, value in self.summary().items():
            if isinstance(value, float):
                parts.append(f"{key}={value:.6g}")
            else:
                parts.append(f"{key}={value}")
        return " ".join(parts)


def run_experiment(cfg: ExperimentConfig, out_dir: str | None = None,
                   name: str | None = None, figures: bool = True) -> ExperimentResult:
    """Generate instance and network, run the solver, optionally persist.

    With ``out_dir`` set, writes ``<name>.csv`` (one row per recorded round),
    ``<name>.edges`` (the pinned topology) and, when ``figures`` is true,
    ``<name>.png`` with the four metric panels rendered alongside the CSV.
    """
    cfg.validate()
    problem = build_instance(cfg)
    graph, w = build_network(cfg)
    total = sum(problem.local_samples(i) for i in range(problem.n))
    scfg = solver_config(cfg, total)

    records: list[RunRecord] = []
    state = run(problem, w, scfg, metrics_sink=records.append,
                metric_every=cfg.metric_every)
    rel_fit = problem.relative_fit(_mean_point(state)) if cfg.problem == "lrmc" else None
    result = ExperimentResult(config=cfg, records=records, final_state=state,
                              sigma2=w.sigma2, alpha=scfg.alpha, tau=scfg.tau,
                              rel_fit=rel_fit)

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        if name is None:
            name = f"{cfg.problem}_{cfg.algorithm}_seed{cfg.seed}"
        result.csv_path = os.path.join(out_dir, f"{name}.csv")
        write_csv(result.csv_path, records)
        result.edges_path = os.path.join(out_dir, f"{name}.edges")
        with open(result.edges_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(graph_to_edgelist(graph))
        if figures:
            from .plots import render_figures  # deferred: pulls in matplotlib

            result.figure_path = os.path.join(out_dir, f"{name}.png")
            render_figures([result.csv_path], result.figure_path)
    return result


def _mean_point(state) -> np.ndarray:
    from ..manifold import induced_mean

    return induced_mean(state.x)


@dataclass
class GridSpec:
    """Step-numerator candidates and how to score them."""

    beta_candidates: list
    selection_metric: str = "final_grad_norm"  # or "final_dist"
    seeds: int = 1

    def validate(self) -> "GridSpec":
        if not self.beta_candidates:
            raise ValidationError("beta_candidates", "must be nonempty")
        if self.selection_metric not in ("final_grad_norm", "final_dist"):
            raise ValidationError("selection_metric",
                                  f"unknown metric {self.selection_metric!r}")
        if self.seeds < 1:
            raise ValidationError("seeds", "must be >= 1")
        return self


@dataclass
class GridResult:
    best_beta: float
    scores: dict  # beta -> mean selection metric (inf for aborted candidates)
    summaries: dict  # beta -> list of per-seed run summaries


def grid_search(cfg: ExperimentConfig, grid: GridSpec) -> GridResult:
    """Run every candidate over ``grid.seeds`` master seeds and keep the argmin.

    Seeds are cfg.seed, cfg.seed + 1, ... so candidates see identical
    instances. A candidate whose run aborts (e.g. the step size kicked an
    iterate out of the projection tube) scores infinity. Ties go to the
    smaller, more conservative candidate.
    """
    grid.validate()
    scores: dict[float, float] = {}
    summaries: dict[float, list] = {}
    for beta in grid.beta_candidates:
        per_seed = []
        summaries[beta] = []
        for j in range(grid.seeds):
            candidate = replace(cfg, beta_hat=beta, seed=cfg.seed + j,
                                metric_every=max(cfg.iterations, 1))
            try:
                result = run_experiment(candidate, out_dir=None)
            except StiefelNetError as err:
                summaries[beta].append({"seed": cfg.seed + j, "aborted": str(err)})
                per_seed.append(math.inf)
                continue
            summaries[beta].append(result.summary())
            if grid.selection_metric == "final_grad_norm":
                per_seed.append(result.final.grad_norm_sq)
            else:
                if result.final.dist_to_opt is None:
                    raise ValidationError("selection_metric",
                                          "final_dist needs a known optimum")
                per_seed.append(result.final.dist_to_opt)
        scores[beta] = float(np.mean(per_seed))
    best = min(sorted(scores), key=lambda b: (scores[b], b))
    return GridResult(best_beta=best, scores=scores, summaries=summaries)


@dataclass
class RateResult:
    slope: float
    k_list: list
    mean_min_grad: dict  # K -> seed-mean of min-so-far grad_norm_sq


def rate_check(cfg: ExperimentConfig, k_list: list, seeds: int = 5) -> RateResult:
    """Empirical convergence-rate exponent of the momentum-tracked solver.

    For each K the step rule alpha = K^(-1/3), tau = K^(-2/3) is applied, the
    minimum recorded gradient norm of each run is averaged over seeds, and
    log(mean) is regressed on log(K). Returns the fitted slope.
    """
    if len(k_list) < 2:
        raise InsufficientPointsError(f"need >= 2 iteration counts, got {len(k_list)}")
    mean_min: dict[int, float] = {}
    for k in k_list:
        mins = []
        for j in range(seeds):
            candidate = replace(cfg, algorithm="dprsrm", alpha_rule="cube_root",
                                beta_hat=1.0, iterations=int(k), seed=cfg.seed + j,
                                metric_every=1)
            result = run_experiment(candidate, out_dir=None)
            mins.append(min(rec.grad_norm_sq for rec in result.records))
        mean_min[int(k)] = float(np.mean(mins))
    logs_k = np.log([float(k) for k in k_list])
    logs_v = np.log([mean_min[int(k)] for k in k_list])
    slope = float(np.polyfit(logs_k, logs_v, 1)[0])
    return RateResult(slope=slope, k_list=list(k_list), mean_min_grad=mean_min)
