"""Command-line interface.

    stiefelnet [--config FILE] [--seed N] [--algo NAME] [--out DIR] SUBCOMMAND

Subcommands: pca-synthetic, pca-idx --train PATH, lrmc, grid-search --betas
LIST, rate-check --ks LIST, plot CSV [CSV ...]. Experiment subcommands write
the metrics CSV, the pinned topology edge list and a PNG figure into --out.
"""

import argparse
import sys
from dataclasses import replace

from ..errors import StiefelNetError
from .config import ExperimentConfig, load_config
from .experiment import GridSpec, grid_search, rate_check, run_experiment
from .plots import emit_plot_script, render_figures

DEFAULT_GRID = [0.01, 0.05, 0.1, 0.5, 1.0, 5.0]


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stiefelnet",
        description="Decentralized stochastic optimization on the Stiefel manifold.",
    )
    parser.add_argument("--config", metavar="FILE", help="flat key=value config file")
    parser.add_argument("--seed", type=int, metavar="U64", help="master seed override")
    parser.add_argument("--algo", choices=("dprsrm", "drsgd", "dprgd"),
                        help="algorithm override")
    parser.add_argument("--out", metavar="DIR", default="runs",
                        help="output directory (default: runs)")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("pca-synthetic", help="synthetic sharded PCA benchmark")
    p_idx = sub.add_parser("pca-idx", help="PCA on an IDX3-ubyte image file")
    p_idx.add_argument("--train", required=True, metavar="PATH",
                       help="IDX3-ubyte training images")
    sub.add_parser("lrmc", help="low-rank matrix completion benchmark")

    p_grid = sub.add_parser("grid-search", help="pick the best step numerator")
    p_grid.add_argument("--betas", required=True, metavar="LIST",
                        help="comma-separated candidates, e.g. 0.1,0.5,1")
    p_grid.add_argument("--metric", choices=("final_grad_norm", "final_dist"),
                        default="final_grad_norm")
    p_grid.add_argument("--seeds", type=int, default=3, help="seeds per candidate")

    p_rate = sub.add_parser("rate-check", help="empirical convergence-rate exponent")
    p_rate.add_argument("--ks", required=True, metavar="LIST",
                        help="comma-separated iteration counts, e.g. 1000,8000")
    p_rate.add_argument("--seeds", type=int, default=5, help="seeds per count")

    p_plot = sub.add_parser("plot", help="render figures from run CSVs")
    p_plot.add_argument("csvs", nargs="+", metavar="CSV")
    return parser


def _build_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config:
        cfg = load_config(args.config, base=cfg)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.algo is not None:
        overrides["algorithm"] = args.algo
    problem_by_command = {"pca-synthetic": "pca_synthetic", "pca-idx": "pca_idx",
                          "lrmc": "lrmc"}
    if args.command in problem_by_command:
        overrides["problem"] = problem_by_command[args.command]
    if getattr(args, "train", None):
        overrides["train_path"] = args.train
    return replace(cfg, **overrides).validate() if overrides else cfg.validate()


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command in ("pca-synthetic", "pca-idx", "lrmc"):
            result = run_experiment(_build_config(args), out_dir=args.out)
            print(result.summary_line())
            print(f"csv={result.csv_path} figure={result.figure_path} "
                  f"edges={result.edges_path}")
        elif args.command == "grid-search":
            cfg = _build_config(args)
            betas = [float(tok) for tok in args.betas.split(",") if tok.strip()]
            grid = GridSpec(beta_candidates=betas, selection_metric=args.metric,
                            seeds=args.seeds)
            result = grid_search(cfg, grid)
            for beta in betas:
                print(f"beta_hat={beta:g} mean_{args.metric}={result.scores[beta]:.6g}")
            print(f"best_beta_hat={result.best_beta:g}")
        elif args.command == "rate-check":
            cfg = _build_config(args)
            ks = [int(tok) for tok in args.ks.split(",") if tok.strip()]
            result = rate_check(cfg, ks, seeds=args.seeds)
            for k in ks:
                print(f"K={k} mean_min_grad_norm_sq={result.mean_min_grad[k]:.6g}")
            print(f"slope={result.slope:.4f}")
        elif args.command == "plot":
            import os

            os.makedirs(args.out, exist_ok=True)
            png = render_figures(args.csvs, os.path.join(args.out, "metrics.png"))
            script = emit_plot_script(args.csvs, os.path.join(args.out, "metrics.gp"))
            print(f"figure={png} script={script}")
    except StiefelNetError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
