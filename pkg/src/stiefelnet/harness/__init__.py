from .config import (
    ExperimentConfig,
    config_to_text,
    load_config,
    load_preset,
    parse_config,
    preset_text,
)
from .experiment import (
    CSV_HEADER,
    ExperimentResult,
    GridResult,
    GridSpec,
    RateResult,
    build_instance,
    build_network,
    grid_search,
    rate_check,
    resolve_step,
    run_experiment,
    solver_config,
    write_csv,
)
from .plots import emit_plot_script, read_csv, render_figures

__all__ = [
    "CSV_HEADER",
    "ExperimentConfig",
    "ExperimentResult",
    "GridResult",
    "GridSpec",
    "RateResult",
    "build_instance",
    "build_network",
    "config_to_text",
    "emit_plot_script",
    "grid_search",
    "load_config",
    "load_preset",
    "parse_config",
    "preset_text",
    "rate_check",
    "read_csv",
    "render_figures",
    "resolve_step",
    "run_experiment",
    "solver_config",
    "write_csv",
]
