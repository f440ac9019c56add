"""Experiment configuration: flat key=value files, defaults, validation.

Recognized keys (one ``key = value`` per line, ``#`` starts a comment,
unknown keys are rejected):

    problem             pca_synthetic | pca_idx | lrmc
    n                   node count
    d, r                variable dimensions (d is ignored for pca_idx)
    gamma               synthetic-PCA spectrum decay, in (0, 1)
    m_per_node          synthetic-PCA rows per node
    T                   completion columns (lrmc)
    topology            ring | erdos_renyi | complete
    er_p                edge probability for erdos_renyi
    algorithm           dprsrm | drsgd | dprgd
    alpha_rule          fixed | sqrt_k | total_samples | cube_root
    alpha               explicit step size for rule "fixed"
    beta_hat            step-size numerator for the other rules
    tau                 momentum parameter in [0, 1]
    clip_b              estimator clipping threshold
    iterations          rounds after the init round (K)
    batch_size          per-node samples per round, or "full"
    consensus_rounds    mixing rounds per iteration (baselines only)
    objective_scaling   per_sample | raw
    seed                master seed (fans out to every stream)
    metric_every        metrics cadence (final round always recorded)

Step-size rules, with K = iterations and N = total sample count:
fixed uses ``alpha`` (or beta_hat when alpha is unset); sqrt_k uses
beta_hat / sqrt(K); total_samples uses beta_hat / N; cube_root uses
beta_hat * K^(-1/3) and additionally forces tau = K^(-2/3).
"""

from dataclasses import dataclass, fields, replace
from importlib import resources

from ..errors import ParseError, ValidationError
from ..problems.pca import SCALINGS
from ..solvers import ALGORITHMS

PROBLEMS = ("pca_synthetic", "pca_idx", "lrmc")
TOPOLOGIES = ("ring", "erdos_renyi", "complete")
ALPHA_RULES = ("fixed", "sqrt_k", "total_samples", "cube_root")


@dataclass
class ExperimentConfig:
    problem: str = "pca_synthetic"
    n: int = 8
    d: int = 10
    r: int = 5
    gamma: float = 0.8
    m_per_node: int = 1000
    T: int = 1000
    topology: str = "ring"
    er_p: float = 0.6
    algorithm: str = "dprsrm"
    alpha_rule: str = "sqrt_k"
    alpha: float | None = None
    beta_hat: float = 1.0
    tau: float = 0.999
    clip_b: float = 1e8
    iterations: int = 2000
    batch_size: int | None = 10
    consensus_rounds: int = 1
    objective_scaling: str = "per_sample"
    seed: int = 0
    metric_every: int = 1
    train_path: str | None = None  # set via CLI, not a config-file key

    def validate(self) -> "ExperimentConfig":
        def choice(field, value, options):
            if value not in options:
                raise ValidationError(field, f"must be one of {options}, got {value!r}")

        def positive(field, value, kind=float):
            if value is not None and not value > 0:
                raise ValidationError(field, f"must be positive, got {value}")

        choice("problem", self.problem, PROBLEMS)
        choice("topology", self.topology, TOPOLOGIES)
        choice("algorithm", self.algorithm, ALGORITHMS)
        choice("alpha_rule", self.alpha_rule, ALPHA_RULES)
        choice("objective_scaling", self.objective_scaling, SCALINGS)
        if self.n < 2:
            raise ValidationError("n", "need at least 2 nodes")
        positive("d", self.d)
        positive("r", self.r)
        if self.r > self.d and self.problem != "pca_idx":
            raise ValidationError("r", f"must not exceed d={self.d}")
        if not 0.0 < self.gamma < 1.0:
            raise ValidationError("gamma", "must lie in (0, 1)")
        positive("m_per_node", self.m_per_node)
        positive("T", self.T)
        if not 0.0 < self.er_p <= 1.0:
            raise ValidationError("er_p", "must lie in (0, 1]")
        positive("alpha", self.alpha)
        positive("beta_hat", self.beta_hat)
        if not 0.0 <= self.tau <= 1.0:
            raise ValidationError("tau", "must lie in [0, 1]")
        positive("clip_b", self.clip_b)
        if self.iterations < 0:
            raise ValidationError("iterations", "must be nonnegative")
        positive("batch_size", self.batch_size)
        if self.consensus_rounds < 1:
            raise ValidationError("consensus_rounds", "must be >= 1")
        if self.consensus_rounds > 1 and self.algorithm == "dprsrm":
            raise ValidationError("consensus_rounds",
                                  "dprsrm always uses a single consensus round")
        if self.seed < 0:
            raise ValidationError("seed", "must be nonnegative")
        if self.metric_every < 1:
            raise ValidationError("metric_every", "must be >= 1")
        return self


_INT_KEYS = {"n", "d", "r", "m_per_node", "T", "iterations", "consensus_rounds",
             "seed", "metric_every"}
_FLOAT_KEYS = {"gamma", "er_p", "alpha", "beta_hat", "tau", "clip_b"}
_STR_KEYS = {"problem", "topology", "algorithm", "alpha_rule", "objective_scaling"}
CONFIG_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | {"batch_size"}


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Parse flat ``key = value`` text into a validated config.

    Starts from ``base`` (the defaults when omitted) and overrides the keys
    present in the text. Malformed lines raise ParseError with the line
    number; bad values raise ValidationError naming the field.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in CONFIG_KEYS:
            raise ParseError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", lineno)
        try:
            if key == "batch_size":
                values[key] = None if value.lower() == "full" else int(value)
            elif key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            else:
                values[key] = value
        except ValueError:
            raise ParseError(f"bad value {value!r} for key {key!r}", lineno) from None
    cfg = replace(base, **values) if base is not None else ExperimentConfig(**values)
    return cfg.validate()


def config_to_text(cfg: ExperimentConfig) -> str:
    """Render a config back to the flat file format (CLI-only fields skipped)."""
    lines = []
    for f in fields(cfg):
        if f.name not in CONFIG_KEYS:
            continue
        value = getattr(cfg, f.name)
        if value is None:
            value = "full" if f.name == "batch_size" else None
        if value is not None:
            lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


def load_config(path: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), base=base)


def preset_text(name: str) -> str:
    """Return the text of a bundled preset (``pca_paper``, ``pca_mnist``, ``lrmc_paper``)."""
    return resources.files("stiefelnet.presets").joinpath(f"{name}.cfg").read_text("utf-8")


def load_preset(name: str) -> ExperimentConfig:
    return parse_config(preset_text(name))
