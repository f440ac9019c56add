from .idx import load_idx_images
from .lrmc import (
    LrmcInstance,
    gen_lrmc,
    lrmc_inner_solve,
    lrmc_riemannian_gradient,
    observation_rate,
)
from .pca import (
    PcaInstance,
    gen_synthetic_pca,
    pca_objective,
    pca_riemannian_gradient,
    split_rows,
)
from .snapshot import load_instance, save_instance

__all__ = [
    "LrmcInstance",
    "PcaInstance",
    "gen_lrmc",
    "gen_synthetic_pca",
    "load_idx_images",
    "load_instance",
    "lrmc_inner_solve",
    "lrmc_riemannian_gradient",
    "observation_rate",
    "pca_objective",
    "pca_riemannian_gradient",
    "save_instance",
    "split_rows",
]
