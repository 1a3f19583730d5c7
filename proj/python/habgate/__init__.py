"""Weekly open/closed prediction for shellfish production areas."""

from ._core import (
    HabgateError,
    Model,
    __version__,
    anderson_darling,
    kfold_split,
    load_model,
    metrics,
    one_way_anova,
    run,
    shapiro_wilk,
    studentized_range_cdf,
    studentized_range_quantile,
    synthesize,
    train,
    tukey_kramer,
    zone_matrix,
)

__all__ = [
    "HabgateError",
    "Model",
    "__version__",
    "anderson_darling",
    "kfold_split",
    "load_model",
    "metrics",
    "one_way_anova",
    "run",
    "shapiro_wilk",
    "studentized_range_cdf",
    "studentized_range_quantile",
    "synthesize",
    "train",
    "tukey_kramer",
    "zone_matrix",
]
