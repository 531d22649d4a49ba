"""Factorized probabilistic semantics of vague temporal adverbials.

Events carry a temporal precedence curve (a normal CDF in elapsed minutes);
adverbials carry a Gaussian kernel on the precedence axis; composing the
two predicts how acceptable "just"-style adverbials are at a given elapsed
time.  The package also ships a non-factorized per-pair Gaussian baseline,
least-squares fitting for both families, accuracy evaluation, a synthetic
survey generator, and a CLI (`justnow`).
"""

from .data import (
    CSV_HEADER,
    CsvError,
    Dataset,
    JudgmentRecord,
    generate_synthetic,
    load_csv,
    normalize_likert,
    save_csv,
)
from .evaluation import (
    AccuracyReport,
    ExtendabilityRow,
    accuracy,
    compare,
    extendability_table,
)
from .fitting import (
    FitConfig,
    FitReport,
    fit_baseline,
    fit_factorized,
    jacobian_factorized,
    residuals_factorized,
)
from .model import (
    UNIT_MINUTES,
    AdverbialParams,
    DomainError,
    Duration,
    EventParams,
    FactorizedModel,
    PairGaussianModel,
    PairParams,
    UnknownIdError,
    UnknownUnitError,
    adverbial_applicability,
    baseline_probability,
    best_adverbial,
    composite_probability,
    erf,
    event_precedence,
    load_any_model,
    load_baseline,
    load_model,
    reference_model,
    save_baseline,
    save_model,
)

__version__ = "0.1.0"

__all__ = [
    "UNIT_MINUTES",
    "AdverbialParams",
    "DomainError",
    "Duration",
    "EventParams",
    "FactorizedModel",
    "PairGaussianModel",
    "PairParams",
    "UnknownIdError",
    "UnknownUnitError",
    "adverbial_applicability",
    "baseline_probability",
    "best_adverbial",
    "composite_probability",
    "erf",
    "event_precedence",
    "load_any_model",
    "load_baseline",
    "load_model",
    "reference_model",
    "save_baseline",
    "save_model",
    "CSV_HEADER",
    "CsvError",
    "Dataset",
    "JudgmentRecord",
    "generate_synthetic",
    "load_csv",
    "normalize_likert",
    "save_csv",
    "FitConfig",
    "FitReport",
    "fit_baseline",
    "fit_factorized",
    "jacobian_factorized",
    "residuals_factorized",
    "AccuracyReport",
    "ExtendabilityRow",
    "accuracy",
    "compare",
    "extendability_table",
]
