"""Robust estimation by adversarial projection.

Minimax estimators for means, second moments, and linear regression under
adversarial contamination, built on smoothed Kolmogorov-Smirnov style
discriminator distances, plus a deterministic simulation harness.
"""

from .core import (
    Dataset,
    OrliczFunction,
    ResilienceSpec,
    derive_seed,
    orlicz_norm_scalar,
    psi_eval,
    psi_inverse,
    resilience_radius,
    rng_from_seed,
)
from .discriminator import (
    LOG_SIGMOID2_CDF,
    SIGMOID2_CDF,
    SIGMOID_CDF,
    STEP_CDF,
    FeatureFamily,
    OneLayerParams,
    SmoothingCdf,
    SmoothingKind,
    TwoLayerParams,
    discrete_smoothing,
    g1_eval,
    g2_eval,
    grad_inputs,
    grad_params,
    head_values,
    project_constraints,
)
from .distance import (
    AscentConfig,
    DistanceKind,
    abar_deviation,
    estimate_distance,
    parse_distance_kind,
    smoothed_ks_oracle_1d,
)
from .contamination import (
    AttackSpec,
    CleanFamily,
    corrupt,
    dataset_from_csv,
    dataset_to_csv,
    population_mean,
    population_second_moment,
    replacement_count,
    sample_clean,
)
from .generator import (
    MeanGenerator,
    NoisePool,
    RegressionGenerator,
    ScaleGenerator,
    extract_estimate,
    generate,
    generator_grad,
    make_noise_pool,
)
from .estimator import (
    EstimationResult,
    MinimaxConfig,
    NumericalAbortError,
    baseline,
    evaluate_loss,
    robust_mean,
    robust_regression,
    robust_second_moment,
    spectral_norm,
)
from .lemma_lab import (
    DiscreteDist1D,
    check_cdf_validity,
    check_theorem_conditions,
    random_discrete_dist,
    resilience_membership_sampled,
    verify_mean_cross,
    write_report,
)
from .harness import (
    ConfigError,
    ExperimentConfig,
    ExperimentRecord,
    cell_seed,
    emit_plots,
    load_config,
    read_records,
    run_sweep,
    summarize,
    write_summary_csv,
)

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "OrliczFunction",
    "ResilienceSpec",
    "derive_seed",
    "orlicz_norm_scalar",
    "psi_eval",
    "psi_inverse",
    "resilience_radius",
    "rng_from_seed",
    "LOG_SIGMOID2_CDF",
    "SIGMOID2_CDF",
    "SIGMOID_CDF",
    "STEP_CDF",
    "FeatureFamily",
    "OneLayerParams",
    "SmoothingCdf",
    "SmoothingKind",
    "TwoLayerParams",
    "discrete_smoothing",
    "g1_eval",
    "g2_eval",
    "grad_inputs",
    "grad_params",
    "head_values",
    "project_constraints",
    "AscentConfig",
    "DistanceKind",
    "abar_deviation",
    "estimate_distance",
    "parse_distance_kind",
    "smoothed_ks_oracle_1d",
    "AttackSpec",
    "CleanFamily",
    "corrupt",
    "dataset_from_csv",
    "dataset_to_csv",
    "population_mean",
    "population_second_moment",
    "replacement_count",
    "sample_clean",
    "MeanGenerator",
    "NoisePool",
    "RegressionGenerator",
    "ScaleGenerator",
    "extract_estimate",
    "generate",
    "generator_grad",
    "make_noise_pool",
    "EstimationResult",
    "MinimaxConfig",
    "NumericalAbortError",
    "baseline",
    "evaluate_loss",
    "robust_mean",
    "robust_regression",
    "robust_second_moment",
    "spectral_norm",
    "DiscreteDist1D",
    "check_cdf_validity",
    "check_theorem_conditions",
    "random_discrete_dist",
    "resilience_membership_sampled",
    "verify_mean_cross",
    "write_report",
    "ConfigError",
    "ExperimentConfig",
    "ExperimentRecord",
    "cell_seed",
    "emit_plots",
    "load_config",
    "read_records",
    "run_sweep",
    "summarize",
    "write_summary_csv",
    "__version__",
]
