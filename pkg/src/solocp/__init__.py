"""Spike-and-slab change point detection.

Closed-form single-site marginal posteriors (fast path), a Gibbs-sampled
joint model, detection post-processing with delta-clustering, a dense
conjugate oracle for auditing, benchmark signal/noise generators, and the
evaluation metrics used to score detections.
"""
from .detect import (
    SingleChangePoint,
    cluster_partition,
    detect,
    pick_representatives,
    single_cp_locate,
    threshold_select,
)
from .errors import (
    EmptySearchWindowError,
    EmptySetError,
    InvalidBlockCountError,
    InvalidConfigError,
    InvalidHyperparameterError,
    LinearSolveFailureError,
    NonFiniteValueError,
    NonPositiveSigmaError,
    NumericOverflowError,
    ParseError,
    SingularCovarianceError,
    SolocpError,
    TooShortError,
    UnknownSignalError,
)
from .gibbs import GibbsConfig, GibbsState, gibbs_inclusion_probabilities
from .metrics import (
    EvalReport,
    distance_histogram,
    evaluate,
    evaluate_sets,
    hausdorff,
    one_sided_hausdorff,
)
from .oracle import OracleResult, oracle_joint_marginal, oracle_site_posterior
from .posterior import (
    ForwardCache,
    InnerCache,
    all_inclusion_probabilities,
    all_site_posteriors,
    forward_pass,
    inner_pass,
    posterior_mean_surface,
    site_posterior,
)
from .signals import (
    NoiseSpec,
    SignalSpec,
    block_aggregate,
    builtin_signal,
    estimate_sigma_mad,
    map_changepoints_to_bins,
    sample_noise,
    simulate,
    simulate_binned,
)
from .types import (
    BinnedSeries,
    ChangePointSet,
    DetectionResult,
    Hyperparameters,
    PosteriorSiteSummary,
    TimeSeries,
    validate_series,
)

__all__ = [
    "BinnedSeries",
    "ChangePointSet",
    "DetectionResult",
    "EvalReport",
    "ForwardCache",
    "GibbsConfig",
    "GibbsState",
    "Hyperparameters",
    "InnerCache",
    "NoiseSpec",
    "OracleResult",
    "PosteriorSiteSummary",
    "SignalSpec",
    "SingleChangePoint",
    "TimeSeries",
    "all_inclusion_probabilities",
    "all_site_posteriors",
    "block_aggregate",
    "builtin_signal",
    "cluster_partition",
    "detect",
    "distance_histogram",
    "estimate_sigma_mad",
    "evaluate",
    "evaluate_sets",
    "forward_pass",
    "gibbs_inclusion_probabilities",
    "hausdorff",
    "inner_pass",
    "map_changepoints_to_bins",
    "one_sided_hausdorff",
    "oracle_joint_marginal",
    "oracle_site_posterior",
    "pick_representatives",
    "posterior_mean_surface",
    "sample_noise",
    "simulate",
    "simulate_binned",
    "single_cp_locate",
    "site_posterior",
    "threshold_select",
    "validate_series",
    # errors
    "SolocpError",
    "NonFiniteValueError",
    "TooShortError",
    "NonPositiveSigmaError",
    "InvalidHyperparameterError",
    "NumericOverflowError",
    "LinearSolveFailureError",
    "SingularCovarianceError",
    "InvalidConfigError",
    "UnknownSignalError",
    "InvalidBlockCountError",
    "EmptySearchWindowError",
    "EmptySetError",
    "ParseError",
]
