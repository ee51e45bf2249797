"""Reactive point processes with self-excitation and inspection-driven
self-regulation: intensity evaluation, thinning simulation, likelihood,
conditional-frequency and ABC estimation, inspection-policy evaluation, and
ranking experiments."""

from .core import (
    CLEAN,
    TYPE_I,
    TYPE_II_IV,
    EntityRecord,
    Inspection,
    KernelParams,
    RegressionKernel,
    RppParams,
    intensity,
    max_intensity,
    resolve_decays,
)
from .errors import (
    ConvergenceError,
    DimensionMismatchError,
    InsufficientDataError,
    InvalidParameterError,
    ReactivePPError,
    RunawayIntensityError,
    ToleranceNotReachedError,
    ValidationError,
    ZeroIntensityWarning,
)
from .kernels import (
    covariate_decay,
    excitation_kernel,
    excitation_saturation,
    regulation_kernel,
    regulation_saturation,
    softplus,
)
from .simulate import (
    SimConfig,
    SimResult,
    corpus_simulate,
    intensity_trace,
    simulate_entity,
    simulate_entity_unsaturated,
)
from .likelihood import integrate_intensity, log_likelihood
from .cf import (
    BaselineFit,
    CfCurve,
    CurveFit,
    Trail,
    build_trails,
    cf_curve,
    estimate_baseline,
    fit_excitation_curve,
    fit_saturation_curve,
)
from .abcfit import (
    AbcFitResult,
    GapHistogram,
    LowRegion,
    Proposal,
    QuadraticManifold,
    abc_sweep,
    closest_point,
    dne,
    fit_abc,
    fit_manifold,
    gap_histogram,
    kl,
    low_region,
    sample_prior,
)
from .policy import (
    DEFAULT_REPAIR,
    PolicyConfig,
    PolicyReport,
    RepairKernelParams,
    cost_table,
    intensity_floor,
    optimal_cycle,
    repair_effect,
    run_policy,
    sample_outcome,
    schedule_brightline,
)
from .ranking import (
    RankReport,
    compare_models,
    rank_at_event,
    sign_test,
    vulnerability_snapshot,
)
from .dataio import (
    CorpusFiles,
    IngestReport,
    ModelArtifact,
    SyntheticCalibration,
    apply_normalization,
    generate_synthetic,
    ingest,
    load_artifact,
    normalize_covariates,
    save_artifact,
    synthesize_corpus,
    write_corpus,
)
from .estimators import AbcDecayEstimator, CfEstimator

__version__ = "0.1.0"

__all__ = [
    "AbcDecayEstimator",
    "AbcFitResult",
    "BaselineFit",
    "CLEAN",
    "CfCurve",
    "CfEstimator",
    "ConvergenceError",
    "CorpusFiles",
    "CurveFit",
    "DEFAULT_REPAIR",
    "DimensionMismatchError",
    "EntityRecord",
    "GapHistogram",
    "IngestReport",
    "InsufficientDataError",
    "Inspection",
    "InvalidParameterError",
    "KernelParams",
    "LowRegion",
    "ModelArtifact",
    "PolicyConfig",
    "PolicyReport",
    "Proposal",
    "QuadraticManifold",
    "RankReport",
    "ReactivePPError",
    "RegressionKernel",
    "RepairKernelParams",
    "RppParams",
    "RunawayIntensityError",
    "SimConfig",
    "SimResult",
    "SyntheticCalibration",
    "TYPE_I",
    "TYPE_II_IV",
    "ToleranceNotReachedError",
    "Trail",
    "ValidationError",
    "ZeroIntensityWarning",
    "abc_sweep",
    "apply_normalization",
    "build_trails",
    "cf_curve",
    "closest_point",
    "compare_models",
    "corpus_simulate",
    "cost_table",
    "covariate_decay",
    "dne",
    "estimate_baseline",
    "excitation_kernel",
    "excitation_saturation",
    "fit_abc",
    "fit_excitation_curve",
    "fit_manifold",
    "fit_saturation_curve",
    "gap_histogram",
    "generate_synthetic",
    "ingest",
    "integrate_intensity",
    "intensity",
    "intensity_floor",
    "intensity_trace",
    "kl",
    "load_artifact",
    "log_likelihood",
    "low_region",
    "max_intensity",
    "normalize_covariates",
    "optimal_cycle",
    "rank_at_event",
    "regulation_kernel",
    "regulation_saturation",
    "repair_effect",
    "resolve_decays",
    "run_policy",
    "sample_outcome",
    "sample_prior",
    "save_artifact",
    "schedule_brightline",
    "sign_test",
    "simulate_entity",
    "simulate_entity_unsaturated",
    "softplus",
    "synthesize_corpus",
    "vulnerability_snapshot",
    "write_corpus",
    "__version__",
]
