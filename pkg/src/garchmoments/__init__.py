"""QML estimation of GARCH-family volatility models and a fixed-design
residual-bootstrap test for the existence of even-order moments."""

__version__ = "0.1.0"

from .bootstrap import (
    BootstrapConfig,
    Direction,
    JointBootstrapDraws,
    MomentTestResult,
    bootstrap_joint,
    bootstrap_test,
    p_value,
    rng_stream,
)
from .estimation import (
    FitResult,
    OptimOptions,
    SigmaBlocks,
    fit,
    fit_constrained,
    negative_qll,
    qll_score,
    sigma_blocks,
    wald_variance_garch11,
)
from .models import (
    Family,
    ModelSpec,
    MomentVector,
    Params,
    VolatilityPath,
    estimate_moments,
    filter_volatility,
    gaussian_moments,
    h_eval,
    residuals,
    scale_params,
    simulate,
)
from .montecarlo import (
    ExperimentConfig,
    InnovationFamily,
    RejectionTable,
    export_density_samples,
    run_experiment,
    solve_boundary_beta,
)
from .spectral import (
    KroneckerDecomposition,
    SpectralMode,
    build_A,
    closed_form_garch11,
    coefficient_matrices,
    expected_kron,
    kron_power,
    spectral_value,
    tau,
    test_statistic,
)

__all__ = [
    "BootstrapConfig",
    "Direction",
    "ExperimentConfig",
    "Family",
    "FitResult",
    "InnovationFamily",
    "JointBootstrapDraws",
    "KroneckerDecomposition",
    "ModelSpec",
    "MomentTestResult",
    "MomentVector",
    "OptimOptions",
    "Params",
    "RejectionTable",
    "SigmaBlocks",
    "SpectralMode",
    "VolatilityPath",
    "bootstrap_joint",
    "bootstrap_test",
    "build_A",
    "closed_form_garch11",
    "coefficient_matrices",
    "estimate_moments",
    "expected_kron",
    "export_density_samples",
    "filter_volatility",
    "fit",
    "fit_constrained",
    "gaussian_moments",
    "h_eval",
    "kron_power",
    "negative_qll",
    "p_value",
    "qll_score",
    "residuals",
    "rng_stream",
    "run_experiment",
    "scale_params",
    "sigma_blocks",
    "simulate",
    "solve_boundary_beta",
    "spectral_value",
    "tau",
    "test_statistic",
    "wald_variance_garch11",
]
