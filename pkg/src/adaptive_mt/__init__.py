"""Adaptive significance thresholds for large-scale multiple testing."""

from .backbone import ConvexBackbone, Pi0Estimate, bend_point, fit_backbone, pi0_backbone, smooth_eqf
from .ecdf import PValueSample, edf_eval, eqf_eval, modified_eqf_eval
from .errors import DomainError, InsufficientDataError
from .numeric import RngStream, f_sf, golden_section_min, normal_draw, reg_inc_beta
from .pi0_baselines import bh_pi0_slope, storey_pi0, storey_pi0_bootstrap
from .procedures import (
    OutcomeTable,
    StylizedTailModel,
    adaptive_bh,
    bh_stepup,
    err_exact,
    hard_threshold,
    orthant_check,
    psi_bound,
    qvalue_threshold,
    qvalues,
)
from .simkit import (
    BetaMixture,
    MCReport,
    SimModelConfig,
    anova_f_pvalue,
    anova_f_pvalues,
    compare_pi0,
    gen_pathway_dataset,
    mc_harness,
    mc_harness_multi,
    orthant_generator,
    scaled_config,
    table3_config,
)
from .splines import KnotVector, SmoothedEQF, bspline_basis, build_knots, spline_derivative, vd_spline
from .thresholds import (
    ThresholdResult,
    alpha0_from_target,
    alpha_cal,
    alpha_hat_cal,
    alpha_star_uncalibrated,
    api_value,
    coeff_A,
    coeff_B,
)

__version__ = "0.1.0"

__all__ = [
    "BetaMixture",
    "ConvexBackbone",
    "DomainError",
    "InsufficientDataError",
    "KnotVector",
    "MCReport",
    "OutcomeTable",
    "PValueSample",
    "Pi0Estimate",
    "RngStream",
    "SimModelConfig",
    "SmoothedEQF",
    "StylizedTailModel",
    "ThresholdResult",
    "adaptive_bh",
    "alpha0_from_target",
    "alpha_cal",
    "alpha_hat_cal",
    "alpha_star_uncalibrated",
    "anova_f_pvalue",
    "anova_f_pvalues",
    "api_value",
    "bend_point",
    "bh_pi0_slope",
    "bh_stepup",
    "bspline_basis",
    "build_knots",
    "coeff_A",
    "coeff_B",
    "compare_pi0",
    "edf_eval",
    "eqf_eval",
    "err_exact",
    "f_sf",
    "fit_backbone",
    "gen_pathway_dataset",
    "golden_section_min",
    "hard_threshold",
    "mc_harness",
    "mc_harness_multi",
    "modified_eqf_eval",
    "normal_draw",
    "orthant_check",
    "orthant_generator",
    "pi0_backbone",
    "psi_bound",
    "qvalue_threshold",
    "qvalues",
    "reg_inc_beta",
    "scaled_config",
    "smooth_eqf",
    "spline_derivative",
    "storey_pi0",
    "storey_pi0_bootstrap",
    "table3_config",
    "vd_spline",
]
