"""Bivariate common-shock risk model on the negative binomial clock."""

from .claims import ClaimDistribution, sum_cdf
from .model import (
    LoadingReport,
    LrdReport,
    ShockModelConfig,
    bcp_moments,
    joint_lt_claims,
    lrd_check,
    lrd_slope_mc,
    lt_total_claims,
    pgf_bcp,
    pgf_total_claims,
    premium_loading,
    risk_correlation,
    risk_covariance,
    sample_bcp,
    sample_claims_pair,
    sample_thinned_bcp,
    sample_total_claims_path,
)
from .ruin_ode import (
    JointRuinGrid,
    RuinGrid,
    RuinSolverError,
    classical_ruin_probability,
    j0y_formula,
    p0_formula,
    solve_joint_ruin_ode,
    solve_ruin_ode,
)
from .simulate import RuinEstimate, default_horizon, estimate_ruin_mc
