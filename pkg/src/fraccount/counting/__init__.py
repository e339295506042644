"""Multivariate tempered space-fractional Poisson and negative binomial processes."""

from .inversion import pmf_by_inversion, pmf_grid_by_inversion, pmf_table_by_inversion
from .levy import (
    jump_size_pmf,
    levy_mass,
    levy_mass_by_inversion,
    total_jump_rate,
    total_levy_masses,
    transition_probability,
)
from .operators import ResidualReport, operator_residual_pgf, operator_residual_pmf
from .params import (
    ConsistencyError,
    CountVector,
    InversionError,
    NumericDomainError,
    ProcessParams,
    cov_counts,
    mean_counts,
)
from .pgf import pgf_for, pgf_mtsfnbp, pgf_mtsfpp
from .quadrature import QuadratureError, pmf_by_quadrature, pmf_table_by_quadrature
from .sampling import (
    PathSample,
    mmtsfpp_terminal,
    mmttfpp_terminal,
    sample_mtsfnbp_terminal,
    sample_mtsfpp_terminal,
    sample_path,
    sample_terminal,
    total_count_pmf,
)
from .series import pmf_mtsfnbp, pmf_mtsfpp
