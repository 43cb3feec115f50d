"""Kinetic income-exchange model with taxation, redistribution and
heterogeneous tax-compliance sectors.

A closed population is divided into income classes and, within each class,
into behavioral sectors that pay different fractions of their due taxes.
Pairwise money exchanges, progressive taxation of every transfer and
uniform redistribution of the proceeds drive a deterministic ODE system
for the group populations. The package integrates that system to its
stationary distribution and reports inequality statistics: Gini indices,
sector mean incomes and the income gap between evaders and honest payers.
"""

__version__ = "0.1.0"

from .checks import CheckResult, run_validation_suite
from .coefficients import (
    CoefficientTables,
    build_effective_tax_table,
    build_payment_matrix,
    build_tables,
    build_tax_rates,
    coefficient_tensor_via_increments,
    direct_coefficient,
    direct_coefficient_tensor,
    payment_increments,
    resolve_tax_rates,
)
from .config import ModelConfig, default_config
from .dynamics import redistribution_tensor, redistribution_term, rhs, rhs_naive_oracle
from .errors import (
    ConfigError,
    ConservationError,
    ContractError,
    DistributionError,
    FitError,
    KineticModelError,
    OracleSizeError,
    SingularStateError,
    StepSizeError,
    SweepError,
)
from .experiments import (
    InitialConditionSpec,
    SpreadComparison,
    SweepRow,
    build_initial_state,
    compare_compliance_vs_evasion,
    evasion_sweep,
    fit_quadratic_through_origin,
    run_scenario,
    spread_comparison,
)
from .integrate import IntegrationOptions, StationaryResult, evolve_to_stationary, step
from .metrics import MetricsReport, gini, metrics_report, total_evasion_level

__all__ = [
    "__version__",
    # configuration
    "ModelConfig", "default_config",
    # coefficient tables
    "CoefficientTables", "build_tables", "build_tax_rates", "resolve_tax_rates",
    "build_payment_matrix", "build_effective_tax_table", "direct_coefficient",
    "direct_coefficient_tensor", "coefficient_tensor_via_increments",
    "payment_increments",
    # dynamics
    "rhs", "rhs_naive_oracle", "redistribution_term", "redistribution_tensor",
    # integration
    "IntegrationOptions", "StationaryResult", "step", "evolve_to_stationary",
    # metrics
    "MetricsReport", "gini", "metrics_report", "total_evasion_level",
    # experiments
    "InitialConditionSpec", "SweepRow", "SpreadComparison", "build_initial_state",
    "run_scenario", "evasion_sweep", "fit_quadratic_through_origin",
    "compare_compliance_vs_evasion", "spread_comparison",
    # validation
    "CheckResult", "run_validation_suite",
    # errors
    "KineticModelError", "ConfigError", "ContractError", "SingularStateError",
    "StepSizeError", "ConservationError", "DistributionError", "SweepError",
    "FitError", "OracleSizeError",
]
