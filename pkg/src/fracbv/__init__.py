"""Riemann-Liouville fractional integrals, bounded variation and box dimension."""

__version__ = "0.1.0"

from .errors import ConfigError, FracBVError, NumericError, PreconditionError
from .fracint import (
    FracOrder,
    monotone_image_check,
    rl_integral,
    rl_integral_at,
    rl_weights,
    semigroup_residual,
)
from .fractaldim import BoxDimEstimate, box_counts, box_dimension
from .funcspace import (
    FunctionHandle,
    Grid,
    SampledFunction,
    catalog_lookup,
    make_grid,
    sample,
)
from .variation import (
    OperatorBoundReport,
    Thresholds,
    VariationReport,
    bv_norm,
    detect_uvp,
    discrete_tv,
    jordan_decompose,
    operator_bound_check,
    variation_profile,
)

__all__ = [
    "BoxDimEstimate",
    "ConfigError",
    "FracBVError",
    "FracOrder",
    "FunctionHandle",
    "Grid",
    "NumericError",
    "OperatorBoundReport",
    "PreconditionError",
    "SampledFunction",
    "Thresholds",
    "VariationReport",
    "box_counts",
    "box_dimension",
    "bv_norm",
    "catalog_lookup",
    "detect_uvp",
    "discrete_tv",
    "jordan_decompose",
    "make_grid",
    "monotone_image_check",
    "operator_bound_check",
    "rl_integral",
    "rl_integral_at",
    "rl_weights",
    "sample",
    "semigroup_residual",
    "variation_profile",
]
