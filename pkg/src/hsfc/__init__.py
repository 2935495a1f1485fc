"""Helffer-Sjostrand functional calculus for matrices, with Seeley extension for half-line functions."""

from .aae import AlmostAnalytic, alternate_psi, dbar_f_tilde, default_psi, f_tilde, sigma_field
from .errors import (
    CatalogError,
    DivergenceError,
    DomainError,
    GrowthError,
    HSFCError,
    OrderError,
    PreconditionError,
    QuadratureError,
    SingularResolventError,
)
from .hs_engine import (
    GrowthEstimate,
    OperatorHandle,
    QuadratureConfig,
    choose_taylor_order,
    gamma_apply,
    hs_apply,
    resolvent,
)
from .jets import (
    Domain,
    Jet,
    bracket,
    bump,
    cutoff,
    exp_decay,
    gz,
    japanese_bracket,
    jet_product,
    jet_sum,
    make_builtin,
    parse_jet_spec,
    zero,
)
from .norms import NormResult, an_norm
from .oracle import estimate_growth, matrix_function_oracle
from .seeley import (
    SeeleyCoefficients,
    make_seeley_coefficients,
    multiply_by_cutoff,
    scale_jet,
    seeley_cutoff,
    seeley_extend,
)

__version__ = "0.1.0"

__all__ = [
    "AlmostAnalytic",
    "CatalogError",
    "DivergenceError",
    "Domain",
    "DomainError",
    "GrowthError",
    "GrowthEstimate",
    "HSFCError",
    "Jet",
    "NormResult",
    "OperatorHandle",
    "OrderError",
    "PreconditionError",
    "QuadratureConfig",
    "QuadratureError",
    "SeeleyCoefficients",
    "SingularResolventError",
    "alternate_psi",
    "an_norm",
    "bracket",
    "bump",
    "choose_taylor_order",
    "cutoff",
    "dbar_f_tilde",
    "default_psi",
    "estimate_growth",
    "exp_decay",
    "f_tilde",
    "gamma_apply",
    "gz",
    "hs_apply",
    "japanese_bracket",
    "jet_product",
    "jet_sum",
    "make_builtin",
    "make_seeley_coefficients",
    "matrix_function_oracle",
    "multiply_by_cutoff",
    "parse_jet_spec",
    "resolvent",
    "scale_jet",
    "seeley_cutoff",
    "seeley_extend",
    "sigma_field",
    "zero",
]
