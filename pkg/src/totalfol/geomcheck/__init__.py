"""Analytic model foliations and numerical checks on them."""

from .bumps import BumpSpec, chi_1, chi_3, chi_bar_1, chi_R, eta
from .checks import (
    CheckReport,
    SamplingTooCoarse,
    almost_horizontal_check,
    boundary_gluing_check,
    degenerate_triple,
    eval_forms,
    frobenius_check,
    frobenius_convergence_check,
    frobenius_residual,
    oracle_concordance,
    resolve_pending,
    rotation_oracle,
    run_model_suite,
    transversality_check,
)
from .models import (
    FunctionTriple,
    HolonomyModel,
    InverseModel,
    NoModel,
    ReebChart,
    ShearModel,
    StackModel,
    StdModel,
    TransposeModel,
    model_for,
    reference_image,
)
