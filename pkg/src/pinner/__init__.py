"""Inner functions, metric projections and zero sets in spaces of analytic
functions with p-summable Taylor coefficients."""

from .core import (
    Parameters,
    ZeroSetSpec,
    bj_residual,
    conjugate_exponent,
    difference_quotient,
    evaluate,
    p_norm,
    seq_signed_power,
    shift,
    signed_power,
)
from .errors import (
    ConvergenceError,
    ExponentCollisionError,
    ExponentOverflowError,
    PInnerError,
    PreconditionError,
)
from .inner import (
    InnerResult,
    PhiResult,
    b_factor_norm,
    inner_norm_from_phi,
    linear_inner_closed_form,
    phi_from_inner,
    solve_inner_newton,
    verify_p_inner,
)
from .projection import (
    ProjectionResult,
    SolverOptions,
    extremal_phi_direct,
    nested_projection_sequence,
    project_shift_span,
)
from .sparse import SparsePoly

__version__ = "0.1.0"
