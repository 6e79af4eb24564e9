"""Truncated infinite compositions for functional equations with convergents.

The package evaluates nested step families H_1(x, H_2(x, ... H_n(x, z)))
innermost-first, picks truncation depths adaptively from tail estimates,
verifies the resulting functional-equation identities numerically, and
refines the composition into a Schroeder-type conjugacy by inverse-orbit
iteration.
"""

from .errors import (
    BranchEscapeError,
    CapacityError,
    CompositionError,
    DegenerateFitError,
    DivergenceError,
    EvalError,
    NoConvergenceError,
    NonContractionError,
    NonFiniteError,
    ParseError,
    PoleError,
)
from .expr import FuncExpr, Jet, eval_jet, eval_on_jet, evaluate, parse, parse_constant
from .kernels import (
    AbelKernel,
    SchroederKernel,
    SingularityLattice,
    abel_step,
    catalog_convergent,
    exponential_abel,
    logistic_abel,
    schroeder_step,
    singularity_lattice,
    tail_estimate,
)
from .engine import (
    GridCell,
    GridSpec,
    Truncation,
    compose,
    compose_adaptive,
    derivative_series,
    grid_eval,
)
from .solver import (
    InverseBranch,
    Region,
    SchroederRun,
    asymptotic_slope_abel,
    asymptotic_slope_schroeder,
    least_squares_slope,
    make_inverse_branch,
    phi_residual,
    solve_phi,
    v_iterate,
)
from .verify import (
    Verdict,
    check_abel_identity,
    check_basepoint,
    check_schroeder_identity,
    check_taylor_recurrence,
    run_sweep,
    taylor_coeffs,
)

__version__ = "0.1.0"

__all__ = [
    "AbelKernel",
    "BranchEscapeError",
    "CapacityError",
    "CompositionError",
    "DegenerateFitError",
    "DivergenceError",
    "EvalError",
    "FuncExpr",
    "GridCell",
    "GridSpec",
    "InverseBranch",
    "Jet",
    "NoConvergenceError",
    "NonContractionError",
    "NonFiniteError",
    "ParseError",
    "PoleError",
    "Region",
    "SchroederKernel",
    "SchroederRun",
    "SingularityLattice",
    "Truncation",
    "Verdict",
    "abel_step",
    "asymptotic_slope_abel",
    "asymptotic_slope_schroeder",
    "catalog_convergent",
    "check_abel_identity",
    "check_basepoint",
    "check_schroeder_identity",
    "check_taylor_recurrence",
    "compose",
    "compose_adaptive",
    "derivative_series",
    "eval_jet",
    "eval_on_jet",
    "evaluate",
    "exponential_abel",
    "grid_eval",
    "least_squares_slope",
    "logistic_abel",
    "make_inverse_branch",
    "parse",
    "parse_constant",
    "phi_residual",
    "run_sweep",
    "schroeder_step",
    "singularity_lattice",
    "solve_phi",
    "tail_estimate",
    "taylor_coeffs",
    "v_iterate",
]
