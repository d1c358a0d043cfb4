"""Critical lengths of constant-coefficient ODE kernels.

The package decides where a kernel (or a piecewise splice of kernels) is an
Extended Chebyshev space, computes critical lengths and critical lengths for
design by bracketed search, and extracts Bernstein bases, transition
functions and weight systems as byproducts.
"""

from .config import RunConfig
from .critlen import (
    CriticalLengthResult,
    critical_length,
    critical_length_for_design,
    dichotomy,
    max_imag,
    rough_estimate,
)
from .bernlike import (
    BernsteinLikeBasis,
    GammaTensor,
    NoBasisEvidence,
    global_bernstein_like,
    level0_expansions,
    local_bernstein_like,
)
from .design import (
    NormalizedBasis,
    WeightSystem,
    bernstein_basis,
    derived_basis,
    eval_curve,
    expand_unity,
    irr_check,
    transition_functions,
    weight_system,
)
from .ectest import ECTestReport, ec_test, gamma_step, positivity_verdict
from .expfam import (
    CharPoly,
    FamilyBasis,
    RootSet,
    build_family,
    eval_derivatives,
    find_roots,
    operator_from_json,
)
from .oracles import (
    OracleValue,
    bessel_first_zero,
    brute_force_ec,
    solve_closed_form,
    wronskian_scan,
)
from .space import (
    GlobalMember,
    PiecewiseSpace,
    Section,
    eval_member,
    make_spliced,
    make_uniform,
    splice_from_json,
)

__version__ = "0.1.0"

__all__ = [
    "RunConfig",
    "CharPoly",
    "RootSet",
    "FamilyBasis",
    "find_roots",
    "build_family",
    "eval_derivatives",
    "operator_from_json",
    "Section",
    "PiecewiseSpace",
    "GlobalMember",
    "make_uniform",
    "make_spliced",
    "eval_member",
    "splice_from_json",
    "BernsteinLikeBasis",
    "GammaTensor",
    "NoBasisEvidence",
    "local_bernstein_like",
    "global_bernstein_like",
    "level0_expansions",
    "ECTestReport",
    "ec_test",
    "gamma_step",
    "positivity_verdict",
    "CriticalLengthResult",
    "max_imag",
    "rough_estimate",
    "dichotomy",
    "critical_length",
    "critical_length_for_design",
    "NormalizedBasis",
    "WeightSystem",
    "expand_unity",
    "bernstein_basis",
    "transition_functions",
    "derived_basis",
    "weight_system",
    "eval_curve",
    "irr_check",
    "OracleValue",
    "bessel_first_zero",
    "solve_closed_form",
    "wronskian_scan",
    "brute_force_ec",
    "__version__",
]
