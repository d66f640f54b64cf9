"""lclab: numerics for log-concave duality, Mahler volumes, and isotropic constants.

The toolkit represents a log-concave function f = e^{-phi} by a descriptor
(builtin family plus affine/power metadata, or a sampled potential grid),
computes its polar dual through the Legendre transform, and evaluates the
functionals built on the pair (f, f°): volume products and Santalo points,
entropy and varentropy, the three isotropic-constant variants, minimizer
certificates, and the two body constructions that carry isotropic constants
between functions and convex bodies.
"""

from .bodies import (
    Body,
    BodyStats,
    ConcaveProfile,
    body_from_dict,
    cone_lift,
    cone_lift_lhat,
    indicator,
    km_isoconst,
    km_limit_sweep,
    make_body,
    profile_from_function,
    tent_profile,
)
from .certify import (
    Certificate,
    criticality_residuals,
    entropy_sum_closed,
    full_certificate,
    hessian_block,
    jensen_sandwich_check,
    logp_derivatives,
    question4_scan,
    second_order_certificate,
    slicing_bound_check,
)
from .errors import (
    DegenerateError,
    DivergentTiltError,
    InputError,
    LclabError,
    NonConvergenceError,
    NumericalError,
    SanityError,
    TruncationError,
)
from .funcspace import (
    GridFn,
    LogConcaveFn,
    compose_transform,
    discretize,
    from_grid,
    function_from_dict,
    load_function,
    load_grid,
    make_builtin,
    materialize,
    power,
    save_function,
    save_grid,
    tilt_translate,
)
from .functionals import (
    MahlerResult,
    MomentReport,
    SantaloResult,
    jensen_gaps,
    log_laplace,
    mahler,
    moments,
    santalo_point,
    suggest_grid,
    volume_product,
)
from .legendre import (
    closed_polar_available,
    conjugate_1d,
    conjugate_nd,
    involution_defect,
    polar,
)
from .quadrature import analyze, mc_moments

__version__ = "0.1.0"

__all__ = [
    "Body",
    "BodyStats",
    "Certificate",
    "ConcaveProfile",
    "DegenerateError",
    "DivergentTiltError",
    "GridFn",
    "InputError",
    "LclabError",
    "LogConcaveFn",
    "MahlerResult",
    "MomentReport",
    "NonConvergenceError",
    "NumericalError",
    "SanityError",
    "SantaloResult",
    "TruncationError",
    "analyze",
    "body_from_dict",
    "closed_polar_available",
    "compose_transform",
    "cone_lift",
    "cone_lift_lhat",
    "conjugate_1d",
    "conjugate_nd",
    "criticality_residuals",
    "discretize",
    "entropy_sum_closed",
    "from_grid",
    "full_certificate",
    "function_from_dict",
    "hessian_block",
    "indicator",
    "involution_defect",
    "jensen_gaps",
    "jensen_sandwich_check",
    "km_isoconst",
    "km_limit_sweep",
    "load_function",
    "load_grid",
    "log_laplace",
    "logp_derivatives",
    "mahler",
    "make_body",
    "make_builtin",
    "materialize",
    "mc_moments",
    "moments",
    "polar",
    "power",
    "profile_from_function",
    "question4_scan",
    "santalo_point",
    "save_function",
    "save_grid",
    "second_order_certificate",
    "slicing_bound_check",
    "suggest_grid",
    "tent_profile",
    "tilt_translate",
    "volume_product",
]
