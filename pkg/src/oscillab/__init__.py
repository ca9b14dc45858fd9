"""Error terms of summatory functions of arithmetic sequences and their oscillation."""

from .delta import (
    AlphaMode,
    AlphaSpec,
    DeltaFunction,
    FluctuationReport,
    Side,
    delta_at,
    max_scaled,
    measure_above,
    moment_integral,
    omega_report,
    sign_changes,
    smoothed_power_integral,
)
from .dirichlet import ApplicationSpec, application, dirichlet_D, synthetic_application
from .main_term import (
    LaurentCoeffs,
    MainTermExpr,
    closed_form_main_term,
    eval_main_term,
    laurent_coefficients,
    main_term_from_poles,
)
from .mellin import (
    Contour,
    default_contour,
    mellin_contour,
    mellin_direct,
    perron_truncated,
    pole_strength,
)
from .sieve import (
    ABELIAN,
    DIVISOR,
    SQUAREFREE,
    VON_MANGOLDT,
    ArithmeticSequence,
    PrefixTable,
    SequenceKind,
    Tag,
    cache_load,
    cache_store,
    prefix_star,
    prefix_table,
    twisted,
)
from .zeta import ZetaConstants, zeta, zeta_constants, zeta_prime

__version__ = "0.1.0"
