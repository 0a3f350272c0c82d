"""Helffer-Sjostrand functional calculus for complex matrices with real spectrum."""

from .almost_analytic import AlmostAnalytic, aa_dbar, aa_eval, cutoff_tau, default_taylor_order
from .calculus import (
    CalculusResult,
    QuadratureSpec,
    char_one_check,
    heat_semigroup,
    hs_apply,
    hs_apply_extended,
    hs_contour_apply,
    rectangle_contour_identity,
    semibounded_apply,
)
from .errors import *  # noqa: F401,F403
from .functions import (
    CkFunction,
    ExtendedElement,
    HalfLineFunction,
    an_norm,
    approx_char,
    bracket_power,
    bump,
    custom_table,
    difference_quotient,
    exp_poly,
    extended_inverse,
    from_callable,
    gamma_join,
    japanese_bracket,
    rational,
    rejoin_avoiding,
    resolvent_function,
    smooth_step,
    weighted_norm,
    zero_function,
)
from .operators import (
    ResolventBoundFit,
    TestOperator,
    fit_resolvent_bound,
    make_test_operator,
    oracle_apply,
    read_matrix,
    resolvent,
    spectral_norm,
    write_matrix,
)
from .seeley import (
    SeeleyCoefficients,
    aplus_norm,
    exp_half_line,
    half_line_rational,
    multiply_op,
    scale_op,
    seeley_coefficients,
    seeley_extend,
)
from .smt import (
    SmtReport,
    approx_eigvec_residual,
    bounded_exclusion_check,
    convergence_table,
    spectral_mapping_report,
    verify_batch,
    verify_spectral_mapping,
)

__version__ = "0.1.0"
