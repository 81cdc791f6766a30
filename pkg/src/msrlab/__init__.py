"""Finite-dimensional laboratory for monotone matrix square roots.

Symmetric matrices under the Loewner order, states as trace forms,
commutative blocks, and two independent routes to ``a^(1/2)``: the spectral
decomposition and quadrature of ``int_0^inf a (lam + a)^-1 dmu(lam)``.
"""

from .errors import (
    BlockRefinementError,
    DimensionError,
    HypothesisError,
    InputError,
    MsrError,
    NotAProjectionError,
    NotCommutingError,
    NotInBlockError,
    NotInvertibleError,
    NotPositiveError,
    OracleMismatchError,
)
from .symcore import (
    DEFAULT_TOL,
    EigDecomposition,
    OrderCheckReport,
    Projection,
    ToleranceConfig,
    absolute,
    eig,
    inverse,
    invertibility_margin,
    is_psd,
    loewner_leq,
    order_unit_norm,
    projection_check,
    quadratic_map,
    sqrt_spectral,
    sym,
)
from .blocks import CommutativeBlock, bicommutant, build_block, commutant_basis, commutes, function_rep
from .states import (
    InducedMeasure,
    LinearFunctional,
    State,
    eval_state,
    functional_is_state,
    induced_measure,
    norm_via_states,
    positivity_via_states,
)
from .msr import (
    MsrReport,
    QuadratureRule,
    antitone_inverse_check,
    counterexample_search,
    denman_beavers,
    fubini_check,
    make_rule,
    msr_check,
    regularization_bound,
    regularized_sqrt,
    resolvent_chain_margins,
    resolvent_monotone_check,
    resolvent_term,
    sqrt_integral,
    state_integral_identity,
)

__version__ = "0.1.0"
