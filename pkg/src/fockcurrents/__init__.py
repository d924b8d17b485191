"""Exact symbolic verifier for a level-k free-boson realization of
Drinfeld currents on truncated Fock modules."""

from .scalars import (
    HShift,
    NonDivisibleError,
    NonSingleValuedError,
    RatK,
    Rational,
    Scalar,
    gen_binomial,
    scalar_arith,
)
from .backends import FloatBackend, SpecializedBackend, SymbolicBackend, SYMBOLIC
from .fock import (
    BOSONS,
    CH,
    PH,
    PHI,
    CapExceededError,
    FockState,
    FockVector,
    apply_d,
    apply_oscillator,
    basis_states,
    basis_states_upto,
    graded_dimension,
    parse_state,
    translate,
)
from .vopir import (
    NormalizedExpr,
    OverlappingProductError,
    Primitive,
    homogeneity_profile,
    normalize,
)
from .modeengine import (
    ExprModeOp,
    ModeEngine,
    NonConvergentWindowError,
    check_bilinear,
    check_ef_delta,
    compose_apply,
)
from .algebra import (
    CURRENTS,
    FockAdapter,
    current_e,
    current_eta,
    current_f,
    current_hm,
    current_hp,
    current_screening,
    current_xi,
    vertex_phi_top,
    vertex_psi_bot,
    vertex_tower,
    zero_mode,
)
from .evalmod import EvalAdapter, EvalModule, EvalVector
from .kernel import KernelTable, kernel_dimensions
from .reports import Check, RelationReport
from .suites import SUITE_IDS, SuiteConfig, run_suite

__version__ = "0.1.0"
