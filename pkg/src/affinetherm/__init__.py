"""Affine-geometric thermodynamics toolkit.

Potentials immersed as graphs carry a conormal map, a fundamental form
and Legendre duality; relaxation generators on the fiber lift to the
conjugate variables and match contact-Hamiltonian dynamics.  See the
module docstrings for the geometry conventions.
"""

from ._kernel import BACKEND as _KERNEL_BACKEND
from ._kernel import HAVE_COMPILED
from .contact import (
    ComparisonReport,
    ContactHamiltonian,
    ContactState,
    compare_with_lift,
    contact_field,
    legendrian_pullback_residual,
)
from .duality import (
    DivergenceReport,
    DualChart,
    NewtonConfig,
    divergence_report,
    geometric_divergence,
)
from .errors import (
    AffineThermError,
    DomainError,
    IntegrationError,
    MismatchError,
    ScenarioError,
    SolveError,
    StencilError,
)
from .immersion import (
    Conormal,
    EquilibriumPoint,
    FundamentalForm,
    GraphImmersion,
    degeneracy_locus,
)
from .potentials import (
    BUILTIN_MODEL_IDS,
    DerivativeValidation,
    DiffConfig,
    Domain,
    ModelParams,
    Potential,
    constant_potential,
    ideal_gas_entropy,
    ideal_gas_helmholtz,
    ising_free_energy,
    make_builtin,
    quadratic,
    validate_derivatives,
    vdw_helmholtz,
)
from .relaxation import (
    CompressibilityReport,
    FixedPoint,
    InducedConjugates,
    IntegratorConfig,
    LiftedState,
    LyapunovReport,
    RelaxationGenerator,
    SignTable,
    SignTableRow,
    Trajectory,
    closed_form_single,
    compressibility,
    fixed_points,
    induced_conjugates,
    integrate,
    lifted_field,
    lyapunov_check,
    product_pair_variant,
    sign_table,
)

__version__ = "0.1.0"


def kernel_backend() -> str:
    """Which integrator core is active: 'compiled' or 'python'."""
    return _KERNEL_BACKEND


__all__ = [
    "__version__",
    "kernel_backend",
    "HAVE_COMPILED",
    # errors
    "AffineThermError",
    "DomainError",
    "StencilError",
    "SolveError",
    "IntegrationError",
    "MismatchError",
    "ScenarioError",
    # potentials
    "Domain",
    "DiffConfig",
    "Potential",
    "ModelParams",
    "DerivativeValidation",
    "make_builtin",
    "validate_derivatives",
    "ideal_gas_helmholtz",
    "ideal_gas_entropy",
    "vdw_helmholtz",
    "ising_free_energy",
    "quadratic",
    "constant_potential",
    "BUILTIN_MODEL_IDS",
    # immersion
    "GraphImmersion",
    "EquilibriumPoint",
    "Conormal",
    "FundamentalForm",
    "degeneracy_locus",
    # duality
    "DualChart",
    "NewtonConfig",
    "DivergenceReport",
    "geometric_divergence",
    "divergence_report",
    # relaxation
    "RelaxationGenerator",
    "LiftedState",
    "IntegratorConfig",
    "Trajectory",
    "FixedPoint",
    "CompressibilityReport",
    "SignTable",
    "SignTableRow",
    "LyapunovReport",
    "InducedConjugates",
    "lifted_field",
    "integrate",
    "closed_form_single",
    "fixed_points",
    "compressibility",
    "sign_table",
    "lyapunov_check",
    "induced_conjugates",
    "product_pair_variant",
    # contact
    "ContactHamiltonian",
    "ContactState",
    "ComparisonReport",
    "contact_field",
    "legendrian_pullback_residual",
    "compare_with_lift",
]
