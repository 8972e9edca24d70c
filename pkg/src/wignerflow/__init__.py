"""Phase-space Wigner flow engine for separable Hamiltonians H(x,k) = K(k) + V(x).

Quantum Wigner currents and their ℏ-series, stationarity (∇·J) and
Liouvillianity (∇·w) quantifiers, exact Hermite closed forms, stationary
squeezed-gaussian ensembles for cosh/cos Hamiltonians, and the grid/spectral
machinery (Wigner transform, pseudospectral operators) to verify them.
"""

from .camouflage import (
    CamouflageCertificate,
    CamouflageParams,
    SQUEEZE_BOUND,
    build_hamiltonian,
    camouflage_divergence,
    replace_lambdas,
    simplified_params,
    solve_constraints,
    stationarity_certificate,
)
from .ensembles import (
    GaussianEnsemble,
    GaussianMarginal,
    PhysicalGaussian,
    ensemble_eval,
    ensemble_partial,
    marginals,
    physical_form,
)
from .flow import (
    FlowDiagnostics,
    MaskedPointError,
    TruncationPolicy,
    UnsupportedTermError,
    classical_currents,
    current_k_series,
    current_x_series,
    div_j_closed_form,
    div_jk_series,
    div_jx_series,
    is_masked,
    liouvillianity_quantifier,
    liouvillianity_series,
    matched_classical_hamiltonian,
    stationarity_quantifier,
)
from .grids import (
    GridTooSmallError,
    PhaseSpaceGrid,
    PrecisionWarning,
    ResolutionError,
    ScalarField,
    VectorField,
    Wavefunction,
    apply_kinetic,
    apply_operator_function,
    apply_potential,
    field_sweep,
    squeezed_vacuum_wavefunction,
    wigner_transform,
    zero_mode_residual,
)
from .hamiltonian import (
    CoshTerm,
    CosTerm,
    MonomialTerm,
    SeparableHamiltonian,
    UnitsMap,
    classical_velocity,
    from_dimensionless,
    hamiltonian_eval,
    harmonic_oscillator,
    term_odd_derivative,
    to_dimensionless,
)
from .hermite import (
    HermiteEvaluator,
    MAX_HERMITE_ORDER,
    gaussian_odd_derivative,
    hermite_eval,
    odd_hermite_generating,
    odd_hermite_series,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
