"""Radial Dirac modes on the exterior Schwarzschild geometry.

Transmission coefficients of the separated radial system, the closed-form
scattering matrix built from them, pointwise spectra of the signature and
horizon-flux operators, and the quadratic forms over mode-coefficient
profiles that tie the pieces together.
"""

from .geometry import Background, delta, radius_from_u, regge_wheeler_u
from .radial import (
    ModeParams,
    RadialSolution,
    RegimeError,
    SpinorPair,
    integrate_from_horizon,
    integrate_to_horizon_decaying,
    radial_rhs,
)
from .angular import angular_eigenfunction, angular_eigenvalues, angular_operator
from .asymptotics import (
    ExtrapolationError,
    Transmission,
    evanescent_transmission,
    extract_branches,
    extract_transmission,
    infinity_matrix,
    phase,
)
from .operators import (
    HyperbolicParams,
    ScatteringMatrix,
    SpectrumPoint,
    closure_identity_residual,
    params_from_f,
    scattering_matrix_closed,
    scattering_matrix_quadrature,
    spectrum_point,
)
from .modeforms import (
    EvanescentWeightWarning,
    ModeProfile,
    QuadSpec,
    ScatteringCache,
    SignatureImage,
    apply_signature,
    flux_form,
    horizon_bilinear_integrand,
    scalar_product,
    signature_form,
)

__all__ = [
    "Background",
    "EvanescentWeightWarning",
    "ExtrapolationError",
    "HyperbolicParams",
    "ModeParams",
    "ModeProfile",
    "QuadSpec",
    "RadialSolution",
    "RegimeError",
    "ScatteringCache",
    "ScatteringMatrix",
    "SignatureImage",
    "SpectrumPoint",
    "SpinorPair",
    "Transmission",
    "angular_eigenfunction",
    "angular_eigenvalues",
    "angular_operator",
    "apply_signature",
    "delta",
    "evanescent_transmission",
    "extract_branches",
    "extract_transmission",
    "flux_form",
    "horizon_bilinear_integrand",
    "infinity_matrix",
    "integrate_from_horizon",
    "integrate_to_horizon_decaying",
    "closure_identity_residual",
    "params_from_f",
    "phase",
    "radial_rhs",
    "radius_from_u",
    "regge_wheeler_u",
    "scalar_product",
    "scattering_matrix_closed",
    "scattering_matrix_quadrature",
    "signature_form",
    "spectrum_point",
]

__version__ = "0.1.0"
