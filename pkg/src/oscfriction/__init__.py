"""Friction and energy dissipation for two coupled harmonic oscillators
in relative motion, computed from thermal linear response.

Every physical quantity is available by at least two independent routes
(closed form, direct quadrature, spectral derivative, truncated Fock-space
trace) and the routes are required to agree; ``oscfriction verify`` runs
the full set of cross checks from the command line.
"""

from .model import (
    DEFAULT_ABS_TOL,
    DEFAULT_REL_TOL,
    CouplingGeometry,
    Motion,
    Oscillator,
    OscillatorSystem,
    ThermalState,
    ValidationError,
    canonical_system,
    scale_units,
    validate_system,
)
from .response import (
    ResponseKernel,
    coth_difference,
    coth_factor,
    eval_phi,
    response_kernel,
)
from .oracle import (
    FockWorkspace,
    TraceError,
    choose_truncation,
    fock_workspace,
    occupation,
    phi_trace,
    phi_trace_grid,
)
from .numerics import (
    DEFAULT_SPEC,
    ConvergenceError,
    QuadratureSpec,
    first_moment_closed_form,
    integrate_semi_infinite_damped,
    lorentzian_squared_norm,
    nested_response_integral,
    zeroth_moment_closed_form,
)
from .forces import (
    ForceDecomposition,
    RouteDisagreementError,
    SpectralDensitySamples,
    density_grid_integral,
    friction_force_spectral,
    friction_force_time_domain,
    friction_routes,
    friction_spectral_density,
    geometry_factor,
    phi_tilde,
    resonant_prefactor,
    reversible_force,
)
from .dissipation import (
    DissipationResult,
    PerturbationProtocol,
    damped_ramp,
    dissipation_closed_form,
    dissipation_general,
    dissipation_leading_order,
    linear_ramp,
    phi_AA_from_motion,
    reversible_null_check,
    tabulated,
)

__version__ = "0.1.0"
