"""Reversible and friction forces between the moving oscillators.

The induced force splits into a reversible part that tracks the
instantaneous displacement,

    F_r(t) = G t int_0^inf phi(u) e^{-eta u} du,

and a velocity-odd friction part

    F_f = -G int_0^inf phi(u) u e^{-eta u} du,

with the geometry factor G = (grad psi)(v . grad psi).  The friction force
is computed by three routes that must agree:

(a) direct quadrature of the damped first moment of phi,
(b) the exact finite-eta closed form
    -G D [ (c1 + c2) eta O1/(eta^2 + O1^2)^2
           + (c2 - c1) eta O2/(eta^2 + O2^2)^2 ],
(c) the spectral route -i G d/dw phitilde(w) at w = 0, where phitilde is
    the one-sided damped Fourier transform of phi (four simple poles).

Route (b) is the reference; (a) and (c) exist as cross-checks and raise
:class:`RouteDisagreementError` when they drift, which signals a numerics
bug rather than a physical effect.

As eta -> 0 the detuning term concentrates into a resonance law: friction
only survives between degenerate oscillators and at finite temperature.
That limit is never represented as a number here; the API exposes the
resonant prefactor (the coefficient of the frequency delta) and the
finite-eta spectral density whose detuning integral converges to it.
"""

from dataclasses import dataclass

import numpy as np

from .model import validate_system
from .numerics import (
    DEFAULT_SPEC,
    _integrate_semi_infinite,
    zeroth_moment_closed_form,
)
from .response import coth_difference, eval_phi, response_kernel

__all__ = [
    "RouteDisagreementError",
    "ForceDecomposition",
    "SpectralDensitySamples",
    "geometry_factor",
    "reversible_force",
    "friction_force_time_domain",
    "friction_force_spectral",
    "phi_tilde",
    "resonant_prefactor",
    "friction_spectral_density",
    "density_grid_integral",
]

_ROUTE_TOL = 1e-8
_IMAG_TOL = 1e-12


class RouteDisagreementError(RuntimeError):
    """Two independent routes to the same quantity disagree beyond
    tolerance; this indicates a numerics bug, not physics."""


@dataclass(frozen=True)
class ForceDecomposition:
    """Friction force split into its sum-frequency (O1) and detuning (O2)
    Lorentzian contributions, plus the time-independent coefficient of the
    reversible force.  friction == omega1_term + omega2_term holds exactly
    to rounding by construction."""

    friction: np.ndarray
    omega1_term: np.ndarray
    omega2_term: np.ndarray
    reversible_coefficient: np.ndarray


@dataclass(frozen=True)
class SpectralDensitySamples:
    """Finite-eta friction density over a detuning grid; density[i] is the
    force-per-unit-frequency vector at detuning grid[i]."""

    grid: np.ndarray
    density: np.ndarray
    eta: float


def geometry_factor(coupling, velocity):
    """G = (grad psi) (v . grad psi); linear in v, zero when v is
    perpendicular to the coupling gradient."""
    v = np.asarray(velocity, dtype=float)
    return coupling.grad_psi * float(np.dot(v, coupling.grad_psi))


def _lorentzian_pair(eta, omega1, omega2):
    O1 = omega1 + omega2
    O2 = omega1 - omega2
    return (
        eta * O1 / (eta**2 + O1**2) ** 2,
        eta * O2 / (eta**2 + O2**2) ** 2,
    )


def _moment_pieces(sys):
    """The sum-frequency and detuning pieces of the damped first moment of
    phi, D (c1 + c2) lor(O1) and D (c2 - c1) lor(O2)."""
    k = response_kernel(sys)
    lor1, lor2 = _lorentzian_pair(sys.motion.eta, k.omega1, k.omega2)
    c_diff = -coth_difference(sys.thermal, k.omega1, k.omega2)  # c2 - c1
    return k, k.D * (k.c1 + k.c2) * lor1, k.D * c_diff * lor2


def _reversible_coefficient(k, eta):
    return k.D * (
        k.c1 * zeroth_moment_closed_form(k.omega1, k.omega2, eta)
        + k.c2 * zeroth_moment_closed_form(k.omega2, k.omega1, eta)
    )


def _first_moment_quadrature(sys, spec):
    """Damped first moment of phi by adaptive quadrature, with its error
    estimate."""
    k = response_kernel(sys)
    eta = sys.motion.eta

    def integrand(t):
        return t * np.exp(-eta * t) * eval_phi(k, t)

    return _integrate_semi_infinite(integrand, eta, k.omega1 + k.omega2, spec)


def reversible_force(sys, t):
    """Reversible force G t int_0^inf phi(u) e^{-eta u} du.

    Proportional to the displacement v t, hence even under the combined
    flip v -> -v, t -> -t; it does no net work over a completed damped
    protocol.
    """
    sys = validate_system(sys)
    k = response_kernel(sys)
    G = geometry_factor(sys.coupling, sys.motion.velocity)
    return G * (t * _reversible_coefficient(k, sys.motion.eta))


def friction_force_time_domain(sys, spec=None, check_tol=_ROUTE_TOL):
    """Friction force with its Lorentzian decomposition.

    The closed form (reference) and the direct quadrature of the damped
    first moment are both evaluated; if they disagree beyond ``check_tol``
    relative, :class:`RouteDisagreementError` is raised.

    Returns
    -------
    ForceDecomposition
    """
    sys = validate_system(sys)
    spec = spec or DEFAULT_SPEC
    k, piece1, piece2 = _moment_pieces(sys)
    G = geometry_factor(sys.coupling, sys.motion.velocity)
    moment_closed = piece1 + piece2
    moment_quad, moment_err = _first_moment_quadrature(sys, spec)
    scale = max(abs(moment_closed), abs(moment_quad))
    if abs(moment_quad - moment_closed) > check_tol * scale + 10.0 * moment_err:
        raise RouteDisagreementError(
            f"time-domain friction: quadrature moment {moment_quad!r} vs "
            f"closed form {moment_closed!r} "
            f"(rel {abs(moment_quad - moment_closed) / scale:.3e})"
        )
    term1, term2 = -G * piece1, -G * piece2
    return ForceDecomposition(
        friction=term1 + term2,
        omega1_term=term1,
        omega2_term=term2,
        reversible_coefficient=G * _reversible_coefficient(k, sys.motion.eta),
    )


def friction_routes(sys, spec=None):
    """(closed-form, quadrature) friction vectors plus the quadrature error
    estimate mapped to force units.  Exposed for the cross-check suites."""
    sys = validate_system(sys)
    _, piece1, piece2 = _moment_pieces(sys)
    G = geometry_factor(sys.coupling, sys.motion.velocity)
    moment_quad, moment_err = _first_moment_quadrature(sys, spec or DEFAULT_SPEC)
    return -G * (piece1 + piece2), -G * moment_quad, np.abs(G) * moment_err


def phi_tilde(sys, omega):
    """One-sided damped Fourier transform of the kernel,
    int_0^inf phi(t) e^{-i omega t} e^{-eta t} dt.

    Each cos*sin term of phi contributes a pair of simple poles, four in
    total, at omega = +-O1 and +-O2 shifted by i eta.
    """
    sys = validate_system(sys)
    k = response_kernel(sys)
    eta = sys.motion.eta
    amplitudes = (
        0.5 * k.D * (k.c1 + k.c2),
        0.5 * k.D * (-coth_difference(sys.thermal, k.omega1, k.omega2)),
    )
    frequencies = (k.omega1 + k.omega2, k.omega1 - k.omega2)
    total = 0.0 + 0.0j
    for amp, Om in zip(amplitudes, frequencies):
        total += (amp / 2j) * (
            1.0 / (eta + 1j * (omega - Om)) - 1.0 / (eta + 1j * (omega + Om))
        )
    return total


def friction_force_spectral(sys, check_tol=_ROUTE_TOL):
    """Friction force from the spectral route -i G dphitilde/dw at w = 0.

    The derivative is assembled analytically from the four pole terms; the
    result must come out real (imaginary residue below 1e-12 relative) and
    must match the time-domain closed form.
    """
    sys = validate_system(sys)
    k = response_kernel(sys)
    eta = sys.motion.eta
    G = geometry_factor(sys.coupling, sys.motion.velocity)
    amplitudes = (
        0.5 * k.D * (k.c1 + k.c2),
        0.5 * k.D * (-coth_difference(sys.thermal, k.omega1, k.omega2)),
    )
    frequencies = (k.omega1 + k.omega2, k.omega1 - k.omega2)
    # d/dw [1/(eta + i(w -+ Om))] = -i/(eta + i(w -+ Om))^2 at w = 0
    derivative = 0.0 + 0.0j
    for amp, Om in zip(amplitudes, frequencies):
        derivative += (amp / 2j) * (-1j) * (
            1.0 / (eta - 1j * Om) ** 2 - 1.0 / (eta + 1j * Om) ** 2
        )
    force_scalar = -1j * derivative
    scale = max(abs(force_scalar), k.D * (k.c1 + k.c2) * eta)
    if abs(force_scalar.imag) > _IMAG_TOL * scale:
        raise RouteDisagreementError(
            f"spectral friction came out complex: residue "
            f"{force_scalar.imag:.3e} on scale {scale:.3e}"
        )
    force = G * force_scalar.real
    _, piece1, piece2 = _moment_pieces(sys)
    reference = -G * (piece1 + piece2)
    diff = np.max(np.abs(force - reference))
    ref_scale = max(np.max(np.abs(reference)), np.max(np.abs(force)))
    if ref_scale > 0.0 and diff > check_tol * ref_scale:
        raise RouteDisagreementError(
            f"spectral friction deviates from the time-domain closed form "
            f"by {diff / ref_scale:.3e} relative"
        )
    return force


def resonant_prefactor(sys):
    """Coefficient of the frequency delta in the small-eta friction law:

        -pi beta hbar^2 G / (8 m1 m2 w1^2 sinh^2(beta hbar w1/2)).

    Evaluated on resonance, so only the first oscillator's frequency
    enters.  Zero at zero temperature.
    """
    sys = validate_system(sys)
    if sys.thermal.zero_temperature:
        return np.zeros(3)
    G = geometry_factor(sys.coupling, sys.motion.velocity)
    beta, hbar = sys.thermal.beta, sys.thermal.hbar
    w1 = sys.osc1.omega
    x = 0.5 * beta * hbar * w1
    u = np.exp(-2.0 * x)
    inv_sinh_sq = 4.0 * u / (1.0 - u) ** 2
    return (
        -np.pi * beta * hbar**2 / (8.0 * sys.osc1.mass * sys.osc2.mass * w1**2)
        * inv_sinh_sq
        * G
    )


def friction_spectral_density(sys, grid):
    """Finite-eta friction density over a detuning grid.

    For each detuning O2 on the grid the second oscillator is tuned to
    w2 = w1 - O2 and the detuning term of the closed-form friction,
    -G D(w2) (c2 - c1) eta O2 / (eta^2 + O2^2)^2, is returned as a force
    per unit frequency.  The grid integral of the density converges to
    :func:`resonant_prefactor` as eta -> 0 with first-order rate.
    """
    sys = validate_system(sys)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2 or np.any(np.diff(grid) <= 0.0):
        raise ValueError("grid not ascending")
    w1 = sys.osc1.omega
    w2 = w1 - grid
    if np.any(w2 <= 0.0):
        raise ValueError(
            "detuning grid reaches omega2 <= 0; keep it inside (-inf, omega1)"
        )
    eta = sys.motion.eta
    G = geometry_factor(sys.coupling, sys.motion.velocity)
    hbar = sys.thermal.hbar
    D = hbar / (2.0 * sys.osc1.mass * sys.osc2.mass * w1 * w2)
    if sys.thermal.zero_temperature:
        c_diff = np.zeros_like(grid)
    else:
        half = 0.5 * sys.thermal.beta * hbar
        x1, x2 = half * w1, half * w2
        # c2 - c1 through the same expm1 form as response.coth_difference
        num = 2.0 * np.exp(-2.0 * x2) * np.expm1(-2.0 * (x1 - x2))
        c_diff = -num / (np.expm1(-2.0 * x1) * np.expm1(-2.0 * x2))
    profile = -D * c_diff * eta * grid / (eta**2 + grid**2) ** 2
    return SpectralDensitySamples(
        grid=grid, density=profile[:, None] * G[None, :], eta=eta
    )


def density_grid_integral(samples):
    """Trapezoidal integral of the density over its detuning grid; a
    (3,) force vector comparable to :func:`resonant_prefactor`."""
    return np.trapezoid(samples.density, samples.grid, axis=0)
