import math

import numpy as np
import pytest

from oscfriction.model import canonical_system, scale_units
from oscfriction.forces import (
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
from oscfriction.numerics import (
    QuadratureSpec,
    integrate_semi_infinite_damped,
)
from oscfriction.response import eval_phi, response_kernel

# -pi * 2 * 0.1 / (8 sinh(1)^2) for the canonical configuration
PREFACTOR_Z = -0.05686766987094461

TIGHT = QuadratureSpec(abs_tol=1e-6, rel_tol=1e-7, max_subdivisions=10)


def test_geometry_factor_orthogonal_velocity():
    sys = canonical_system(velocity=(0.3, 0.0, 0.0), grad_psi=(0.0, 0.0, 1.0))
    assert np.array_equal(
        geometry_factor(sys.coupling, sys.motion.velocity), np.zeros(3)
    )


def test_geometry_factor_direct_value_and_linearity():
    sys = canonical_system(grad_psi=(0.0, 0.0, 2.0), velocity=(0.0, 0.0, 0.3))
    G = geometry_factor(sys.coupling, sys.motion.velocity)
    assert np.allclose(G, [0.0, 0.0, 4.0 * 0.3], rtol=1e-15)
    flipped = geometry_factor(sys.coupling, -sys.motion.velocity)
    assert np.array_equal(flipped, -G)


def test_reversible_force_zero_at_origin():
    assert np.array_equal(reversible_force(canonical_system(), 0.0), np.zeros(3))


def test_reversible_force_displacement_parity():
    sys = canonical_system()
    flipped = canonical_system(velocity=tuple(-sys.motion.velocity))
    t = 1.7
    assert np.allclose(
        reversible_force(sys, t), reversible_force(flipped, -t), rtol=1e-15
    )


def test_reversible_force_against_quadrature():
    sys = canonical_system()
    k = response_kernel(sys)
    eta = sys.motion.eta

    def integrand(t):
        return np.exp(-eta * t) * eval_phi(k, t)

    moment = integrate_semi_infinite_damped(
        integrand, eta, k.omega1 + k.omega2, TIGHT
    )
    G = geometry_factor(sys.coupling, sys.motion.velocity)
    t = 1.0
    assert np.allclose(reversible_force(sys, t), G * t * moment, rtol=1e-8)


def test_friction_decomposition_sum_exact():
    decomp = friction_force_time_domain(canonical_system())
    assert np.array_equal(decomp.friction, decomp.omega1_term + decomp.omega2_term)


def test_friction_zero_velocity():
    sys = canonical_system(velocity=(0.0, 0.0, 0.0))
    decomp = friction_force_time_domain(sys)
    assert np.array_equal(decomp.friction, np.zeros(3))
    assert np.array_equal(friction_force_spectral(sys), np.zeros(3))


def test_friction_zero_temperature_detuning_term_vanishes():
    decomp = friction_force_time_domain(canonical_system(beta=math.inf))
    assert np.max(np.abs(decomp.omega2_term)) == 0.0
    assert np.array_equal(decomp.friction, decomp.omega1_term)


def test_friction_routes_agree_canonical():
    closed, quad, _ = friction_routes(canonical_system(), TIGHT)
    scale = np.max(np.abs(closed))
    assert np.max(np.abs(closed - quad)) / scale <= 1e-8


def test_spectral_route_matches_closed_form_tightly():
    sys = canonical_system()
    closed = friction_force_time_domain(sys).friction
    spectral = friction_force_spectral(sys)
    assert np.max(np.abs(spectral - closed)) / np.max(np.abs(closed)) <= 1e-10


def test_spectral_derivative_matches_finite_difference():
    sys = canonical_system()
    eta = sys.motion.eta
    h = eta * 1e-3
    fd = (phi_tilde(sys, h) - phi_tilde(sys, -h)) / (2.0 * h)
    G = geometry_factor(sys.coupling, sys.motion.velocity)
    force_fd = np.real(-1j * fd) * G
    spectral = friction_force_spectral(sys)
    assert np.max(np.abs(force_fd - spectral)) / np.max(np.abs(spectral)) <= 1e-6


def test_resonant_prefactor_reference_value():
    pref = resonant_prefactor(canonical_system())
    assert pref[0] == 0.0 and pref[1] == 0.0
    assert pref[2] == pytest.approx(PREFACTOR_Z, rel=1e-12)


def test_resonant_prefactor_zero_temperature():
    assert np.array_equal(
        resonant_prefactor(canonical_system(beta=math.inf)), np.zeros(3)
    )


def test_resonant_prefactor_orthogonal_velocity():
    sys = canonical_system(velocity=(0.5, 0.0, 0.0))
    assert np.array_equal(resonant_prefactor(sys), np.zeros(3))


def test_resonant_prefactor_large_beta_stable():
    pref = resonant_prefactor(canonical_system(beta=1e4))
    assert np.all(np.isfinite(pref))


def test_density_grid_validation():
    sys = canonical_system()
    with pytest.raises(ValueError, match="ascending"):
        friction_spectral_density(sys, [0.2, 0.1, 0.3])
    with pytest.raises(ValueError, match="omega2"):
        friction_spectral_density(sys, np.linspace(-0.5, 1.5, 11))


def test_density_zero_on_resonance_and_at_zero_temperature():
    sys = canonical_system()
    grid = np.linspace(-0.4, 0.4, 33)  # includes 0
    samples = friction_spectral_density(sys, grid)
    assert np.array_equal(samples.density[16], np.zeros(3))
    cold = friction_spectral_density(canonical_system(beta=math.inf), grid)
    assert np.array_equal(cold.density, np.zeros_like(cold.density))


def _graded_grid(span, points, sharpness=6.0):
    u = np.linspace(-1.0, 1.0, points)
    return span * np.sinh(sharpness * u) / math.sinh(sharpness)


def test_density_integral_approaches_prefactor():
    sys = canonical_system(omega2=1.0, eta=0.01)
    samples = friction_spectral_density(sys, _graded_grid(0.55, 2001))
    integral = density_grid_integral(samples)
    pref = resonant_prefactor(sys)
    dev = np.max(np.abs(integral - pref)) / np.max(np.abs(pref))
    assert dev <= 0.02


def test_friction_odd_in_velocity_exact():
    sys = canonical_system()
    flipped = canonical_system(velocity=tuple(-sys.motion.velocity))
    assert np.array_equal(
        friction_force_time_domain(flipped).friction,
        -friction_force_time_domain(sys).friction,
    )
    assert np.array_equal(
        friction_force_spectral(flipped), -friction_force_spectral(sys)
    )
    assert np.array_equal(resonant_prefactor(flipped), -resonant_prefactor(sys))


def test_friction_mass_scaling_exact():
    base = friction_force_time_domain(canonical_system()).friction
    heavy = friction_force_time_domain(canonical_system(m1=2.0, m2=2.0)).friction
    assert np.array_equal(4.0 * heavy, base)


def test_friction_oscillator_exchange_invariant():
    sys = canonical_system(m1=1.0, m2=2.0, omega1=1.0, omega2=1.1)
    swapped = canonical_system(m1=2.0, m2=1.0, omega1=1.1, omega2=1.0)
    f1 = friction_force_time_domain(sys).friction
    f2 = friction_force_time_domain(swapped).friction
    assert np.allclose(f1, f2, rtol=1e-12)


def test_friction_dimensional_covariance():
    sys = canonical_system()
    L, T, M = 1.5, 0.7, 2.3
    scaled = scale_units(sys, L, T, M)
    force_unit = M * L / T**2
    assert np.allclose(
        friction_force_time_domain(scaled).friction,
        friction_force_time_domain(sys).friction * force_unit,
        rtol=1e-12,
    )
