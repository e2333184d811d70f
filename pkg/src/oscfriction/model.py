"""Physical configuration of the two-oscillator friction model.

Every other module consumes the immutable containers defined here.  Units
are symbolic: the library never enforces dimensions at runtime, it only
documents them and provides :func:`scale_units` so that dimensional
covariance can be asserted in tests.

Dimension conventions (L = length, T = time, M = mass):

==================  =======================
field               dimension
==================  =======================
Oscillator.mass     M
Oscillator.omega    1/T
ThermalState.beta   1/energy = T^2/(M L^2)
ThermalState.hbar   energy*time = M L^2/T
CouplingGeometry    psi0: energy/L^2, grad_psi: energy/L^3
Motion.velocity     L/T
Motion.eta          1/T
==================  =======================

Zero temperature is encoded by the sentinel ``beta = math.inf``; every
formula that consumes ``beta`` defines its infinite-beta limit explicitly.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DEFAULT_ABS_TOL",
    "DEFAULT_REL_TOL",
    "ValidationError",
    "Oscillator",
    "ThermalState",
    "CouplingGeometry",
    "Motion",
    "OscillatorSystem",
    "validate_system",
    "scale_units",
    "canonical_system",
]

# Default numeric tolerances used throughout the test suite.  Overridable
# per call wherever they matter.
DEFAULT_ABS_TOL = 1e-12
DEFAULT_REL_TOL = 1e-9


class ValidationError(ValueError):
    """A field of the physical configuration violates its invariant."""


def _vec3(value):
    """Coerce to a read-only float64 array of shape (3,)."""
    arr = np.array(value, dtype=float).reshape(3)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Oscillator:
    """One harmonic degree of freedom: mass and eigenfrequency."""

    mass: float
    omega: float


@dataclass(frozen=True, eq=False)
class ThermalState:
    """Inverse temperature (math.inf encodes T = 0) and hbar."""

    beta: float
    hbar: float

    @property
    def zero_temperature(self):
        return math.isinf(self.beta)


@dataclass(frozen=True, eq=False)
class CouplingGeometry:
    """Coupling strength psi and its gradient, both evaluated at the
    initial separation.  Only these two numbers enter the model; no
    potential-shape information is kept."""

    psi0: float
    grad_psi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "grad_psi", _vec3(self.grad_psi))


@dataclass(frozen=True, eq=False)
class Motion:
    """Constant relative velocity and the exponential convergence rate
    eta that limits the perturbation to a finite effective duration."""

    velocity: np.ndarray
    eta: float

    def __post_init__(self):
        object.__setattr__(self, "velocity", _vec3(self.velocity))


@dataclass(frozen=True, eq=False)
class OscillatorSystem:
    """Full physical configuration: two oscillators, thermal state,
    coupling geometry and relative motion."""

    osc1: Oscillator
    osc2: Oscillator
    thermal: ThermalState
    coupling: CouplingGeometry
    motion: Motion


def _positive_finite(value, name):
    if not (value > 0.0) or math.isinf(value) or math.isnan(value):
        raise ValidationError(f"{name} must be positive and finite (got {value!r})")


def _finite(value, name):
    if not np.all(np.isfinite(value)):
        raise ValidationError(f"{name} must be finite (got {value!r})")


def validate_system(raw):
    """Check every invariant of an :class:`OscillatorSystem`.

    Returns the system unchanged if all invariants hold, otherwise raises
    :class:`ValidationError` naming the first offending field.
    """
    _positive_finite(raw.osc1.mass, "osc1.mass")
    _positive_finite(raw.osc1.omega, "osc1.omega")
    _positive_finite(raw.osc2.mass, "osc2.mass")
    _positive_finite(raw.osc2.omega, "osc2.omega")
    beta = raw.thermal.beta
    if math.isnan(beta) or not beta > 0.0:
        raise ValidationError(
            f"thermal.beta must be positive (math.inf allowed, got {beta!r})"
        )
    _positive_finite(raw.thermal.hbar, "thermal.hbar")
    _finite(raw.coupling.psi0, "coupling.psi0")
    _finite(raw.coupling.grad_psi, "coupling.grad_psi")
    _finite(raw.motion.velocity, "motion.velocity")
    _positive_finite(raw.motion.eta, "motion.eta")
    return raw


def scale_units(sys, length_factor, time_factor, mass_factor):
    """Rescale every field according to its dimensions.

    Parameters
    ----------
    sys : OscillatorSystem
    length_factor, time_factor, mass_factor : float
        Positive scale factors for the three base dimensions.

    Returns
    -------
    OscillatorSystem
        The rescaled system.  Dimensionless combinations such as
        beta*hbar*omega and eta/omega are preserved to rounding.
    """
    L, T, M = float(length_factor), float(time_factor), float(mass_factor)
    for name, val in (("length_factor", L), ("time_factor", T), ("mass_factor", M)):
        if not (val > 0.0) or not math.isfinite(val):
            raise ValueError(f"{name} must be positive and finite (got {val!r})")
    energy = M * L * L / (T * T)
    beta = sys.thermal.beta
    new_beta = beta if math.isinf(beta) else beta / energy
    return OscillatorSystem(
        osc1=Oscillator(sys.osc1.mass * M, sys.osc1.omega / T),
        osc2=Oscillator(sys.osc2.mass * M, sys.osc2.omega / T),
        thermal=ThermalState(new_beta, sys.thermal.hbar * energy * T),
        coupling=CouplingGeometry(
            sys.coupling.psi0 * energy / L**2,
            sys.coupling.grad_psi * (energy / L**3),
        ),
        motion=Motion(sys.motion.velocity * (L / T), sys.motion.eta / T),
    )


def canonical_system(
    m1=1.0,
    m2=1.0,
    omega1=1.0,
    omega2=1.1,
    hbar=1.0,
    beta=2.0,
    eta=0.01,
    grad_psi=(0.0, 0.0, 1.0),
    psi0=0.0,
    velocity=(0.0, 0.0, 0.1),
):
    """The default configuration used by the command line tool, the demos
    and the cross-check suite.  Any field may be overridden by keyword."""
    return validate_system(
        OscillatorSystem(
            osc1=Oscillator(m1, omega1),
            osc2=Oscillator(m2, omega2),
            thermal=ThermalState(beta, hbar),
            coupling=CouplingGeometry(psi0, grad_psi),
            motion=Motion(velocity, eta),
        )
    )
