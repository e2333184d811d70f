"""Perturbation protocols and the three routes to the dissipated energy.

A protocol is a causal classical time dependence q(t) (q = 0 for t < 0)
with its derivative.  The damped ramp q(t) = t e^{-eta t} models motion
that starts at full velocity and dies out; because it terminates, the
total energy change over the whole protocol is unambiguous and the
reversible force drops out (int qdot q dt = 0).

Routes to the dissipated energy:

ClosedForm     (1 / 4 eta) v . F_f with the finite-eta friction force.
General        the full linear-response work integral
               int qdot(t) [ int phi_AA(t - t') q(t') dt' ] dt,
               valid for arbitrary causal protocols.
LeadingOrder   [ -int phi_AA(u) u e^{-eta u} du ] [ int qdot^2 dt ],
               the first-moment reduction of the general form.

For the damped ramp all three are the same mathematical object: the
protocol's own decay supplies exactly the e^{-eta u} regulator of the
friction moment, so the general route reproduces the closed form
identically (see the cross-check suite), and the leading-order route is
the same product of factors evaluated by quadrature.
"""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .model import validate_system
from .forces import friction_routes, geometry_factor
from .numerics import (
    DEFAULT_SPEC,
    _integrate_panels,
    _integrate_semi_infinite,
    _nested_response,
)
from .response import eval_phi, response_kernel

__all__ = [
    "PerturbationProtocol",
    "DissipationResult",
    "damped_ramp",
    "linear_ramp",
    "tabulated",
    "phi_AA_from_motion",
    "dissipation_closed_form",
    "dissipation_general",
    "dissipation_leading_order",
    "reversible_null_check",
]

_ETA_HORIZON = 40.0


@dataclass(frozen=True)
class PerturbationProtocol:
    """Causal time dependence q(t) and its derivative.

    ``q`` and ``qdot`` are vectorized callables vanishing for t < 0;
    ``support_end`` is the end of the (effective) support or None for
    protocols that only decay exponentially; ``terminating`` records
    whether the perturbation actually dies out, which is what makes the
    total dissipated energy physically meaningful.
    """

    kind: str
    q: callable
    qdot: callable
    eta: float = None
    support_end: float = None
    terminating: bool = True


def _causal(expr):
    """Wrap a vectorized expression so it vanishes for t < 0."""

    def wrapped(t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.zeros_like(t)
        mask = t >= 0.0
        if np.any(mask):
            out[mask] = expr(t[mask])
        return float(out[0]) if scalar else out

    return wrapped


def damped_ramp(eta):
    """The protocol q(t) = t e^{-eta t}, qdot(t) = (1 - eta t) e^{-eta t}.

    Starts at maximum velocity (qdot(0) = 1), crosses zero velocity at
    t = 1/eta and decays; int qdot q dt vanishes exactly, so the
    reversible force does no net work over it.
    """
    if not eta > 0.0:
        raise ValueError(f"eta must be positive (got {eta!r})")
    return PerturbationProtocol(
        kind="damped-ramp",
        q=_causal(lambda t: t * np.exp(-eta * t)),
        qdot=_causal(lambda t: (1.0 - eta * t) * np.exp(-eta * t)),
        eta=eta,
    )


def linear_ramp():
    """The undamped ramp q(t) = t.  Never terminates; accepted for
    testing, and flagged as non-terminating in every dissipation result
    computed from it."""
    return PerturbationProtocol(
        kind="linear-ramp",
        q=_causal(lambda t: t),
        qdot=_causal(lambda t: np.ones_like(t)),
        terminating=False,
    )


def tabulated(times, values):
    """Protocol interpolated from samples.

    Monotone cubic (PCHIP) interpolation for q; qdot from centered
    differences on the grid (one-sided at the endpoints), interpolated the
    same way.  q vanishes outside [times[0], times[-1]].
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.ndim != 1 or len(times) < 3 or np.any(np.diff(times) <= 0.0):
        raise ValueError("need at least three strictly increasing sample times")
    if times[0] < 0.0:
        raise ValueError("a causal protocol cannot have samples at t < 0")
    q_interp = PchipInterpolator(times, values, extrapolate=False)
    qdot_interp = PchipInterpolator(
        times, np.gradient(values, times), extrapolate=False
    )

    def window(interp):
        def evaluate(t):
            out = interp(t)
            return np.where(np.isnan(out), 0.0, out)

        return evaluate

    return PerturbationProtocol(
        kind="tabulated",
        q=_causal(window(q_interp)),
        qdot=_causal(window(qdot_interp)),
        support_end=float(times[-1]),
    )


@dataclass(frozen=True)
class DissipationResult:
    """Dissipated energy from one route, with the route's own error
    estimate.  ``non_terminating`` marks results computed from protocols
    that never die out, for which the number is a windowed quantity rather
    than a physical total."""

    energy: float
    route: str
    error_estimate: float
    non_terminating: bool = False


def phi_AA_from_motion(sys):
    """Scalar autocorrelation kernel of the moving system's perturbation:
    t -> (v . G) phi(t) = (v . grad psi)^2 phi(t).

    Vectorized; feed it to the general or leading-order dissipation
    routes, or swap in a brute-force kernel for verification.
    """
    sys = validate_system(sys)
    k = response_kernel(sys)
    weight = float(
        np.dot(
            sys.motion.velocity,
            geometry_factor(sys.coupling, sys.motion.velocity),
        )
    )

    def kernel(t):
        return weight * eval_phi(k, t)

    kernel.omega_scale = k.omega1 + k.omega2
    return kernel


def dissipation_closed_form(sys, spec=None):
    """(1 / 4 eta) v . F_f with the finite-eta friction force.

    The error estimate propagates the disagreement between the friction
    force's closed-form and quadrature routes.
    """
    sys = validate_system(sys)
    closed, quad, quad_err = friction_routes(sys, spec)
    v = sys.motion.velocity
    eta = sys.motion.eta
    energy = float(np.dot(v, closed)) / (4.0 * eta)
    err = (abs(float(np.dot(v, closed - quad))) + float(np.dot(np.abs(v), quad_err))) / (
        4.0 * eta
    )
    return DissipationResult(energy=energy, route="ClosedForm", error_estimate=err)


def dissipation_general(protocol, phi_AA, eta, spec=None):
    """Full work integral int qdot(t) [ int phi_AA(t - t') q(t') dt' ] dt.

    Valid for arbitrary causal q(t), not only the damped ramp; this is the
    general result the other two routes specialize.
    """
    spec = spec or DEFAULT_SPEC
    omega_scale = _kernel_omega_scale(phi_AA)
    value, err = _nested_response(protocol, phi_AA, eta, omega_scale, spec)
    return DissipationResult(
        energy=value,
        route="General",
        error_estimate=err,
        non_terminating=not protocol.terminating,
    )


def _kernel_omega_scale(phi_AA):
    """Fastest frequency scale of the kernel, probed from its attribute if
    present and from a short sample otherwise."""
    scale = getattr(phi_AA, "omega_scale", None)
    if scale is not None:
        return scale
    # crude spectral probe: dominant slope of the kernel near the origin
    ts = np.linspace(1e-3, 2.0 * np.pi, 512)
    vals = np.asarray(phi_AA(ts), dtype=float)
    peak = float(np.max(np.abs(vals)))
    if peak == 0.0:
        return 1.0
    slope = float(np.max(np.abs(np.diff(vals)) / np.diff(ts)))
    return max(slope / peak, 1.0)


def dissipation_leading_order(protocol, phi_AA, eta, spec=None):
    """[-int phi_AA(u) u e^{-eta u} du] * [int qdot(t)^2 dt], each factor
    by quadrature.  The first factor equals v . F_f, so the product is the
    same mathematical object as the closed form."""
    spec = spec or DEFAULT_SPEC
    omega_scale = _kernel_omega_scale(phi_AA)

    def moment_integrand(t):
        return t * np.exp(-eta * t) * np.asarray(phi_AA(t), dtype=float)

    moment, moment_err = _integrate_semi_infinite(
        moment_integrand, eta, omega_scale, spec
    )

    def speed_squared(t):
        return np.asarray(protocol.qdot(t), dtype=float) ** 2

    ramp, ramp_err = _integrate_semi_infinite(speed_squared, eta, eta, spec)
    energy = -moment * ramp
    err = abs(moment_err * ramp) + abs(ramp_err * moment)
    return DissipationResult(
        energy=energy,
        route="LeadingOrder",
        error_estimate=err,
        non_terminating=not protocol.terminating,
    )


def reversible_null_check(protocol, spec=None, t_max=None):
    """int qdot(t) q(t) dt over the protocol, by quadrature.

    Vanishes (to the quadrature tolerance) for any protocol that starts
    and ends at q = 0, which is why the reversible force contributes
    nothing to the dissipated energy.  For non-terminating protocols a
    finite window [0, t_max] must be supplied and the integral equals
    q(t_max)^2 / 2.
    """
    spec = spec or DEFAULT_SPEC
    if t_max is None:
        if protocol.support_end is not None:
            t_max = protocol.support_end
        elif protocol.eta is not None:
            t_max = _ETA_HORIZON / protocol.eta
        else:
            raise ValueError(
                "protocol has no finite support or damping rate; pass t_max"
            )

    def integrand(t):
        return np.asarray(protocol.qdot(t), dtype=float) * np.asarray(
            protocol.q(t), dtype=float
        )

    # smooth non-oscillatory integrand: panels set by the window itself
    width = t_max / 64.0
    value, _, _ = _integrate_panels(integrand, 0.0, t_max, width, spec)
    return value
