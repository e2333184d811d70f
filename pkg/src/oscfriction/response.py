"""Closed-form thermal response kernel of the coupled oscillator pair.

The kernel is

    phi(t) = D * [c1 cos(w1 t) sin(w2 t) + c2 cos(w2 t) sin(w1 t)],

with D = hbar / (2 m1 m2 w1 w2) and c_i = coth(beta hbar w_i / 2), the
thermal occupation factor 2<n_i> + 1.  The kernel caches D, c1, c2 so that
the quadrature engines can evaluate phi millions of times cheaply.

The brute-force counterpart of :func:`eval_phi` lives in
:mod:`oscfriction.oracle`; the two must agree and the test suite holds
them to that.
"""

import math
from dataclasses import dataclass

import numpy as np

from .model import validate_system

__all__ = [
    "ResponseKernel",
    "coth_factor",
    "coth_difference",
    "response_kernel",
    "eval_phi",
]

# Below this half-argument the Laurent series of coth is both faster and
# free of the 1/expm1 magnification of the last bit.
_COTH_SERIES_CUTOFF = 1e-4
# coth(x) - 1 underflows past here.
_COTH_SATURATION = 350.0


def coth_factor(thermal, omega):
    """Thermal occupation factor coth(beta hbar omega / 2).

    Exactly 1.0 at zero temperature (infinite beta).  Stable over the whole
    argument range: a Laurent series is used for beta hbar omega << 1 and a
    decaying-exponential form for large arguments, so neither overflow nor
    cancellation occurs.

    Parameters
    ----------
    thermal : ThermalState
    omega : float
        Angular frequency, must be positive.
    """
    if not omega > 0.0:
        raise ValueError(f"omega must be positive (got {omega!r})")
    if thermal.zero_temperature:
        return 1.0
    x = 0.5 * thermal.beta * thermal.hbar * omega
    if x < _COTH_SERIES_CUTOFF:
        return 1.0 / x + x / 3.0 - x**3 / 45.0
    if x > _COTH_SATURATION:
        return 1.0
    return 1.0 + 2.0 / math.expm1(2.0 * x)


def coth_difference(thermal, omega1, omega2):
    """coth(beta hbar w1/2) - coth(beta hbar w2/2) without cancellation.

    Uses the sinh-ratio identity

        coth(x1) - coth(x2) = -sinh(x1 - x2) / (sinh(x1) sinh(x2)),

    rearranged into expm1 calls so it stays accurate for nearly degenerate
    frequencies (where naive subtraction loses every digit) and never
    overflows for large beta hbar omega.  Returns exactly 0.0 when the
    frequencies coincide or at zero temperature.
    """
    if not omega1 > 0.0 or not omega2 > 0.0:
        raise ValueError("both frequencies must be positive "
                         f"(got {omega1!r}, {omega2!r})")
    if thermal.zero_temperature:
        return 0.0
    half = 0.5 * thermal.beta * thermal.hbar
    x1, x2 = half * omega1, half * omega2
    # 2 (e^{-2x1} - e^{-2x2}) / ((1 - e^{-2x1})(1 - e^{-2x2}))
    num = 2.0 * math.exp(-2.0 * x2) * math.expm1(-2.0 * (x1 - x2))
    den = math.expm1(-2.0 * x1) * math.expm1(-2.0 * x2)
    return num / den


@dataclass(frozen=True)
class ResponseKernel:
    """Precomputed parameters of the closed-form kernel phi(t)."""

    D: float
    omega1: float
    omega2: float
    c1: float
    c2: float


def response_kernel(sys):
    """Build the closed-form kernel for a validated system.

    D = hbar / (2 m1 m2 w1 w2); c_i from :func:`coth_factor`.
    """
    sys = validate_system(sys)
    w1, w2 = sys.osc1.omega, sys.osc2.omega
    D = sys.thermal.hbar / (2.0 * sys.osc1.mass * sys.osc2.mass * w1 * w2)
    return ResponseKernel(
        D=D,
        omega1=w1,
        omega2=w2,
        c1=coth_factor(sys.thermal, w1),
        c2=coth_factor(sys.thermal, w2),
    )


def eval_phi(kernel, t):
    """Evaluate phi(t) = D [c1 cos(w1 t) sin(w2 t) + c2 cos(w2 t) sin(w1 t)].

    ``t`` may be a float or an ndarray; the result has the same shape.
    phi is odd in t, bounded by D (c1 + c2), and symmetric under exchange
    of the two oscillators.
    """
    w1t = kernel.omega1 * np.asarray(t, dtype=float)
    w2t = kernel.omega2 * np.asarray(t, dtype=float)
    out = kernel.D * (
        kernel.c1 * np.cos(w1t) * np.sin(w2t)
        + kernel.c2 * np.cos(w2t) * np.sin(w1t)
    )
    if np.ndim(t) == 0:
        return float(out)
    return out
