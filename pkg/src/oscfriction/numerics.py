"""Quadrature engines shared by the force and dissipation routes.

Two kinds of integrals occur throughout the model:

* semi-infinite damped trigonometric integrals such as
  ``int_0^inf t e^{-eta t} cos(w1 t) sin(w2 t) dt`` and their closed
  forms, and
* the nested response integral
  ``int qdot(t) [ int_0^t phi(u) q(t - u) du ] dt``.

The semi-infinite engine uses oscillation-aware panelization (panel width
at most pi / (4 omega_scale), i.e. at least eight panels per oscillation
period) with an embedded Gauss 7/15 error estimate and adaptive panel
bisection, truncating at T = 40 / eta and extending the truncation until
the analytic tail bound ``M (T/eta + 1/eta^2) e^{-eta T}`` drops below the
absolute tolerance.  Panel sums are accumulated with exact summation in a
fixed order, so results are deterministic.

The nested integral is evaluated on a uniform grid fine enough to resolve
the fastest oscillation, with sixth-order end-corrected (Gregory) weights;
the inner convolution is carried out by FFT and the handful of short
inner integrals near t = 0 by direct Gauss panels.  A grid-halving
comparison provides the error estimate.  All integrand evaluations must
accept ndarray arguments.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as _fft

__all__ = [
    "ConvergenceError",
    "QuadratureSpec",
    "DEFAULT_SPEC",
    "integrate_semi_infinite_damped",
    "first_moment_closed_form",
    "zeroth_moment_closed_form",
    "lorentzian_squared_norm",
    "nested_response_integral",
]


class ConvergenceError(RuntimeError):
    """A quadrature failed to reach the requested tolerance; the message
    reports the achieved error estimate."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and refinement budget for the adaptive engines."""

    abs_tol: float = 1e-8
    rel_tol: float = 1e-7
    max_subdivisions: int = 10

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol"):
            val = getattr(self, name)
            if not 0.0 < val < 1.0:
                raise ValueError(f"{name} must lie in (0, 1) (got {val!r})")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")


DEFAULT_SPEC = QuadratureSpec()

_NODES15, _WEIGHTS15 = np.polynomial.legendre.leggauss(15)
_NODES7, _WEIGHTS7 = np.polynomial.legendre.leggauss(7)
_NODES64, _WEIGHTS64 = np.polynomial.legendre.leggauss(64)

_EPS = float(np.finfo(float).eps)
# Empirically the Gauss 7/15 discrepancy of a fully converged panel sits a
# few hundred ulp above the panel magnitude; below this floor the estimate
# measures roundoff, not truncation, and refinement cannot help.
_FLOOR_FACTOR = 512.0 * _EPS

# truncation horizon in units of 1/eta; e^{-40} ~ 4e-18
_ETA_HORIZON = 40.0
_ETA_EXTEND = 10.0
_MAX_EXTENSIONS = 8


def _eval_panels(f, lo, hi):
    """Gauss-15 value, |G15 - G7| error estimate and absolute magnitude of
    each panel."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    t15 = (mid[:, None] + half[:, None] * _NODES15).ravel()
    f15 = np.asarray(f(t15), dtype=float).reshape(len(lo), 15)
    v15 = half * (f15 @ _WEIGHTS15)
    mag = half * (np.abs(f15) @ _WEIGHTS15)
    t7 = (mid[:, None] + half[:, None] * _NODES7).ravel()
    f7 = np.asarray(f(t7), dtype=float).reshape(len(lo), 7)
    v7 = half * (f7 @ _WEIGHTS7)
    return v15, np.abs(v15 - v7), mag


def _integrate_panels(f, a, b, panel_width, spec):
    """Adaptive panel integration of f over [a, b].

    Returns (value, error_estimate, magnitude).  Panels whose error
    estimate sits at the roundoff floor are not refined further; the
    engine raises :class:`ConvergenceError` only when refinable panels
    remain but the budget is exhausted.
    """
    n = max(int(math.ceil((b - a) / panel_width)), 1)
    edges = np.linspace(a, b, n + 1)
    lo, hi = edges[:-1], edges[1:]
    depth = np.zeros(n, dtype=int)
    val, err, mag = _eval_panels(f, lo, hi)

    while True:
        value = math.fsum(val)
        err_total = math.fsum(err)
        mag_total = math.fsum(mag)
        floor = _FLOOR_FACTOR * mag_total
        tol = max(spec.abs_tol, spec.rel_tol * abs(value), floor)
        if err_total <= tol:
            return value, err_total, mag_total
        budget = tol * (hi - lo) / (b - a)
        sel = (err > np.maximum(budget, _FLOOR_FACTOR * mag)) & (
            depth < spec.max_subdivisions
        )
        if not np.any(sel):
            raise ConvergenceError(
                f"panel quadrature stalled: error estimate {err_total:.3e} "
                f"exceeds tolerance {tol:.3e} and no panel is refinable"
            )
        mid_sel = 0.5 * (lo[sel] + hi[sel])
        new_lo = np.concatenate([lo[~sel], lo[sel], mid_sel])
        new_hi = np.concatenate([hi[~sel], mid_sel, hi[sel]])
        new_depth = np.concatenate([depth[~sel], depth[sel] + 1, depth[sel] + 1])
        keep_val, keep_err, keep_mag = val[~sel], err[~sel], mag[~sel]
        ref_val, ref_err, ref_mag = _eval_panels(
            f, new_lo[len(keep_val):], new_hi[len(keep_val):]
        )
        order = np.argsort(new_lo, kind="stable")
        lo, hi, depth = new_lo[order], new_hi[order], new_depth[order]
        val = np.concatenate([keep_val, ref_val])[order]
        err = np.concatenate([keep_err, ref_err])[order]
        mag = np.concatenate([keep_mag, ref_mag])[order]


def _tail_amplitude(f, T, eta):
    """Estimate M in the envelope |f| <= M t e^{-eta t} from samples just
    inside the truncation point."""
    ts = T * (1.0 - np.linspace(0.0, 0.02, 9))
    fv = np.abs(np.asarray(f(ts), dtype=float))
    env = ts * np.exp(-eta * ts)
    return 2.0 * float(np.max(fv / env))


def _integrate_semi_infinite(f, eta, omega_scale, spec):
    """Implementation of :func:`integrate_semi_infinite_damped` returning
    (value, error_estimate)."""
    if not eta > 0.0:
        raise ValueError(f"eta must be positive (got {eta!r})")
    if not omega_scale > 0.0:
        raise ValueError(f"omega_scale must be positive (got {omega_scale!r})")
    width = math.pi / (4.0 * omega_scale)
    T = _ETA_HORIZON / eta
    value, err, mag = _integrate_panels(f, 0.0, T, width, spec)
    tail = math.inf
    for _ in range(_MAX_EXTENSIONS):
        M = _tail_amplitude(f, T, eta)
        tail = M * (T / eta + 1.0 / eta**2) * math.exp(-eta * T)
        if tail <= spec.abs_tol:
            break
        T_next = T + _ETA_EXTEND / eta
        v2, e2, m2 = _integrate_panels(f, T, T_next, width, spec)
        value += v2
        err += e2
        mag += m2
        T = T_next
    else:
        raise ConvergenceError(
            f"tail bound {tail:.3e} still exceeds abs_tol {spec.abs_tol:.1e} "
            f"after extending the truncation to T = {T:.3e}"
        )
    return value, err + tail


def integrate_semi_infinite_damped(f, eta, omega_scale, spec=None):
    """Integrate f over [0, inf) for integrands damped like e^{-eta t}.

    Parameters
    ----------
    f : callable
        Vectorized integrand; must accept an ndarray of times t >= 0 and
        be bounded by a polynomial times e^{-eta t}.
    eta : float
        Damping rate; sets the truncation horizon 40 / eta.
    omega_scale : float
        Fastest oscillation frequency contained in f; sets the panel
        width pi / (4 omega_scale).
    spec : QuadratureSpec, optional

    Returns
    -------
    float

    Raises
    ------
    ConvergenceError
        If the error estimate or the analytic tail bound cannot be pushed
        below the requested tolerances.
    """
    value, _ = _integrate_semi_infinite(f, eta, omega_scale, spec or DEFAULT_SPEC)
    return value


def first_moment_closed_form(omega1, omega2, eta):
    """Exact value of int_0^inf t e^{-eta t} cos(w1 t) sin(w2 t) dt.

    Equals eta*O1/(eta^2 + O1^2)^2 - eta*O2/(eta^2 + O2^2)^2 with
    O1 = w1 + w2 and O2 = w1 - w2.  Swapping the frequencies flips the
    sign of the O2 term only.
    """
    if not eta > 0.0:
        raise ValueError(f"eta must be positive (got {eta!r})")
    O1 = omega1 + omega2
    O2 = omega1 - omega2
    return eta * O1 / (eta**2 + O1**2) ** 2 - eta * O2 / (eta**2 + O2**2) ** 2


def zeroth_moment_closed_form(omega1, omega2, eta):
    """Exact value of int_0^inf e^{-eta t} cos(w1 t) sin(w2 t) dt.

    Equals (1/2) [O1/(eta^2 + O1^2) - O2/(eta^2 + O2^2)] with
    O1 = w1 + w2 and O2 = w1 - w2.
    """
    if not eta > 0.0:
        raise ValueError(f"eta must be positive (got {eta!r})")
    O1 = omega1 + omega2
    O2 = omega1 - omega2
    return 0.5 * (O1 / (eta**2 + O1**2) - O2 / (eta**2 + O2**2))


def lorentzian_squared_norm(eta):
    """int_{-inf}^{inf} eta x^2 / (eta^2 + x^2)^2 dx, evaluated through the
    exact substitution x = eta tan(theta).

    The substitution maps the integrand onto sin^2(theta) over
    (-pi/2, pi/2), so the value is pi/2 for every eta; the function
    computes the x-space integrand literally and the eta-independence
    emerges numerically.  Plain truncation would need a domain of order
    1e10 * eta for comparable accuracy because the integrand decays only
    as 1/x^2.
    """
    if not eta > 0.0:
        raise ValueError(f"eta must be positive (got {eta!r})")
    theta = 0.5 * math.pi * _NODES64
    x = eta * np.tan(theta)
    jac = eta / np.cos(theta) ** 2
    integrand = eta * x**2 / (eta**2 + x**2) ** 2 * jac
    return 0.5 * math.pi * float(np.dot(_WEIGHTS64, integrand))


# sixth-order Gregory end weights for the corrected trapezoidal rule
_GREGORY6 = np.array(
    [95.0 / 288.0, 317.0 / 240.0, 23.0 / 30.0, 793.0 / 720.0, 157.0 / 160.0]
)
_N_CORR = len(_GREGORY6)
# grid step: ~125 samples per oscillation period, sixth-order accurate
_STEP_PER_RADIAN = 0.05
_MAX_GRID = 50_000_000
_MIN_DIRECT = 2 * _N_CORR


def _gregory_weights(n):
    w = np.ones(n + 1)
    w[:_N_CORR] = _GREGORY6
    w[-_N_CORR:] = _GREGORY6[::-1]
    return w


def _convolve_gregory(ph, q, h):
    """I_i = h * sum_j w_j^(i) ph_j q_{i-j} for all i at once.

    Plain FFT convolution plus the Gregory end corrections at both ends of
    the inner integral; entries i < _MIN_DIRECT are left for direct
    evaluation by the caller.
    """
    n = len(ph) - 1
    L = _fft.next_fast_len(2 * (n + 1))
    conv = _fft.irfft(_fft.rfft(ph, L) * _fft.rfft(q, L), L)[: n + 1]
    out = h * conv
    dw = _GREGORY6 - 1.0
    for k in range(_N_CORR):
        out[k:] += h * dw[k] * ph[k] * q[: n + 1 - k]
        out[k:] += h * dw[k] * q[k] * ph[: n + 1 - k]
    return out


def _inner_direct(phi, protocol, t):
    """Direct Gauss evaluation of int_0^t phi(u) q(t-u) du for small t."""
    if t <= 0.0:
        return 0.0
    half = 0.5 * t
    u = half + half * _NODES15
    return half * float(np.dot(_WEIGHTS15, phi(u) * protocol.q(t - u)))


def _nested_on_grid(protocol, phi, h, n):
    t = h * np.arange(n + 1)
    ph = np.asarray(phi(t), dtype=float)
    qv = np.asarray(protocol.q(t), dtype=float)
    qd = np.asarray(protocol.qdot(t), dtype=float)
    inner = _convolve_gregory(ph, qv, h)
    for i in range(min(_MIN_DIRECT, n + 1)):
        inner[i] = _inner_direct(phi, protocol, t[i])
    outer = qd * inner
    value = h * float(np.dot(_gregory_weights(n), outer))
    mag = h * float(np.dot(np.abs(_gregory_weights(n)), np.abs(outer)))
    return value, mag


def _nested_response(protocol, phi, eta, omega_scale, spec):
    """Implementation of :func:`nested_response_integral` returning
    (value, error_estimate)."""
    if not eta > 0.0:
        raise ValueError(f"eta must be positive (got {eta!r})")
    if not omega_scale > 0.0:
        raise ValueError(f"omega_scale must be positive (got {omega_scale!r})")
    support = getattr(protocol, "support_end", None)
    T = support if support is not None else _ETA_HORIZON / eta
    h = _STEP_PER_RADIAN / omega_scale
    n = int(math.ceil(T / h))
    n += n % 2  # keep n even so the coarse grid reuses every other sample
    n = max(n, 4 * _MIN_DIRECT)
    if n > _MAX_GRID:
        raise ConvergenceError(
            f"nested integral grid of {n} points exceeds the supported size; "
            f"eta or the protocol support is too extreme"
        )
    h = T / n
    value, mag = _nested_on_grid(protocol, phi, h, n)
    coarse, _ = _nested_on_grid(protocol, phi, 2.0 * h, n // 2)
    # conservative Richardson estimate for the sixth-order rule, plus a
    # roundoff floor
    err = abs(value - coarse) / 31.0 + _FLOOR_FACTOR * mag
    tol = max(spec.abs_tol, spec.rel_tol * abs(value))
    if err > tol:
        raise ConvergenceError(
            f"nested integral (inner convolution + outer sum) failed to "
            f"converge: estimate {err:.3e} exceeds tolerance {tol:.3e}"
        )
    return value, err


def nested_response_integral(protocol, phi, eta, omega_scale, spec=None):
    """Evaluate int qdot(t) [ int_0^t phi(u) q(t - u) du ] dt.

    The protocol supplies causal q and qdot (q(t) = 0 for t < 0), so both
    integrals reduce to [0, T] where T is the protocol support or the
    damping horizon 40 / eta.  The functional is linear in phi and in each
    of the q and qdot slots separately.

    Parameters
    ----------
    protocol : object
        Anything exposing vectorized callables ``q`` and ``qdot`` and an
        optional ``support_end`` attribute.
    phi : callable
        Vectorized kernel, evaluable for all u >= 0.
    eta : float
        Damping rate of the protocol; sets the truncation horizon.
    omega_scale : float
        Fastest oscillation frequency of the kernel; sets the grid step.
    spec : QuadratureSpec, optional

    Returns
    -------
    float
    """
    value, _ = _nested_response(protocol, phi, eta, omega_scale, spec or DEFAULT_SPEC)
    return value
