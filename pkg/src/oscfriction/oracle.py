"""Brute-force kernel evaluation on a truncated two-oscillator Fock space.

This module is the independent ground truth for the closed forms in
:mod:`oscfriction.response`.  The kernel

    phi(t) = (1/(i hbar)) Tr{ rho [x1 x2, x1(t) x2(t)] }

is computed literally: position matrices in the energy basis, per-element
Heisenberg phases e^{i (m - n) omega t} (exact for a harmonic spectrum, no
time stepping), and a Boltzmann-weighted trace over the product basis.
The trace factorizes over the tensor product, so no N1*N2-dimensional
matrix is ever materialized.

Complex arithmetic stays inside this module: the physically real result is
returned as a float after its imaginary residue has been checked.
"""

import math
from dataclasses import dataclass

import numpy as np

from .model import validate_system

__all__ = [
    "FockWorkspace",
    "TraceError",
    "choose_truncation",
    "fock_workspace",
    "occupation",
    "phi_trace",
    "phi_trace_grid",
]

# imaginary residue above this fraction of the kernel scale signals a bug
_IMAG_TOL = 1e-10
_WEIGHT_SUM_TOL = 1e-14
# evaluation chunk for dense t grids, keeps the phase tensors small
_CHUNK = 256


class TraceError(RuntimeError):
    """The truncated trace violated one of its own consistency checks."""


def choose_truncation(thermal, osc, tail_tol):
    """Smallest number of retained levels with Boltzmann tail below tail_tol.

    The tail weight of the normalized geometric distribution above level
    n is exactly e^{-beta hbar omega n}, so the rule solves
    e^{-beta hbar omega n} < tail_tol.  At zero temperature only the
    ground state is populated and 2 levels are kept (one extra so the
    position operator has a nonzero matrix element).
    """
    if not 0.0 < tail_tol < 1.0:
        raise ValueError(f"tail_tol must lie in (0, 1) (got {tail_tol!r})")
    if thermal.zero_temperature:
        return 2
    x = thermal.beta * thermal.hbar * osc.omega
    n = int(math.ceil(math.log(1.0 / tail_tol) / x))
    while math.exp(-x * n) >= tail_tol:
        n += 1
    return max(n, 2)


def _boltzmann_weights(thermal, osc, n_levels):
    if thermal.zero_temperature:
        w = np.zeros(n_levels)
        w[0] = 1.0
        return w
    w = np.exp(-thermal.beta * thermal.hbar * osc.omega * np.arange(n_levels))
    w /= w.sum()
    return w


def _position_matrix(thermal, osc, n_levels):
    s = math.sqrt(thermal.hbar / (2.0 * osc.mass * osc.omega))
    off = s * np.sqrt(np.arange(1, n_levels))
    x = np.zeros((n_levels, n_levels))
    idx = np.arange(n_levels - 1)
    x[idx, idx + 1] = off
    x[idx + 1, idx] = off
    return x


@dataclass(frozen=True)
class FockWorkspace:
    """Truncation sizes, position matrices and Boltzmann weights for the
    two oscillators."""

    n_max1: int
    n_max2: int
    x1_elems: np.ndarray
    x2_elems: np.ndarray
    weights1: np.ndarray
    weights2: np.ndarray


def _trace_truncation(thermal, osc, tail_tol):
    """Truncation for the trace itself: the position matrix elements grow
    like sqrt(n), so the trace tail carries an extra level factor and the
    plain weight rule is extended until (n + 2) e^{-beta hbar omega n}
    drops below tail_tol."""
    n = choose_truncation(thermal, osc, tail_tol)
    if thermal.zero_temperature:
        return n
    x = thermal.beta * thermal.hbar * osc.omega
    while (n + 2.0) * math.exp(-x * n) >= tail_tol:
        n += 1
    return n


def fock_workspace(sys, tail_tol=1e-12, extra_levels=0):
    """Build the truncated workspace for a validated system.

    ``extra_levels`` adds levels beyond the tail rule; useful for
    truncation-convergence studies.
    """
    sys = validate_system(sys)
    n1 = _trace_truncation(sys.thermal, sys.osc1, tail_tol) + extra_levels
    n2 = _trace_truncation(sys.thermal, sys.osc2, tail_tol) + extra_levels
    w1 = _boltzmann_weights(sys.thermal, sys.osc1, n1)
    w2 = _boltzmann_weights(sys.thermal, sys.osc2, n2)
    for w in (w1, w2):
        if w.min() < 0.0 or abs(w.sum() - 1.0) > _WEIGHT_SUM_TOL:
            raise TraceError("Boltzmann weights failed normalization check")
    return FockWorkspace(
        n_max1=n1,
        n_max2=n2,
        x1_elems=_position_matrix(sys.thermal, sys.osc1, n1),
        x2_elems=_position_matrix(sys.thermal, sys.osc2, n2),
        weights1=w1,
        weights2=w2,
    )


def occupation(thermal, osc, tail_tol=1e-12):
    """Mean occupation number over the truncated Boltzmann distribution.

    Satisfies 2 <n> + 1 = coth(beta hbar omega / 2) up to the
    truncation-controlled error.  The first moment's tail carries an extra
    factor of the level index, so the truncation is extended beyond the
    plain weight rule until (n + 2) e^{-beta hbar omega n} < tail_tol.
    """
    if thermal.zero_temperature:
        return 0.0
    x = thermal.beta * thermal.hbar * osc.omega
    n_levels = choose_truncation(thermal, osc, tail_tol)
    while (n_levels + 2.0) * math.exp(-x * n_levels) >= tail_tol:
        n_levels += 1
    w = _boltzmann_weights(thermal, osc, n_levels)
    return float(np.dot(np.arange(n_levels), w))


def _single_traces(x, weights, omega, ts):
    """Tr{rho x x(t)} and Tr{rho x(t) x} for an array of times.

    x(t)_{mn} = x_{mn} e^{i (m - n) omega t}; the two orderings are
    computed independently so the imaginary-residue check downstream is a
    real consistency check rather than a tautology.
    """
    n = len(weights)
    levels = np.arange(n)
    dphase = levels[:, None] - levels[None, :]  # (m - n)
    T = np.empty(len(ts), dtype=complex)
    Tp = np.empty(len(ts), dtype=complex)
    for start in range(0, len(ts), _CHUNK):
        chunk = ts[start:start + _CHUNK]
        phases = np.exp(1j * omega * chunk[:, None, None] * dphase)
        xt = x * phases
        T[start:start + _CHUNK] = np.einsum("n,nm,tmn->t", weights, x, xt)
        Tp[start:start + _CHUNK] = np.einsum("n,tnm,mn->t", weights, xt, x)
    return T, Tp


def phi_trace_grid(sys, ts, tail_tol=1e-12, extra_levels=0):
    """Brute-force phi(t) on an array of times.  See :func:`phi_trace`."""
    sys = validate_system(sys)
    ws = fock_workspace(sys, tail_tol, extra_levels)
    ts = np.asarray(ts, dtype=float).ravel()
    T1, T1p = _single_traces(ws.x1_elems, ws.weights1, sys.osc1.omega, ts)
    T2, T2p = _single_traces(ws.x2_elems, ws.weights2, sys.osc2.omega, ts)
    hbar = sys.thermal.hbar
    vals = (T1 * T2 - T1p * T2p) / (1j * hbar)
    # kernel scale: |phi| <= (2/hbar) * prod_i Tr{rho x_i^2}
    scale = (2.0 / hbar) * float(
        np.dot(ws.weights1, np.diag(ws.x1_elems @ ws.x1_elems))
        * np.dot(ws.weights2, np.diag(ws.x2_elems @ ws.x2_elems))
    )
    residue = np.max(np.abs(vals.imag))
    if residue > _IMAG_TOL * scale:
        raise TraceError(
            f"imaginary residue {residue:.3e} exceeds {_IMAG_TOL:.1e} of the "
            f"kernel scale {scale:.3e}"
        )
    return vals.real


def phi_trace(sys, t, tail_tol=1e-12):
    """Brute-force evaluation of the response kernel at one time.

    Builds the truncated workspace, applies the exact Heisenberg phases,
    computes (1/(i hbar)) Tr{rho [x1 x2, x1(t) x2(t)]} over the product
    basis and returns the real part after asserting that the imaginary
    residue is negligible.

    Parameters
    ----------
    sys : OscillatorSystem
    t : float
    tail_tol : float
        Permitted Boltzmann weight outside the retained levels.
    """
    return float(phi_trace_grid(sys, np.array([t]), tail_tol)[0])
