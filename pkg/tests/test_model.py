import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscfriction.model import (
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


def make_system(**kwargs):
    return canonical_system(**kwargs)


def test_validate_returns_same_object():
    sys = make_system()
    assert validate_system(sys) is sys


def test_validate_idempotent():
    sys = validate_system(make_system())
    again = validate_system(sys)
    assert again is sys


@pytest.mark.parametrize(
    "field,kwargs",
    [
        ("osc1.mass", dict(m1=0.0)),
        ("osc1.omega", dict(omega1=-1.0)),
        ("osc2.mass", dict(m2=-2.0)),
        ("osc2.omega", dict(omega2=0.0)),
        ("thermal.hbar", dict(hbar=0.0)),
        ("motion.eta", dict(eta=-0.1)),
    ],
)
def test_validate_names_offending_field(field, kwargs):
    sys = OscillatorSystem(
        osc1=Oscillator(kwargs.get("m1", 1.0), kwargs.get("omega1", 1.0)),
        osc2=Oscillator(kwargs.get("m2", 1.0), kwargs.get("omega2", 1.1)),
        thermal=ThermalState(2.0, kwargs.get("hbar", 1.0)),
        coupling=CouplingGeometry(0.0, (0, 0, 1)),
        motion=Motion((0, 0, 0.1), kwargs.get("eta", 0.01)),
    )
    with pytest.raises(ValidationError, match=field.replace(".", r"\.")):
        validate_system(sys)


def test_validate_rejects_nan_beta_and_allows_inf():
    assert make_system(beta=math.inf).thermal.zero_temperature
    bad = OscillatorSystem(
        osc1=Oscillator(1, 1),
        osc2=Oscillator(1, 1.1),
        thermal=ThermalState(math.nan, 1.0),
        coupling=CouplingGeometry(0.0, (0, 0, 1)),
        motion=Motion((0, 0, 0.1), 0.01),
    )
    with pytest.raises(ValidationError, match="thermal.beta"):
        validate_system(bad)


def test_validate_rejects_nonfinite_vectors():
    bad = OscillatorSystem(
        osc1=Oscillator(1, 1),
        osc2=Oscillator(1, 1.1),
        thermal=ThermalState(2.0, 1.0),
        coupling=CouplingGeometry(0.0, (0, 0, math.inf)),
        motion=Motion((0, 0, 0.1), 0.01),
    )
    with pytest.raises(ValidationError, match="coupling.grad_psi"):
        validate_system(bad)


def test_vectors_are_read_only():
    sys = make_system()
    with pytest.raises(ValueError):
        sys.coupling.grad_psi[0] = 5.0
    with pytest.raises(ValueError):
        sys.motion.velocity[2] = 5.0


def test_scale_identity():
    sys = make_system()
    scaled = scale_units(sys, 1.0, 1.0, 1.0)
    assert scaled.osc1.mass == sys.osc1.mass
    assert scaled.osc2.omega == sys.osc2.omega
    assert scaled.thermal.beta == sys.thermal.beta
    assert np.array_equal(scaled.motion.velocity, sys.motion.velocity)


def test_scale_time_factor_two():
    sys = make_system(omega1=1.0, eta=0.01)
    scaled = scale_units(sys, 1.0, 2.0, 1.0)
    assert scaled.osc1.omega == pytest.approx(0.5, rel=1e-15)
    assert scaled.motion.eta == pytest.approx(0.005, rel=1e-15)


def test_scale_rejects_nonpositive_factor():
    with pytest.raises(ValueError):
        scale_units(make_system(), -1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        scale_units(make_system(), 1.0, 0.0, 1.0)


def _dimensionless_signature(sys):
    b, h = sys.thermal.beta, sys.thermal.hbar
    return (
        b * h * sys.osc1.omega,
        b * h * sys.osc2.omega,
        sys.motion.eta / sys.osc1.omega,
        (sys.osc1.omega - sys.osc2.omega) / sys.osc1.omega,
    )


_factors = st.floats(min_value=1e-3, max_value=1e3,
                     allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(L=_factors, T=_factors, M=_factors)
def test_scale_preserves_dimensionless_combinations(L, T, M):
    sys = make_system()
    before = _dimensionless_signature(sys)
    after = _dimensionless_signature(scale_units(sys, L, T, M))
    assert np.allclose(after, before, rtol=1e-12)


@settings(max_examples=40, deadline=None)
@given(La=_factors, Ta=_factors, Ma=_factors, Lb=_factors, Tb=_factors, Mb=_factors)
def test_scale_composes(La, Ta, Ma, Lb, Tb, Mb):
    sys = make_system()
    chained = scale_units(scale_units(sys, La, Ta, Ma), Lb, Tb, Mb)
    direct = scale_units(sys, La * Lb, Ta * Tb, Ma * Mb)
    assert chained.osc1.omega == pytest.approx(direct.osc1.omega, rel=1e-12)
    assert chained.thermal.hbar == pytest.approx(direct.thermal.hbar, rel=1e-12)
    assert chained.thermal.beta == pytest.approx(direct.thermal.beta, rel=1e-12)
    assert np.allclose(
        chained.coupling.grad_psi, direct.coupling.grad_psi, rtol=1e-12
    )


def test_scale_keeps_zero_temperature_sentinel():
    sys = make_system(beta=math.inf)
    scaled = scale_units(sys, 3.0, 0.5, 2.0)
    assert math.isinf(scaled.thermal.beta)
