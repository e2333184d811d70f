import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscfriction.model import ThermalState, canonical_system
from oscfriction.response import (
    coth_difference,
    coth_factor,
    eval_phi,
    response_kernel,
)

# high-precision reference: coth(1) = (e^2 + 1)/(e^2 - 1)
COTH_ONE = 1.3130352854993313


def test_coth_factor_zero_temperature_is_exactly_one():
    thermal = ThermalState(math.inf, 1.0)
    for omega in (1e-6, 1.0, 1e6):
        assert coth_factor(thermal, omega) == 1.0


def test_coth_factor_reference_value():
    # beta*hbar*omega = 2: coth(1) = (e^2+1)/(e^2-1)
    thermal = ThermalState(2.0, 1.0)
    assert coth_factor(thermal, 1.0) == pytest.approx(COTH_ONE, rel=1e-14)


def test_coth_factor_small_argument_series():
    bhw = 1e-8
    thermal = ThermalState(bhw, 1.0)
    expected = 2.0 / bhw + bhw / 6.0
    assert coth_factor(thermal, 1.0) == pytest.approx(expected, rel=1e-12)


def test_coth_factor_large_argument_no_overflow():
    assert coth_factor(ThermalState(2000.0, 1.0), 1.0) == 1.0
    val = coth_factor(ThermalState(60.0, 1.0), 1.0)
    assert 1.0 < val < 1.0 + 1e-20 or val == 1.0


def test_coth_factor_rejects_nonpositive_omega():
    thermal = ThermalState(2.0, 1.0)
    with pytest.raises(ValueError):
        coth_factor(thermal, 0.0)
    with pytest.raises(ValueError):
        coth_factor(thermal, -1.0)


@settings(max_examples=100, deadline=None)
@given(x=st.floats(min_value=1e-10, max_value=1e3))
def test_coth_factor_at_least_one(x):
    thermal = ThermalState(2.0 * x, 1.0)  # half-argument equals x
    assert coth_factor(thermal, 1.0) >= 1.0


def test_response_kernel_prefactor():
    sys = canonical_system(omega2=1.0)
    k = response_kernel(sys)
    assert k.D == pytest.approx(0.5, rel=1e-15)


def test_response_kernel_zero_temperature_factors():
    k = response_kernel(canonical_system(beta=math.inf))
    assert k.c1 == 1.0 and k.c2 == 1.0


def test_eval_phi_zero_at_origin():
    k = response_kernel(canonical_system())
    assert eval_phi(k, 0.0) == 0.0


@settings(max_examples=100, deadline=None)
@given(t=st.floats(min_value=-100.0, max_value=100.0,
                   allow_nan=False, allow_infinity=False))
def test_eval_phi_odd(t):
    k = response_kernel(canonical_system())
    assert eval_phi(k, -t) == pytest.approx(-eval_phi(k, t), abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(t=st.floats(min_value=-1e4, max_value=1e4,
                   allow_nan=False, allow_infinity=False))
def test_eval_phi_bounded(t):
    k = response_kernel(canonical_system())
    assert abs(eval_phi(k, t)) <= k.D * (k.c1 + k.c2) * (1.0 + 1e-12)


def test_eval_phi_oscillator_exchange_symmetry():
    sys = canonical_system(m1=1.0, m2=2.0, omega1=1.0, omega2=1.3)
    swapped = canonical_system(m1=2.0, m2=1.0, omega1=1.3, omega2=1.0)
    k1, k2 = response_kernel(sys), response_kernel(swapped)
    ts = np.linspace(0.0, 30.0, 97)
    assert np.allclose(eval_phi(k1, ts), eval_phi(k2, ts), rtol=1e-13, atol=1e-15)


def test_eval_phi_vectorized_matches_scalar():
    k = response_kernel(canonical_system())
    ts = np.linspace(-5.0, 5.0, 11)
    vec = eval_phi(k, ts)
    assert vec.shape == ts.shape
    for t, v in zip(ts, vec):
        assert eval_phi(k, float(t)) == v


def test_coth_difference_degenerate_is_exactly_zero():
    thermal = ThermalState(2.0, 1.0)
    assert coth_difference(thermal, 1.3, 1.3) == 0.0


def test_coth_difference_zero_temperature():
    thermal = ThermalState(math.inf, 1.0)
    assert coth_difference(thermal, 1.0, 7.0) == 0.0


def test_coth_difference_sign_opposes_detuning():
    thermal = ThermalState(2.0, 1.0)
    assert coth_difference(thermal, 1.0, 2.0) > 0.0  # w1 < w2
    assert coth_difference(thermal, 2.0, 1.0) < 0.0


def test_coth_difference_matches_direct_subtraction_when_separated():
    thermal = ThermalState(2.0, 1.0)
    direct = coth_factor(thermal, 1.0) - coth_factor(thermal, 1.7)
    assert coth_difference(thermal, 1.0, 1.7) == pytest.approx(direct, rel=1e-12)


def test_coth_difference_near_degenerate_linear_form():
    # beta=2, hbar=1, w1=1, w2=1+1e-9: compare with the linearized form
    # -(beta hbar O2 / 2) / (sinh(beta hbar w1/2) sinh(beta hbar w2/2))
    thermal = ThermalState(2.0, 1.0)
    w1, w2 = 1.0, 1.0 + 1e-9
    linear = -(0.5 * 2.0 * (w1 - w2)) / (math.sinh(1.0) * math.sinh(w2))
    assert coth_difference(thermal, w1, w2) == pytest.approx(linear, rel=1e-6)


def test_coth_difference_large_beta_stable():
    thermal = ThermalState(1e6, 1.0)
    val = coth_difference(thermal, 1.0, 1.000001)
    assert math.isfinite(val)
    assert val > 0.0  # w2 > w1


def test_coth_difference_rejects_nonpositive_frequency():
    thermal = ThermalState(2.0, 1.0)
    with pytest.raises(ValueError):
        coth_difference(thermal, 0.0, 1.0)
    with pytest.raises(ValueError):
        coth_difference(thermal, 1.0, -1.0)
