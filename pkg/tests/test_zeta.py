import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from oscillab.errors import PoleError
from oscillab.zeta import em_cutoff, hardy_z, zeta, zeta_and_prime, zeta_constants, zeta_prime

mpmath.mp.dps = 30


def test_reference_values():
    assert zeta(2) == pytest.approx(math.pi**2 / 6, rel=1e-13)
    assert zeta(0) == pytest.approx(-0.5, rel=1e-13)
    assert abs(zeta(0.5 + 14.134725j)) < 1e-6
    assert zeta_prime(2) == pytest.approx(-0.9375482543158437, rel=1e-11)
    assert zeta_prime(0) == pytest.approx(-0.5 * math.log(2 * math.pi), rel=1e-11)


def test_derivative_matches_central_difference():
    h = 1e-5
    fd = (zeta(3 + h) - zeta(3 - h)) / (2 * h)
    assert abs(fd - zeta_prime(3)) < 1e-6


@given(st.floats(-2, 10), st.floats(-1000, 1000))
def test_agrees_with_mpmath(re, im):
    s = complex(re, im)
    if abs(s - 1) < 1e-3:
        return
    z, dz = zeta_and_prime(s)
    ref = complex(mpmath.zeta(mpmath.mpc(re, im)))
    dref = complex(mpmath.zeta(mpmath.mpc(re, im), derivative=1))
    assert abs(z - ref) <= 1e-10 * max(abs(ref), 1e-3)
    assert abs(dz - dref) <= 1e-8 * max(abs(dref), 1e-3)


@given(st.floats(-1, -1e-3), st.floats(-50, 50))
def test_functional_equation(re, im):
    s = complex(re, im)
    chi = 2**s * math.pi ** (s - 1) * np.sin(math.pi * s / 2) * complex(mpmath.gamma(1 - s))
    image = chi * zeta(1 - s)
    assert abs(zeta(s) - image) <= 1e-8 * abs(image)


def test_reflection_region_against_mpmath():
    for s in (-3.5 + 2j, -7 + 0.1j, -20.5 + 30j):
        ref = complex(mpmath.zeta(s))
        assert abs(zeta(s) - ref) <= 1e-9 * abs(ref)


def test_conjugate_symmetry_is_exact():
    s = np.array([0.3 + 17j, 2.5 + 400j, -3 + 1.5j, 9 + 50j])
    np.testing.assert_array_equal(zeta(np.conj(s)), np.conj(zeta(s)))


def test_batch_composition_does_not_change_values():
    s = np.array([0.5 + 10j, 0.5 + 900j, 3 + 77j])
    batch = zeta(s)
    singles = np.array([zeta(v) for v in s])
    assert batch.tobytes() == singles.tobytes()


def test_pole_raises():
    with pytest.raises(PoleError):
        zeta(1.0)
    with pytest.raises(PoleError):
        zeta_prime(1.0)


def test_cutoff_grows_with_height():
    assert em_cutoff(0) >= 20
    assert em_cutoff(1000) >= 500


def test_constants():
    c = zeta_constants()
    assert round(c.first_zero_height, 6) == 14.134725
    assert abs(zeta(c.two_s0)) < 1e-8
    assert c.s0 == c.two_s0 / 2
    assert c.euler_gamma == pytest.approx(0.5772156649015329)
    assert hardy_z(14.13) * hardy_z(14.14) < 0
