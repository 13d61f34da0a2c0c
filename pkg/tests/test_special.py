import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbm_steering.special import ERFI_MAX, dawson, erf, erfc, erfcx, erfi, fresnel_cf

mpmath.mp.dps = 40

# straddle every series / continued-fraction / asymptotic switch point
POINTS = [0.0, 1e-8, 0.37, 0.999, 1.0, 1.999, 2.0, 2.001, 2.5, 3.0, 4.7, 5.999, 6.0, 6.001, 9.0, 15.0, 26.0]


def test_erf_reference_values():
    assert erf(0.0) == 0.0
    assert erf(1.0) == pytest.approx(0.8427007929497149, abs=1e-15)
    assert erf(-0.37) == -erf(0.37)


@pytest.mark.parametrize("x", POINTS + [-p for p in POINTS[1:]])
def test_erf_against_mpmath(x):
    assert abs(erf(x) - float(mpmath.erf(x))) <= 1e-14


@pytest.mark.parametrize("x", POINTS + [-0.5, -3.0, 27.0])
def test_erfc_against_mpmath(x):
    ref = float(mpmath.erfc(x))
    assert erfc(x) == pytest.approx(ref, rel=1e-13, abs=1e-300)


def test_erfc_anticancellation():
    assert erfc(0.0) == 1.0
    assert erfc(3.0) == pytest.approx(2.209049699858544e-05, rel=1e-13)
    assert erfc(20.0) == pytest.approx(float(mpmath.erfc(20)), rel=1e-13)


@pytest.mark.parametrize("x", [0.0, 0.2, 1.9, 2.1, 5.0, 30.0, 500.0])
def test_erfcx_against_mpmath(x):
    ref = float(mpmath.exp(mpmath.mpf(x) ** 2) * mpmath.erfc(x))
    assert erfcx(x) == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("x", POINTS[1:] + [-1.3, -7.0])
def test_erfi_against_mpmath(x):
    assert erfi(x) == pytest.approx(float(mpmath.erfi(x)), rel=1e-13)


def test_erfi_series_value():
    # term-wise series oracle
    series = math.fsum(1.0 ** (2 * k + 1) / (math.factorial(k) * (2 * k + 1)) for k in range(40))
    assert erfi(1.0) == pytest.approx(2 / math.sqrt(math.pi) * series, rel=1e-15)
    assert erfi(1.0) == pytest.approx(1.6504257587975428, rel=1e-15)


def test_erfi_overflow_bound():
    assert math.isfinite(erfi(ERFI_MAX))
    with pytest.raises(OverflowError):
        erfi(ERFI_MAX + 0.1)
    with pytest.raises(OverflowError):
        erfi(np.array([0.0, -30.0]))


@pytest.mark.parametrize("x", [0.0, 0.5, 1.5, 5.9, 6.1, 12.0, 1e3])
def test_dawson_against_mpmath(x):
    ref = float(mpmath.sqrt(mpmath.pi) / 2 * mpmath.exp(-mpmath.mpf(x) ** 2) * mpmath.erfi(x))
    assert dawson(x) == pytest.approx(ref, rel=1e-13, abs=1e-300)


def _cf_ref(z):
    return float(mpmath.quad(lambda t: mpmath.cos(t * t), mpmath.linspace(0, z, 8 + int(z * z))))


@pytest.mark.parametrize("z", [0.0, 0.3, 1.0, 2.49, 2.5, 2.51, 4.0, 7.0, 20.0])
def test_fresnel_against_quadrature(z):
    assert abs(fresnel_cf(z) - _cf_ref(z)) <= 1e-12


def test_fresnel_reference_values():
    assert fresnel_cf(0.0) == 0.0
    assert fresnel_cf(1.0) == pytest.approx(0.9045242379002201, abs=1e-13)
    assert abs(fresnel_cf(50.0) - math.sqrt(math.pi / 8)) < 1e-2


def test_fresnel_convention_conversion():
    # Cf(z) = sqrt(pi/2) C(z sqrt(2/pi)) with C the pi t^2 / 2 convention
    for z in (0.4, 1.7, 3.3):
        ref = math.sqrt(math.pi / 2) * float(mpmath.fresnelc(z * math.sqrt(2 / math.pi)))
        assert fresnel_cf(z) == pytest.approx(ref, abs=1e-13)


def test_fresnel_domain():
    with pytest.raises(ValueError):
        fresnel_cf(-0.1)


def test_vectorized_and_scalar_shapes():
    xs = np.linspace(-4, 4, 17)
    assert np.array_equal(erf(xs), np.array([erf(float(x)) for x in xs]))
    assert isinstance(erf(0.5), float)
    assert erf(xs).shape == xs.shape


@given(st.floats(-8, 8, allow_nan=False))
def test_erf_odd(x):
    assert erf(-x) == -erf(x)


@given(st.floats(-5, 5, allow_nan=False))
def test_erf_plus_erfc(x):
    assert abs(erf(x) + erfc(x) - 1.0) <= 1e-14


@settings(max_examples=50)
@given(st.floats(0, math.sqrt(math.pi / 2), allow_nan=False), st.floats(0, 1e-1, allow_nan=False))
def test_fresnel_nondecreasing_first_lobe(z, dz):
    z2 = min(z + dz, math.sqrt(math.pi / 2))
    assert fresnel_cf(z2) >= fresnel_cf(z)


@given(st.floats(-20, 20, allow_nan=False))
def test_pure(x):
    assert erfc(x) == erfc(x)
    assert erfi(x) == erfi(x)
    assert fresnel_cf(abs(x)) == fresnel_cf(abs(x))
