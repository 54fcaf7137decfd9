import math

import mpmath
import numpy as np
import pytest

from core.analysis import (
    ContourSpec, bessel_j_imag, bessel_j_int, choose_contour, gamma, get_test_function,
    mellin, mellin_quadrature, vertical_line_integral, zeta_restricted,
)
from core.errors import BesselRange, ContourTail, GammaPole, MellinStrip, NoAdmissibleContour, ZetaDomain, ZetaPole
from scipy import special


def test_gamma_values_and_poles():
    assert gamma(5) == pytest.approx(24.0)
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi))
    z = 0.3 + 2j
    assert gamma(z) * gamma(1 - z) == pytest.approx(math.pi / np.sin(math.pi * z), rel=1e-12)
    for pole in (0, -1, -7):
        with pytest.raises(GammaPole):
            gamma(pole)
    # lontano dall'asse reale i due lati valgono circa e^(-pi |t|)
    for z in (0.3 + 25.0j, 0.8 - 29.5j):
        assert gamma(z) * gamma(1 - z) == pytest.approx(math.pi / np.sin(math.pi * z), rel=1e-11)
        assert gamma(z + 3) == pytest.approx((z + 2) * gamma(z + 2), rel=1e-11)


def test_restricted_zeta():
    assert zeta_restricted(2) == pytest.approx(math.pi ** 2 / 6)
    assert zeta_restricted(2, 2) == pytest.approx(math.pi ** 2 / 8)
    assert zeta_restricted(4, 6) == pytest.approx(math.pi ** 4 / 90 * (1 - 2 ** -4) * (1 - 3 ** -4))
    with pytest.raises(ZetaPole):
        zeta_restricted(1)
    for s in (0, -2, -0.5 + 3j):
        with pytest.raises(ZetaDomain):
            zeta_restricted(s, 3)
    assert abs(zeta_restricted(0.5 + 14.134725141734695j)) < 1e-6


def test_bessel_integer_order():
    assert bessel_j_int(0, 0.0) == pytest.approx(1.0)
    np.testing.assert_allclose(bessel_j_int(3, np.array([1.0, 5.0])), special.jv(3, [1.0, 5.0]))
    with pytest.raises(ValueError):
        bessel_j_int(-1, 1.0)


@pytest.mark.parametrize("t,x", [(0.5, 1.0), (3.0, 10.0), (-2.0, 30.0), (15.0, 45.0)])
def test_bessel_imaginary_order_matches_mpmath(t, x):
    expected = complex(mpmath.besselj(mpmath.mpc(0, 2 * t), x))
    assert abs(bessel_j_imag(t, x) - expected) <= 1e-9 * max(1.0, abs(expected))


def test_bessel_imaginary_order_range():
    with pytest.raises(BesselRange):
        bessel_j_imag(25.0, 1.0)
    with pytest.raises(BesselRange):
        bessel_j_imag(1.0, 60.0)


def test_mellin_closed_forms():
    gauss = get_test_function("gauss13")
    assert mellin(gauss, 1) == pytest.approx(0.5 * math.factorial(6))
    exp13 = get_test_function("exp13")
    assert mellin(exp13, 1) == pytest.approx(math.factorial(13))
    for u in (1.0, 2.5 + 3j, -4 + 1j):
        assert mellin(gauss, u) == pytest.approx(mellin_quadrature(gauss, u), rel=1e-8)
    with pytest.raises(MellinStrip):
        mellin(gauss, -14)


def test_unknown_test_function_lists_registry():
    with pytest.raises(ValueError, match="gauss13"):
        get_test_function("nope")


def test_cahen_mellin_inverse():
    def integrand(u):
        return np.exp(special.loggamma(u) - u * math.log(2.0))

    spec = choose_contour(integrand, 1.5, distance=1.5, target=1e-14)
    assert vertical_line_integral(integrand, spec) == pytest.approx(math.exp(-2.0), rel=1e-9)


def test_contour_edges_must_decay():
    spec = ContourSpec(xi=1.0, T=1.0, h=0.1)
    with pytest.raises(ContourTail):
        vertical_line_integral(lambda u: np.ones_like(u), spec)
    with pytest.raises(ValueError):
        ContourSpec(xi=1.0, T=0.0, h=0.1)


def test_contour_on_a_singularity():
    with pytest.raises(NoAdmissibleContour):
        choose_contour(lambda u: np.exp(-u * u), 0.0, distance=0.0)
    with pytest.raises(NoAdmissibleContour):
        choose_contour(lambda u: np.ones_like(u), 1.0, distance=1.0, t_max=50.0)
