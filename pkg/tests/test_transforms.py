import numpy as np
import pytest

from core.analysis import get_test_function
from core.errors import NoAdmissibleContour
from core.transforms import (
    PhiCache, PhiKernel, PhiTransformParams, WeightProfile, certify_admissible, phi_cap, phi_h,
    phi_h_gauss13_closed, phi_plus, phi_plus_combination, phi_plus_zero_closed,
)

GAUSS = get_test_function("gauss13")


@pytest.fixture(scope="module")
def kernel():
    return PhiKernel(PhiTransformParams(testfn=GAUSS, weight=12, s=1.5))


def test_default_contours_sit_between_the_poles(kernel):
    params = kernel.params
    assert params.window_bounds == (-13.0, 10.0)
    assert params.contours == {"small": 8.0, "large": -12.0}
    ladder = params.ladder()
    assert ladder[0] == -12.0 and ladder[-1] == 8.0
    assert len(ladder) == 41
    # x -> 0 usa l'ascissa piu' a destra, x grande quella piu' a sinistra
    assert kernel.xi_for(1e-3) == 8.0
    assert kernel.xi_for(1e6) == -12.0


def test_contour_outside_window_is_rejected():
    with pytest.raises(NoAdmissibleContour):
        PhiTransformParams(testfn=GAUSS, s=1.5, contours={"small": 10.5, "large": -12.0})
    with pytest.raises(ValueError):
        PhiTransformParams(testfn=GAUSS, s=1.5, contours={"small": 8.0})
    # con Re(s) grande i poli di G superano il bordo della striscia di Mellin
    with pytest.raises(NoAdmissibleContour):
        PhiTransformParams(testfn=GAUSS, s=13.5)


@pytest.mark.parametrize("x", [0.5, 2.0, 5.0, 10.0])
def test_value_does_not_depend_on_the_contour(kernel, x):
    peak = float(np.max(np.abs(kernel.evaluate(np.geomspace(0.1, 1000.0, 400)))))
    near = kernel.direct(x, xi=2.0)[0]
    far = kernel.direct(x, xi=6.0)[0]
    # tolleranza assoluta in unita' del picco: Phi(0.5) e' minuscolo
    assert abs(near - far) < 1e-8 * peak


def test_vectorized_matches_direct(kernel):
    xs = np.array([0.1, 1.0, 1.9, 2.5, 10.0, 80.0])
    vector = kernel.evaluate(xs)
    scale = float(np.max(np.abs(vector)))
    for x, value in zip(xs, vector):
        assert abs(value - phi_cap(kernel.params, float(x))) <= 1e-6 * scale
    assert kernel.evaluate(np.array([0.0]))[0] == 0


def test_cache_interpolates_within_tolerance():
    cache = PhiCache(PhiTransformParams(testfn=GAUSS, s=1.5), x_min=1e-2, x_max=1e2, points_per_decade=400)
    result = cache.validate(samples=15, tolerance=1e-6)
    assert result.passed
    assert cache(np.array([1e-3, 1e3]))[0] == 0
    assert cache.nbytes > 0


def test_phi_is_admissible_in_the_critical_strip():
    kernel = PhiKernel(PhiTransformParams(testfn=GAUSS, s=0.9))

    def phi(x):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros(x.shape, dtype=np.complex128)
        out[x > 0] = kernel.evaluate(x[x > 0])
        return out

    report = certify_admissible(phi, label="Phi", s_strip=(0.9, 0.9), x_max=1000.0, points=8001)
    assert report.value_at_zero == 0.0
    assert report.decay_exponents["fn"] < -2.1


def test_slow_decay_is_not_admissible():
    report = certify_admissible(lambda x: 1.0 / (1.0 + x), label="slow")
    assert not report.passed
    assert report.offending_sample["which"] == "fn"
    assert report.to_dict()["pass"] is False


@pytest.mark.parametrize("ell", [2, 12, 20])
def test_phi_h_against_weber_integral(ell):
    assert phi_h(GAUSS, ell) == pytest.approx(phi_h_gauss13_closed(ell), rel=1e-8)


def test_phi_h_needs_even_order():
    with pytest.raises(ValueError):
        phi_h(GAUSS, 3)


def test_phi_plus_even_and_continuous_at_zero():
    assert phi_plus(GAUSS, 1.3) == pytest.approx(phi_plus(GAUSS, -1.3))
    assert phi_plus(GAUSS, 0.0) == pytest.approx(phi_plus_zero_closed(GAUSS), rel=1e-6)


@pytest.mark.parametrize("t", [0.5, 3.0])
def test_phi_plus_is_real(t):
    value = phi_plus_combination(GAUSS, t, order=80)
    assert abs(value.imag) < 1e-10
    assert value.real == pytest.approx(phi_plus(GAUSS, t, order=80), rel=1e-10, abs=1e-14)
    with pytest.raises(ValueError):
        phi_plus_combination(GAUSS, 0.0)


def test_weight_profile_window_keeps_the_mass():
    profile = WeightProfile("gauss13", GAUSS.evaluate, 1e-4, 12.0, sigma=1.5)
    lo, hi = profile.window(1e-9)
    assert 1e-4 <= lo < 1.0 < hi <= 12.0
    assert profile.discarded_mass(lo, hi) <= 2e-9 * profile.total
    assert profile.mass_below(1e-5) == 0.0
    assert profile.mass_below(100.0) == pytest.approx(profile.total)


def test_ladder_step_must_be_positive():
    with pytest.raises(ValueError):
        PhiTransformParams(testfn=GAUSS, s=1.5, step=0.0)
    params = PhiTransformParams(testfn=GAUSS, s=1.5, step=3.0)
    assert list(params.ladder()) == [-12.0, -9.0, -6.0, -3.0, 0.0, 3.0, 6.0, 8.0]
    assert params.cache_key() != PhiTransformParams(testfn=GAUSS, s=1.5).cache_key()


def test_direct_at_zero_is_zero(kernel):
    value, spec = kernel.direct(0.0)
    assert value == 0
    assert spec.xi == 8.0
