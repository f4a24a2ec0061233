import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from mfb import fading
from mfb.errors import DomainError, QuadratureError
from mfb.fading import (AR1, IIDBlock, Jakes, csit_error_variance_delayed,
                        doppler_eps1_bounds, doppler_F, filtering_mmse,
                        log_spectrum_integral, prediction_mmse, spectrum,
                        wiener_mmse)


def ar1_eps1_closed_form(r, delta):
    """Innovation variance of AR(1) observed in white noise (scalar Riccati root)."""
    a = delta * (1 + r * r) + 1 - r * r
    return (a + math.sqrt(a * a - 4 * delta * delta * r * r)) / 2 - delta


def dense_eps1(process, delta):
    """exp(int log(delta + S)) - delta by plain adaptive quadrature in xi."""
    if isinstance(process, Jakes):
        F = process.F
        f = lambda x: math.log(delta + (1 / (math.pi * math.sqrt(F * F - x * x))
                                        if abs(x) < F else 0.0))
        parts = [(-0.5, -F), (-F, 0.0), (0.0, F), (F, 0.5)]
    else:
        f = lambda x: math.log(delta + float(process.spectrum(x)))
        parts = [(-0.5, 0.0), (0.0, 0.5)]
    total = sum(integrate.quad(f, a, b, limit=500, epsabs=1e-13, epsrel=1e-13)[0]
                for a, b in parts)
    return math.exp(total) - delta


def test_spectrum_examples():
    assert spectrum(IIDBlock(), 0.3) == 1.0
    assert np.allclose(spectrum(AR1(0.0), np.linspace(-0.5, 0.5, 11)), 1.0)
    assert spectrum(Jakes(0.25), 0.0) == pytest.approx(1 / (math.pi * 0.25), rel=1e-14)
    assert spectrum(Jakes(0.25), 0.3) == 0.0
    with pytest.raises(DomainError):
        spectrum(IIDBlock(), 0.6)


@pytest.mark.parametrize('process', [Jakes(0.05), Jakes(0.25), Jakes(0.45),
                                     AR1(0.5), AR1(0.99)])
def test_unit_power(process):
    if isinstance(process, Jakes):
        F = process.F
        # algebraic endpoint weight (F - x)^-1/2 (F + x)^-1/2 handled by QAWS
        val, _ = integrate.quad(lambda x: 1 / math.pi, -F, F, weight='alg',
                                wvar=(-0.5, -0.5))
    else:
        val, _ = integrate.quad(lambda x: float(process.spectrum(x)), -0.5, 0.5,
                                points=[0.0], limit=200)
    assert val == pytest.approx(1.0, abs=1e-6)


def test_process_validation():
    for bad in (0.0, 0.5, -0.1):
        with pytest.raises(DomainError):
            Jakes(bad)
    for bad in (1.0, -0.2):
        with pytest.raises(DomainError):
            AR1(bad)


def test_autocorrelation():
    assert AR1(0.9).autocorrelation(3) == pytest.approx(0.729)
    assert Jakes(0.1).autocorrelation(0) == pytest.approx(1.0)
    assert IIDBlock().autocorrelation(np.array([0, 1])).tolist() == [1.0, 0.0]


@pytest.mark.parametrize('F', [0.05, 0.1, 0.25, 0.4])
def test_jakes_log_integral_closed_form(F):
    f = lambda x: math.log(1 / (math.pi * math.sqrt(F * F - x * x)))
    num = sum(integrate.quad(f, a, b, limit=200)[0] for a, b in ((-F, 0), (0, F)))
    assert log_spectrum_integral(Jakes(F)) == pytest.approx(num, abs=1e-9)


@pytest.mark.parametrize('r', [0.0, 0.5, 0.9, 0.99, 0.999])
@pytest.mark.parametrize('delta', [1e-6, 1e-3, 1e-1, 1.0, 100.0])
def test_ar1_matches_closed_form(r, delta):
    assert prediction_mmse(AR1(r), delta) == pytest.approx(
        ar1_eps1_closed_form(r, delta), rel=1e-8)


@pytest.mark.parametrize('process', [AR1(0.9), Jakes(0.1), Jakes(0.25), Jakes(0.0926)])
@pytest.mark.parametrize('delta', [1e-3, 1e-2, 1e-1, 1.0, 10.0])
def test_eps1_matches_dense_quadrature(process, delta):
    assert prediction_mmse(process, delta) == pytest.approx(
        dense_eps1(process, delta), abs=1e-6)


@pytest.mark.parametrize('r', [0.5, 0.9, 0.99])
def test_ar1_noiseless_limit(r):
    assert prediction_mmse(AR1(r), 1e-12) == pytest.approx(1 - r * r, abs=1e-6)


@pytest.mark.parametrize('delta', [1e-9, 0.1, 1.0, 1e6])
def test_iid_unpredictable(delta):
    assert prediction_mmse(IIDBlock(), delta) == pytest.approx(1.0, rel=1e-9)


def test_prediction_rejects_bad_delta():
    with pytest.raises(DomainError):
        prediction_mmse(AR1(0.5), 0.0)


def test_quadrature_failure_is_reported(monkeypatch):
    monkeypatch.setattr(fading, 'QUAD_LIMIT', 1)
    with pytest.raises(QuadratureError):
        prediction_mmse(Jakes(0.25), 1e-3)


def test_filtering_examples():
    assert filtering_mmse(1.0, 1.0) == 0.5
    assert filtering_mmse(0.3, 1e12) == pytest.approx(0.3, rel=1e-10)
    with pytest.raises(DomainError):
        filtering_mmse(0.0, 1.0)


def test_filtering_high_snr_limit_jakes():
    # P eps0(1/(beta P)) -> 1/beta from below, monotonically
    ratios = []
    for p in (100.0, 1e3, 1e4, 1e5, 1e6):
        delta = 1.0 / p
        eps0 = filtering_mmse(prediction_mmse(Jakes(0.1), delta), delta)
        ratios.append(p * eps0)
    assert 0.5 <= ratios[0] <= 1.0
    assert np.all(np.diff(ratios) > 0) and ratios[-1] < 1.0
    assert 1 - ratios[-1] < 0.5 * (1 - ratios[0])


@given(d1=st.floats(1e-6, 1e3), d2=st.floats(1e-6, 1e3),
       process=st.sampled_from([AR1(0.3), AR1(0.95), Jakes(0.1), Jakes(0.3)]))
def test_eps1_monotone_and_eps0_below(d1, d2, process):
    lo, hi = sorted((d1, d2))
    e_lo, e_hi = prediction_mmse(process, lo), prediction_mmse(process, hi)
    assert e_lo <= e_hi * (1 + 1e-9)
    res = wiener_mmse(process, lo)
    assert res.eps0 <= min(res.eps1, lo) * (1 + 1e-12)
    assert 0 < res.eps1 <= 1 + 1e-9
    assert res.eps0 == pytest.approx(lo * res.eps1 / (lo + res.eps1), rel=1e-10)


@pytest.mark.parametrize('F', [0.02, 0.0926, 0.25, 0.4])
@pytest.mark.parametrize('delta', [1e-5, 1e-3, 1e-2, 1e-1, 1.0])
def test_doppler_sandwich(F, delta):
    lower, upper = doppler_eps1_bounds(F, delta, log_spectrum_integral(Jakes(F)))
    eps1 = prediction_mmse(Jakes(F), delta)
    assert lower - 1e-8 <= eps1 <= upper + 1e-8


def test_doppler_bounds_examples():
    F = 0.0926
    lo, up = doppler_eps1_bounds(F, 1e-4, log_spectrum_integral(Jakes(F)))
    assert 0 < lo < up
    # delta -> 0: upper / delta^(1-2F) -> (1/(2F))^(2F)
    d = 1e-14
    _, up = doppler_eps1_bounds(0.25, d, 0.0)
    assert up / d ** 0.5 == pytest.approx((1 / 0.5) ** 0.5, rel=1e-6)
    for bad in (0.0, 0.5):
        with pytest.raises(DomainError):
            doppler_eps1_bounds(bad, 0.1, 0.0)


def test_doppler_F():
    F = doppler_F(50 / 3.6, 2e9, 1e-3)
    assert F == pytest.approx(0.0926, abs=2e-4)
    assert doppler_F(100 / 3.6, 2e9, 1e-3) == pytest.approx(2 * F, rel=1e-12)
    with pytest.raises(DomainError):
        doppler_F(0.0, 2e9, 1e-3)
    with pytest.raises(DomainError):
        doppler_F(300.0, 2e9, 1e-3)


def test_csit_error_iid_static_formula():
    for beta, snr in ((1, 10), (2, 100), (3.5, 0.1)):
        assert csit_error_variance_delayed(IIDBlock(), beta, snr, 0) == pytest.approx(
            1 / (1 + beta * snr), abs=1e-9)
    assert csit_error_variance_delayed(IIDBlock(), 1, 10, 1) == pytest.approx(1.0)


def test_csit_error_regular_floor():
    assert csit_error_variance_delayed(AR1(0.99), 1.0, 1e4, 1) >= 1 - 0.99 ** 2


def test_csit_error_doppler_slope():
    snr = np.logspace(3, 6, 7)
    s2 = [csit_error_variance_delayed(Jakes(0.1), 1.0, s, 1) for s in snr]
    slope = np.polyfit(np.log(snr), np.log(s2), 1)[0]
    assert slope == pytest.approx(-0.8, abs=0.05)


def test_csit_error_domain():
    with pytest.raises(DomainError):
        csit_error_variance_delayed(IIDBlock(), 0.5, 10, 0)
    with pytest.raises(DomainError):
        csit_error_variance_delayed(IIDBlock(), 1, 10, 2)
