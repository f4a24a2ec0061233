import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special

from mfb.bounds import (BOUNDS, analog_gap_bound, analog_gap_csir,
                        analog_gap_simple, csir_gap_general, digamma_int,
                        digital_gap_capacity_fb, digital_gap_csir,
                        doppler_sum_rate_slope, evaluate_bound, ideal_zf_rate,
                        qam_rate_lower, qam_ser_bound, regular_rate_upper,
                        rvq_gap_bound)
from mfb.errors import DomainError

snrs = st.floats(1e-3, 1e8)
quality = st.floats(1.0, 1e3)


def test_analog_gap_examples():
    assert analog_gap_bound(0.0, 100.0, 4) == 0.0
    assert analog_gap_bound(1 / 201, 100.0, 4) == pytest.approx(
        math.log2(1 + 100 / 201 * 0.75), abs=1e-12)
    # log2(1 + 0.75 * 100/201) = log2(1.37313) = 0.45747
    assert analog_gap_bound(1 / 201, 100.0, 4) == pytest.approx(0.45747, abs=1e-4)
    big = 1e12
    assert analog_gap_bound(1 / (1 + big), big, 4) == pytest.approx(math.log2(1.75), abs=1e-9)
    with pytest.raises(DomainError):
        analog_gap_bound(1.5, 10.0, 4)


def test_analog_gap_simple_examples():
    assert analog_gap_simple(1) == 1.0
    assert analog_gap_simple(3) == pytest.approx(math.log2(4 / 3))
    assert analog_gap_simple(1e12) < 1e-11
    with pytest.raises(DomainError):
        analog_gap_simple(0.5)


def test_rvq_gap_examples():
    assert rvq_gap_bound(12, 4, 100.0) == pytest.approx(math.log2(1 + 100 / 16), abs=1e-12)
    assert rvq_gap_bound(12, 4, 100.0) == pytest.approx(2.858, abs=1e-3)
    assert rvq_gap_bound(4000, 4, 100.0) == 0.0
    for snr in (1.0, 10.0, 1e4):
        b = 3 * math.log2(1 + snr)
        assert rvq_gap_bound(b, 4, snr) == pytest.approx(math.log2(1 + snr / (1 + snr)))


def test_digital_gap_examples():
    assert digital_gap_capacity_fb(1, 1e12) == pytest.approx(1.0, abs=1e-9)
    assert digital_gap_capacity_fb(2, 1e4) == pytest.approx(
        math.log2(1 + 1e4 / (1e4 + 1) ** 2), rel=1e-9)
    assert digital_gap_capacity_fb(2, 1e4) == pytest.approx(1.44e-4, rel=1e-2)
    assert digital_gap_capacity_fb(1, 1e-9) < 1e-8
    # vanishes at high SNR only when beta > 1
    assert digital_gap_capacity_fb(1.5, 1e300) < 1e-100


def test_csir_gap_examples():
    assert csir_gap_general(0.0, 0.0, 4, 100.0) == 0.0
    assert csir_gap_general(0.01, 0.02, 4, 100.0) == pytest.approx(
        math.log2(1 + 25 * 0.07), abs=1e-12)
    assert csir_gap_general(0.01, 0.02, 4, 100.0) == pytest.approx(1.459, abs=1e-3)
    # with sigma_f = 0 and the analog moment it reduces to the analog bound
    s2 = 1 / 101
    assert csir_gap_general(0.0, s2, 4, 100.0) == pytest.approx(
        analog_gap_bound(s2, 100.0, 4), rel=1e-12)


def test_csir_high_snr_forms():
    assert analog_gap_csir(1, 1, 1, 4) == pytest.approx(math.log2(3.25))
    assert analog_gap_csir(1, 1, 1, 4) == pytest.approx(1.70, abs=5e-3)
    assert analog_gap_csir(1e12, 1e12, 1e12, 4) < 1e-11
    assert digital_gap_csir(2, 1, 1, 4, 100.0) == pytest.approx(
        math.log2(2.25 + 100 / 101 ** 2), rel=1e-12)
    assert digital_gap_csir(2, 1, 1, 4, 100.0) == pytest.approx(1.176, abs=1e-3)
    assert digital_gap_csir(2, 1, 1, 4, 1e12) == pytest.approx(math.log2(2.25), abs=1e-9)
    assert digital_gap_csir(1, 1, 1, 4, 1e12) == pytest.approx(analog_gap_csir(1, 1, 1, 4), abs=1e-9)


def test_qam_ser_examples():
    for snr in (1.0, 10.0, 100.0, 1e6):
        assert qam_ser_bound(4, 4, snr) == pytest.approx(2 * math.exp(-1.5))
    assert qam_ser_bound(2, 4, 100.0) == pytest.approx(2 * math.exp(-15), rel=1e-12)
    assert qam_ser_bound(1, 3, 1.0) == pytest.approx(2 * math.exp(-1.5))
    assert qam_ser_bound(1, 4, 1e-3) == 1.0
    with pytest.raises(DomainError):
        qam_ser_bound(5, 4, 10.0)


def test_qam_rate_lower_examples():
    ps = 2 * math.exp(-15)
    expected = (1 - ps) ** 16 * (6 - math.log2(1.01))
    assert qam_rate_lower(6.0, 2, 4, 4, 100.0) == pytest.approx(expected, rel=1e-12)
    assert qam_rate_lower(6.0, 2, 4, 4, 100.0) == pytest.approx(5.9856, abs=1e-4)
    # alpha > 1 at very high SNR recovers R_zf
    assert qam_rate_lower(20.0, 2, 4, 4, 1e12) == pytest.approx(20.0, abs=1e-9)
    # P_s = 1 (clamped at low snr) gives 0
    assert qam_rate_lower(1.0, 1, 4, 4, 1e-3) == 0.0


def test_doppler_slope_examples():
    assert doppler_sum_rate_slope(4, 0.0926) == pytest.approx(3.2592)
    assert doppler_sum_rate_slope(4, 0.0) == 4
    assert doppler_sum_rate_slope(4, 0.25) == 2.0
    with pytest.raises(DomainError):
        doppler_sum_rate_slope(4, 0.5)


def test_digamma():
    assert digamma_int(4) == pytest.approx(-0.5772156649 + 11 / 6, abs=1e-12)
    for n in range(1, 12):
        assert digamma_int(n) == pytest.approx(special.digamma(n), abs=1e-10)


def test_regular_rate_upper():
    m, r = 4, 0.9
    ln2 = math.log(2)
    expected = (math.log2(1 / (1 - r * r) + m - 1) - special.digamma(m) / ln2
                + (1 / 7 + 1 / 6) / ln2)
    assert regular_rate_upper(m, r) == pytest.approx(expected, abs=1e-9)
    assert regular_rate_upper(m, r) == pytest.approx(1.681, abs=1e-3)
    # near r -> 1 it grows like -log2(1 - r^2)
    a, b = regular_rate_upper(4, 0.9999), regular_rate_upper(4, 0.99999)
    assert b - a == pytest.approx(math.log2((1 - 0.9999 ** 2) / (1 - 0.99999 ** 2)), abs=1e-3)
    with pytest.raises(DomainError):
        regular_rate_upper(4, 1.0)


@pytest.mark.parametrize('m', [2, 4, 6])
@pytest.mark.parametrize('snr', [1e-2, 1.0, 10.0, 1e3, 1e5])
def test_ideal_zf_rate_closed_form(m, snr):
    s = snr / m
    num = integrate.quad(lambda x: math.exp(-x) * math.log2(1 + x * s), 0, np.inf)[0]
    assert ideal_zf_rate(m, snr) == pytest.approx(num, rel=1e-9)


def test_ideal_zf_rate_small_snr_branch():
    # x = M/snr > 500 uses the asymptotic series
    assert ideal_zf_rate(4, 4 / 600) == pytest.approx(
        integrate.quad(lambda x: math.exp(-x) * math.log2(1 + x / 600), 0, np.inf)[0], rel=1e-8)


@given(snr=snrs, b1=quality, b2=quality, m=st.integers(2, 8))
def test_gap_bounds_nonnegative_and_monotone(snr, b1, b2, m):
    lo, hi = sorted((b1, b2))
    assert 0 <= analog_gap_simple(hi) <= analog_gap_simple(lo)
    assert 0 <= digital_gap_capacity_fb(hi, snr) <= digital_gap_capacity_fb(lo, snr) + 1e-15
    assert 0 <= analog_gap_csir(hi, 1, 1, m) <= analog_gap_csir(lo, 1, 1, m)
    assert analog_gap_csir(1, hi, 1, m) <= analog_gap_csir(1, lo, 1, m)
    assert analog_gap_csir(1, 1, hi, m) <= analog_gap_csir(1, 1, lo, m)
    assert digital_gap_csir(2, hi, hi, m, snr) <= digital_gap_csir(2, lo, lo, m, snr)
    s_hi, s_lo = 1 / (1 + hi * snr), 1 / (1 + lo * snr)
    assert 0 <= analog_gap_bound(s_hi, snr, m) <= analog_gap_bound(s_lo, snr, m)
    assert rvq_gap_bound(hi, m, snr) <= rvq_gap_bound(lo, m, snr)


@given(snr=snrs, beta=quality, m=st.integers(2, 8))
def test_simple_form_dominates(snr, beta, m):
    exact = analog_gap_bound(1 / (1 + beta * snr), snr, m)
    assert exact <= analog_gap_simple(beta) + 1e-15


@given(snr=st.floats(1.0001, 1e8), beta=st.floats(1.01, 10))
def test_digital_below_analog(snr, beta):
    assert digital_gap_capacity_fb(beta, snr) < analog_gap_simple(beta)


def test_registry_shapes_and_errors():
    grid = [0, 10, 20, 30, 40]
    c = evaluate_bound('analog-gap', grid, beta=1, m=4)
    assert c.value_bits.shape == (5,) and np.all(c.value_bits <= 1.0)
    assert evaluate_bound('analog-gap-simple', grid, beta=1).value_bits.tolist() == [1.0] * 5
    j = evaluate_bound('analog-gap', grid, beta=1, m=4, process='jakes', F=0.25, delay=1)
    assert np.all(j.value_bits >= c.value_bits)
    with pytest.raises(DomainError):
        evaluate_bound('nope', grid)
    with pytest.raises(DomainError, match='beta'):
        evaluate_bound('analog-gap', grid, m=4)
    with pytest.raises(DomainError):
        evaluate_bound('analog-gap', grid, beta=0.5, m=4)
    for name, (required, _) in BOUNDS.items():
        params = {'beta': 2, 'beta1': 1, 'beta2': 1, 'alpha': 1, 'bits': 8, 'm': 4,
                  'F': 0.1, 'r': 0.9}
        out = evaluate_bound(name, [5, 10], **params)
        assert np.all(np.isfinite(out.value_bits)), name
