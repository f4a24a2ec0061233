"""
Closed-form rate-gap bounds, SER bound and high-SNR slopes.

Every function broadcasts over numpy arrays. Rates and gaps are in bits per
channel use (log base 2); ``snr`` is the linear P/N0.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import DomainError

__all__ = ['BoundCurve', 'EULER_GAMMA', 'analog_gap_bound',
           'analog_gap_simple', 'rvq_gap_bound', 'digital_gap_capacity_fb',
           'csir_gap_general', 'analog_gap_csir', 'digital_gap_csir',
           'qam_ser_bound', 'qam_rate_lower', 'doppler_sum_rate_slope',
           'digamma_int', 'regular_rate_upper', 'ideal_zf_rate', 'BOUNDS',
           'evaluate_bound']

EULER_GAMMA = 0.5772156649


@dataclass
class BoundCurve:
    snr_db: np.ndarray
    value_bits: np.ndarray
    label: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.snr_db = np.asarray(self.snr_db, dtype=float)
        self.value_bits = np.broadcast_to(
            np.asarray(self.value_bits, dtype=float), self.snr_db.shape).copy()


def _at_least_one(name, x):
    if np.any(np.asarray(x) < 1):
        raise DomainError(f"{name} must be >= 1")


def analog_gap_bound(sigma_e_sq, snr, m):
    """Per-user gap of mismatched ZF: ``log2(1 + sigma_e^2 snr (M-1)/M)``."""
    sigma_e_sq = np.asarray(sigma_e_sq, dtype=float)
    if np.any((sigma_e_sq < 0) | (sigma_e_sq > 1)):
        raise DomainError("sigma_e_sq must lie in [0, 1]")
    return np.log2(1.0 + sigma_e_sq * snr * (m - 1) / m)


def analog_gap_simple(beta):
    """High-SNR analog gap ceiling ``log2(1 + 1/beta)``."""
    _at_least_one('beta', beta)
    return np.log2(1.0 + 1.0 / np.asarray(beta, dtype=float))


def rvq_gap_bound(bits, m, snr):
    """RVQ gap ``log2(1 + snr 2^(-B/(M-1)))``."""
    bits = np.asarray(bits, dtype=float)
    return np.log2(1.0 + snr * np.exp2(-bits / (m - 1)))


def digital_gap_capacity_fb(beta, snr):
    """RVQ gap with ``B = beta M log2(1 + snr)`` bits sent at capacity."""
    _at_least_one('beta', beta)
    snr = np.asarray(snr, dtype=float)
    # snr / (1+snr)^beta, computed in the log domain to survive large snr
    ratio = np.exp(np.log(snr) - beta * np.log1p(snr))
    return np.log2(1.0 + ratio)


def csir_gap_general(sigma_f_sq, interference_moment, m, snr):
    """Gap with imperfect CSIR: ``log2(1 + snr/M (sigma_f^2 + (M-1) E|h_k^H v_j|^2))``."""
    return np.log2(1.0 + snr / m * (sigma_f_sq + (m - 1) * interference_moment))


def analog_gap_csir(beta, beta1, beta2, m):
    """High-SNR analog gap with trained CSIR."""
    for name, b in (('beta', beta), ('beta1', beta1), ('beta2', beta2)):
        _at_least_one(name, b)
    return np.log2(1.0 + 1.0 / beta1 + 1.0 / (m * beta2) + 1.0 / beta)


def digital_gap_csir(beta, beta1, beta2, m, snr):
    """Capacity-scaled digital gap with trained CSIR."""
    for name, b in (('beta', beta), ('beta1', beta1), ('beta2', beta2)):
        _at_least_one(name, b)
    snr = np.asarray(snr, dtype=float)
    fb = np.exp(np.log(snr) - beta * np.log1p(snr))
    return np.log2(1.0 + 1.0 / beta1 + 1.0 / (m * beta2) + fb)


def qam_ser_bound(alpha, beta, snr):
    """
    Symbol error bound of uncoded QAM with ``L = snr^(alpha/beta)`` points.

    ``min(1, 2 exp(-1.5 snr^(1 - alpha/beta)))``, clamped because the raw
    expression exceeds 1 at low SNR.
    """
    if np.any(np.asarray(alpha) > np.asarray(beta)):
        raise DomainError("alpha must not exceed beta")
    snr = np.asarray(snr, dtype=float)
    return np.minimum(1.0, 2.0 * np.exp(-1.5 * snr ** (1.0 - alpha / beta)))


def qam_rate_lower(rzf_per_user, alpha, beta, m, snr):
    """
    Achievable per-user rate with RVQ bits sent over uncoded QAM.

    A user whose feedback packet has any symbol error is credited zero
    rate; otherwise ideal ZF minus the quantization gap.
    """
    ps = qam_ser_bound(alpha, beta, snr)
    factor = (1.0 - ps) ** (beta * m)
    gap = np.log2(1.0 + np.asarray(snr, dtype=float) ** (1.0 - alpha))
    return factor * np.maximum(0.0, rzf_per_user - gap)


def doppler_sum_rate_slope(m, F):
    """Multiplexing gain ``M (1 - 2F)`` of delayed analog feedback."""
    if not 0.0 <= F < 0.5:
        raise DomainError(f"F must lie in [0, 1/2), got {F}")
    return m * (1.0 - 2.0 * F)


def digamma_int(n):
    """``psi(n) = -gamma + sum_{i<n} 1/i`` for a positive integer n."""
    n = int(n)
    if n < 1:
        raise DomainError("digamma_int needs n >= 1")
    return -EULER_GAMMA + sum(1.0 / i for i in range(1, n))


def regular_rate_upper(m, r):
    """Per-user rate ceiling for an AR(1) process with delayed feedback."""
    if not 0.0 <= r < 1.0:
        raise DomainError(f"r must lie in [0, 1), got {r}")
    if m < 2:
        raise DomainError("need M >= 2")
    ln2 = np.log(2.0)
    return (np.log2(1.0 / (1.0 - r * r) + (m - 1))
            - digamma_int(m) / ln2
            + (1.0 / (2 * m - 1) + 1.0 / (2 * m - 2)) / ln2)


def ideal_zf_rate(m, snr):
    """
    Ergodic per-user rate of ZF with perfect CSI, uniform power, K = M.

    ``|h_k^H v_k|^2`` is Exp(1) when K = M, so the rate is
    ``E[log2(1 + X snr/M)] = exp(1/s) E1(1/s) / ln 2`` with ``s = snr/M``.
    """
    s = np.asarray(snr, dtype=float) / m
    x = 1.0 / s
    # exp(x) E1(x) overflows for large x; its asymptotic series is accurate there.
    big = x > 500
    xs = np.where(big, 1.0, x)
    xb = np.where(big, x, 1.0)
    series = sum((-1) ** k * math.factorial(k) / xb ** k for k in range(7)) / xb
    val = np.where(big, series, np.exp(xs) * special.exp1(xs))
    return val / np.log(2.0)


# ---------------------------------------------------------------------------
# Named bound curves (CLI and figure presets)
# ---------------------------------------------------------------------------
def _analog_sigma(p, snr):
    from .fading import AR1, IIDBlock, Jakes, csit_error_variance_delayed
    kind = p.get('process', 'iid')
    process = {'iid': lambda: IIDBlock(), 'jakes': lambda: Jakes(p['F']),
               'ar1': lambda: AR1(p['r'])}[kind]()
    return np.array([csit_error_variance_delayed(process, p['beta'], s,
                                                 p.get('delay', 0))
                     for s in np.atleast_1d(snr)])


def _csir_moment(p, snr):
    e1 = 1.0 / (1.0 + p['beta1'] * snr)
    return e1 + (1.0 - e1) / (1.0 + p['beta'] * snr)


BOUNDS = {
    'analog-gap': (('beta', 'm'), lambda p, s: analog_gap_bound(
        _analog_sigma(p, s), s, p['m'])),
    'analog-gap-simple': (('beta',), lambda p, s: analog_gap_simple(p['beta'])),
    'rvq-gap': (('bits', 'm'), lambda p, s: rvq_gap_bound(p['bits'], p['m'], s)),
    'digital-gap': (('beta',), lambda p, s: digital_gap_capacity_fb(p['beta'], s)),
    'csir-gap': (('beta', 'beta1', 'beta2', 'm'), lambda p, s: csir_gap_general(
        1.0 / (1.0 + p['beta2'] * s), _csir_moment(p, s), p['m'], s)),
    'analog-gap-csir': (('beta', 'beta1', 'beta2', 'm'), lambda p, s:
                        analog_gap_csir(p['beta'], p['beta1'], p['beta2'], p['m'])),
    'digital-gap-csir': (('beta', 'beta1', 'beta2', 'm'), lambda p, s:
                         digital_gap_csir(p['beta'], p['beta1'], p['beta2'],
                                          p['m'], s)),
    'qam-ser': (('alpha', 'beta'), lambda p, s: qam_ser_bound(
        p['alpha'], p['beta'], s)),
    'qam-rate-lower': (('alpha', 'beta', 'm'), lambda p, s: qam_rate_lower(
        ideal_zf_rate(p['m'], s), p['alpha'], p['beta'], p['m'], s)),
    'ideal-zf': (('m',), lambda p, s: ideal_zf_rate(p['m'], s)),
    'doppler-slope': (('m', 'F'), lambda p, s: doppler_sum_rate_slope(
        p['m'], p['F'])),
    'regular-upper': (('m', 'r'), lambda p, s: regular_rate_upper(p['m'], p['r'])),
}


def evaluate_bound(name, snr_db, **params):
    """
    Evaluate a named bound on an SNR grid (dB).

    Parameters not used by the bound are ignored; missing ones raise
    :class:`DomainError`.
    """
    if name not in BOUNDS:
        raise DomainError(f"unknown bound {name!r}; choose from "
                          + ', '.join(sorted(BOUNDS)))
    required, fn = BOUNDS[name]
    missing = [k for k in required if params.get(k) is None]
    if missing:
        raise DomainError(f"bound {name!r} needs " + ', '.join(missing))
    if 'beta' in params and params['beta'] is not None and params['beta'] < 1:
        raise DomainError(f"beta must be >= 1, got {params['beta']}")
    if 'alpha' in required and params['alpha'] < 1:
        raise DomainError(f"alpha must be >= 1, got {params['alpha']}")
    snr_db = np.asarray(snr_db, dtype=float)
    snr = 10.0 ** (snr_db / 10.0)
    used = {k: params[k] for k in params if params[k] is not None}
    return BoundCurve(snr_db=snr_db, value_bits=fn(used, snr), label=name,
                      params=used)
