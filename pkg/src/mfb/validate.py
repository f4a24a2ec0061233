"""
Self-check suite: each check compares the library against an oracle that
does not share its code path.

* Wiener: spectral prediction error vs. a brute-force finite-window
  predictor built from the autocorrelation alone.
* RVQ: mean quantization distortion of an explicit random codebook vs.
  ``2^(-B/(M-1))`` and its exact order-statistic mean.
* QAM: simulated Gray-mapped square-QAM symbol errors vs. the SER bound.
* Bound domination: simulated rate gaps vs. closed-form gap bounds.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from . import bounds, fading
from .fading import AR1, Jakes
from .feedback import (Analog, DigitalRVQ, Perfect, rvq_expected_distortion,
                       rvq_quantize_many, qam_ser_exact, simulate_qam_ser,
                       square_qam_order)
from .montecarlo import ScenarioConfig, run_scenario

__all__ = ['Check', 'finite_window_prediction_mmse',
           'finite_window_filtering_mmse', 'run_validation', 'format_report',
           'WIENER_TAPS']

WIENER_TAPS = 2048


@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    reference: float
    std_err: float = float('nan')
    detail: str = ''

    def line(self):
        status = 'PASS' if self.passed else 'FAIL'
        se = '' if math.isnan(self.std_err) else f" se={self.std_err:.3g}"
        extra = f"  ({self.detail})" if self.detail else ''
        return (f"{status}  {self.name}: measured={self.measured:.6g} "
                f"reference={self.reference:.6g}{se}{extra}")


def _acf(process, lags):
    return np.asarray(process.autocorrelation(np.asarray(lags, dtype=float)),
                      dtype=float)


def _window_error(acf_matrix_lags, cross, c0, delta):
    R = linalg.toeplitz(acf_matrix_lags) + delta * np.eye(len(acf_matrix_lags))
    w = linalg.cho_solve(linalg.cho_factor(R), cross)
    return float(c0 - cross @ w)


def finite_window_prediction_mmse(process, delta, n_taps):
    """
    One-step prediction MMSE of ``h(t)`` from ``h(t-i) + w``, i = 1..N.

    Solves the N x N Toeplitz normal equations directly from the
    autocorrelation; no spectral quantity is used.
    """
    c = _acf(process, np.arange(n_taps + 1))
    return _window_error(c[:n_taps], c[1:], c[0], delta)


def finite_window_filtering_mmse(process, delta, n_taps):
    """MMSE of ``h(t)`` from noisy samples at lags 0..N (current included)."""
    c = _acf(process, np.arange(n_taps + 1))
    return _window_error(c, c, c[0], delta)


def _guard(name, fn):
    try:
        return fn()
    except Exception as exc:  # a crash is reported as a failed check
        return [Check(name, False, float('nan'), float('nan'),
                      detail=f"{type(exc).__name__}: {exc}")]


def check_wiener(n_taps=WIENER_TAPS):
    out = []
    for process, delta in ((AR1(0.9), 1e-2), (Jakes(0.1), 1e-2),
                           (Jakes(0.25), 1e-3)):
        spectral = fading.prediction_mmse(process, delta)
        win = finite_window_prediction_mmse(process, delta, n_taps)
        rel = abs(win - spectral) / spectral
        out.append(Check(f"wiener {process} delta={delta:g} N={n_taps}",
                         rel < 0.02, spectral, win, detail=f"rel diff {rel:.2e}"))
    process, delta, n = Jakes(0.1), 1e-2, 256
    eps_n = finite_window_prediction_mmse(process, delta, n)
    direct = finite_window_filtering_mmse(process, delta, n)
    ident = fading.filtering_mmse(eps_n, delta)
    out.append(Check("filtering identity, Jakes F=0.1", abs(ident - direct) < 1e-10,
                     ident, direct))
    return out


def check_rvq(seed=0, trials=2000):
    out = []
    rng = np.random.default_rng([seed, 1])
    for m, bits in ((2, 10), (4, 12)):
        u = (rng.standard_normal((trials, m)) + 1j * rng.standard_normal((trials, m)))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        _, sin2 = rvq_quantize_many(u, bits, rng)
        mean = float(sin2.mean())
        se = float(sin2.std(ddof=1) / math.sqrt(trials))
        ceiling = 2.0 ** (-bits / (m - 1))
        exact = rvq_expected_distortion(bits, m)
        ok = (0.5 * ceiling <= mean <= ceiling + 3 * se
              and abs(mean - exact) <= 4 * se)
        out.append(Check(f"rvq distortion M={m} B={bits}", ok, mean, ceiling, se,
                         detail=f"exact mean {exact:.6g}"))
    return out


def check_qam(seed=0, n_symbols=200_000):
    out = []
    rng = np.random.default_rng([seed, 2])
    for alpha, beta, snr_db in ((2, 4, 10), (4, 4, 10), (4, 4, 20)):
        snr = 10 ** (snr_db / 10)
        order = square_qam_order(alpha, beta, snr)
        ser = simulate_qam_ser(order, snr, n_symbols, rng)
        se = math.sqrt(max(ser * (1 - ser), 1e-300) / n_symbols)
        bound = float(bounds.qam_ser_bound(alpha, beta, snr))
        exact = qam_ser_exact(order, snr)
        out.append(Check(f"qam ser alpha={alpha} beta={beta} {snr_db} dB "
                         f"({order}-QAM)", ser <= bound, ser, bound, se,
                         detail=f"exact {exact:.4g}"))
    return out


def _dominated(name, scheme, bound, m, grid, trials, seed):
    cfg = ScenarioConfig(m=m, snr_grid_db=grid, scheme=scheme, trials=trials,
                         seed=seed)
    curve = run_scenario(cfg)
    excess = curve.gap_bits - (bound + 3 * curve.gap_std_err)
    worst = int(np.argmax(excess))
    return Check(f"gap <= bound + 3se, {name}", bool(np.all(excess <= 0)),
                 float(curve.gap_bits[worst]), float(bound[worst]),
                 float(curve.gap_std_err[worst]),
                 detail=f"worst at {grid[worst]:g} dB")


def check_domination(seed=0, trials=4000):
    out = []
    m = 4
    grid = (0.0, 10.0, 20.0)
    snr = 10 ** (np.asarray(grid) / 10)
    cases = [
        ('analog beta=1', Analog(beta=1.0),
         bounds.analog_gap_bound(1.0 / (1.0 + snr), snr, m)),
        ('analog beta=2', Analog(beta=2.0),
         bounds.analog_gap_bound(1.0 / (1.0 + 2 * snr), snr, m)),
        ('delayed analog Jakes F=0.1', Analog(1.0, 1, Jakes(0.1)),
         bounds.analog_gap_bound([fading.csit_error_variance_delayed(
             Jakes(0.1), 1.0, s, 1) for s in snr], snr, m)),
        ('rvq B=12', DigitalRVQ(bits=12), bounds.rvq_gap_bound(12, m, snr)),
    ]
    for name, scheme, bound in cases:
        out.extend(_guard(f"gap <= bound + 3se, {name}", lambda: [
            _dominated(name, scheme, bound, m, grid, trials, seed)]))
    cfg = ScenarioConfig(m=m, snr_grid_db=grid, scheme=Perfect(), trials=trials,
                         seed=seed)
    curve = run_scenario(cfg)
    ref = bounds.ideal_zf_rate(m, snr)
    z = np.abs(curve.per_user_rate_bits - ref) / curve.std_err
    worst = int(np.argmax(z))
    out.append(Check("ideal ZF rate vs closed form", bool(np.all(z < 4)),
                     float(curve.per_user_rate_bits[worst]), float(ref[worst]),
                     float(curve.std_err[worst]),
                     detail=f"max |z| {z.max():.2f}"))
    return out


def run_validation(seed=0):
    """Run every check; returns a list of :class:`Check`."""
    results = []
    for name, fn in (('wiener', check_wiener), ('rvq', lambda: check_rvq(seed)),
                     ('qam', lambda: check_qam(seed)),
                     ('domination', lambda: check_domination(seed))):
        results.extend(_guard(name, fn))
    return results


def format_report(results):
    lines = [r.line() for r in results]
    n_fail = sum(not r.passed for r in results)
    lines.append(f"{len(results) - n_fail}/{len(results)} checks passed")
    return '\n'.join(lines)
