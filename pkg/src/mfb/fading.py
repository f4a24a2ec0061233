"""
Temporal fading models and Wiener prediction / filtering errors.

Each channel coefficient is a unit-power stationary Gaussian process with
Doppler spectrum ``S(xi)`` on the normalized frequency band [-1/2, 1/2].
Noisy past observations ``g(t) = h(t) + w(t)``, ``w ~ CN(0, delta)``, give
the one-step prediction error

    eps1(delta) = exp(int log(delta + S(xi)) dxi) - delta

and the filtering error ``eps0 = delta*eps1 / (delta + eps1)``.

Quadrature notes
----------------
* Jakes: the band-edge singularity of ``S`` is removed with the change of
  variable ``xi = F sin(theta)``. The singular part ``int log S`` over the
  band has the closed form ``2F (1 - log(2 pi F))``; only the smooth
  remainder ``F int cos(theta) log1p(delta pi F cos(theta)) dtheta`` is
  integrated numerically.
* AR(1): integrated numerically on [0, 1/2] with a breakpoint at the
  spectral peak width. The closed form is kept for tests only.
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError, QuadratureError

__all__ = ['IIDBlock', 'Jakes', 'AR1', 'MmseResult', 'SPEED_OF_LIGHT',
           'spectrum', 'autocorrelation', 'log_spectrum_integral',
           'prediction_mmse', 'filtering_mmse', 'wiener_mmse',
           'doppler_eps1_bounds', 'doppler_F', 'csit_error_variance_delayed']

SPEED_OF_LIGHT = 2.9979e8  # m/s

QUAD_EPSABS = 1e-9
QUAD_LIMIT = 200


@dataclass(frozen=True)
class IIDBlock:
    """Independent block fading: white, unpredictable."""

    def spectrum(self, xi):
        return np.ones_like(np.asarray(xi, dtype=float))

    def autocorrelation(self, tau):
        return (np.asarray(tau) == 0).astype(float)


@dataclass(frozen=True)
class Jakes:
    """Clarke/Jakes spectrum band-limited to [-F, F]."""
    F: float

    def __post_init__(self):
        if not 0.0 < self.F < 0.5:
            raise DomainError(f"Jakes F must lie in (0, 1/2), got {self.F}")

    def spectrum(self, xi):
        xi = np.asarray(xi, dtype=float)
        inside = np.abs(xi) < self.F
        d = np.sqrt(np.where(inside, self.F ** 2 - xi ** 2, 1.0))
        return np.where(inside, 1.0 / (np.pi * d), 0.0)

    def autocorrelation(self, tau):
        return special.j0(2 * np.pi * self.F * np.asarray(tau, dtype=float))


@dataclass(frozen=True)
class AR1:
    """Gauss-Markov process with first-lag correlation r."""
    r: float

    def __post_init__(self):
        if not 0.0 <= self.r < 1.0:
            raise DomainError(f"AR1 r must lie in [0, 1), got {self.r}")

    def spectrum(self, xi):
        xi = np.asarray(xi, dtype=float)
        r = self.r
        den = np.abs(1.0 - r * np.exp(-2j * np.pi * xi)) ** 2
        return (1.0 - r * r) / den

    def autocorrelation(self, tau):
        return self.r ** np.abs(np.asarray(tau, dtype=float))


@dataclass(frozen=True)
class MmseResult:
    eps1: float
    eps0: float
    delta: float


def spectrum(process, xi):
    """Doppler spectrum ``S(xi)`` of ``process`` for ``|xi| <= 1/2``."""
    xi = np.asarray(xi, dtype=float)
    if np.any(np.abs(xi) > 0.5):
        raise DomainError("normalized frequency must lie in [-1/2, 1/2]")
    return process.spectrum(xi)


def autocorrelation(process, tau):
    return process.autocorrelation(tau)


def _quad(f, a, b, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter('error', integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, a, b, epsabs=QUAD_EPSABS,
                                      epsrel=1e-12, limit=QUAD_LIMIT,
                                      points=points)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"quadrature failed on [{a}, {b}]: {exc}")
    if not np.isfinite(val) or err > QUAD_EPSABS * max(1.0, abs(val)):
        raise QuadratureError(f"quadrature error estimate {err:.3g} too large")
    return val


def log_spectrum_integral(process):
    """
    ``int log S(xi) dxi`` over the support of ``S``.

    Closed forms: Jakes over [-F, F] gives ``2F (1 - log(2 pi F))``;
    AR(1) over [-1/2, 1/2] gives ``log(1 - r^2)``; white gives 0.
    """
    if isinstance(process, Jakes):
        F = process.F
        return 2 * F * (1.0 - math.log(2 * math.pi * F))
    if isinstance(process, AR1):
        return math.log1p(-process.r ** 2)
    if isinstance(process, IIDBlock):
        return 0.0
    raise TypeError(f"unknown fading process {process!r}")


def _log1p_ratio_integral(process, delta):
    """``int log(1 + S(xi)/delta) dxi`` over [-1/2, 1/2]."""
    if isinstance(process, IIDBlock):
        return math.log1p(1.0 / delta)
    if isinstance(process, AR1):
        r = process.r
        if r == 0.0:
            return math.log1p(1.0 / delta)
        width = (1.0 - r) / (2 * math.pi)
        pts = [p for p in (width, 10 * width) if p < 0.5]

        def f(x):
            return math.log1p(process.spectrum(x) / delta)
        return 2.0 * _quad(f, 0.0, 0.5, points=pts or None)
    if isinstance(process, Jakes):
        F = process.F
        c = delta * math.pi * F
        if delta >= 1.0:
            # Integrand is O(1/delta); the split below would cancel.
            def h(t):
                ct = math.cos(t)
                return ct * math.log1p(1.0 / (c * ct)) if ct > 0 else 0.0
            return 2.0 * F * _quad(h, 0.0, 0.5 * math.pi)

        def g(t):
            ct = math.cos(t)
            return ct * math.log1p(c * ct)
        smooth = 2.0 * F * _quad(g, 0.0, 0.5 * math.pi)
        return smooth + log_spectrum_integral(process) - 2 * F * math.log(delta)
    raise TypeError(f"unknown fading process {process!r}")


def prediction_mmse(process, delta):
    """
    One-step prediction MMSE from the infinite noisy past.

    Evaluated as ``delta * expm1(int log(1 + S/delta))``, an exact rewrite
    of ``exp(int log(delta + S)) - delta`` that keeps precision for large
    ``delta``. For Jakes this is the band-limited form with the factor
    ``delta^(1 - 2F)`` pulled out of the integral.

    Raises
    ------
    QuadratureError
        If adaptive quadrature cannot meet its tolerance.
    """
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    return delta * math.expm1(_log1p_ratio_integral(process, delta))


def filtering_mmse(eps1, delta):
    """Filtering MMSE given the prediction error and the current sample."""
    if not (eps1 > 0 and delta > 0):
        raise DomainError("eps1 and delta must be positive")
    return delta * eps1 / (delta + eps1)


def wiener_mmse(process, delta):
    eps1 = prediction_mmse(process, delta)
    return MmseResult(eps1=eps1, eps0=filtering_mmse(eps1, delta), delta=delta)


def doppler_eps1_bounds(F, delta, log_integral):
    """
    Closed-form lower and upper bounds on eps1 for a Doppler process.

    The upper bound follows from Jensen's inequality on the unit-power
    spectrum, the lower one from dropping ``delta`` inside the logarithm.

    Parameters
    ----------
    F : float
        Maximum normalized Doppler shift, 0 < F < 1/2.
    delta : float
        Observation noise variance.
    log_integral : float
        ``int_{-F}^{F} log S(xi) dxi``.

    Returns
    -------
    (lower, upper) : tuple of float
    """
    if not 0.0 < F < 0.5:
        raise DomainError(f"F must lie in (0, 1/2), got {F}")
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    scale = delta ** (1.0 - 2.0 * F)
    d2f = delta ** (2.0 * F)
    upper = scale * ((1.0 / (2.0 * F) + delta) ** (2.0 * F) - d2f)
    lower = scale * (math.exp(log_integral) - d2f)
    return lower, upper


def doppler_F(v_mps, fc_hz, Tf_s):
    """
    Normalized maximum Doppler shift ``v fc Tf / c``.

    Raises
    ------
    DomainError
        For non-positive inputs (a static channel is not a Doppler
        process) or when the result is not below 1/2.
    """
    if not (v_mps > 0 and fc_hz > 0 and Tf_s > 0):
        raise DomainError("speed, carrier frequency and frame time must be > 0")
    F = v_mps * fc_hz * Tf_s / SPEED_OF_LIGHT
    if F >= 0.5:
        raise DomainError(f"F = {F:.4g} >= 1/2: frame too long for this Doppler")
    return F


def csit_error_variance_delayed(process, beta, snr, delay):
    """
    CSIT error variance of analog feedback over a fading process.

    With ``delta = 1/(beta snr)``, delay 1 gives the prediction error and
    delay 0 the filtering error. For i.i.d. block fading and delay 0 this
    reduces to ``1/(1 + beta snr)``.
    """
    if beta < 1:
        raise DomainError(f"beta must be >= 1, got {beta}")
    if not snr > 0:
        raise DomainError(f"snr must be positive, got {snr}")
    if delay not in (0, 1):
        raise DomainError(f"delay must be 0 or 1, got {delay}")
    delta = 1.0 / (beta * snr)
    eps1 = prediction_mmse(process, delta)
    if delay == 1:
        return eps1
    return filtering_mmse(eps1, delta)
