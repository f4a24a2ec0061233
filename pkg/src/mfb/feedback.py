"""
CSIT acquisition chains and downlink-training CSIR.

Every ``apply_*`` function maps a :class:`~mfb.channel.ChannelRealization`
to a new one whose ``h_csit`` (and for training ``h_csir``) reflects the
feedback or estimation impairment. Inputs may carry leading batch axes.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .bounds import qam_ser_bound
from .channel import ChannelRealization, randn_c
from .errors import DomainError, ResourceError
from .fading import IIDBlock, csit_error_variance_delayed

__all__ = ['Perfect', 'Analog', 'DigitalRVQ', 'DigitalQAM', 'PerfectCsir',
           'TrainedCsir', 'B_MAX', 'mmse_estimate', 'apply_feedback',
           'apply_analog_feedback', 'rvq_codebook', 'rvq_quantize',
           'rvq_quantize_streaming', 'rvq_quantize_many', 'rvq_sample',
           'rvq_expected_distortion', 'random_unit_vectors',
           'resolve_rvq_bits', 'apply_digital_feedback', 'qam_bits',
           'qam_feedback_error_prob', 'square_qam_order', 'qam_modulate',
           'qam_demodulate', 'simulate_qam_ser', 'qam_ser_exact',
           'apply_qam_feedback', 'apply_csir_training',
           'effective_gain_estimate']

# Largest codebook enumerated explicitly (2^24 codewords).
B_MAX = 24


# ---------------------------------------------------------------------------
# Scheme descriptions
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Perfect:
    """Noiseless feedback: the transmitter sees the receiver's estimate."""


@dataclass(frozen=True)
class Analog:
    """Unquantized feedback over AWGN, ``beta`` channel uses per coefficient."""
    beta: float
    delay: int = 0
    process: object = field(default_factory=IIDBlock)

    def __post_init__(self):
        if self.beta < 1:
            raise DomainError(f"analog beta must be >= 1, got {self.beta}")
        if self.delay not in (0, 1):
            raise DomainError(f"delay must be 0 or 1, got {self.delay}")


@dataclass(frozen=True)
class DigitalRVQ:
    """
    Random vector quantization of the channel direction.

    Give either ``bits`` (fixed B) or ``beta`` (B = beta M log2(1+snr),
    rounded down). ``method`` selects the exact order-statistic sampler
    (``'sampled'``, any B) or explicit codebook enumeration
    (``'codebook'``, B <= B_MAX). ``bits_cap`` clamps B when set.
    """
    bits: int = None
    beta: float = None
    bits_cap: int = None
    method: str = 'sampled'

    def __post_init__(self):
        if (self.bits is None) == (self.beta is None):
            raise DomainError("DigitalRVQ needs exactly one of bits or beta")
        if self.bits is not None and self.bits < 1:
            raise DomainError("RVQ needs at least 1 bit")
        if self.beta is not None and self.beta < 1:
            raise DomainError(f"beta must be >= 1, got {self.beta}")
        if self.bits_cap is not None and self.bits_cap < 1:
            raise DomainError("bits_cap must be >= 1")
        if self.method not in ('sampled', 'codebook'):
            raise DomainError(f"unknown RVQ method {self.method!r}")


@dataclass(frozen=True)
class DigitalQAM:
    """
    RVQ bits sent over uncoded QAM with symbol errors.

    ``mode='bound'`` injects packet errors with the SER bound;
    ``mode='simulate'`` transmits actual square-QAM symbols over AWGN.
    """
    alpha: float
    beta: float
    mode: str = 'bound'

    def __post_init__(self):
        if not 1 <= self.alpha <= self.beta:
            raise DomainError("QAM feedback needs 1 <= alpha <= beta")
        if self.mode not in ('bound', 'simulate'):
            raise DomainError(f"unknown QAM error mode {self.mode!r}")


@dataclass(frozen=True)
class PerfectCsir:
    pass


@dataclass(frozen=True)
class TrainedCsir:
    """Two-phase downlink training: shared pilots then beamformed pilots."""
    beta1: float
    beta2: float

    def __post_init__(self):
        if self.beta1 < 1 or self.beta2 < 1:
            raise DomainError("beta1 and beta2 must be >= 1")

    def csir_err_var(self, snr):
        return 1.0 / (1.0 + self.beta1 * snr)

    def sigma_f_sq(self, snr):
        return 1.0 / (1.0 + self.beta2 * snr)


# ---------------------------------------------------------------------------
# Analog feedback
# ---------------------------------------------------------------------------
def mmse_estimate(x, prior_var, rel_err, rng):
    """
    Linear MMSE estimate of ``x`` from a noisy observation.

    Returns ``(1-rho) x + sqrt(rho (1-rho) prior_var) n`` with ``rho`` the
    relative error. This is exactly the estimate obtained from
    ``g = sqrt(b) x + w`` when ``rho = 1/(1 + b prior_var)``; the error
    ``x - xhat`` has variance ``rho prior_var`` and is uncorrelated with
    ``xhat``.
    """
    if not 0.0 <= rel_err <= 1.0:
        raise DomainError(f"relative error must lie in [0, 1], got {rel_err}")
    noise = randn_c(rng, np.shape(x))
    return (1.0 - rel_err) * x + math.sqrt(rel_err * (1.0 - rel_err) * prior_var) * noise


def apply_analog_feedback(real, beta, snr, delay=0, process=None, rng=None):
    """
    Analog CSIT feedback of the receiver-side channel estimate.

    The transmitter's error relative to the fed-back quantity is the Wiener
    error ``sigma_e^2`` for the given delay and fading process. With
    trained CSIR the two MMSE stages cascade, so the total CSIT error
    variance is ``e1 + (1 - e1) sigma_e^2``.
    """
    if beta < 1:
        raise DomainError(f"beta must be >= 1, got {beta}")
    if not snr > 0:
        raise DomainError(f"snr must be positive, got {snr}")
    process = IIDBlock() if process is None else process
    s2 = csit_error_variance_delayed(process, beta, snr, delay)
    e1 = real.err_csir_var
    h_hat = mmse_estimate(real.h_csir, 1.0 - e1, s2, rng)
    return real.with_csit(h_hat, e1 + (1.0 - e1) * s2)


# ---------------------------------------------------------------------------
# Random vector quantization
# ---------------------------------------------------------------------------
def random_unit_vectors(rng, n, m):
    """``n`` i.i.d. vectors uniform on the complex unit sphere in C^m."""
    g = rng.standard_normal((n, m, 2))
    w = g[..., 0] + 1j * g[..., 1]
    return w / np.linalg.norm(w, axis=-1, keepdims=True)


def _check_codebook_bits(bits):
    if bits < 1:
        raise DomainError("RVQ needs at least 1 bit")
    if bits > B_MAX:
        raise ResourceError(
            f"B = {bits} bits exceeds the explicit codebook cap B_MAX = "
            f"{B_MAX}; lower the SNR or beta, or use the sampled RVQ method")


def rvq_codebook(bits, m, rng):
    """Codebook of ``2**bits`` uniform unit vectors, shape (2**bits, m)."""
    _check_codebook_bits(bits)
    return random_unit_vectors(rng, 2 ** bits, m)


def rvq_quantize(h, codebook):
    """
    Nearest codeword in angle.

    Returns
    -------
    index : int
        ``argmax_i |h^H w_i|^2``, lowest index on ties.
    direction : complex ndarray
        The winning codeword.
    """
    h = np.asarray(h)
    if not np.any(h):
        raise DomainError("cannot quantize a zero vector")
    corr = np.abs(codebook @ h.conj()) ** 2
    idx = int(np.argmax(corr))
    return idx, codebook[idx]


def rvq_quantize_streaming(h, bits, rng, chunk=1 << 16):
    """
    :func:`rvq_quantize` against a fresh codebook generated chunk by chunk.

    Memory stays at ``chunk`` codewords regardless of ``bits``. The codebook
    drawn is the same one :func:`rvq_codebook` would return for the same
    generator state.
    """
    _check_codebook_bits(bits)
    h = np.asarray(h)
    if not np.any(h):
        raise DomainError("cannot quantize a zero vector")
    n = 2 ** bits
    best_idx, best_val, best_w = -1, -1.0, None
    for start in range(0, n, chunk):
        w = random_unit_vectors(rng, min(chunk, n - start), h.shape[-1])
        corr = np.abs(w @ h.conj()) ** 2
        i = int(np.argmax(corr))
        if corr[i] > best_val:
            best_idx, best_val, best_w = start + i, corr[i], w[i]
    return best_idx, best_w


def rvq_quantize_many(u, bits, rng, max_elems=1 << 22):
    """
    Explicit RVQ of many unit vectors, each against its own fresh codebook.

    Parameters
    ----------
    u : complex ndarray, shape (T, M)
        Unit-norm directions.
    bits : int

    Returns
    -------
    w : complex ndarray, shape (T, M)
        Winning codewords.
    sin2 : ndarray, shape (T,)
        ``1 - |u^H w|^2``.
    """
    _check_codebook_bits(bits)
    u = np.asarray(u)
    t, m = u.shape
    n = 2 ** bits
    chunk = max(1, min(n, max_elems // max(1, 2 * t * m)))
    best = np.full(t, np.inf)
    best_g = np.zeros((t, 2 * m))
    rows = np.arange(t)
    # Codewords are drawn in a frame where u_t is the first basis vector
    # (still i.i.d. uniform), so sin^2 is the energy off that axis.
    for start in range(0, n, chunk):
        c = min(chunk, n - start)
        g = rng.standard_normal((t, c, 2 * m))
        total = np.einsum('tcj,tcj->tc', g, g)
        off = np.einsum('tcj,tcj->tc', g[..., 2:], g[..., 2:])
        ratio = off / total
        i = np.argmin(ratio, axis=1)
        val = ratio[rows, i]
        better = val < best
        best = np.where(better, val, best)
        best_g[better] = g[rows[better], i[better]]
    wr = best_g[:, 0::2] + 1j * best_g[:, 1::2]
    wr /= np.linalg.norm(wr, axis=-1, keepdims=True)
    w = np.einsum('tij,tj->ti', _unitary_from_e1(u), wr)
    return w, best


def _unitary_from_e1(u):
    """Unitaries U_t with ``U_t e1 = u_t`` (phased Householder reflections)."""
    t, m = u.shape
    theta = np.angle(u[:, 0])
    y = u * np.exp(-1j * theta)[:, None]
    v = -y
    v[:, 0] += 1.0
    nv = np.einsum('ti,ti->t', v.conj(), v).real
    safe = np.where(nv > 1e-30, nv, 1.0)
    h = np.eye(m) - 2.0 * np.einsum('ti,tj->tij', v, v.conj()) / safe[:, None, None]
    h[nv <= 1e-30] = np.eye(m)
    return np.exp(1j * theta)[:, None, None] * h


def rvq_sample(u, bits, rng):
    """
    Draw the RVQ winner for each direction without enumerating codewords.

    For ``N = 2^B`` uniform codewords, each ``sin^2`` angle to ``u`` has CDF
    ``x^(M-1)``, so the best one has CDF ``1 - (1 - x^(M-1))^N`` and is
    drawn by inversion. Given its angle, the winner is uniform over the
    circle of vectors at that angle: a uniform phase on the ``u`` component
    and a uniform direction in the orthogonal complement. This reproduces
    the exact distribution of :func:`rvq_quantize` on a fresh codebook.

    Parameters
    ----------
    u : complex ndarray, shape (..., M)
        Unit-norm directions.
    bits : float

    Returns
    -------
    w : complex ndarray, shape (..., M)
    sin2 : ndarray, shape (...)
    """
    if bits < 1:
        raise DomainError("RVQ needs at least 1 bit")
    u = np.asarray(u)
    m = u.shape[-1]
    lead = u.shape[:-1]
    uni = rng.random(lead)
    # 1 - (1-U)^(1/N), accurate for N up to 2^1000
    q = -np.expm1(np.log1p(-uni) * np.exp2(-float(bits)))
    sin2 = q ** (1.0 / (m - 1))

    g = randn_c(rng, u.shape)
    g -= u * np.sum(u.conj() * g, axis=-1, keepdims=True)
    s = g / np.linalg.norm(g, axis=-1, keepdims=True)
    phase = np.exp(2j * np.pi * rng.random(lead))
    w = phase[..., None] * (np.sqrt(1.0 - sin2)[..., None] * u
                            + np.sqrt(sin2)[..., None] * s)
    return w, sin2


def rvq_expected_distortion(bits, m):
    """
    ``E[sin^2]`` of the RVQ winner: ``N B(N, M/(M-1)) = Gamma(1+a) N! / Gamma(N+1+a)``
    with ``a = 1/(M-1)``, ``N = 2^B``.
    """
    a = 1.0 / (m - 1)
    n = 2.0 ** bits
    if n > 2.0 ** 20:
        # log-gamma differences lose digits here; the series error is O(N^-2)
        return special.gamma(1.0 + a) * n ** (-a) * (1.0 - a * (a + 1) / (2 * n))
    return float(np.exp(special.gammaln(1.0 + a) + special.gammaln(n + 1)
                        - special.gammaln(n + 1 + a)))


def resolve_rvq_bits(scheme, m, snr):
    """
    Number of bits B used at this SNR and whether the cap clamped it.

    Returns
    -------
    bits : int
    capped : bool
    """
    if scheme.bits is not None:
        bits = int(scheme.bits)
    else:
        bits = int(math.floor(scheme.beta * m * math.log2(1.0 + snr)))
    if bits < 1:
        raise DomainError(f"resolved B = {bits} < 1 bit at snr = {snr:.4g}")
    capped = False
    if scheme.bits_cap is not None and bits > scheme.bits_cap:
        bits, capped = int(scheme.bits_cap), True
    if scheme.method == 'codebook':
        _check_codebook_bits(bits)
    return bits, capped


def _quantize_columns(h, bits, method, rng):
    """Quantize every column direction of ``h`` (..., M, K)."""
    hc = np.swapaxes(h, -1, -2)
    u = hc / np.linalg.norm(hc, axis=-1, keepdims=True)
    if method == 'sampled':
        w, sin2 = rvq_sample(u, bits, rng)
    else:
        flat = u.reshape(-1, u.shape[-1])
        w, sin2 = rvq_quantize_many(flat, bits, rng)
        w, sin2 = w.reshape(u.shape), sin2.reshape(u.shape[:-1])
    return np.swapaxes(w, -1, -2), sin2


def apply_digital_feedback(real, scheme, snr, rng):
    """
    Error-free RVQ feedback of every user's channel direction.

    The receiver quantizes ``h_csir``; the transmitter's estimate is the
    winning codeword scaled to the expected norm ``sqrt(M)`` (ZF only uses
    directions). ``err_csit_var`` records the expected direction
    distortion ``E[sin^2]``.
    """
    bits, _ = resolve_rvq_bits(scheme, real.m, snr)
    w, _ = _quantize_columns(real.h_csir, bits, scheme.method, rng)
    return real.with_csit(np.sqrt(real.m) * w,
                          rvq_expected_distortion(bits, real.m))


# ---------------------------------------------------------------------------
# Uncoded QAM feedback
# ---------------------------------------------------------------------------
def qam_bits(alpha, m, snr):
    """``B = round(alpha M log2 snr)``."""
    if not snr > 1:
        raise DomainError("QAM feedback needs snr > 1 (0 dB)")
    bits = int(round(alpha * m * math.log2(snr)))
    if bits < 1:
        raise DomainError(f"resolved B = {bits} < 1 bit at snr = {snr:.4g}")
    return bits


def qam_feedback_error_prob(alpha, beta, m, snr, ps=None):
    """Packet error probability ``1 - (1 - Ps)^(beta M)``."""
    if ps is None:
        ps = qam_ser_bound(alpha, beta, snr)
    return 1.0 - (1.0 - ps) ** (beta * m)


def square_qam_order(alpha, beta, snr):
    """
    Largest square QAM order not above ``snr^(alpha/beta)``, at least 4.

    Rounding down keeps the SER under the bound that assumes exactly
    ``snr^(alpha/beta)`` points.
    """
    target = snr ** (alpha / beta)
    k = max(1, int(math.floor(math.log(target, 4) + 1e-12))) if target > 1 else 1
    return 4 ** k


def _gray(n):
    return n ^ (n >> 1)


def _gray_inverse(g):
    n = g.copy()
    shift = g >> 1
    while np.any(shift):
        n ^= shift
        shift >>= 1
    return n


def qam_modulate(symbols, order):
    """
    Gray-mapped square QAM with unit average energy.

    The low half of each symbol's bits picks the in-phase level, the high
    half the quadrature level; each half is Gray coded.
    """
    side = int(round(math.sqrt(order)))
    if side * side != order or side < 2 or side & (side - 1):
        raise DomainError(f"order {order} is not a square power-of-4 QAM")
    symbols = np.asarray(symbols)
    bi, bq = symbols % side, symbols // side
    li, lq = _gray_inverse(bi), _gray_inverse(bq)
    scale = math.sqrt(2.0 * (order - 1) / 3.0)
    return ((2 * li - side + 1) + 1j * (2 * lq - side + 1)) / scale


def qam_demodulate(y, order):
    """Minimum-distance decisions for :func:`qam_modulate`."""
    side = int(round(math.sqrt(order)))
    scale = math.sqrt(2.0 * (order - 1) / 3.0)
    z = np.asarray(y) * scale
    li = np.clip(np.rint((z.real + side - 1) / 2), 0, side - 1).astype(np.int64)
    lq = np.clip(np.rint((z.imag + side - 1) / 2), 0, side - 1).astype(np.int64)
    return _gray(lq) * side + _gray(li)


def simulate_qam_ser(order, snr, n_symbols, rng):
    """Empirical symbol error rate over AWGN at average Es/N0 = snr."""
    sym = rng.integers(0, order, size=n_symbols)
    y = qam_modulate(sym, order) + randn_c(rng, n_symbols) / math.sqrt(snr)
    return float(np.mean(qam_demodulate(y, order) != sym))


def qam_ser_exact(order, snr):
    """Exact SER of square QAM over AWGN."""
    side = math.sqrt(order)
    p = 2.0 * (1.0 - 1.0 / side) * 0.5 * special.erfc(
        np.sqrt(1.5 * np.asarray(snr, dtype=float) / (order - 1)))
    return 1.0 - (1.0 - p) ** 2


def _packet_errors(scheme, m, snr, lead, rng):
    if scheme.mode == 'bound':
        pe = qam_feedback_error_prob(scheme.alpha, scheme.beta, m, snr)
        return rng.random(lead) < pe
    order = square_qam_order(scheme.alpha, scheme.beta, snr)
    n_sym = int(math.ceil(scheme.beta * m))
    sym = rng.integers(0, order, size=lead + (n_sym,))
    y = qam_modulate(sym, order) + randn_c(rng, sym.shape) / math.sqrt(snr)
    return np.any(qam_demodulate(y, order) != sym, axis=-1)


def apply_qam_feedback(real, alpha, beta, snr, rng, mode='bound'):
    """
    RVQ feedback sent over uncoded QAM.

    Users whose feedback packet is received in error get a CSIT direction
    drawn uniformly and independently of their channel; the others get the
    RVQ codeword with ``B = round(alpha M log2 snr)`` bits (exact sampler,
    no cap).

    Returns
    -------
    ChannelRealization
    in_error : bool ndarray, shape (..., K)
    """
    scheme = DigitalQAM(alpha, beta, mode)
    m = real.m
    bits = qam_bits(alpha, m, snr)
    w, _ = _quantize_columns(real.h_csir, bits, 'sampled', rng)
    lead = real.h_csir.shape[:-2] + (real.k,)
    in_error = _packet_errors(scheme, m, snr, lead, rng)
    if np.any(in_error):
        rnd = random_unit_vectors(rng, int(in_error.sum()), m)
        wt = np.swapaxes(w, -1, -2)
        wt[in_error] = rnd
        w = np.swapaxes(wt, -1, -2)
    out = real.with_csit(np.sqrt(m) * w, rvq_expected_distortion(bits, m))
    return out, in_error


def apply_feedback(real, scheme, snr, rng):
    """Dispatch on the scheme type; returns the updated realization."""
    if isinstance(scheme, Perfect):
        return real.with_csit(real.h_csir, real.err_csir_var)
    if isinstance(scheme, Analog):
        return apply_analog_feedback(real, scheme.beta, snr, scheme.delay,
                                     scheme.process, rng)
    if isinstance(scheme, DigitalRVQ):
        return apply_digital_feedback(real, scheme, snr, rng)
    if isinstance(scheme, DigitalQAM):
        return apply_qam_feedback(real, scheme.alpha, scheme.beta, snr, rng,
                                  scheme.mode)[0]
    raise TypeError(f"unknown feedback scheme {scheme!r}")


# ---------------------------------------------------------------------------
# Downlink training
# ---------------------------------------------------------------------------
def apply_csir_training(real, csir, snr, rng):
    """
    Shared-pilot training: receivers get an MMSE estimate of ``h_true``.

    The error has per-entry variance ``1/(1 + beta1 snr)``. The CSIT is
    reset to the new receiver estimate (what perfect feedback would
    deliver); a feedback scheme applied afterwards overwrites it.
    """
    if isinstance(csir, PerfectCsir):
        return real
    e1 = csir.csir_err_var(snr)
    h_rx = mmse_estimate(real.h_true, 1.0, e1, rng)
    return ChannelRealization(h_true=real.h_true, h_csit=h_rx, h_csir=h_rx,
                              err_csit_var=e1, err_csir_var=e1)


def effective_gain_estimate(a, csir, snr, rng):
    """
    Beamformed-pilot estimate of the useful coefficient ``a_k``.

    Returns ``(a_hat, sigma_f_sq)`` with ``a = a_hat + f``, ``f`` of
    variance ``1/(1 + beta2 snr)`` uncorrelated with ``a_hat``.
    """
    if isinstance(csir, PerfectCsir):
        return a, 0.0
    sf = csir.sigma_f_sq(snr)
    return mmse_estimate(a, 1.0, sf, rng), sf
