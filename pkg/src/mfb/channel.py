"""
Channel matrices, zero-forcing beamformers and per-user SINR terms.

All arrays follow the convention ``h[..., :, k] = h_k``: the last axis
indexes users, the one before it indexes transmit antennas, and any leading
axes are batch (trial) axes. Noise power is normalized to 1, so ``snr`` is
the linear total transmit power P/N0.
"""
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateChannelError, DomainError

__all__ = ['ChannelRealization', 'BeamformerSet', 'randn_c',
           'sample_iid_channel', 'degenerate_mask', 'zf_beamformer',
           'gain_matrix', 'interference_power', 'per_user_sinr_terms',
           'CONDITION_THRESHOLD']

# Smallest allowed ratio of extreme singular values before a draw counts
# as degenerate.
CONDITION_THRESHOLD = 1e-9


def randn_c(rng, size):
    """Circularly symmetric complex Gaussian samples with unit variance."""
    x = rng.standard_normal(size=tuple(np.atleast_1d(size)) + (2,))
    return (x[..., 0] + 1j * x[..., 1]) * np.sqrt(0.5)


@dataclass
class ChannelRealization:
    """
    True channel together with the transmitter and receiver estimates.

    Attributes
    ----------
    h_true : complex ndarray, shape (..., M, K)
        Actual channel vectors h_k as columns.
    h_csit : complex ndarray, shape (..., M, K)
        Estimate available at the transmitter.
    h_csir : complex ndarray, shape (..., M, K)
        Estimate available at the receivers (equals ``h_true`` under
        perfect CSIR).
    err_csit_var : float
        Per-entry variance of ``h_true - h_csit``. For quantized feedback
        this holds the expected direction distortion instead, since RVQ
        error is not additive.
    err_csir_var : float
        Per-entry variance of ``h_true - h_csir``.
    """
    h_true: np.ndarray
    h_csit: np.ndarray
    h_csir: np.ndarray
    err_csit_var: float = 0.0
    err_csir_var: float = 0.0

    @property
    def m(self):
        return self.h_true.shape[-2]

    @property
    def k(self):
        return self.h_true.shape[-1]

    def with_csit(self, h_csit, err_csit_var):
        return replace(self, h_csit=h_csit, err_csit_var=float(err_csit_var))


@dataclass
class BeamformerSet:
    """Unit-norm ZF beamformers, column k serving user k."""
    v: np.ndarray


def _check_dims(m, k):
    if m != k:
        raise DomainError(f"only K = M is supported (got M={m}, K={k})")
    if m < 2:
        raise DomainError(f"need at least 2 antennas (got M={m})")


def sample_iid_channel(m, k, rng, size=None):
    """
    Draw an i.i.d. CN(0, 1) channel matrix.

    Parameters
    ----------
    m, k : int
        Number of transmit antennas and users; must be equal and >= 2.
    rng : numpy.random.Generator
    size : int, optional
        Number of independent realizations stacked on a leading axis.

    Returns
    -------
    ChannelRealization
        With ``h_csit`` and ``h_csir`` both equal to ``h_true``.
    """
    _check_dims(m, k)
    shape = (m, k) if size is None else (size, m, k)
    h = randn_c(rng, shape)
    return ChannelRealization(h_true=h, h_csit=h, h_csir=h)


def degenerate_mask(h, threshold=CONDITION_THRESHOLD):
    """True where sigma_min / sigma_max of ``h`` falls below ``threshold``."""
    s = np.linalg.svd(h, compute_uv=False)
    smax = s[..., 0]
    with np.errstate(invalid='ignore', divide='ignore'):
        bad = ~(s[..., -1] >= threshold * smax)
    return bad | (smax == 0)


def zf_beamformer(h, check=True):
    """
    Zero-forcing beamformers computed by orthonormal-basis completion.

    Column k of the result is the unit vector spanning the orthogonal
    complement of ``span{h_j : j != k}``, obtained as the last column of a
    complete QR factorization of the other K-1 columns. Its phase is chosen
    so that ``h_k^H v_k`` is real and non-negative.

    Parameters
    ----------
    h : complex ndarray, shape (..., M, M)
    check : bool
        Raise :class:`DegenerateChannelError` on near-singular input.

    Returns
    -------
    BeamformerSet
    """
    h = np.asarray(h, dtype=complex)
    m, k = h.shape[-2:]
    _check_dims(m, k)
    if check:
        bad = degenerate_mask(h)
        if np.any(bad):
            raise DegenerateChannelError(
                "channel matrix is numerically rank deficient", mask=bad)

    v = np.empty_like(h)
    idx = np.arange(k)
    for user in range(k):
        others = h[..., idx != user]
        q, _ = np.linalg.qr(others, mode='complete')
        v[..., user] = q[..., -1]

    # Phase convention: h_k^H v_k real, >= 0.
    proj = np.einsum('...mk,...mk->...k', h.conj(), v)
    mag = np.abs(proj)
    phase = np.where(mag > 0, proj.conj() / np.where(mag > 0, mag, 1), 1)
    v *= phase[..., None, :]
    return BeamformerSet(v=v)


def gain_matrix(h, v):
    """``G[..., k, j] = h_k^H v_j``."""
    return np.swapaxes(h.conj(), -1, -2) @ v


def interference_power(h, v):
    """
    Sum over j != k of ``|h_k^H v_j|^2`` for every user k.

    ``h`` may be either the true channel or the CSIT error matrix
    ``h_true - h_csit``; when ``v`` is ZF against ``h_csit`` both give the
    same value.
    """
    g = np.abs(gain_matrix(h, v)) ** 2
    diag = np.diagonal(g, axis1=-2, axis2=-1)
    return g.sum(axis=-1) - diag


def per_user_sinr_terms(real, bf, snr):
    """
    Useful coefficient and interference-plus-noise variance of each user.

    Parameters
    ----------
    real : ChannelRealization
    bf : BeamformerSet
        Beamformers computed from ``real.h_csit``.
    snr : float
        Linear P/N0; each user gets power P/M.

    Returns
    -------
    a : complex ndarray, shape (..., K)
        ``a_k = h_k^H v_k`` with the true channel.
    sigma : ndarray, shape (..., K)
        ``Sigma_k = 1 + sum_{j != k} |h_k^H v_j|^2 P/M``.
    """
    h, v = real.h_true, bf.v
    if h.shape != v.shape:
        raise DomainError(f"shape mismatch: channel {h.shape}, beams {v.shape}")
    m = h.shape[-2]
    a = np.einsum('...mk,...mk->...k', h.conj(), v)
    sigma = 1.0 + interference_power(h, v) * snr / m
    return a, sigma
