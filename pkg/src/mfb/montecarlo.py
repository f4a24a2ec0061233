"""
Monte Carlo estimation of ergodic ZF rates under imperfect CSI.

Trials are grouped in fixed-size blocks. Every block draws from its own
counter-based (Philox) streams keyed by ``(seed, snr index, block index,
attempt, stage)``, so results do not depend on how blocks are spread over
worker processes. Each stage (channel, CSIR training, feedback, gain
training) has a separate stream, which also makes different schemes run
with the same seed see the same channel draws.
"""
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import (degenerate_mask, per_user_sinr_terms,
                      sample_iid_channel, zf_beamformer)
from .errors import DegenerateChannelError, DomainError
from .feedback import (DigitalQAM, DigitalRVQ, PerfectCsir, apply_csir_training,
                       apply_feedback, effective_gain_estimate,
                       resolve_rvq_bits, qam_bits)

__all__ = ['ScenarioConfig', 'RateCurve', 'BLOCK_SIZE', 'db2lin',
           'instantaneous_rate', 'run_scenario', 'fit_prelog']

BLOCK_SIZE = 1024
MAX_RESAMPLE_ATTEMPTS = 8

_STAGE_CHANNEL, _STAGE_CSIR, _STAGE_FEEDBACK, _STAGE_GAIN = range(4)


def db2lin(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


@dataclass(frozen=True)
class ScenarioConfig:
    """Full description of one simulated rate curve."""
    m: int
    snr_grid_db: tuple
    scheme: object
    csir: object = field(default_factory=PerfectCsir)
    trials: int = 10_000
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, 'snr_grid_db',
                           tuple(float(s) for s in self.snr_grid_db))
        if self.m < 2:
            raise DomainError(f"m must be >= 2, got {self.m}")
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be a non-negative 64-bit integer")
        grid = np.asarray(self.snr_grid_db)
        if grid.size == 0 or np.any(np.diff(grid) <= 0):
            raise DomainError("snr grid must be non-empty and strictly increasing")


@dataclass
class RateCurve:
    """
    Simulated ergodic rates on an SNR grid.

    ``std_err`` is the standard error of ``per_user_rate_bits``: the
    sample standard deviation over trials of the user-averaged rate,
    divided by sqrt(trials). ``gap_bits`` is the paired difference to ZF
    with perfect CSIT and CSIR on the same channel draws.
    """
    snr_db: np.ndarray
    sum_rate_bits: np.ndarray
    per_user_rate_bits: np.ndarray
    std_err: np.ndarray
    trials_used: int
    ideal_per_user_bits: np.ndarray
    gap_bits: np.ndarray
    gap_std_err: np.ndarray
    user_rate_bits: np.ndarray
    user_std_err: np.ndarray
    resampled: int = 0
    bits: list = None
    bits_capped: int = 0
    label: str = ''


def instantaneous_rate(a_k, sigma_k, snr, m):
    """
    Per-frame rate ``log2(1 + |a_k|^2 (snr/M) / Sigma_k)``.

    With trained CSIR pass the estimated coefficient as ``a_k`` and include
    ``sigma_f^2 snr/M`` in ``sigma_k``.
    """
    return np.log2(1.0 + np.abs(a_k) ** 2 * (snr / m) / sigma_k)


def _gen(seed, *key):
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def _draw(cfg, snr, n, key):
    gens = [_gen(cfg.seed, *key, stage) for stage in range(4)]
    real = sample_iid_channel(cfg.m, cfg.m, gens[_STAGE_CHANNEL], size=n)
    real = apply_csir_training(real, cfg.csir, snr, gens[_STAGE_CSIR])
    real = apply_feedback(real, cfg.scheme, snr, gens[_STAGE_FEEDBACK])
    bad = degenerate_mask(real.h_true) | degenerate_mask(real.h_csit)
    return real, bad, gens[_STAGE_GAIN]


def _simulate_block(cfg, snr_idx, block_idx, n):
    """Per-trial, per-user rates of the scheme and of ideal ZF for one block."""
    snr = float(db2lin(cfg.snr_grid_db[snr_idx]))
    real, bad, g_gain = _draw(cfg, snr, n, (snr_idx, block_idx, 0))
    h_true, h_csit = real.h_true.copy(), real.h_csit.copy()
    resampled = 0
    attempt = 0
    while np.any(bad):
        attempt += 1
        if attempt > MAX_RESAMPLE_ATTEMPTS:
            raise DegenerateChannelError("could not draw a regular channel",
                                         mask=bad)
        idx = np.flatnonzero(bad)
        resampled += idx.size
        redo, redo_bad, _ = _draw(cfg, snr, idx.size,
                                  (snr_idx, block_idx, attempt))
        h_true[idx], h_csit[idx] = redo.h_true, redo.h_csit
        bad[idx] = redo_bad
    real = real.with_csit(h_csit, real.err_csit_var)
    real.h_true = h_true

    m = cfg.m
    v_ideal = zf_beamformer(h_true, check=False)
    a_ideal, _ = per_user_sinr_terms(real.with_csit(h_true, 0.0), v_ideal, snr)
    ideal = np.log2(1.0 + np.abs(a_ideal) ** 2 * snr / m)

    bf = zf_beamformer(h_csit, check=False)
    a, sigma = per_user_sinr_terms(real, bf, snr)
    a_hat, sf = effective_gain_estimate(a, cfg.csir, snr, g_gain)
    rates = instantaneous_rate(a_hat, sigma + sf * snr / m, snr, m)
    return rates, ideal, resampled


def _run_task(args):
    cfg, snr_idx, block_idx, n = args
    return _simulate_block(cfg, snr_idx, block_idx, n)


def _blocks(trials):
    nb = math.ceil(trials / BLOCK_SIZE)
    return [(b, min(BLOCK_SIZE, trials - b * BLOCK_SIZE)) for b in range(nb)]


def _resolved_bits(cfg, snr):
    if isinstance(cfg.scheme, DigitalRVQ):
        return resolve_rvq_bits(cfg.scheme, cfg.m, snr)
    if isinstance(cfg.scheme, DigitalQAM):
        return qam_bits(cfg.scheme.alpha, cfg.m, snr), False
    return None, False


def _sem(x, axis=0):
    n = x.shape[axis]
    if n < 2:
        return np.full(np.delete(x.shape, axis), np.nan)
    return x.std(axis=axis, ddof=1) / math.sqrt(n)


def run_scenario(cfg, label=''):
    """
    Estimate the ergodic rates of ``cfg`` at every SNR grid point.

    Output is bit-identical for a given ``(seed, trials)`` whatever
    ``cfg.workers`` is.

    Returns
    -------
    RateCurve
    """
    snrs = db2lin(cfg.snr_grid_db)
    bits, capped = [], 0
    for snr in snrs:
        b, c = _resolved_bits(cfg, float(snr))
        bits.append(b)
        capped += int(c)

    blocks = _blocks(cfg.trials)
    tasks = [(cfg, i, b, n) for i in range(len(snrs)) for b, n in blocks]
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]

    nb = len(blocks)
    per_user, se, ideal_mean, gap, gap_se = [], [], [], [], []
    user_mean, user_se = [], []
    resampled = 0
    for i in range(len(snrs)):
        chunk = results[i * nb:(i + 1) * nb]
        rates = np.concatenate([r[0] for r in chunk])
        ideal = np.concatenate([r[1] for r in chunk])
        resampled += sum(r[2] for r in chunk)
        trial_mean = rates.mean(axis=1)
        trial_gap = (ideal - rates).mean(axis=1)
        per_user.append(trial_mean.mean())
        se.append(_sem(trial_mean))
        ideal_mean.append(ideal.mean())
        gap.append(trial_gap.mean())
        gap_se.append(_sem(trial_gap))
        user_mean.append(rates.mean(axis=0))
        user_se.append(_sem(rates))

    per_user = np.array(per_user)
    return RateCurve(
        snr_db=np.array(cfg.snr_grid_db), sum_rate_bits=cfg.m * per_user,
        per_user_rate_bits=per_user, std_err=np.array(se),
        trials_used=cfg.trials, ideal_per_user_bits=np.array(ideal_mean),
        gap_bits=np.array(gap), gap_std_err=np.array(gap_se),
        user_rate_bits=np.array(user_mean), user_std_err=np.array(user_se),
        resampled=resampled, bits=bits, bits_capped=capped, label=label)


def fit_prelog(curve, snr_window_db):
    """
    Least-squares slope of the sum rate against log2(snr) in a window.

    Parameters
    ----------
    curve : RateCurve
    snr_window_db : (float, float)
        Inclusive window in dB; it must contain at least 3 grid points.
    """
    lo, hi = snr_window_db
    snr_db = np.asarray(curve.snr_db, dtype=float)
    sel = (snr_db >= lo - 1e-9) & (snr_db <= hi + 1e-9)
    if sel.sum() < 3:
        raise DomainError(f"need >= 3 grid points in [{lo}, {hi}] dB")
    x = np.log2(db2lin(snr_db[sel]))
    y = np.asarray(curve.sum_rate_bits)[sel]
    return float(np.polyfit(x, y, 1)[0])
