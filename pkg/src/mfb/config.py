"""
Scenario configuration: INI files, flag dictionaries and round-tripping.

A scenario file has three sections::

    [scenario]
    m = 4
    snr_db = 0:5:30        ; lo:step:hi (inclusive) or a comma list
    trials = 10000
    seed = 1
    workers = 1

    [feedback]
    scheme = analog        ; perfect | analog | rvq | qam
    beta = 2
    delay = 0
    process = iid          ; iid | jakes | ar1, with f = ... or r = ...

    [csir]
    model = perfect        ; perfect | trained, with beta1 and beta2

Keys are case-insensitive. The same nested-dict layout is what
:func:`scenario_to_dict` emits into run manifests.
"""
import configparser
import os

import numpy as np

from .errors import DomainError
from .fading import AR1, IIDBlock, Jakes
from .feedback import (Analog, DigitalQAM, DigitalRVQ, Perfect, PerfectCsir,
                       TrainedCsir)
from .montecarlo import ScenarioConfig

__all__ = ['ConfigError', 'parse_snr_range', 'process_from_dict',
           'process_to_dict', 'scenario_from_dict', 'scenario_to_dict',
           'scenario_to_ini', 'load_scenario', 'read_ini', 'default_seed',
           'SEED_ENV']

SEED_ENV = 'MFB_SEED'


class ConfigError(DomainError):
    """Missing or malformed configuration field."""


def parse_snr_range(text):
    """
    Parse ``'lo:step:hi'`` (inclusive) or ``'a,b,c'`` into a list of dB values.

    >>> parse_snr_range('0:5:20')
    [0.0, 5.0, 10.0, 15.0, 20.0]
    """
    if isinstance(text, (list, tuple, np.ndarray)):
        return [float(x) for x in text]
    text = str(text).strip()
    try:
        if ':' in text:
            lo, step, hi = (float(p) for p in text.split(':'))
            if step <= 0 or hi < lo:
                raise ValueError
            n = int(round((hi - lo) / step)) + 1
            vals = [round(lo + i * step, 9) for i in range(n)]
            return [v for v in vals if v <= hi + 1e-9]
        return [float(p) for p in text.split(',') if p.strip()]
    except ValueError:
        raise ConfigError(f"bad SNR range {text!r}; use lo:step:hi or a,b,c")


def default_seed():
    env = os.environ.get(SEED_ENV)
    if env is None or env.strip() == '':
        return 0
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"{SEED_ENV}={env!r} is not an integer")


def _get(section, key, name, cast=float, required=True, default=None):
    val = section.get(key)
    if val is None or (isinstance(val, str) and val.strip() == ''):
        if required:
            raise ConfigError(f"missing required field '{name}.{key}'")
        return default
    try:
        return cast(val)
    except (TypeError, ValueError):
        raise ConfigError(f"field '{name}.{key}' has bad value {val!r}")


def _int(x):
    if isinstance(x, (int, np.integer)):
        return int(x)
    try:
        return int(str(x).strip())
    except ValueError:
        pass
    # accept '4.0' but not '4.5'; exact for the small values where it matters
    f = float(x)
    if f != int(f):
        raise ValueError
    return int(f)


def _lower_keys(d):
    return {str(k).lower(): v for k, v in (d or {}).items()}


def process_from_dict(fb):
    kind = str(fb.get('process', 'iid')).lower()
    if kind == 'iid':
        return IIDBlock()
    if kind == 'jakes':
        return Jakes(_get(fb, 'f', 'feedback'))
    if kind == 'ar1':
        return AR1(_get(fb, 'r', 'feedback'))
    raise ConfigError(f"unknown fading process {kind!r} (iid, jakes, ar1)")


def process_to_dict(process):
    if isinstance(process, Jakes):
        return {'process': 'jakes', 'f': process.F}
    if isinstance(process, AR1):
        return {'process': 'ar1', 'r': process.r}
    return {'process': 'iid'}


def scheme_from_dict(fb):
    fb = _lower_keys(fb)
    kind = str(_get(fb, 'scheme', 'feedback', cast=str)).lower()
    if kind == 'perfect':
        return Perfect()
    if kind == 'analog':
        return Analog(beta=_get(fb, 'beta', 'feedback'),
                      delay=_get(fb, 'delay', 'feedback', _int, False, 0),
                      process=process_from_dict(fb))
    if kind == 'rvq':
        bits = _get(fb, 'bits', 'feedback', _int, False)
        beta = _get(fb, 'beta', 'feedback', float, False)
        if bits is None and beta is None:
            raise ConfigError("missing required field 'feedback.bits' "
                              "(or 'feedback.beta')")
        return DigitalRVQ(bits=bits, beta=None if bits is not None else beta,
                          bits_cap=_get(fb, 'bits_cap', 'feedback', _int, False),
                          method=str(fb.get('method') or 'sampled'))
    if kind == 'qam':
        return DigitalQAM(alpha=_get(fb, 'alpha', 'feedback'),
                          beta=_get(fb, 'beta', 'feedback'),
                          mode=str(fb.get('qam_mode') or 'bound'))
    raise ConfigError(f"unknown scheme {kind!r} (perfect, analog, rvq, qam)")


def scheme_to_dict(scheme):
    if isinstance(scheme, Perfect):
        return {'scheme': 'perfect'}
    if isinstance(scheme, Analog):
        d = {'scheme': 'analog', 'beta': scheme.beta, 'delay': scheme.delay}
        d.update(process_to_dict(scheme.process))
        return d
    if isinstance(scheme, DigitalRVQ):
        d = {'scheme': 'rvq', 'method': scheme.method}
        if scheme.bits is not None:
            d['bits'] = scheme.bits
        else:
            d['beta'] = scheme.beta
        if scheme.bits_cap is not None:
            d['bits_cap'] = scheme.bits_cap
        return d
    if isinstance(scheme, DigitalQAM):
        return {'scheme': 'qam', 'alpha': scheme.alpha, 'beta': scheme.beta,
                'qam_mode': scheme.mode}
    raise TypeError(f"unknown scheme {scheme!r}")


def csir_from_dict(cs):
    cs = _lower_keys(cs)
    kind = str(cs.get('model') or 'perfect').lower()
    if kind == 'perfect':
        return PerfectCsir()
    if kind == 'trained':
        return TrainedCsir(beta1=_get(cs, 'beta1', 'csir'),
                           beta2=_get(cs, 'beta2', 'csir'))
    raise ConfigError(f"unknown CSIR model {kind!r} (perfect, trained)")


def csir_to_dict(csir):
    if isinstance(csir, TrainedCsir):
        return {'model': 'trained', 'beta1': csir.beta1, 'beta2': csir.beta2}
    return {'model': 'perfect'}


def scenario_from_dict(d):
    """Build a :class:`ScenarioConfig` from the nested section dictionary."""
    d = _lower_keys(d)
    sc = _lower_keys(d.get('scenario'))
    seed = _get(sc, 'seed', 'scenario', _int, False)
    return ScenarioConfig(
        m=_get(sc, 'm', 'scenario', _int),
        snr_grid_db=parse_snr_range(_get(sc, 'snr_db', 'scenario', lambda x: x)),
        scheme=scheme_from_dict(d.get('feedback') or {}),
        csir=csir_from_dict(d.get('csir') or {}),
        trials=_get(sc, 'trials', 'scenario', _int, False, 10_000),
        seed=default_seed() if seed is None else seed,
        workers=_get(sc, 'workers', 'scenario', _int, False, 1))


def scenario_to_dict(cfg):
    return {
        'scenario': {'m': cfg.m, 'snr_db': list(cfg.snr_grid_db),
                     'trials': cfg.trials, 'seed': cfg.seed,
                     'workers': cfg.workers},
        'feedback': scheme_to_dict(cfg.scheme),
        'csir': csir_to_dict(cfg.csir),
    }


def scenario_to_ini(cfg):
    d = scenario_to_dict(cfg)
    d['scenario']['snr_db'] = ','.join(repr(x) for x in cfg.snr_grid_db)
    lines = []
    for section, values in d.items():
        lines.append(f'[{section}]')
        lines.extend(f'{k} = {v!r}' if isinstance(v, float) else f'{k} = {v}'
                     for k, v in values.items())
        lines.append('')
    return '\n'.join(lines)


def read_ini(path_or_text, is_text=False):
    """INI file (or text) as ``{section: {key: str}}`` with comments stripped."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(';', '#'),
                                   interpolation=None)
    if is_text:
        cp.read_string(path_or_text)
    else:
        if not os.path.exists(path_or_text):
            raise ConfigError(f"config file not found: {path_or_text}")
        cp.read(path_or_text)
    return {s: dict(cp[s]) for s in cp.sections()}


def load_scenario(path, overrides=None):
    """Read a scenario INI file, applying ``{section: {key: value}}`` overrides."""
    d = read_ini(path)
    for section, values in (overrides or {}).items():
        d.setdefault(section, {}).update(
            {k: v for k, v in values.items() if v is not None})
    return scenario_from_dict(d)
