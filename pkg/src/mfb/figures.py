"""
Figure reproduction from the INI presets shipped in ``mfb/presets``.

A preset has a ``[figure]`` section (M, SNR grid, trials, axis labels),
one ``[curve.<id>]`` section per simulated curve and one ``[bound.<id>]``
section per analytic curve. Curve sections take the ``[feedback]`` keys of
a scenario file plus ``csir``, ``beta1`` and ``beta2``; bound sections take
``name`` plus the bound's parameters.
"""
import os
import time
from dataclasses import dataclass, field
from importlib import resources

from .bounds import evaluate_bound
from .config import ConfigError, default_seed, read_ini, scenario_from_dict
from .montecarlo import run_scenario

__all__ = ['FIGURES', 'FigureResult', 'figure_name', 'load_preset',
           'figure_scenarios', 'reproduce_figure', 'output_dir',
           'BOUND_QUANTITY']

FIGURES = ('fig-csir', 'fig-alpha', 'fig-jakes', 'fig-gma')

# What each bound measures, for the figure descriptor.
BOUND_QUANTITY = {'ideal-zf': 'per_user_rate', 'qam-rate-lower': 'per_user_rate',
                  'regular-upper': 'per_user_rate', 'doppler-slope': 'prelog'}


@dataclass
class FigureResult:
    name: str
    meta: dict
    configs: dict = field(default_factory=dict)
    curves: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    labels: dict = field(default_factory=dict)
    bound_names: dict = field(default_factory=dict)


def figure_name(which):
    """Canonical dash form; accepts ``fig_alpha`` as well as ``fig-alpha``."""
    name = str(which).strip().lower().replace('_', '-')
    if name not in FIGURES:
        raise ConfigError(f"unknown figure {which!r}; choose from "
                          + ', '.join(FIGURES))
    return name


def load_preset(which):
    name = figure_name(which)
    text = resources.files('mfb').joinpath('presets', f'{name}.ini').read_text()
    return read_ini(text, is_text=True)


def _number(text):
    try:
        f = float(text)
    except ValueError:
        return text
    return int(f) if f.is_integer() and '.' not in text else f


def figure_scenarios(which, overrides=None):
    """
    Scenario configurations of every curve of a figure.

    ``overrides`` may set ``m``, ``snr_db``, ``trials``, ``seed`` and
    ``workers`` for all curves at once.
    """
    preset = load_preset(which)
    fig = dict(preset.get('figure', {}))
    ov = {k: v for k, v in (overrides or {}).items() if v is not None}
    scen = {'m': ov.get('m', fig.get('m')),
            'snr_db': ov.get('snr_db', fig.get('snr_db')),
            'trials': ov.get('trials', fig.get('trials')),
            'seed': ov.get('seed', default_seed()),
            'workers': ov.get('workers', 1)}
    configs, labels = {}, {}
    for section, values in preset.items():
        if not section.startswith('curve.'):
            continue
        cid = section[len('curve.'):]
        fb = dict(values)
        labels[cid] = fb.pop('label', cid)
        cs = {'model': fb.pop('csir', 'perfect')}
        for key in ('beta1', 'beta2'):
            if key in fb:
                cs[key] = fb.pop(key)
        configs[cid] = scenario_from_dict(
            {'scenario': scen, 'feedback': fb, 'csir': cs})
    return fig, configs, labels


def reproduce_figure(which, overrides=None):
    """
    Simulate every curve of a figure and evaluate its bounds.

    All curves share the seed, so they see the same channel draws.

    Returns
    -------
    FigureResult
    """
    name = figure_name(which)
    fig, configs, labels = figure_scenarios(name, overrides)
    res = FigureResult(name=name, meta=fig, configs=configs, labels=labels)
    for cid, cfg in configs.items():
        res.curves[cid] = run_scenario(cfg, label=labels[cid])
    grid = next(iter(configs.values())).snr_grid_db
    m = next(iter(configs.values())).m
    for section, values in load_preset(name).items():
        if not section.startswith('bound.'):
            continue
        bid = 'bound-' + section[len('bound.'):]
        params = {k: _number(v) for k, v in values.items()
                  if k not in ('name', 'label')}
        if 'f' in params:
            params['F'] = params.pop('f')
        params.setdefault('m', m)
        bound = evaluate_bound(values['name'], grid, **params)
        bound.label = values.get('label', bid)
        res.bounds[bid] = bound
        res.labels[bid] = bound.label
        res.bound_names[bid] = values['name']
    return res


def output_dir(root, name, when=None):
    """``<root>/<name>-<YYYYMMDD>`` for the local date of ``when`` (default now)."""
    stamp = time.strftime('%Y%m%d', time.localtime(when))
    return os.path.join(root, f'{figure_name(name)}-{stamp}')
