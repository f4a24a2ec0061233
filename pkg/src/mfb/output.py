"""
CSV and run-manifest writers.

CSV numbers are printed with 12 significant digits, '.' as decimal
separator and LF line endings, so a fixed seed gives byte-identical files
on every platform.
"""
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__

__all__ = ['fmt', 'csv_text', 'write_csv', 'rate_curve_rows',
           'bound_curve_rows', 'RATE_HEADER', 'BOUND_HEADER', 'RunManifest']

RATE_HEADER = ('snr_db', 'sum_rate_bits', 'per_user_bits', 'std_err')
BOUND_HEADER = ('snr_db', 'value_bits')


def fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def csv_text(header, rows):
    lines = [','.join(header)]
    lines.extend(','.join(fmt(v) for v in row) for row in rows)
    return '\n'.join(lines) + '\n'


def write_csv(path, header, rows):
    # newline='' stops Windows from turning '\n' into '\r\n'
    with open(path, 'w', encoding='utf-8', newline='') as fh:
        fh.write(csv_text(header, rows))
    return path


def rate_curve_rows(curve):
    return list(zip(curve.snr_db, curve.sum_rate_bits,
                    curve.per_user_rate_bits, curve.std_err))


def bound_curve_rows(bound):
    return list(zip(bound.snr_db, bound.value_bits))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.generic):
        return x.item()
    return x


@dataclass
class RunManifest:
    """
    Provenance record written next to every set of outputs.

    ``config`` is the echo of the parsed configuration; for simulations it
    is the nested dictionary accepted by
    :func:`mfb.config.scenario_from_dict`.
    """
    command: str
    config: dict
    seed: int = None
    outputs: list = field(default_factory=list)
    counters: dict = field(default_factory=dict)
    wall_time_s: float = 0.0
    version: str = __version__
    started: float = field(default_factory=time.time)

    def add_output(self, path):
        path = os.fspath(path)
        if path in self.outputs:
            raise ValueError(f"output {path} already listed")
        self.outputs.append(path)
        return path

    def to_dict(self):
        return _jsonable({
            'artifact': 'mfb', 'version': self.version,
            'command': self.command, 'config': self.config, 'seed': self.seed,
            'wall_time_s': round(self.wall_time_s, 6),
            'started_utc': time.strftime('%Y-%m-%dT%H:%M:%SZ',
                                         time.gmtime(self.started)),
            'counters': self.counters, 'outputs': self.outputs})

    def write(self, path):
        self.wall_time_s = time.time() - self.started
        with open(path, 'w', encoding='utf-8', newline='') as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write('\n')
        return path
