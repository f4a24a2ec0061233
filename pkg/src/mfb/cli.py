"""
Command-line front end: ``mfb bounds | simulate | figure | validate``.

SNR values on the command line are in dB; everything below this module
works with linear SNR except the dB grid stored in a scenario.
"""
import argparse
import json
import os
import sys

from . import __version__
from .bounds import BOUNDS, evaluate_bound
from .config import (ConfigError, load_scenario, parse_snr_range,
                     scenario_from_dict, scenario_to_dict)
from .errors import DegenerateChannelError, DomainError, ResourceError
from .figures import BOUND_QUANTITY, FIGURES, output_dir, reproduce_figure
from .montecarlo import run_scenario
from .output import (BOUND_HEADER, RATE_HEADER, RunManifest, bound_curve_rows,
                     csv_text, rate_curve_rows, write_csv)
from .validate import format_report, run_validation

EXIT_USAGE = 2


def _add_common(p, snr_default=None):
    p.add_argument('--snr', default=snr_default,
                   help="SNR grid in dB, lo:step:hi or a,b,c")
    p.add_argument('--m', type=int, help="antennas = users")
    p.add_argument('--trials', type=int)
    p.add_argument('--seed', type=int,
                   help="base seed (default: $MFB_SEED, else 0)")
    p.add_argument('--workers', type=int)
    p.add_argument('--out', default='results', help="output directory")


def _add_scheme(p):
    p.add_argument('--scheme', choices=('perfect', 'analog', 'rvq', 'qam'))
    p.add_argument('--beta', type=float)
    p.add_argument('--beta1', type=float)
    p.add_argument('--beta2', type=float)
    p.add_argument('--alpha', type=float)
    p.add_argument('--bits', type=int, help="explicit RVQ bits per user")
    p.add_argument('--bits-cap', type=int, help="clamp capacity-scaled RVQ bits")
    p.add_argument('--method', choices=('sampled', 'codebook'),
                   help="RVQ: exact distortion sampler or explicit codebook")
    p.add_argument('--qam-mode', choices=('bound', 'simulate'))
    p.add_argument('--csir', choices=('perfect', 'trained'))
    p.add_argument('--process', choices=('iid', 'jakes', 'ar1'))
    p.add_argument('--F', type=float, help="Jakes normalized Doppler")
    p.add_argument('--r', type=float, help="AR(1) first-lag correlation")
    p.add_argument('--delay', type=int, choices=(0, 1))


def build_parser():
    parser = argparse.ArgumentParser(
        prog='mfb', description="ZF broadcast rates under imperfect CSI.")
    parser.add_argument('--version', action='version',
                        version=f'%(prog)s {__version__}')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('bounds', help="evaluate a closed-form bound")
    p.add_argument('name', help="one of: " + ', '.join(sorted(BOUNDS)))
    _add_common(p, snr_default='0:5:30')
    _add_scheme(p)

    p = sub.add_parser('simulate', help="Monte Carlo rate curve")
    p.add_argument('--config', help="scenario INI file; flags override it")
    _add_common(p)
    _add_scheme(p)

    p = sub.add_parser('figure', help="reproduce a figure's curve bundle")
    p.add_argument('name', help="one of: " + ', '.join(FIGURES))
    _add_common(p)

    p = sub.add_parser('validate', help="run the oracle self-check suite")
    p.add_argument('--seed', type=int, default=0)
    return parser


def _prepare_out(path):
    os.makedirs(path, exist_ok=True)
    return path


def cmd_bounds(args):
    grid = parse_snr_range(args.snr)
    params = {'beta': args.beta, 'beta1': args.beta1, 'beta2': args.beta2,
              'alpha': args.alpha, 'bits': args.bits,
              'm': 4 if args.m is None else args.m, 'F': args.F, 'r': args.r,
              'process': args.process, 'delay': args.delay}
    curve = evaluate_bound(args.name, grid, **params)
    out = _prepare_out(args.out)
    manifest = RunManifest(command='bounds', config={
        'bound': args.name, 'snr_db': grid, 'params': curve.params})
    path = manifest.add_output(os.path.join(out, f'{args.name}.csv'))
    write_csv(path, BOUND_HEADER, bound_curve_rows(curve))
    manifest.write(os.path.join(out, f'{args.name}.manifest.json'))
    sys.stdout.write(csv_text(BOUND_HEADER, bound_curve_rows(curve)))
    return 0


def _flag_sections(args):
    """Sections of a scenario dictionary set by command-line flags."""
    return {
        'scenario': {'m': args.m, 'snr_db': args.snr, 'trials': args.trials,
                     'seed': args.seed, 'workers': args.workers},
        'feedback': {'scheme': args.scheme, 'beta': args.beta,
                     'delay': args.delay, 'process': args.process,
                     'f': args.F, 'r': args.r, 'bits': args.bits,
                     'bits_cap': args.bits_cap, 'method': args.method,
                     'alpha': args.alpha, 'qam_mode': args.qam_mode},
        'csir': {'model': args.csir, 'beta1': args.beta1, 'beta2': args.beta2},
    }


def scenario_from_args(args):
    flags = _flag_sections(args)
    if args.config:
        return load_scenario(args.config, overrides=flags)
    d = {s: {k: v for k, v in vals.items() if v is not None}
         for s, vals in flags.items()}
    d['scenario'].setdefault('m', 4)
    d['scenario'].setdefault('snr_db', '0:5:30')
    return scenario_from_dict(d)


def cmd_simulate(args):
    cfg = scenario_from_args(args)
    out = _prepare_out(args.out)
    manifest = RunManifest(command='simulate', config=scenario_to_dict(cfg),
                           seed=cfg.seed)
    curve = run_scenario(cfg)
    path = manifest.add_output(os.path.join(out, 'simulate.csv'))
    rows = rate_curve_rows(curve)
    write_csv(path, RATE_HEADER, rows)
    manifest.counters = {'resampled': curve.resampled,
                         'bits_capped': curve.bits_capped,
                         'bits': curve.bits}
    manifest.write(os.path.join(out, 'simulate.manifest.json'))
    if curve.bits_capped:
        print(f"warning: RVQ bits capped at {cfg.scheme.bits_cap} at "
              f"{curve.bits_capped} SNR point(s)", file=sys.stderr)
    sys.stdout.write(csv_text(RATE_HEADER, rows))
    return 0


def cmd_figure(args):
    overrides = {'m': args.m, 'trials': args.trials, 'seed': args.seed,
                 'workers': args.workers,
                 'snr_db': None if args.snr is None else parse_snr_range(args.snr)}
    res = reproduce_figure(args.name, overrides)
    out = _prepare_out(output_dir(args.out, res.name))
    manifest = RunManifest(
        command='figure',
        config={'figure': res.name, 'meta': res.meta,
                'curves': {cid: scenario_to_dict(c) for cid, c in res.configs.items()}},
        seed=next(iter(res.configs.values())).seed)

    series, long_rows = [], []
    for cid, curve in res.curves.items():
        path = manifest.add_output(os.path.join(out, f'{cid}.csv'))
        write_csv(path, RATE_HEADER, rate_curve_rows(curve))
        series.append({'id': cid, 'label': res.labels[cid], 'kind': 'simulation',
                       'quantity': 'per_user_rate', 'file': os.path.basename(path),
                       'y_column': 'per_user_bits', 'err_column': 'std_err'})
        for row in zip(curve.snr_db, curve.per_user_rate_bits, curve.std_err):
            long_rows.append((cid, 'simulation', 'per_user_rate') + row)
        for row in zip(curve.snr_db, curve.gap_bits, curve.gap_std_err):
            long_rows.append((cid, 'simulation', 'per_user_gap') + row)
    for bid, bound in res.bounds.items():
        path = manifest.add_output(os.path.join(out, f'{bid}.csv'))
        write_csv(path, BOUND_HEADER, bound_curve_rows(bound))
        quantity = BOUND_QUANTITY.get(res.bound_names[bid], 'per_user_gap')
        series.append({'id': bid, 'label': res.labels[bid], 'kind': 'bound',
                       'quantity': quantity, 'file': os.path.basename(path),
                       'y_column': 'value_bits'})
        for x, y in zip(bound.snr_db, bound.value_bits):
            long_rows.append((bid, 'bound', quantity, x, y, float('nan')))

    path = manifest.add_output(os.path.join(out, 'combined.csv'))
    write_csv(path, ('series', 'kind', 'quantity', 'snr_db', 'value_bits',
                     'std_err'), long_rows)
    descriptor = {
        'figure': res.name, 'title': res.meta.get('title', res.name),
        'x': {'column': 'snr_db', 'label': res.meta.get('x_label', 'SNR (dB)')},
        'y': {'label': res.meta.get('y_label', 'b/s/Hz')},
        'combined': 'combined.csv', 'series': series}
    path = manifest.add_output(os.path.join(out, 'descriptor.json'))
    with open(path, 'w', encoding='utf-8', newline='') as fh:
        json.dump(descriptor, fh, indent=2)
        fh.write('\n')
    manifest.counters = {
        'resampled': sum(c.resampled for c in res.curves.values()),
        'bits_capped': sum(c.bits_capped for c in res.curves.values())}
    manifest.write(os.path.join(out, 'manifest.json'))
    print(out)
    return 0


def cmd_validate(args):
    results = run_validation(seed=args.seed)
    print(format_report(results))
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {'bounds': cmd_bounds, 'simulate': cmd_simulate,
            'figure': cmd_figure, 'validate': cmd_validate}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (DomainError, ResourceError, DegenerateChannelError) as exc:
        kind = 'config error' if isinstance(exc, ConfigError) else 'error'
        print(f"mfb: {kind}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
