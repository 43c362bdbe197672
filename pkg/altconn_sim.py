#!/usr/bin/env python3

import logging
import sys
import time
from argparse import ArgumentParser, Namespace
from pathlib import Path
from typing import Any, Callable, Optional

from altconn import (ConfigError, DecodeFailure, ExperimentConfig, InvalidDistribution, Mode,
                     ReportRecord, Scheme, SingularSystem, StateId, aggregate, bound_values,
                     capacity_spcu, cyclic_jess_demo, lambda_of, load_config_file,
                     require_success, run_repetitions, run_sweep, sim_threads, write_sweep_csv)
from gfp import FieldTooSmall, NonPrimeField
from utils import format_table

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

# Namespace attributes that are experiment settings, as opposed to
# options of the script itself.
_SETTINGS = ('p', 'dist', 'n', 'mode', 'scheme', 'seed_trace', 'seed_channel', 'seed_msg',
             'reps', 'vary', 'vary_from', 'vary_to', 'steps', 'seed', 'no_resolving_state',
             'out', 'csv')


def pos_int(s: str) -> int:
    i = int(s)
    if i < 0:
        raise ValueError('argument must be a non-negative integer')

    return i


def pos_nonzero_int(s: str) -> int:
    i = int(s)
    if i <= 0:
        raise ValueError('argument must be an integer > 0')

    return i


def die(s: str, code: int = EXIT_FAILED) -> int:
    print(s, file=sys.stderr)
    return code


def progress(s: str) -> None:
    print(f'>> {s}', file=sys.stderr)


def make_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument(
        '--config',
        metavar='FILE',
        help='Read settings from a flat TOML file. Flags given on the command line win.')
    common.add_argument(
        '--out',
        metavar='FILE',
        help='Write the JSON report to FILE instead of standard output.')
    common.add_argument(
        '--verbose', '-v',
        help='Enable debug logging.',
        action='store_true',
        default=False)
    common.add_argument(
        '--p',
        help='The field size, a prime of at least 3. Default: 5.',
        type=int)

    dist = ArgumentParser(add_help=False)
    dist.add_argument(
        '--dist',
        help='Probabilities of states A-G, comma-separated fractions or decimals. '
             'Default: 2/9,2/9,1/9,1/9,1/9,1/9,1/9.')

    run = ArgumentParser(add_help=False)
    run.add_argument(
        '--n',
        help='Channel uses per run. Default: 9000.',
        type=pos_int)
    run.add_argument(
        '--mode',
        help='Draw the state trace at random, or lay it out in proportion to the '
             'distribution. Default: monte-carlo.',
        choices=[m.value for m in Mode])
    run.add_argument(
        '--scheme',
        help='Joint encoding across states (jems), or every state on its own (separate). '
             'Default: jems.',
        choices=[s.value for s in Scheme])
    run.add_argument('--seed-trace', type=int, help='Seed for the state trace.')
    run.add_argument('--seed-channel', type=int, help='Seed for the channel coefficients.')
    run.add_argument('--seed-msg', type=int, help='Seed for the message symbols.')

    parser = ArgumentParser('altconn_sim')
    commands = parser.add_subparsers(dest='command', required=True)

    simulate = commands.add_parser(
        'simulate',
        parents=[common, dist, run],
        help='Run the transmission scheme end to end and check the result.')
    simulate.add_argument(
        '--reps',
        help='Independent repetitions, with seeds derived from the given ones. Default: 1.',
        type=pos_nonzero_int)

    sweep = commands.add_parser(
        'sweep',
        parents=[common, dist, run],
        help='Vary one state probability over a grid and simulate each point.')
    sweep.add_argument(
        '--vary',
        help='The state whose probability is varied. Default: B.',
        choices=[s.name for s in StateId])
    sweep.add_argument('--from', dest='vary_from', help='First grid value. Default: 0.')
    sweep.add_argument('--to', dest='vary_to', help='Last grid value. Default: 2/5.')
    sweep.add_argument(
        '--steps',
        help='Number of grid points. Default: 9.',
        type=pos_nonzero_int)
    sweep.add_argument(
        '--csv',
        metavar='FILE',
        help='Also write the sweep as a CSV table.')

    jess = commands.add_parser(
        'jess-demo',
        parents=[common],
        help='Run the cyclic single-resolving-state demonstration.')
    jess.add_argument('--seed', type=int, help='Seed for coefficients and messages. Default: 0.')
    jess.add_argument(
        '--no-resolving-state',
        help='Leave out the resolving channel use.',
        action='store_true',
        default=None)

    commands.add_parser(
        'bounds',
        parents=[common, dist],
        help='Print the sum-capacity and the genie-aided bounds for a distribution.')

    return parser


def build_config(ns: Namespace) -> ExperimentConfig:
    values: dict[str, Any] = {}
    if ns.config is not None:
        values.update(load_config_file(ns.config))

    values.update({k: v for k, v in vars(ns).items() if k in _SETTINGS and v is not None})
    values['kind'] = ns.command
    return ExperimentConfig(kind=ns.command).updated(values)


def emit(record: ReportRecord, out: Optional[str]) -> None:
    text = record.to_json()
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding='utf-8')
        progress(f'Wrote {out}')


def simulate(cfg: ExperimentConfig, threads: Optional[int]) -> int:
    progress(f'{cfg.reps} run(s) of {cfg.n} channel uses over GF({cfg.p}), {cfg.mode} trace, '
             f'{cfg.scheme} scheme')

    start = time.perf_counter()
    try:
        reports = run_repetitions(cfg, threads)
    except SingularSystem as exc:
        return die(f'SingularSystem: {exc}')

    report = aggregate(reports)
    wall = time.perf_counter() - start

    emit(ReportRecord.from_rate_report(cfg, report, wall, reports), cfg.out)
    progress(f'{report.blocks} blocks and {report.fallback} fallback uses carried '
             f'{report.symbols} symbols: {report.achieved_spcu} symbols/use '
             f'({report.achieved_bits:.4f} bits/use), capacity {report.capacity_spcu}')

    try:
        require_success(report)
    except DecodeFailure as exc:
        return die(f'DecodeFailure: {exc}')

    return EXIT_OK


def sweep(cfg: ExperimentConfig, threads: Optional[int]) -> int:
    grid = cfg.grid()
    progress(f'Sweeping λ_{cfg.vary} over {len(grid)} points from {grid[0]} to {grid[-1]}')

    start = time.perf_counter()
    try:
        rows = run_sweep(cfg, threads)
    except SingularSystem as exc:
        return die(f'SingularSystem: {exc}')

    record = ReportRecord.from_sweep(cfg, rows, time.perf_counter() - start)
    emit(record, cfg.out)

    if cfg.csv is not None:
        with open(cfg.csv, 'w', encoding='utf-8', newline='') as f:
            write_sweep_csv(rows, f)
        progress(f'Wrote {cfg.csv}')

    bad = [r.point for r in rows if not r.ok]
    if bad:
        return die(f'DecodeFailure: sweep points {bad} failed their checks')

    return EXIT_OK


def jess_demo(cfg: ExperimentConfig, threads: Optional[int]) -> int:
    start = time.perf_counter()
    report = cyclic_jess_demo(cfg.p, cfg.seed, cfg.include_resolving_state)
    record = ReportRecord.from_jess(cfg, report, time.perf_counter() - start)
    emit(record, cfg.out)

    progress(f'{report.decoded} of {report.symbols} symbols decoded over {report.uses} uses '
             f'({report.rate} symbols/use), {report.unresolved} unresolved')

    if not record.ok:
        failed = [k for k, ok in record.checks.items() if not ok]
        return die(f'DecodeFailure: {", ".join(failed)}')

    return EXIT_OK


def bounds(cfg: ExperimentConfig, threads: Optional[int]) -> int:
    spec = cfg.spec
    cap = capacity_spcu(cfg.dist)
    rows = [['λ', str(lambda_of(cfg.dist)), ''],
            ['capacity', str(cap), f'{float(cap) * spec.rate_unit:.6f}']]
    rows.extend([b.name, str(b.spcu), f'{b.bits:.6f}'] for b in bound_values(cfg.dist, spec))

    print(f'GF({cfg.p}), distribution {cfg.dist}')
    print(format_table(['', 'symbols/use', 'bits/use'], rows))

    if cfg.out is not None:
        record = ReportRecord(kind=cfg.kind,
                              config=cfg.to_dict(),
                              capacity={'num': cap.numerator, 'den': cap.denominator,
                                        'bits': float(cap) * spec.rate_unit},
                              bounds=[{'name': b.name, 'num': b.spcu.numerator,
                                       'den': b.spcu.denominator, 'bits': b.bits}
                                      for b in bound_values(cfg.dist, spec)])
        emit(record, cfg.out)

    return EXIT_OK


COMMANDS: dict[str, Callable[[ExperimentConfig, Optional[int]], int]] = {
    'simulate': simulate,
    'sweep': sweep,
    'jess-demo': jess_demo,
    'bounds': bounds,
}


def main(args: list[str]) -> int:
    ns = make_parser().parse_args(args)

    logging.basicConfig(level=logging.DEBUG if ns.verbose else logging.WARNING,
                        format='%(name)s: %(message)s')

    try:
        cfg = build_config(ns)
        threads = sim_threads()
    except (ConfigError, InvalidDistribution, FieldTooSmall, NonPrimeField) as exc:
        return die(f'{type(exc).__name__}: {exc}', EXIT_CONFIG)

    return COMMANDS[cfg.kind](cfg, threads)


if __name__ == '__main__':
    sys.exit(main(sys.argv[1:]))
