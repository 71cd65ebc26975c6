#!/usr/bin/env python3
"""
ptc-workbench command line.

    ptc-workbench run config/recipes/generalized_grid.yaml --out results/grid
    ptc-workbench spectrum --model one-spin-pt --p 0 --S 1 --g 1 --kappa 1
    ptc-workbench btc-detect --model one-spin-btc --kappa 0.5 --S 6 12 18

Exit codes: 0 success, 2 configuration or parameter error, 3 numerical failure.
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from config.settings import settings
from core.errors import ConfigError, WorkbenchError
from workbench import __version__
from workbench.sweep_config import TASKS, load_config_file, parse_config
from workbench.tasks import TaskRunner, exit_code_for
from workbench.writers import FORMATS, ResultWriter


class Colors:
    """Terminal colors for the run summary"""
    OKGREEN = '\033[92m'
    FAIL = '\033[91m'
    ENDC = '\033[0m'
    BOLD = '\033[1m'


# flag dest -> model parameter name
PARAM_FLAGS = {
    'g': 'g',
    'kappa': 'kappa',
    'p': 'p',
    'pz': 'pz',
    'px': 'px',
    'gx': 'gx',
    'gz': 'gz',
    'kappa_plus': 'kappa_plus',
    'kappa_minus': 'kappa_minus',
    'gamma_gain': 'gamma_gain',
    'gamma_loss': 'gamma_loss',
}


def _add_output_flags(parser: argparse.ArgumentParser):
    parser.add_argument('--out', default=None, help='Output directory')
    parser.add_argument('--format', choices=FORMATS, default='csv', help='Table format')
    parser.add_argument('--workers', type=int, default=None, help='Grid points evaluated in parallel')
    parser.add_argument('--tol', action='append', default=[], metavar='KEY=VALUE',
                        help="Tolerance override, e.g. zero_mode=1e-9 or diagnostics.im_floor=1e-5")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='ptc-workbench', description='Collective-spin Liouvillian workbench')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('--log-level', default=None, choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    sub = parser.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', help='Run a YAML sweep configuration')
    run.add_argument('config', help='Path to the sweep configuration')
    _add_output_flags(run)

    for task in TASKS:
        p = sub.add_parser(task, help=f"Single '{task}' task from command-line parameters")
        p.add_argument('--model', required=True, help='Model family identifier')
        p.add_argument('--S', nargs='+', required=True, help='Spin values, e.g. 1 3/2 2')
        for dest in PARAM_FLAGS:
            p.add_argument(f"--{dest.replace('_', '-')}", dest=dest, type=float, default=None)
        p.add_argument('--triple', action='append', default=None, metavar='ALPHA,BETA,GAMMA',
                       help="Dissipator of the class model on (Sx+, Sx-, Sx), e.g. --triple=-0.5j,0.5j,0")
        p.add_argument('--parity', choices=['reflection', 'identity'], default=None)
        p.add_argument('--seed', type=int, default=0)
        p.add_argument('--t-stop', type=float, default=10.0)
        p.add_argument('--t-num', type=int, default=101)
        p.add_argument('--polarization', type=float, default=1.0, help='Initial |m = polarization·S>')
        p.add_argument('--trajectories', type=int, default=100)
        p.add_argument('--dump-trajectories', action='store_true', help='Also write samples and jumps of trajectory 0')
        p.add_argument('--order', type=int, choices=[1, 2], default=2, help='Perturbation order')
        _add_output_flags(p)
    return parser


def parse_tolerances(items: List[str]) -> Dict[str, float]:
    tolerances = {}
    for item in items:
        key, sep, value = item.partition('=')
        if not sep or not key:
            raise ConfigError(f"--tol expects KEY=VALUE, got {item!r}", '<command line>')
        try:
            tolerances[key.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"--tol {key}: {value!r} is not a number", '<command line>')
    return tolerances


def config_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """Single-task command lines become the same mapping a YAML file would give"""
    params: Dict[str, Any] = {}
    for dest, name in PARAM_FLAGS.items():
        value = getattr(args, dest)
        if value is not None:
            params[name] = value
    if args.parity is not None:
        params['parity'] = args.parity
    if args.triple:
        params['triples'] = [[[c.strip() for c in t.split(',')] for t in args.triple]]
    for name in ('pz', 'px'):
        if name in params and float(params[name]).is_integer():
            params[name] = int(params[name])
    return {
        'model': args.model,
        'S': list(args.S),
        'tasks': [args.command],
        'params': params,
        'seed': args.seed,
        'time_grid': {'start': 0.0, 'stop': args.t_stop, 'num': args.t_num},
        'initial_polarization': args.polarization,
        'trajectories': args.trajectories,
        'dump_trajectories': args.dump_trajectories,
        'perturbation_order': args.order,
    }


def _print_summary(runner: TaskRunner):
    print(f"\n{Colors.BOLD}ptc-workbench {__version__}: {runner.config.model}{Colors.ENDC}")
    for result in runner.results:
        if result.success:
            print(f"  ✓ {result.task} {Colors.OKGREEN}{result.message}{Colors.ENDC} -> {result.path}")
        else:
            print(f"  ✗ {result.task} {Colors.FAIL}{result.message}{Colors.ENDC}")


def set_log_level(level: str):
    """Applies to loggers created later and to the PTC loggers that already exist"""
    settings.set('logging.level', level)
    for name in list(logging.root.manager.loggerDict):
        if name.startswith('PTC.'):
            logging.getLogger(name).setLevel(level)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.log_level:
        set_log_level(args.log_level)

    try:
        if args.command == 'run':
            config = load_config_file(args.config)
        else:
            data = config_from_args(args)
            config = parse_config(data, '<command line>')
        if args.out:
            config.output_dir = args.out
        tolerances = parse_tolerances(args.tol)
        config.tolerances.update(tolerances)
        writer = ResultWriter(config.output_dir, args.format)
        runner = TaskRunner(config, writer, args.workers)
        runner.run()
    except WorkbenchError as e:
        print(f"error: {e}", file=sys.stderr)
        return exit_code_for(e)

    _print_summary(runner)
    return runner.exit_code


if __name__ == '__main__':
    sys.exit(main())
