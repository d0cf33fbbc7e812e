#!/usr/bin/env python3
"""
Toric Geodesics CLI

Command-line surface of the workbench:

    toric run scenarios/ray_nu03.json
    toric verify --suite energy --n 256
    toric zoo list
    toric zoo show "NU(0.3)"

Reports go to stdout and to the output directory; logs go to stderr.
Exit codes: 0 every check passed, 1 a check failed, 2 input error.
Environment variables are never read.
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from src.config_manager import ConfigManager, NumericConfig
from src.convex_core import ModelError
from src.energy import c_of, is_in_E
from src.logging_config import get_logger, setup_logging
from src.report import ReportWriter, RunReport
from src.scenario import DEFAULT_RESULTS_DIR, run_scenario
from src.scheduler import ExecutionMode, VerificationScheduler
from src.suites import SUITES, verify_suite
from src.toric_model import ToricGeometry, domain_measure, lelong
from src.validation import ValidationError
from src.zoo import ZOO, parse_potential

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT = 2

logger = get_logger("cli")


# ============================================================================
# Helpers
# ============================================================================

def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    grid: Dict[str, Any] = {}
    if getattr(args, 'n', None) is not None:
        grid['n'] = args.n
    if getattr(args, 'window', None) is not None:
        grid['window_L'] = args.window
    if getattr(args, 'window_m', None) is not None:
        grid['window_m'] = args.window_m
    return {'grid': grid} if grid else {}


def _numeric(args: argparse.Namespace) -> NumericConfig:
    return ConfigManager(args.config, overrides=_overrides(args)).numeric()


def _mode(args: argparse.Namespace) -> ExecutionMode:
    return ExecutionMode.SERIAL if args.serial else ExecutionMode.AUTO


def _print_report(report: RunReport) -> None:
    for line in report.summary_lines():
        print(line)


# ============================================================================
# Commands
# ============================================================================

def cmd_run(args: argparse.Namespace) -> int:
    scheduler = VerificationScheduler(max_concurrent=1) if args.serial else None
    report = run_scenario(args.scenario, config_file=args.config, out_dir=args.out, scheduler=scheduler)
    _print_report(report)
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_verify(args: argparse.Namespace) -> int:
    config = _numeric(args)
    report = verify_suite(args.suite, config, _mode(args), VerificationScheduler(config.max_concurrent))
    out_dir = args.out or str(Path(DEFAULT_RESULTS_DIR) / f"verify_{args.suite}")
    ReportWriter(out_dir).write(report)
    _print_report(report)
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_zoo_list(args: argparse.Namespace) -> int:
    width = max(len(name) for name in ZOO)
    for entry in ZOO.values():
        params = f"({entry.params})" if entry.params else ""
        print(f"{(entry.name + params):<{width + 8}} {entry.regime}")
    return EXIT_PASS


def cmd_zoo_show(args: argparse.Namespace) -> int:
    config = _numeric(args)
    geom = ToricGeometry.standard(config.n)
    pot = parse_potential(geom, args.name)
    membership = is_in_E(pot, config.l_schedule, config.tol_c, lenient=True)
    c = c_of(pot, "energy_slope", l_schedule=config.l_schedule).c_energy_slope
    rows = [
        ("potential", pot.label),
        ("n", config.n),
        ("bounded", pot.bounded),
        ("lelong_low", lelong(pot, "low")),
        ("lelong_high", lelong(pot, "high")),
        ("mass", domain_measure(pot)),
        ("c_energy_slope", c),
        ("in_E", membership.in_E),
        ("criteria_agree", membership.consistent),
    ]
    for key, value in rows:
        print(f"{key:<16} {value}")
    return EXIT_PASS


# ============================================================================
# Parser
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', '-c', type=str, default=None,
                        help='YAML file layered over the shipped defaults')
    common.add_argument('--log-level', type=str, default=None,
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                        help='Log level (default: logging.level from the config)')
    common.add_argument('--log-format', type=str, default=None, choices=['colored', 'json'],
                        help='Log format on stderr (default: logging.format from the config)')

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument('--n', type=int, default=None, help='Polytope cells N')
    grid.add_argument('--window', type=float, default=None, help='Window half-width L')
    grid.add_argument('--window-m', type=int, default=None, help='Window cells M')

    parser = argparse.ArgumentParser(
        prog='toric',
        description="Toric geodesic rays: scenario runner and verification suites",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Run one scenario file
  toric run scenarios/ray_nu03.json

  # Every suite at the default desk scale
  toric verify

  # One suite on a coarser grid, serially
  toric verify --suite energy --n 256 --serial

  # The canonical potentials
  toric zoo list
  toric zoo show "NU(0.3)"

Exit codes: 0 pass, 1 failed check, 2 input error
"""
    )
    sub = parser.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', parents=[common], help='Run a scenario file')
    run.add_argument('scenario', type=str, help='Scenario JSON file')
    run.add_argument('--out', '-o', type=str, default=None,
                     help="Output directory (default: the scenario's outputs.dir)")
    run.add_argument('--serial', action='store_true', help='Run tasks one at a time')
    run.set_defaults(handler=cmd_run)

    verify = sub.add_parser('verify', parents=[common, grid], help='Run verification suites')
    verify.add_argument('--suite', '-s', type=str, default='all', choices=['all', *SUITES],
                        help='Suite to run (default: all)')
    verify.add_argument('--out', '-o', type=str, default=None,
                        help='Output directory (default: results/verify_<suite>)')
    verify.add_argument('--serial', action='store_true', help='Run tasks one at a time')
    verify.set_defaults(handler=cmd_verify)

    zoo = sub.add_parser('zoo', help='Inspect the potential zoo')
    zoo_sub = zoo.add_subparsers(dest='zoo_command', required=True)
    zoo_list = zoo_sub.add_parser('list', parents=[common], help='List canonical potentials')
    zoo_list.set_defaults(handler=cmd_zoo_list)
    zoo_show = zoo_sub.add_parser('show', parents=[common, grid], help='Lelong number, mass and c of one potential')
    zoo_show.add_argument('name', type=str, help='Potential spec, e.g. "NU(0.3)"')
    zoo_show.set_defaults(handler=cmd_zoo_show)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Command-line entry point

    Returns:
        Exit code (0 pass, 1 failed check, 2 input error)
    """
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = ConfigManager(args.config)
        setup_logging(
            level=args.log_level or config.get('logging.level', 'INFO'),
            format_type=args.log_format or config.get('logging.format', 'colored'),
        )
        return args.handler(args)
    except (ValidationError, OSError, ValueError, yaml.YAMLError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ModelError as e:
        logger.error("%s: %s", type(e).__name__, e)
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
