#!/usr/bin/env python3
"""
Object fusion plausibility toolkit - Main Entry Point

Runs deterministic roadside-sensor fusion scenarios, re-diagnoses recordings
and converts recordings to structured text.

Usage:
    python main.py run <scenario.yaml> [--seed N] [--out DIR]
    python main.py diagnose <recording> [--baseline PATH|cross-sensor] [--out DIR]
    python main.py dump <recording> [--out FILE]

Global options:
    --config PATH       Application config (default: config/config.yaml)
    --log-level LEVEL   Log level (DEBUG, INFO, WARNING, ERROR)

Exit codes: 0 ok, 2 usage/input error, 3 fault detected.
"""

import argparse
import logging
import sys
from pathlib import Path

import yaml

# Add src to path
sys.path.insert(0, str(Path(__file__).parent))

from src.cli import EXIT_INPUT, cmd_diagnose, cmd_dump, cmd_run  # noqa: E402
from src.utils import setup_logger  # noqa: E402


class _ArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors already; keep the message on stderr."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def load_config(config_path: Path) -> dict:
    """
    Load the application configuration from YAML.

    A missing file yields the built-in defaults.
    """
    if not config_path.exists():
        return {}
    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            return yaml.safe_load(f) or {}
    except Exception as e:
        print(f"Error loading configuration: {e}", file=sys.stderr)
        sys.exit(EXIT_INPUT)


def parse_arguments(argv=None):
    """Parse command line arguments."""
    parser = _ArgumentParser(
        description='Multi-sensor object fusion simulator with plausibility checking and fault diagnosis',
        formatter_class=argparse.RawDescriptionHelpFormatter
    )

    parser.add_argument(
        '--config',
        type=Path,
        default=Path('config/config.yaml'),
        help='Application config file (default: config/config.yaml)'
    )

    parser.add_argument(
        '--log-level',
        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
        help='Log level'
    )

    subparsers = parser.add_subparsers(dest='command', required=True, parser_class=_ArgumentParser)

    run = subparsers.add_parser('run', help='Run a scenario and analyse it')
    run.add_argument('scenario', type=Path, help='Scenario YAML file')
    run.add_argument('--seed', type=int, help='Override the scenario seed')
    run.add_argument('--out', type=Path, help='Output directory')

    diag = subparsers.add_parser('diagnose', help='Diagnose an existing recording')
    diag.add_argument('recording', type=Path, help='Recording file')
    diag.add_argument(
        '--baseline',
        default='cross-sensor',
        help='No-fault reference recording, or "cross-sensor" (default)'
    )
    diag.add_argument('--out', type=Path, help='Output directory for report and metrics')

    dump = subparsers.add_parser('dump', help='Convert a recording to JSON lines')
    dump.add_argument('recording', type=Path, help='Recording file')
    dump.add_argument('--out', type=Path, help='Output file (default: stdout)')

    return parser.parse_args(argv)


def main(argv=None) -> int:
    """Main entry point."""
    args = parse_arguments(argv)
    config = load_config(args.config)

    if args.log_level:
        config.setdefault('logging', {})['level'] = args.log_level

    log_dir = Path(config.get('logging', {}).get('directory', 'logs'))
    log_config_path = Path(config.get('logging', {}).get('config', 'config/logging.yaml'))
    setup_logger(
        config_path=log_config_path if log_config_path.exists() else None,
        log_level=config.get('logging', {}).get('level', 'INFO'),
        log_dir=log_dir,
        run_name=args.command,
    )

    logger = logging.getLogger(__name__)
    logger.debug(f"Configuration loaded: {args.config}")

    if args.command == 'run':
        return cmd_run(args.scenario, output_dir=args.out, seed=args.seed, app_config=config)
    if args.command == 'diagnose':
        return cmd_diagnose(args.recording, baseline=args.baseline, output_dir=args.out, app_config=config)
    return cmd_dump(args.recording, output=args.out)


if __name__ == '__main__':
    sys.exit(main())
