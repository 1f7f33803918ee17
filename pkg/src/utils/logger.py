"""
Logging utilities for the fusion toolkit.

Log files are named after the command being run, so the logs of a `run`
and of a later `diagnose` on its recording stay apart. The handler layout
comes from `config/logging.yaml`; a console plus file fallback is used when
that document is missing or broken.
"""

import logging
import logging.config
import sys
from datetime import datetime
from pathlib import Path
from typing import Optional

import yaml

FILE_FORMAT = '[%(asctime)s] %(levelname)s [%(name)s.%(funcName)s:%(lineno)d] - %(message)s'
CONSOLE_FORMAT = '[%(asctime)s] %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def _log_file(log_dir: Path, run_name: str, kind: str = "") -> str:
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    suffix = f"_{kind}" if kind else ""
    return str(log_dir / f"{run_name}{suffix}_{timestamp}.log")


def setup_logger(
    config_path: Optional[Path] = None,
    log_level: Optional[str] = None,
    log_dir: Optional[Path] = None,
    run_name: str = "fusion"
) -> None:
    """
    Set up logging for one command invocation.

    Args:
        config_path: dictConfig YAML document
        log_level: Level applied to the root and `src` loggers
        log_dir: Directory for log files
        run_name: Prefix of the log file names, usually the CLI command
    """
    log_dir = log_dir or Path("logs")
    log_dir.mkdir(parents=True, exist_ok=True)

    if config_path and config_path.exists():
        try:
            with open(config_path, 'r', encoding='utf-8') as f:
                config = yaml.safe_load(f)
            handlers = config.get('handlers', {})
            if 'file' in handlers:
                handlers['file']['filename'] = _log_file(log_dir, run_name)
            if 'error_file' in handlers:
                handlers['error_file']['filename'] = _log_file(log_dir, run_name, "errors")
            logging.config.dictConfig(config)
        except (OSError, ValueError, TypeError, AttributeError, yaml.YAMLError) as e:
            print(f"Failed to load logging config: {e}", file=sys.stderr)
            _setup_basic_logging(log_level, log_dir, run_name)
    else:
        _setup_basic_logging(log_level, log_dir, run_name)

    if log_level:
        logging.getLogger().setLevel(log_level.upper())
        logging.getLogger('src').setLevel(log_level.upper())


def _setup_basic_logging(log_level: Optional[str], log_dir: Path, run_name: str) -> None:
    level = getattr(logging, log_level.upper() if log_level else "INFO")

    # stdout carries `dump` output
    console = logging.StreamHandler(sys.stderr)
    console.setLevel(level)
    console.setFormatter(logging.Formatter(CONSOLE_FORMAT, datefmt=DATE_FORMAT))

    file_handler = logging.FileHandler(_log_file(log_dir, run_name), encoding='utf-8')
    file_handler.setLevel(level)
    file_handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt=DATE_FORMAT))

    logging.basicConfig(level=level, handlers=[console, file_handler], force=True)


class RunLogger:
    """
    Logger wrapper with simulation-run specific helpers.

    Unknown attributes are delegated to the wrapped logger.
    """

    def __init__(self, name: str):
        self.logger = logging.getLogger(name)

    def log_run_start(self, scenario: str, seed: int, steps: int, fault: str) -> None:
        self.logger.info("=" * 60)
        self.logger.info(f"Starting run: {scenario} (seed {seed}, {steps} steps, fault: {fault})")
        self.logger.info("=" * 60)

    def log_interval(self, index: int, objects: int, misses: int, unexpected: int) -> None:
        self.logger.info(
            f"Interval {index}: {objects} system objects, {misses} misses, {unexpected} unexpected"
        )

    def log_conflict(self, message: str) -> None:
        self.logger.warning(f"Fusion diagnostic: {message}")

    def log_diagnosis(self, verdict: str, suspect: Optional[int] = None) -> None:
        if suspect is None:
            self.logger.info(f"Diagnosis: {verdict}")
        else:
            self.logger.info(f"Diagnosis: {verdict} (sensor {suspect})")

    def log_error(self, error: Exception, context: Optional[str] = None) -> None:
        message = f"Error: {error}"
        if context:
            message = f"{context} - {message}"
        self.logger.error(message, exc_info=True)

    def log_run_complete(self, steps: int, duration: float) -> None:
        self.logger.info("=" * 60)
        self.logger.info(f"Run completed: {steps} steps in {duration:.2f}s")
        self.logger.info("=" * 60)

    def __getattr__(self, name):
        return getattr(self.logger, name)
