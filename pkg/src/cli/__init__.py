"""Command-line commands returning process exit codes."""

from .commands import EXIT_FAULT, EXIT_FAILURE, EXIT_INPUT, EXIT_OK, cmd_diagnose, cmd_dump, cmd_run

__all__ = ["EXIT_FAULT", "EXIT_FAILURE", "EXIT_INPUT", "EXIT_OK", "cmd_diagnose", "cmd_dump", "cmd_run"]
