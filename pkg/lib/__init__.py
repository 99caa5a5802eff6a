"""
Lib - Reusable Runtime Components

This package provides helpers shared by the command-line applications:

- console: Terminal output utilities (colors, diagnostics, summaries)
- batch: Directory expansion and concurrent per-file processing

Usage:
    from lib import Colors, run_batch
    from lib.console import log, print_error
"""

from lib.console import Colors, StatusDisplay, format_log, log, print_error
from lib.batch import BatchResult, expand_inputs, run_batch

__all__ = [
    "Colors",
    "StatusDisplay",
    "format_log",
    "log",
    "print_error",
    "BatchResult",
    "expand_inputs",
    "run_batch",
]
