"""
Console Utilities - Terminal Output Helpers

Provides:
- ANSI color codes
- One-line diagnostics on stderr
- Colored verdict formatting
- Multi-line run summaries

Usage:
    from lib.console import Colors, log, print_error

    log("Wrote out/phase.csv", level="success")
    print_error("line 7, field 'rknee': count 1200 outside [0, 999]")
"""

import sys
from typing import List, Optional, TextIO


class Colors:
    """ANSI color codes for terminal output."""

    # Regular colors
    RED = "\033[91m"
    GREEN = "\033[92m"
    YELLOW = "\033[93m"
    BLUE = "\033[94m"
    MAGENTA = "\033[95m"
    CYAN = "\033[96m"

    # Styles
    BOLD = "\033[1m"
    DIM = "\033[2m"

    # Reset
    RESET = "\033[0m"

    # Shortcuts for common uses
    SUCCESS = GREEN
    WARNING = YELLOW
    ERROR = RED
    INFO = BLUE


# Log level configuration
LOG_SYMBOLS = {
    "info": ("ℹ", Colors.BLUE),
    "success": ("✓", Colors.GREEN),
    "warning": ("⚠", Colors.YELLOW),
    "error": ("✗", Colors.RED),
    "verdict": ("»", Colors.MAGENTA),
    "debug": ("·", Colors.DIM),
}

VERDICT_COLORS = {
    "recoverable": Colors.GREEN,
    "fall": Colors.RED,
    "right": Colors.CYAN,
    "left": Colors.MAGENTA,
    "indeterminate": Colors.YELLOW,
}


def _use_color(stream: TextIO) -> bool:
    return hasattr(stream, "isatty") and stream.isatty()


def format_log(msg: str, level: str = "info", color: bool = True) -> str:
    """
    Format a log message without printing.

    Args:
        msg: Message to format
        level: Log level (info, success, warning, error, verdict, debug)
        color: Whether to emit ANSI codes

    Returns:
        Formatted message string
    """
    symbol, code = LOG_SYMBOLS.get(level, ("·", ""))
    if not color:
        return f"{symbol} {msg}"
    return f"{code}{symbol}{Colors.RESET} {msg}"


def log(msg: str, level: str = "info", stream: Optional[TextIO] = None) -> str:
    """
    Format and print a log message.

    Colors are used only when the stream is a terminal.

    Returns:
        Formatted message string
    """
    stream = stream or sys.stdout
    formatted = format_log(msg, level, color=_use_color(stream))
    print(formatted, file=stream)
    return formatted


def print_error(msg: str, stream: Optional[TextIO] = None) -> str:
    """Print a one-line diagnostic to stderr."""
    stream = stream or sys.stderr
    line = f"pushrec: error: {msg}"
    if _use_color(stream):
        line = f"{Colors.ERROR}{line}{Colors.RESET}"
    print(line, file=stream)
    return line


def format_verdict(verdict: str, color: bool = True) -> str:
    """Verdict word, colored by outcome."""
    code = VERDICT_COLORS.get(verdict, "")
    if not color or not code:
        return verdict
    return f"{Colors.BOLD}{code}{verdict}{Colors.RESET}"


class StatusDisplay:
    """
    Helper for building multi-line summaries.

    Usage:
        display = StatusDisplay()
        display.add_header("Analysis")
        display.add_line("T01  right  0.74")
        display.render()
    """

    def __init__(self, width: int = 60, color: bool = True):
        self.width = width
        self.color = color
        self.lines: List[str] = []

    def add_line(self, line: str) -> "StatusDisplay":
        """Add a line."""
        self.lines.append(line)
        return self

    def add_header(self, text: str) -> "StatusDisplay":
        """Add a bold header line."""
        self.lines.append(f"{Colors.BOLD}{text}{Colors.RESET}" if self.color else text)
        return self

    def add_separator(self, char: str = "-") -> "StatusDisplay":
        """Add a separator line."""
        self.lines.append(char * self.width)
        return self

    def render(self, stream: Optional[TextIO] = None) -> str:
        """Print the summary and return it."""
        output = "\n".join(self.lines)
        print(output, file=stream or sys.stdout, flush=True)
        return output
