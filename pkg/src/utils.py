"""
Utility Module - Helper Functions

Small helpers shared by the command line and the tests: reading and
writing numeric CSV tables, number formatting and output paths.

Example:
    from src.utils import read_table, format_table

    header, data = read_table(Path("knots.csv").read_text())
    text = format_table(("x", "y"), [data[:, 0], data[:, 1]])
"""

from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np


class TableError(ValueError):
    """Raised for malformed numeric CSV tables."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def format_number(value: float, decimals: int = 6) -> str:
    """
    Fixed-point text of a float.

    Example:
        >>> format_number(0.6875)
        '0.687500'
    """
    text = f"{float(value):.{decimals}f}"
    # avoid '-0.000000'
    if float(text) == 0.0:
        text = text.lstrip("-")
    return text


def read_table(text: str) -> Tuple[List[str], np.ndarray]:
    """
    Parse a numeric CSV table with a header row.

    Lines starting with '#' and blank lines are skipped.

    Returns:
        (column names, data array of shape (rows, columns))

    Raises:
        TableError: For a missing header, ragged rows or non-numeric cells
    """
    header: List[str] = []
    rows: List[List[float]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        cells = [c.strip() for c in stripped.split(",")]
        if not header:
            header = cells
            continue
        if len(cells) != len(header):
            raise TableError(f"expected {len(header)} columns, got {len(cells)}", lineno)
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise TableError(f"non-numeric value in '{stripped}'", lineno)

    if not header:
        raise TableError("missing header row")
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return header, data


def format_table(header: Sequence[str], columns: Sequence[Sequence[float]], decimals: int = 6) -> str:
    """CSV text from equal-length columns."""
    lengths = {len(c) for c in columns}
    if len(lengths) > 1:
        raise TableError("columns differ in length")
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(format_number(v, decimals) for v in row))
    return "\n".join(lines) + "\n"


def write_text(path: Union[str, Path], text: str) -> Path:
    """Write text, creating the parent directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def output_path(output: Union[str, Path], source: Path, suffix: str, many: bool) -> Path:
    """
    Output file for one input.

    A single input writes to output itself; several inputs write
    <output>/<stem><suffix>.
    """
    output = Path(output)
    if many:
        return output / f"{source.stem}{suffix}"
    return output
