"""
Batch Processing - Concurrent Per-File Work

Expands directory arguments into their trial files and runs a worker over
every file in a thread pool. Results come back in input order; each
worker writes its own output file, so workers never share an output.

Usage:
    from lib.batch import expand_inputs, run_batch

    files = expand_inputs(["data/"], pattern="*.csv")
    results = run_batch(convert_one, files, max_workers=4)
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Generic, List, Optional, Sequence, TypeVar, Union


logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass
class BatchResult(Generic[T]):
    """Outcome of one input file."""

    path: Path
    value: Optional[T] = None
    error: Optional[Exception] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def expand_inputs(inputs: Sequence[Union[str, Path]], pattern: str = "*.csv") -> List[Path]:
    """
    Resolve files and directories into a sorted, de-duplicated file list.

    Raises:
        FileNotFoundError: If an input does not exist
    """
    files: List[Path] = []
    for item in inputs:
        path = Path(item)
        if path.is_dir():
            files.extend(sorted(p for p in path.glob(pattern) if p.is_file()))
        elif path.is_file():
            files.append(path)
        else:
            raise FileNotFoundError(f"no such file or directory: {path}")

    seen = set()
    unique = []
    for f in files:
        key = f.resolve()
        if key not in seen:
            seen.add(key)
            unique.append(f)
    return unique


def default_workers(n_items: int) -> int:
    return max(1, min(n_items, os.cpu_count() or 1, 8))


def run_batch(
    worker: Callable[[Path], T],
    files: Sequence[Path],
    max_workers: Optional[int] = None,
) -> List[BatchResult[T]]:
    """
    Apply worker to every file concurrently.

    Exceptions are captured per file rather than raised.

    Returns:
        One BatchResult per file, in input order
    """
    if not files:
        return []
    workers = max_workers or default_workers(len(files))

    def run_one(path: Path) -> BatchResult[T]:
        try:
            return BatchResult(path=path, value=worker(path))
        except Exception as e:
            logger.debug(f"{path}: {e}")
            return BatchResult(path=path, error=e)

    if workers == 1 or len(files) == 1:
        return [run_one(p) for p in files]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(run_one, files))
    logger.debug(f"Processed {len(files)} files on {workers} threads")
    return results
