"""Deterministic block-parallel execution.

Work is split into fixed-size row blocks regardless of the thread count, so
each block performs bit-identical arithmetic whether it runs on the caller's
thread or on a pool. The thread count therefore changes wall-clock time only,
never results.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

BLOCK_ROWS = 128


def map_row_blocks(n_rows: int, fn, threads: int = 1) -> None:
    """Invoke ``fn(start, stop)`` for every fixed block of row indices."""
    spans = [(s, min(s + BLOCK_ROWS, n_rows)) for s in range(0, n_rows, BLOCK_ROWS)]
    if threads <= 1 or len(spans) <= 1:
        for start, stop in spans:
            fn(start, stop)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for _ in pool.map(lambda span: fn(*span), spans):
            pass
