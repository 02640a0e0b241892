"""Thread layouts: which antenna each thread occupies at each time slot.

A thread is a sequence of array cells, one per column, that visits every
antenna cyclically.  Thread j (1-based) occupies cell (row, t) with
row = ((t + j - 1) mod M) + 1 for t = 0, ..., T-1.  Distinct threads never
collide, and each column of the array holds exactly one cell of each thread.
Antenna rows are 1-based throughout; time slots are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput


@dataclass(frozen=True)
class ThreadLayout:
    """Cell assignment for M cyclic threads over T time slots."""

    M: int
    T: int
    rows: tuple[tuple[int, ...], ...]   # rows[j-1][t] = antenna of thread j at time t

    def row(self, j: int, t: int) -> int:
        """Antenna (1-based) used by thread j at time slot t."""
        return self.rows[j - 1][t]

    def thread_of_cell(self, row: int, t: int) -> int:
        """Thread occupying cell (row, t); inverse of :meth:`row`."""
        return ((row - 1 - t) % self.M) + 1

    def mask(self, j: int) -> np.ndarray:
        """Boolean (M, T) array marking the cells of thread j."""
        out = np.zeros((self.M, self.T), dtype=bool)
        for t in range(self.T):
            out[self.rows[j - 1][t] - 1, t] = True
        return out


def thread_layout(M: int, T: int) -> ThreadLayout:
    """Build the cyclic layout for M threads over T slots."""
    if M < 1:
        raise InvalidInput(f"M must be >= 1, got {M}")
    if T < 1:
        raise InvalidInput(f"T must be >= 1, got {T}")
    rows = tuple(
        tuple(((t + j - 1) % M) + 1 for t in range(T)) for j in range(1, M + 1)
    )
    return ThreadLayout(M=M, T=T, rows=rows)
