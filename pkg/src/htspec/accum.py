"""Deterministic compensated summation for long series."""

from __future__ import annotations

import math

import numpy as np


class NeumaierSum:
    """Running compensated accumulator (Neumaier variant of Kahan summation).

    Deterministic for a fixed sequence of ``add`` calls; used where a long
    series is accumulated block by block.
    """

    def __init__(self, value: float = 0.0):
        self._s = float(value)
        self._c = 0.0

    def add(self, x: float) -> None:
        t = self._s + x
        if abs(self._s) >= abs(x):
            self._c += (self._s - t) + x
        else:
            self._c += (x - t) + self._s
        self._s = t

    def add_block(self, block: np.ndarray) -> None:
        # numpy pairwise sum inside the block, compensated across blocks
        self.add(float(np.sum(block)))

    @property
    def value(self) -> float:
        return self._s + self._c


def fsum(values) -> float:
    """Exact-rounding sum of an iterable of floats (thin wrapper over math.fsum)."""
    return math.fsum(float(v) for v in values)
