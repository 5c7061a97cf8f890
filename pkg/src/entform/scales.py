"""Scale octaves, log-t quadrature nodes, and square-to-grid index mapping.

Scale octave k covers t in [2^(k-1), 2^k] and pairs with dyadic squares of
side 2^k; the measure dt/t gives every octave total weight ln 2, so the
quadrature is a midpoint rule in log t with a fixed number of nodes per
octave.  All consumers (form quadratures, Whitney suprema, tree selection)
share these nodes, which keeps the discrete chain inequalities exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dyadic import DyadicSquare
from .fields import GridError, SampledField

__all__ = [
    "LN2",
    "octave_nodes",
    "TruncationConfig",
    "cell_scale",
    "square_cell_slices",
    "squares_tiling_box",
]

LN2 = math.log(2.0)


def octave_nodes(k: int, steps: int) -> tuple[np.ndarray, float]:
    """Midpoint log-t nodes over [2^(k-1), 2^k] and their common dt/t weight."""
    if steps < 1:
        raise ValueError("steps per octave must be at least 1")
    j = np.arange(steps)
    ts = 2.0 ** (k - 1 + (j + 0.5) / steps)
    return ts, LN2 / steps


@dataclass(frozen=True)
class TruncationConfig:
    """Scale truncation t in [2^lo, 2^hi] with a fixed log-t midpoint rule.

    The symmetric case lo = -N, hi = N is the usual truncation parameter N;
    rescaling an instance by 2^j shifts the window to (lo-j, hi-j), which is
    what the scaling identity produces.
    """

    lo: int
    hi: int
    steps_per_octave: int = 4

    def __post_init__(self):
        if self.hi <= self.lo:
            raise ValueError(f"empty scale window [{self.lo}, {self.hi}]")
        if self.steps_per_octave < 1:
            raise ValueError("steps_per_octave must be positive")

    @classmethod
    def symmetric(cls, N: int, steps_per_octave: int = 4) -> "TruncationConfig":
        if N < 1:
            raise ValueError("truncation parameter N must be a positive integer")
        return cls(-N, N, steps_per_octave)

    @property
    def octaves(self) -> range:
        return range(self.lo + 1, self.hi + 1)

    @property
    def total_samples(self) -> int:
        return (self.hi - self.lo) * self.steps_per_octave

    def shifted(self, j: int) -> "TruncationConfig":
        return TruncationConfig(self.lo - j, self.hi - j, self.steps_per_octave)

    def all_nodes(self) -> np.ndarray:
        """All t nodes, finest octave first, concatenated in octave order."""
        parts = [octave_nodes(k, self.steps_per_octave)[0] for k in self.octaves]
        return np.concatenate(parts)


def cell_scale(L: float, n: int) -> int:
    """The integer k with grid spacing h = 2^k; requires a dyadic grid."""
    h = 2.0 * L / n
    k = round(math.log2(h))
    if 2.0**k != h:
        raise GridError(f"grid spacing {h} is not a power of two; cells are not dyadic")
    return k


def square_cell_slices(field: SampledField, square: DyadicSquare) -> tuple[slice, slice] | None:
    """Index slices of the grid cells covered by the square, clipped to the box.

    Cell i holds [x_i, x_i + h), so a square of scale k >= cell scale covers a
    contiguous index block.  Returns None when the square misses the box.
    """
    kc = cell_scale(field.L, field.n)
    if square.k < kc:
        raise GridError(f"square of side 2^{square.k} is below cell resolution 2^{kc}")
    span = 1 << (square.k - kc)
    half = field.n // 2
    x0 = square.mx * span + half
    y0 = square.my * span + half
    x1, y1 = x0 + span, y0 + span
    x0c, y0c = max(x0, 0), max(y0, 0)
    x1c, y1c = min(x1, field.n), min(y1, field.n)
    if x0c >= x1c or y0c >= y1c:
        return None
    return slice(x0c, x1c), slice(y0c, y1c)


def squares_tiling_box(field: SampledField, k: int) -> list[DyadicSquare]:
    """All dyadic squares of scale k needed to cover the grid box [-L, L)^2."""
    kc = cell_scale(field.L, field.n)
    if k < kc:
        raise GridError(f"scale 2^{k} is below cell resolution 2^{kc}")
    half_units = field.L / 2.0**k  # number of scale-k squares per half axis
    lo = math.floor(-half_units)
    hi = math.ceil(half_units)
    return [
        DyadicSquare(k, mx, my)
        for mx in range(lo, hi)
        for my in range(lo, hi)
    ]
