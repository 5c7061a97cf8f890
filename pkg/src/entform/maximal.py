"""Quadratic maximal averages: Whitney-region size, sliding-square maxima, level sets.

Two suprema are computed here.  The tree size of a field F over a square
collection samples sqrt(F^2 * [theta]_t) at the grid nodes inside each square
and the shared log-t nodes of each Whitney interval.  The quadratic maximal
field takes, per node, the largest root mean square average over a family of
grid-aligned squares: every position, side a power of two times the grid
spacing, computed with summed-area tables and sliding maxima in O(n^2 log n).
The discretized family is a subset of all axis-parallel squares, so level-set
bounds proved for the continuous supremum hold a fortiori.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter1d
from scipy.signal import fftconvolve

from .dyadic import DyadicSquare
from .fields import ResolutionWarning, SampledField, theta
from .scales import octave_nodes, square_cell_slices

__all__ = [
    "TreeSize",
    "MaximalField",
    "LevelSet",
    "theta_kernel_array",
    "tree_size",
    "quadratic_maximal",
    "level_set",
    "window_average_squared",
    "covering_window_max",
    "simple_radial_approximation",
    "theta_ball_domination_check",
]


@dataclass(frozen=True)
class TreeSize:
    """Supremum of sqrt(F^2 * [theta]_t) over the sampled Whitney region."""

    value: float
    argmax: tuple[float, float, float] | None
    empty: bool = False


@dataclass(frozen=True)
class MaximalField:
    """Pointwise maximal root mean square averages and the family searched."""

    field: SampledField
    window_cells: tuple[int, ...]


@dataclass(frozen=True)
class LevelSet:
    mask: np.ndarray
    measure: float
    threshold: float


def theta_kernel_array(L: float, n: int, t: float, ball: str = "all") -> np.ndarray:
    """[theta]_t sampled at node displacements, shape (2n-1, 2n-1), times h^2.

    `ball` restricts the kernel: "inner" keeps |x| <= t (the unit ball of the
    undilated kernel), "outer" its complement, "all" the full kernel.
    """
    h = 2.0 * L / n
    d = h * np.arange(-(n - 1), n)
    dx, dy = np.meshgrid(d, d, indexing="ij")
    vals = theta(dx / t, dy / t) / t**2
    if ball != "all":
        inner = dx**2 + dy**2 <= t**2
        vals = np.where(inner if ball == "inner" else ~inner, vals, 0.0)
    return vals * h * h


def _theta_convolution(F: SampledField, t: float, ball: str = "all") -> np.ndarray:
    ker = theta_kernel_array(F.L, F.n, t, ball)
    out = fftconvolve(F.values**2, ker, mode="same")
    return np.maximum(out, 0.0)


def tree_size(
    F: SampledField,
    collection,
    steps_per_octave: int = 4,
) -> TreeSize:
    """sup over sampled (p, q, t) in the Whitney region of (F^2*[theta]_t)^(1/2).

    Sampling: the grid nodes inside each square, four (by default) midpoint
    log-t nodes per Whitney interval.  An empty collection yields value zero
    with the `empty` flag set.
    """
    squares = sorted(set(collection))
    if not squares:
        return TreeSize(0.0, None, empty=True)
    if F.dim != 2:
        raise ValueError("tree_size expects a 2D field")
    by_scale: dict[int, list[DyadicSquare]] = {}
    for s in squares:
        by_scale.setdefault(s.k, []).append(s)
    best = -1.0
    best_arg = None
    nodes = F.nodes()
    for k, group in sorted(by_scale.items()):
        ts, _ = octave_nodes(k, steps_per_octave)
        if ts[0] < 2.0 * F.h:
            warnings.warn(
                f"Whitney octave {k} sampled at t={ts[0]:g} below 2h={2 * F.h:g}",
                ResolutionWarning,
                stacklevel=2,
            )
        for t in ts:
            conv = _theta_convolution(F, t)
            for s in group:
                sl = square_cell_slices(F, s)
                if sl is None:
                    continue
                block = conv[sl]
                idx = np.unravel_index(int(np.argmax(block)), block.shape)
                val = float(block[idx])
                if val > best:
                    best = val
                    best_arg = (
                        float(nodes[sl[0].start + idx[0]]),
                        float(nodes[sl[1].start + idx[1]]),
                        float(t),
                    )
    return TreeSize(float(np.sqrt(max(best, 0.0))), best_arg)


# -- sliding-square machinery ----------------------------------------------------

def window_average_squared(values_sq: np.ndarray, w: int, h: float) -> np.ndarray:
    """Mean of values_sq over every w x w cell window; index = top-left cell."""
    n = values_sq.shape[0]
    sat = np.zeros((n + 1, n + 1))
    np.cumsum(np.cumsum(values_sq, axis=0), axis=1, out=sat[1:, 1:])
    sums = (
        sat[w:, w:] - sat[:-w, w:] - sat[w:, :-w] + sat[:-w, :-w]
    )
    return sums / float(w * w)


def _trailing_max(arr: np.ndarray, w: int, axis: int) -> np.ndarray:
    """out[i] = max(arr[i-w+1 : i+1]) along `axis`, -inf beyond the data."""
    if w == 1:
        return arr
    return maximum_filter1d(
        arr, size=w, axis=axis, mode="constant", cval=-np.inf, origin=(w - 1) // 2
    )


def covering_window_max(avg: np.ndarray, w: int, n: int, span: int = 1) -> np.ndarray:
    """Per-block max of `avg` over the windows covering a span x span cell block.

    `avg` is indexed by window top-left cell (shape (n-w+1)^2).  A block with
    top-left cell c is covered by windows with top-left in [c+span-w, c]; the
    result is indexed by c over the valid block positions (shape (n-span+1)^2).
    """
    if span > w:
        raise ValueError("window must be at least as large as the covered block")
    padded = np.full((n, n), -np.inf)
    m = avg.shape[0]
    padded[:m, :m] = avg
    width = w - span + 1
    out = _trailing_max(_trailing_max(padded, width, 0), width, 1)
    return out[: n - span + 1, : n - span + 1]


def quadratic_maximal(F: SampledField) -> MaximalField:
    """Largest root mean square average over grid squares containing each node.

    Family: all positions, side 2^j cells for every j up to the full grid.
    """
    if F.dim != 2:
        raise ValueError("quadratic_maximal expects a 2D field")
    n = F.n
    vsq = F.values**2
    best = np.full((n, n), -np.inf)
    sides = []
    w = 1
    while w <= n:
        sides.append(w)
        avg = window_average_squared(vsq, w, F.h)
        np.maximum(best, covering_window_max(avg, w, n, span=1), out=best)
        w *= 2
    out = F.with_values(np.sqrt(np.maximum(best, 0.0)))
    return MaximalField(out, tuple(sides))


def level_set(M: MaximalField, lam: float) -> LevelSet:
    """Grid cells where the maximal field exceeds lam, with exact cell measure."""
    if lam < 0:
        raise ValueError("level must be positive")
    mask = M.field.values > lam
    measure = float(mask.sum()) * M.field.h**2
    return LevelSet(mask, measure, lam)


# -- discretized theta domination ---------------------------------------------------

def simple_radial_approximation(radii: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Layer-cake coefficients approximating theta restricted outside the unit ball.

    The target is theta*1_{|x|>1} + (1/2)*1_{|x|<=1}, radially decreasing; on
    radii 1 = r_1 < ... < r_m the simple function sum_i a_i 1_{B(r_i)} with
    a_i = rho(r_i) - rho(r_{i+1}) (rho(r) = theta evaluated at radius max(r,1),
    rho(r_{m+1}) = 0) approximates it pointwise from below, increasing under
    refinement of the radius grid.
    """
    r = np.asarray(radii, dtype=np.float64)
    if r[0] != 1.0 or np.any(np.diff(r) <= 0):
        raise ValueError("radii must start at 1 and increase strictly")
    rho = theta(np.maximum(r, 1.0), 0.0)
    coeffs = np.empty_like(rho)
    coeffs[:-1] = rho[:-1] - rho[1:]
    coeffs[-1] = rho[-1]
    return r, coeffs


def evaluate_radial_simple(radii: np.ndarray, coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate sum_i a_i 1_{B(r_i)} at radial distances |x|."""
    x = np.abs(np.asarray(x, dtype=np.float64))
    inside = x[..., None] <= radii
    return inside @ coeffs


@dataclass(frozen=True)
class BallDominationReport:
    ball_value: float
    complement_value: float
    scale_bound: float
    ball_ratio: float
    complement_ratio: float


def theta_ball_domination_check(
    t: float,
    k: int,
    offset: tuple[float, float],
    seed: int = 0,
    L: float = 2.0,
    n: int = 64,
) -> BallDominationReport:
    """Sampled check that both ball-split convolutions stay of order 2^(2k).

    Builds a nonnegative field G, rescales it so the largest square root mean
    square average equals 2^k, and evaluates G^2 * [theta 1_B]_t and
    G^2 * [theta 1_{B^c}]_t at the offset node, reporting each against 2^(2k).
    """
    if not 2.0 ** (k - 1) <= t <= 2.0**k:
        raise ValueError(f"t={t} is not in the Whitney interval of octave {k}")
    rng = np.random.default_rng(seed)
    vals = rng.random((n, n))
    G = SampledField(2, L, n, vals)
    peak = float(np.max(quadratic_maximal(G).field.values))
    G = G.with_values(G.values * (2.0**k / peak))
    nodes = G.nodes()
    ix = int(np.argmin(np.abs(nodes - offset[0])))
    iy = int(np.argmin(np.abs(nodes - offset[1])))
    ball = float(_theta_convolution(G, t, "inner")[ix, iy])
    comp = float(_theta_convolution(G, t, "outer")[ix, iy])
    bound = 2.0 ** (2 * k)
    return BallDominationReport(ball, comp, bound, ball / bound, comp / bound)
