"""Unit tests for scale octaves, tree size, and quadratic maximal machinery."""

import math

import numpy as np
import pytest

from entform.dyadic import DyadicSquare, random_convex_tree
from entform.fields import GridError, SampledField, zeros_field
from entform.maximal import (
    evaluate_radial_simple,
    level_set,
    quadratic_maximal,
    simple_radial_approximation,
    theta_ball_domination_check,
    tree_size,
)
from entform.scales import (
    LN2,
    TruncationConfig,
    cell_scale,
    octave_nodes,
    square_cell_slices,
    squares_tiling_box,
)

THETA_MASS = math.pi**2 / 2.0  # polar integration of (1+r^4)^(-1)


# -- scales ---------------------------------------------------------------------

def test_octave_nodes_cover_interval():
    ts, w = octave_nodes(0, 4)
    assert ts.size == 4
    assert np.all((ts >= 0.5) & (ts <= 1.0))
    assert w == pytest.approx(LN2 / 4)
    # Log-midpoints are symmetric in log space.
    logs = np.log2(ts)
    assert np.allclose(np.diff(logs), 0.25)


def test_truncation_config_totals_and_shift():
    cfg = TruncationConfig.symmetric(2, steps_per_octave=4)
    assert (cfg.lo, cfg.hi) == (-2, 2)
    assert cfg.total_samples == 2 * 2 * 4
    assert list(cfg.octaves) == [-1, 0, 1, 2]
    shifted = cfg.shifted(1)
    assert (shifted.lo, shifted.hi) == (-3, 1)
    assert np.allclose(shifted.all_nodes(), cfg.all_nodes() / 2.0)
    with pytest.raises(ValueError):
        TruncationConfig(2, 2)
    with pytest.raises(ValueError):
        TruncationConfig.symmetric(0)


def test_cell_scale_and_slices():
    F = zeros_field(2.0, 16)  # h = 1/4 = 2^-2
    assert cell_scale(2.0, 16) == -2
    sq = DyadicSquare(-1, 0, 0)  # [0, 1/2)^2
    sl = square_cell_slices(F, sq)
    assert sl == (slice(8, 10), slice(8, 10))
    # Square partially outside the box is clipped.
    sq2 = DyadicSquare(1, -2, 0)  # [-4,-2) x [0,2): x-range clipped away entirely
    assert square_cell_slices(F, sq2) is None
    with pytest.raises(GridError):
        square_cell_slices(F, DyadicSquare(-5, 0, 0))
    with pytest.raises(GridError):
        cell_scale(3.0, 16)


def test_squares_tiling_box():
    F = zeros_field(2.0, 16)
    tiles = squares_tiling_box(F, 0)
    assert len(tiles) == 16
    covered = np.zeros((16, 16), dtype=int)
    for s in tiles:
        sl = square_cell_slices(F, s)
        covered[sl] += 1
    assert np.all(covered == 1)
    # Coarser than the box: the four quadrant-covering squares.
    assert len(squares_tiling_box(F, 2)) == 4


# -- tree size ------------------------------------------------------------------

def test_tree_size_zero_field_and_empty_collection():
    F = zeros_field(2.0, 32)
    ts = tree_size(F, [DyadicSquare(0, 0, 0)])
    assert ts.value == 0.0
    assert not ts.empty
    empty = tree_size(F, [])
    assert empty.value == 0.0 and empty.empty


def test_tree_size_constant_field_matches_kernel_mass():
    # F identically c over a region much larger than t: value c * sqrt(pi^2/2).
    c = 0.7
    F = SampledField(2, 8.0, 256, np.full((256, 256), c))
    ts = tree_size(F, [DyadicSquare(-2, 0, 0)])  # t around 1/8..1/4, box 8
    assert ts.value == pytest.approx(c * math.sqrt(THETA_MASS), rel=1e-2)
    assert ts.argmax is not None
    p, q, t = ts.argmax
    assert 2.0**-3 <= t <= 2.0**-2
    assert 0.0 <= p <= 0.25 and 0.0 <= q <= 0.25


def test_tree_size_monotone_in_collection():
    rng = np.random.default_rng(5)
    F = SampledField(2, 2.0, 32, rng.random((32, 32)))
    small = [DyadicSquare(-1, 0, 0)]
    big = small + [DyadicSquare(-1, -1, 0), DyadicSquare(0, -1, -1)]
    assert tree_size(F, small).value <= tree_size(F, big).value


def test_tree_size_argmax_is_attained_value():
    rng = np.random.default_rng(6)
    F = SampledField(2, 2.0, 64, rng.random((64, 64)))
    tree = random_convex_tree(3, max_depth=2, refine_probability=0.7)
    ts = tree_size(F, tree)
    from entform.maximal import _theta_convolution

    p, q, t = ts.argmax
    conv = _theta_convolution(F, t)
    nodes = F.nodes()
    ix = int(np.argmin(np.abs(nodes - p)))
    iy = int(np.argmin(np.abs(nodes - q)))
    assert ts.value**2 == pytest.approx(conv[ix, iy], rel=1e-12)


# -- quadratic maximal ------------------------------------------------------------

def _brute_force_maximal(values: np.ndarray) -> np.ndarray:
    n = values.shape[0]
    vsq = values**2
    best = np.zeros((n, n))
    w = 1
    while w <= n:
        for ax in range(n - w + 1):
            for ay in range(n - w + 1):
                avg = vsq[ax : ax + w, ay : ay + w].mean()
                np.maximum(best[ax : ax + w, ay : ay + w], avg, out=best[ax : ax + w, ay : ay + w])
        w *= 2
    return np.sqrt(best)


def test_quadratic_maximal_matches_brute_force():
    rng = np.random.default_rng(7)
    for n in (8, 16):
        F = SampledField(2, 1.0, n, rng.random((n, n)))
        M = quadratic_maximal(F)
        assert np.max(np.abs(M.field.values - _brute_force_maximal(F.values))) <= 1e-12
        assert M.window_cells == tuple(2**j for j in range(int(math.log2(n)) + 1))


def test_quadratic_maximal_single_cell_indicator():
    n = 16
    vals = np.zeros((n, n))
    vals[5, 9] = 1.0
    M = quadratic_maximal(SampledField(2, 1.0, n, vals))
    assert M.field.values[5, 9] == 1.0  # the one-cell window average


def test_quadratic_maximal_homogeneity():
    rng = np.random.default_rng(8)
    F = SampledField(2, 1.0, 16, rng.standard_normal((16, 16)))
    M1 = quadratic_maximal(F).field.values
    M2 = quadratic_maximal(F.with_values(-3.0 * F.values)).field.values
    assert np.allclose(M2, 3.0 * M1, rtol=1e-13)


def test_quadratic_maximal_dominates_every_family_average():
    rng = np.random.default_rng(9)
    n = 16
    F = SampledField(2, 1.0, n, rng.random((n, n)))
    M = quadratic_maximal(F)
    vsq = F.values**2
    for w in M.window_cells:
        for ax in range(0, n - w + 1, 3):
            for ay in range(0, n - w + 1, 3):
                avg = math.sqrt(vsq[ax : ax + w, ay : ay + w].mean())
                assert np.all(M.field.values[ax : ax + w, ay : ay + w] >= avg - 1e-12)


def test_quadratic_maximal_scaling_covariance():
    rng = np.random.default_rng(10)
    vals = rng.random((32, 32))
    M_coarse = quadratic_maximal(SampledField(2, 2.0, 32, vals)).field.values
    M_fine = quadratic_maximal(SampledField(2, 1.0, 32, vals)).field.values
    assert np.max(np.abs(M_coarse - M_fine)) <= 1e-12


# -- level sets -------------------------------------------------------------------

def test_level_set_basic_properties():
    rng = np.random.default_rng(11)
    F = SampledField(2, 1.0, 16, rng.random((16, 16)))
    M = quadratic_maximal(F)
    top = float(M.field.values.max())
    assert level_set(M, top + 1.0).measure == 0.0
    support = level_set(M, 0.0)
    assert support.measure == pytest.approx(np.count_nonzero(M.field.values > 0) * F.h**2)
    lams = [0.1, 0.3, 0.5, 0.9, 1.5]
    measures = [level_set(M, lam).measure for lam in lams]
    assert all(a >= b for a, b in zip(measures, measures[1:]))


def test_weak_type_mass_bound_small_grid():
    # |{M(G) > lam}| <= C lam^(-2) with C calibrated by brute force; the
    # discretized family stays well below the Vitali-type constant.
    rng = np.random.default_rng(12)
    worst = 0.0
    for trial in range(20):
        n = 16
        vals = rng.random((n, n)) * (rng.random((n, n)) < 0.3)
        G = SampledField(2, 1.0, n, vals)
        norm = math.sqrt(float((G.values**2).sum()) * G.h**2)
        if norm == 0.0:
            continue
        G = G.with_values(G.values / norm)
        M = quadratic_maximal(G)
        for lam in (2.0, 8.0, 2.0**10):
            worst = max(worst, level_set(M, lam).measure * lam**2)
    assert worst <= 30.0


# -- discretized theta domination ----------------------------------------------------

def test_simple_radial_approximation_monotone_from_below():
    xs = np.linspace(0.0, 6.0, 200)
    target = np.where(xs <= 1.0, 0.5, 1.0 / (1.0 + xs**4))
    # Nested radius grids: monotone increase holds under refinement.
    fine = np.concatenate(([1.0], 1.0 + np.geomspace(0.01, 9.0, 64)))
    prev = None
    for stride in (8, 4, 2, 1):
        radii = np.concatenate(([1.0], fine[1:][::stride]))
        r, coeffs = simple_radial_approximation(radii)
        vals = evaluate_radial_simple(r, coeffs, xs)
        assert np.all(vals <= target + 1e-15)
        if prev is not None:
            assert np.all(vals >= prev - 1e-15)
        prev = vals
    assert np.max(np.abs(prev - target)) <= 0.05


def test_theta_ball_domination_zero_and_constant_fields():
    rep = theta_ball_domination_check(0.75, 0, (0.0, 0.0), seed=3, L=8.0, n=256)
    assert rep.ball_value >= 0 and rep.complement_value >= 0
    assert rep.scale_bound == 1.0
    # Constant field at level 2^k: total convolution recovers the theta mass.
    k = 0
    n, L = 256, 8.0
    const = SampledField(2, L, n, np.full((n, n), 1.0))
    from entform.maximal import _theta_convolution

    total = _theta_convolution(const, 0.75)[n // 2, n // 2]
    assert total == pytest.approx(THETA_MASS, rel=0.02)
    rep2 = theta_ball_domination_check(0.75, k, (0.0, 0.0), seed=1, L=L, n=n)
    assert rep2.ball_ratio + rep2.complement_ratio <= 1.2 * THETA_MASS


def test_theta_ball_domination_rejects_bad_t():
    with pytest.raises(ValueError):
        theta_ball_domination_check(3.0, 0, (0.0, 0.0))
