"""Exact combinatorics of dyadic intervals, squares and convex trees.

Everything in this module is integer arithmetic on scale/position indices
(k, m): the interval [2^k*m, 2^k*(m+1)] or the square with that interval on
each axis.  No floating point enters any membership or boundary computation;
the only floats produced are exact dyadic values such as side lengths and
areas, which are representable in binary.

A tree is a finite set of dyadic squares together with a root containing all
members.  It is convex when every square sandwiched between two members is
itself a member, which for a rooted tree is equivalent to being closed under
taking parents.  Leaves (non-members whose parent is a member) tile the root.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

__all__ = [
    "DyadicInterval",
    "DyadicSquare",
    "ConvexTree",
    "WhitneyRegion",
    "GenerationComplement",
    "children",
    "is_convex",
    "leaves",
    "generation",
    "boundary_lattice_points",
    "boundary_weight",
    "whitney_region",
    "random_convex_tree",
    "tree_to_text",
    "tree_from_text",
    "enumerate_unit_trees",
    "max_boundary_ratio_exhaustive",
]


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """The interval [2^k * m, 2^k * (m+1)]."""

    k: int
    m: int

    @property
    def length(self) -> float:
        return 2.0**self.k

    @property
    def left(self) -> float:
        return 2.0**self.k * self.m

    @property
    def right(self) -> float:
        return 2.0**self.k * (self.m + 1)

    def parent(self) -> "DyadicInterval":
        return DyadicInterval(self.k + 1, self.m >> 1)

    def children(self) -> tuple["DyadicInterval", "DyadicInterval"]:
        return (
            DyadicInterval(self.k - 1, 2 * self.m),
            DyadicInterval(self.k - 1, 2 * self.m + 1),
        )

    def contains(self, other: "DyadicInterval") -> bool:
        if other.k > self.k:
            return False
        # Right-shift is a floor division by a power of two, valid for
        # negative indices as well.
        return (other.m >> (self.k - other.k)) == self.m


@dataclass(frozen=True, order=True)
class DyadicSquare:
    """The square [2^k*mx, 2^k*(mx+1)] x [2^k*my, 2^k*(my+1)]."""

    k: int
    mx: int
    my: int

    @property
    def side(self) -> float:
        return 2.0**self.k

    @property
    def area(self) -> float:
        return 2.0 ** (2 * self.k)

    @property
    def x0(self) -> float:
        return 2.0**self.k * self.mx

    @property
    def y0(self) -> float:
        return 2.0**self.k * self.my

    def intervals(self) -> tuple[DyadicInterval, DyadicInterval]:
        return DyadicInterval(self.k, self.mx), DyadicInterval(self.k, self.my)

    def parent(self) -> "DyadicSquare":
        return DyadicSquare(self.k + 1, self.mx >> 1, self.my >> 1)

    def children(self) -> tuple["DyadicSquare", ...]:
        k, mx, my = self.k - 1, 2 * self.mx, 2 * self.my
        return (
            DyadicSquare(k, mx, my),
            DyadicSquare(k, mx + 1, my),
            DyadicSquare(k, mx, my + 1),
            DyadicSquare(k, mx + 1, my + 1),
        )

    def contains(self, other: "DyadicSquare") -> bool:
        if other.k > self.k:
            return False
        s = self.k - other.k
        return (other.mx >> s) == self.mx and (other.my >> s) == self.my

    def ancestor_at(self, k: int) -> "DyadicSquare":
        """The unique dyadic square of scale k >= self.k containing self."""
        if k < self.k:
            raise ValueError("ancestor scale must not be finer than the square")
        s = k - self.k
        return DyadicSquare(k, self.mx >> s, self.my >> s)

    def triple(self) -> tuple[float, float, float, float]:
        """Bounding box (x0, x1, y0, y1) of the concentric 3x enlargement."""
        return (
            self.x0 - self.side,
            self.x0 + 2 * self.side,
            self.y0 - self.side,
            self.y0 + 2 * self.side,
        )


def children(square: DyadicSquare) -> tuple[DyadicSquare, ...]:
    """The four squares of half the side length tiling `square`."""
    return square.children()


def is_convex(members: Iterable[DyadicSquare], root: DyadicSquare | None = None) -> bool:
    """Whether a rooted square collection is convex (parent-closed).

    If `root` is None it is taken to be the unique coarsest member; a member
    not contained in the root raises ValueError.
    """
    mset = set(members)
    if not mset:
        return False
    if root is None:
        root = max(mset, key=lambda s: s.k)
    if root not in mset:
        return False
    for s in mset:
        if not root.contains(s):
            raise ValueError(f"member {s} is not contained in the root {root}")
        if s != root and s.parent() not in mset:
            return False
    return True


@dataclass(frozen=True)
class ConvexTree:
    """A convex tree of dyadic squares with root `root`.

    Use `ConvexTree.build` to validate convexity on construction.
    """

    root: DyadicSquare
    members: frozenset[DyadicSquare]

    @staticmethod
    def build(root: DyadicSquare, members: Iterable[DyadicSquare]) -> "ConvexTree":
        mset = frozenset(members) | {root}
        if not is_convex(mset, root):
            raise ValueError("square collection is not a convex tree")
        return ConvexTree(root, mset)

    def __iter__(self) -> Iterator[DyadicSquare]:
        return iter(sorted(self.members))

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, square: DyadicSquare) -> bool:
        return square in self.members

    @property
    def root_area(self) -> float:
        return self.root.area

    def scales(self) -> list[int]:
        """Scales k with at least one member, coarsest first."""
        return sorted({s.k for s in self.members}, reverse=True)

    def depth(self) -> int:
        """Number of refinement levels below the root."""
        return self.root.k - min(s.k for s in self.members)

    def at_scale(self, k: int) -> list[DyadicSquare]:
        return sorted(s for s in self.members if s.k == k)


@dataclass(frozen=True)
class GenerationComplement:
    """All scale-k dyadic squares not in a given generation.

    The set is infinite, so it is represented by its membership predicate.
    """

    k: int
    generation: frozenset[DyadicSquare]

    def __contains__(self, square: DyadicSquare) -> bool:
        return square.k == self.k and square not in self.generation


def generation(tree: ConvexTree, k: int) -> tuple[list[DyadicSquare], GenerationComplement]:
    """Members of scale k and the (implicit) complement at that scale."""
    gen = tree.at_scale(k)
    return gen, GenerationComplement(k, frozenset(gen))


def leaves(tree: ConvexTree) -> set[DyadicSquare]:
    """Squares outside the tree whose parent is a member.

    For a convex tree these tile the root up to measure zero.
    """
    out: set[DyadicSquare] = set()
    for s in tree.members:
        for c in s.children():
            if c not in tree.members:
                out.add(c)
    return out


def boundary_lattice_points(tree: ConvexTree, k: int) -> set[tuple[float, float]]:
    """Scale-k lattice points on the topological boundary of the scale-k union.

    A lattice point lies on the boundary iff among its four incident scale-k
    squares at least one is a member and at least one is not; squares beyond
    the finite collection count as non-members.
    Returned coordinates are exact dyadic floats (multiples of 2^k).
    """
    gen = {(s.mx, s.my) for s in tree.members if s.k == k}
    if not gen:
        return set()
    candidates: set[tuple[int, int]] = set()
    for mx, my in gen:
        candidates.update(
            {(mx, my), (mx + 1, my), (mx, my + 1), (mx + 1, my + 1)}
        )
    side = 2.0**k
    out: set[tuple[float, float]] = set()
    for a, b in candidates:
        incident = sum(
            (a + dx, b + dy) in gen for dx in (-1, 0) for dy in (-1, 0)
        )
        if 1 <= incident <= 3:
            out.add((side * a, side * b))
    return out


def boundary_weight(tree: ConvexTree) -> float:
    """Sum over scales k of 2^(2k) times the boundary lattice point count."""
    total = 0.0
    for k in tree.scales():
        total += 2.0 ** (2 * k) * len(boundary_lattice_points(tree, k))
    return total


@dataclass(frozen=True)
class WhitneyRegion:
    """Union of boxes S x [side(S)/2, side(S)] over a square collection."""

    boxes: tuple[tuple[DyadicSquare, tuple[float, float]], ...]

    def __len__(self) -> int:
        return len(self.boxes)

    def scales(self) -> list[int]:
        return sorted({s.k for s, _ in self.boxes}, reverse=True)

    def at_scale(self, k: int) -> list[tuple[DyadicSquare, tuple[float, float]]]:
        return [(s, tt) for s, tt in self.boxes if s.k == k]


def whitney_region(collection: Iterable[DyadicSquare]) -> WhitneyRegion:
    """One box S x [side/2, side] per square in the collection."""
    boxes = tuple(
        (s, (s.side / 2.0, s.side)) for s in sorted(set(collection))
    )
    return WhitneyRegion(boxes)


_DEFAULT_ROOT = DyadicSquare(0, 0, 0)


def random_convex_tree(
    seed: int,
    max_depth: int,
    refine_probability: float,
    root: DyadicSquare = _DEFAULT_ROOT,
) -> ConvexTree:
    """Top-down random refinement; always convex, deterministic in the seed.

    Each member square of depth < max_depth is independently refined with the
    given probability, refinement adding all four children as members.
    """
    if max_depth < 0:
        raise ValueError("max_depth must be nonnegative")
    if not 0.0 <= refine_probability <= 1.0:
        raise ValueError("refine_probability must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    members = {root}
    frontier = [root]
    for _ in range(max_depth):
        next_frontier: list[DyadicSquare] = []
        for s in frontier:
            if rng.random() < refine_probability:
                for c in s.children():
                    members.add(c)
                    next_frontier.append(c)
        if not next_frontier:
            break
        frontier = next_frontier
    return ConvexTree.build(root, members)


def tree_to_text(tree: ConvexTree) -> str:
    """Line-based form: one `k mx my` per line, root first."""
    lines = [f"{tree.root.k} {tree.root.mx} {tree.root.my}"]
    for s in sorted(tree.members - {tree.root}):
        lines.append(f"{s.k} {s.mx} {s.my}")
    return "\n".join(lines) + "\n"


def tree_from_text(text: str) -> ConvexTree:
    squares: list[DyadicSquare] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected `k mx my`, got {raw!r}")
        k, mx, my = (int(p) for p in parts)
        squares.append(DyadicSquare(k, mx, my))
    if not squares:
        raise ValueError("empty tree serialization")
    return ConvexTree.build(squares[0], squares)


# -- Exhaustive small-tree enumeration (boundary-constant calibration) -------
#
# Convex trees rooted at the unit square with members at scales 0, -1, -2 are
# in bijection with pairs of bitboards (m1 over the 2x2 child grid, m2 over
# the 4x4 grandchild grid) such that every m2 bit has its parent bit set in
# m1.  There are 17^4 = 83521 such trees; boundary point counts per bitboard
# are table lookups, so scanning all of them is cheap.


def _boundary_counts_all_masks(cells: int) -> np.ndarray:
    """Boundary lattice point count for every occupancy mask of a cells x cells grid."""
    n_masks = 1 << (cells * cells)
    masks = np.arange(n_masks, dtype=np.uint32)
    bits = (masks[:, None] >> np.arange(cells * cells, dtype=np.uint32)) & 1
    grid = bits.reshape(n_masks, cells, cells).astype(np.uint8)
    padded = np.zeros((n_masks, cells + 2, cells + 2), dtype=np.uint8)
    padded[:, 1:-1, 1:-1] = grid
    incident = (
        padded[:, :-1, :-1]
        + padded[:, 1:, :-1]
        + padded[:, :-1, 1:]
        + padded[:, 1:, 1:]
    )
    boundary = (incident >= 1) & (incident <= 3)
    return boundary.sum(axis=(1, 2)).astype(np.int64)


def _mask_to_tree(m1: int, m2: int) -> ConvexTree:
    members = {_DEFAULT_ROOT}
    for b in range(4):
        if m1 >> b & 1:
            members.add(DyadicSquare(-1, b & 1, b >> 1))
    for b in range(16):
        if m2 >> b & 1:
            members.add(DyadicSquare(-2, b & 3, b >> 2))
    return ConvexTree.build(_DEFAULT_ROOT, members)


def _allowed_grandchildren(m1: int) -> int:
    """Bits of the 4x4 grid whose parent bit is set in the 2x2 mask m1."""
    allowed = 0
    for b in range(16):
        parent_bit = ((b & 3) >> 1) + 2 * ((b >> 2) >> 1)
        if m1 >> parent_bit & 1:
            allowed |= 1 << b
    return allowed


def enumerate_unit_trees() -> Iterator[tuple[int, int]]:
    """All (m1, m2) bitboard pairs encoding convex unit-root trees of depth <= 2."""
    for m1 in range(16):
        allowed = _allowed_grandchildren(m1)
        m2 = 0
        while True:
            yield m1, m2
            if m2 == allowed:
                break
            m2 = (m2 - allowed) & allowed


def max_boundary_ratio_exhaustive() -> tuple[float, ConvexTree]:
    """Exhaustive max of boundary_weight / root area over all 83521 unit trees.

    Covers every convex tree rooted at the unit square with at most two
    refinement levels (scales 0, -1, -2).
    """
    tbl1 = _boundary_counts_all_masks(2)
    tbl2 = _boundary_counts_all_masks(4)
    best = -1.0
    best_pair = (0, 0)
    count = 0
    m2_all = np.arange(1 << 16, dtype=np.uint32)
    for m1 in range(16):
        allowed = _allowed_grandchildren(m1)
        valid = m2_all[(m2_all & ~np.uint32(allowed)) == 0]
        ratios = 4.0 + tbl1[m1] / 4.0 + tbl2[valid] / 16.0
        count += valid.size
        i = int(np.argmax(ratios))
        if ratios[i] > best:
            best = float(ratios[i])
            best_pair = (m1, int(valid[i]))
    if count != 17**4:
        raise AssertionError(f"enumeration produced {count} trees, expected {17**4}")
    return best, _mask_to_tree(*best_pair)
