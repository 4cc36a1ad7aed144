"""Finite sampled spaces: explicit point lists, block norms, balls.

Points are plain tuples of floats.  A space never generates points; it
is exactly the list it was declared with.  Distances to empty sets are
``math.inf`` (floats carry infinity directly, no sentinel values).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import InitVar, dataclass
from functools import cached_property
from typing import Iterable, Literal

import numpy as np

Point = tuple[float, ...]
BallKind = Literal["open", "closed"]

#: slack absorbed by closed balls and inclusion checks
TOLERANCE = 1e-12
#: constructed points must land this close to a declared grid point
SNAP = 1e-9
#: duplicate-point rejection threshold at construction
DISTINCT = 1e-12

NORMS = ("l1", "l2", "linf")


class OffGridError(ValueError):
    """A constructed point does not land on the declared grid."""


def as_point(value) -> Point:
    """Coerce a scalar or coordinate sequence to a point tuple."""
    if isinstance(value, (int, float)):
        return (float(value),)
    return tuple(float(c) for c in value)


def _segment_norms(seg: np.ndarray, norm: str) -> np.ndarray:
    if norm == "l1":
        return np.abs(seg).sum(axis=1)
    if norm == "l2":
        return np.sqrt((seg * seg).sum(axis=1))
    return np.abs(seg).max(axis=1)


def _block_norms(diff: np.ndarray, blocks) -> np.ndarray:
    """Norm of each row of ``diff`` under a block (sum-of-segments) norm."""
    out = np.zeros(diff.shape[0])
    col = 0
    for width, norm in blocks:
        out += _segment_norms(diff[:, col:col + width], norm)
        col += width
    return out


@dataclass(frozen=True, eq=False)
class GridSpace:
    """An explicit finite set of points in R^dim with a block norm.

    ``blocks`` lists (width, norm) segments; the distance between two
    points is the sum of the segment norms of the difference.  Plain
    spaces have one block, product spaces concatenate their factors'.
    """

    label: str
    points: tuple[Point, ...]
    blocks: tuple[tuple[int, str], ...]
    check_distinct: InitVar[bool] = True

    def __post_init__(self, check_distinct: bool):
        if not self.points:
            raise ValueError(f"space {self.label!r}: needs at least one point")
        for width, norm in self.blocks:
            if norm not in NORMS:
                raise ValueError(f"space {self.label!r}: unknown norm {norm!r}")
            if width <= 0:
                raise ValueError(f"space {self.label!r}: bad block width {width}")
        dim = self.dim
        for pt in self.points:
            if len(pt) != dim:
                raise ValueError(
                    f"space {self.label!r}: point {pt} has dimension "
                    f"{len(pt)}, expected {dim}")
        if check_distinct:
            self._reject_duplicates()

    def _reject_duplicates(self) -> None:
        arr = self.array
        n = arr.shape[0]
        step = max(1, int(2_000_000 / max(n, 1)))
        for start in range(0, n, step):
            chunk = arr[start:start + step]
            dists = _block_norms(
                (chunk[:, None, :] - arr[None, :, :]).reshape(-1, self.dim),
                self.blocks).reshape(chunk.shape[0], n)
            for i in range(chunk.shape[0]):
                dists[i, start + i] = math.inf
            pos = np.argwhere(dists <= DISTINCT)
            if pos.size:
                i, j = pos[0]
                raise ValueError(
                    f"space {self.label!r}: duplicate points "
                    f"{self.points[start + i]} and {self.points[j]}")

    @property
    def dim(self) -> int:
        return sum(width for width, _ in self.blocks)

    def __len__(self) -> int:
        return len(self.points)

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float).reshape(len(self.points), self.dim)

    @cached_property
    def index(self) -> dict[Point, int]:
        return {pt: i for i, pt in enumerate(self.points)}

    @cached_property
    def diameter(self) -> float:
        """Largest pairwise distance (the sampled extent of the space)."""
        best = 0.0
        arr = self.array
        for i in range(arr.shape[0]):
            best = max(best, float(_block_norms(arr - arr[i], self.blocks).max()))
        return best

    @cached_property
    def min_gap(self) -> float:
        """Smallest positive pairwise distance."""
        best = math.inf
        arr = self.array
        for i in range(arr.shape[0]):
            d = _block_norms(arr - arr[i], self.blocks)
            d[i] = math.inf
            best = min(best, float(d.min()))
        return best

    def compatible_with(self, other: "GridSpace") -> bool:
        """Same sampled points and same norm, labels aside."""
        return self.blocks == other.blocks and self.points == other.points

    def same_ambient(self, other: "GridSpace") -> bool:
        """Same dimension and norm; the point lists may differ."""
        return self.blocks == other.blocks

    def norm_of(self, vector) -> float:
        vec = np.asarray(as_point(vector), dtype=float).reshape(1, -1)
        if vec.shape[1] != self.dim:
            raise ValueError(
                f"space {self.label!r}: vector of dimension {vec.shape[1]}, "
                f"expected {self.dim}")
        return float(_block_norms(vec, self.blocks)[0])

    def distance(self, p, q) -> float:
        a = np.asarray(as_point(p), dtype=float)
        b = np.asarray(as_point(q), dtype=float)
        if a.shape != b.shape or a.shape[0] != self.dim:
            raise ValueError(
                f"space {self.label!r}: dimension mismatch between {p} and {q}")
        return float(_block_norms((a - b).reshape(1, -1), self.blocks)[0])

    def dists_to(self, value) -> np.ndarray:
        """Distances from every grid point to ``value``."""
        vec = np.asarray(as_point(value), dtype=float)
        if vec.shape[0] != self.dim:
            raise ValueError(
                f"space {self.label!r}: point of dimension {vec.shape[0]}, "
                f"expected {self.dim}")
        return _block_norms(self.array - vec, self.blocks)

    def locate(self, value, tol: float = SNAP) -> Point | None:
        """The declared grid point within ``tol`` of ``value``, if any."""
        pt = as_point(value)
        hit = self.index.get(pt)
        if hit is not None:
            return pt
        d = self.dists_to(pt)
        i = int(d.argmin())
        return self.points[i] if d[i] <= tol else None

    def require(self, value, context: str = "point") -> Point:
        found = self.locate(value)
        if found is None:
            raise OffGridError(
                f"space {self.label!r}: {context} {as_point(value)} is not on the grid")
        return found

    def ball_mask(self, center, radius: float, kind: BallKind) -> np.ndarray:
        """Membership mask; distances within TOLERANCE of the radius
        count as boundary (outside an open ball, inside a closed one)."""
        if radius <= 0:
            raise ValueError(f"ball radius must be positive, got {radius}")
        d = self.dists_to(center)
        if kind == "closed":
            return d <= radius + TOLERANCE
        return d < radius - TOLERANCE


def grid_space(label: str, points: Iterable, norm: str = "l1") -> GridSpace:
    """Build a plain space from raw point values with a single norm block."""
    pts = tuple(as_point(p) for p in points)
    dim = len(pts[0]) if pts else 0
    return GridSpace(label, pts, ((dim, norm),))


def grid_1d(label: str, start: float, stop: float, step: float,
            norm: str = "l1") -> GridSpace:
    """Uniform 1-D grid; values rounded to 12 decimals for clean floats."""
    if step <= 0:
        raise ValueError("step must be positive")
    count = int(round((stop - start) / step)) + 1
    pts = tuple((round(start + k * step, 12),) for k in range(count))
    return GridSpace(label, pts, ((1, norm),))


def product_space(*spaces: GridSpace, label: str | None = None) -> GridSpace:
    """Cartesian product space; distances add across the factors."""
    if not spaces:
        raise ValueError("product of no spaces")
    name = label or "x".join(s.label for s in spaces)
    pts = tuple(
        tuple(itertools.chain.from_iterable(combo))
        for combo in itertools.product(*(s.points for s in spaces)))
    blocks = tuple(itertools.chain.from_iterable(s.blocks for s in spaces))
    return GridSpace(name, pts, blocks, check_distinct=False)


@dataclass(frozen=True, eq=False)
class PointSet:
    """A subset of a space's points, iterated in declared grid order."""

    space: GridSpace
    members: frozenset[Point]

    def __post_init__(self):
        idx = self.space.index
        for pt in self.members:
            if pt not in idx:
                raise ValueError(
                    f"point {pt} is not on the grid of space {self.space.label!r}")

    @classmethod
    def from_mask(cls, space: GridSpace, mask: np.ndarray) -> "PointSet":
        pts = space.points
        return cls(space, frozenset(pts[i] for i in np.flatnonzero(mask)))

    @cached_property
    def ordered(self) -> tuple[Point, ...]:
        idx = self.space.index
        return tuple(sorted(self.members, key=idx.__getitem__))

    @cached_property
    def array(self) -> np.ndarray:
        if not self.members:
            return np.empty((0, self.space.dim))
        return np.asarray(self.ordered, dtype=float)

    @cached_property
    def mask(self) -> np.ndarray:
        out = np.zeros(len(self.space.points), dtype=bool)
        idx = self.space.index
        for pt in self.members:
            out[idx[pt]] = True
        return out

    def __contains__(self, pt) -> bool:
        return as_point(pt) in self.members

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.ordered)

    @property
    def is_empty(self) -> bool:
        return not self.members


def ball(space: GridSpace, center, radius: float, kind: BallKind = "open") -> PointSet:
    """Grid points within ``radius`` of ``center`` (strict when open)."""
    return PointSet.from_mask(space, space.ball_mask(center, radius, kind))


def distance_point_set(space: GridSpace, point, target: PointSet) -> float:
    """min distance from ``point`` to the set; +inf when the set is empty."""
    if target.is_empty:
        return math.inf
    vec = np.asarray(as_point(point), dtype=float)
    if vec.shape[0] != space.dim:
        raise ValueError(
            f"space {space.label!r}: point of dimension {vec.shape[0]}, "
            f"expected {space.dim}")
    return float(_block_norms(target.array - vec, space.blocks).min())


def distance_set_set(space: GridSpace, first: PointSet, second: PointSet) -> float:
    """inf over pairs; +inf when either set is empty."""
    if first.is_empty or second.is_empty:
        return math.inf
    best = math.inf
    arr = second.array
    for a in first.array:
        best = min(best, float(_block_norms(arr - a, space.blocks).min()))
    return best


def nearest_in(space: GridSpace, point, target: PointSet) -> tuple[float, Point | None]:
    """Distance to the set together with a closest member."""
    if target.is_empty:
        return math.inf, None
    vec = np.asarray(as_point(point), dtype=float)
    d = _block_norms(target.array - vec, space.blocks)
    i = int(d.argmin())
    return float(d[i]), target.ordered[i]


def uncovered_witness(covered_by: PointSet, cover: PointSet) -> tuple[float, Point | None]:
    """Worst member of the first set measured against the second.

    Returns (defect, witness).  The defect is 0 when every member lies
    within the closed tolerance of the covering set; the witness is a
    member realising the maximal distance when the defect is positive.
    """
    if covered_by.is_empty:
        return 0.0, None
    space = covered_by.space
    worst, witness = 0.0, None
    for pt in covered_by.ordered:
        d = distance_point_set(space, pt, cover)
        if d > worst:
            worst, witness = d, pt
    if worst <= TOLERANCE:
        return 0.0, None
    return worst, witness


def inclusion_defect(covered_by: PointSet, cover: PointSet) -> float:
    """How far the first set sticks out of the second (0 iff included)."""
    return uncovered_witness(covered_by, cover)[0]
