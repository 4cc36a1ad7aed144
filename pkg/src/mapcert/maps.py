"""Set-valued maps between sampled spaces, stored as finite graphs.

A map is its graph: a frozenset of point pairs over declared grids.
Domains, rows and inverses are always derived from the graph, never
stored separately.  All iteration runs in sorted graph order so that
sweeps and witnesses come out deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .metric import (
    GridSpace, OffGridError, Point, PointSet, SNAP, as_point, grid_space,
)


@dataclass(frozen=True, eq=False)
class MultiMap:
    """A finite relation between a source and a target space."""

    source: GridSpace
    target: GridSpace
    graph: frozenset[tuple[Point, Point]]
    label: str = "F"

    @cached_property
    def pairs(self) -> tuple[tuple[Point, Point], ...]:
        return tuple(sorted(self.graph))

    @cached_property
    def rows(self) -> dict[Point, frozenset[Point]]:
        out: dict[Point, set[Point]] = {}
        for x, y in self.pairs:
            out.setdefault(x, set()).add(y)
        return {x: frozenset(ys) for x, ys in out.items()}

    @cached_property
    def dom(self) -> tuple[Point, ...]:
        idx = self.source.index
        return tuple(sorted(self.rows, key=idx.__getitem__))

    @cached_property
    def ran(self) -> frozenset[Point]:
        return frozenset(y for _, y in self.graph)

    def image(self, x) -> PointSet:
        """F(x) as a point set (empty for points outside the domain)."""
        pt = as_point(x)
        return PointSet(self.target, self.rows.get(pt, frozenset()))

    def image_mask(self, points: Iterable[Point]) -> np.ndarray:
        idx = self.target.index
        mask = np.zeros(len(self.target.points), dtype=bool)
        for x in points:
            for y in self.rows.get(x, ()):  # type: ignore[arg-type]
                mask[idx[y]] = True
        return mask

    def inverse(self) -> "MultiMap":
        return MultiMap(self.target, self.source,
                        frozenset((y, x) for x, y in self.graph),
                        label=f"{self.label}⁻¹")

    def __len__(self) -> int:
        return len(self.graph)


def multimap(source: GridSpace, target: GridSpace, pairs: Iterable,
             label: str = "F") -> MultiMap:
    """Build a map from raw (x, y) value pairs, snapping onto the grids."""
    graph = set()
    for raw_x, raw_y in pairs:
        x = source.require(raw_x, context=f"{label} source point")
        y = target.require(raw_y, context=f"{label} target point")
        graph.add((x, y))
    return MultiMap(source, target, frozenset(graph), label=label)


def identity_map(space: GridSpace, label: str = "id") -> MultiMap:
    return MultiMap(space, space, frozenset((p, p) for p in space.points), label)


def constant_map(source: GridSpace, target: GridSpace, values: Iterable,
                 label: str = "const") -> MultiMap:
    vals = [target.require(v, context=f"{label} value") for v in values]
    return MultiMap(source, target,
                    frozenset((x, v) for x in source.points for v in vals), label)


def from_linear(matrix, source: GridSpace, target: GridSpace,
                label: str = "A") -> MultiMap:
    """Sample a linear operator on the source grid; images must land on
    the target grid up to the snap tolerance."""
    mat = np.asarray(matrix, dtype=float)
    if mat.ndim != 2:
        raise ValueError(f"{label}: matrix must be 2-D, got shape {mat.shape}")
    if mat.shape[1] != source.dim:
        raise ValueError(
            f"{label}: matrix has {mat.shape[1]} columns, source dimension "
            f"is {source.dim}")
    if mat.shape[0] != target.dim:
        raise ValueError(
            f"{label}: matrix has {mat.shape[0]} rows, target dimension "
            f"is {target.dim}")
    graph = set()
    for x in source.points:
        value = mat @ np.asarray(x)
        y = target.locate(value, tol=SNAP)
        if y is None:
            raise OffGridError(
                f"{label}: image {tuple(value)} of {x} misses the grid of "
                f"{target.label!r}")
        graph.add((x, y))
    return MultiMap(source, target, frozenset(graph), label=label)


def image_of_set(mapping: MultiMap, points: PointSet | Iterable[Point]) -> PointSet:
    """Union of rows over a set of source points."""
    if isinstance(points, PointSet):
        points = points.ordered
    return PointSet.from_mask(mapping.target, mapping.image_mask(points))


def localize(mapping: MultiMap, window_u: PointSet, window_v: PointSet) -> MultiMap:
    """Restrict the graph to ``window_u`` x ``window_v``."""
    graph = frozenset((x, y) for x, y in mapping.graph
                      if x in window_u.members and y in window_v.members)
    return MultiMap(mapping.source, mapping.target, graph,
                    label=f"{mapping.label}|loc")


@dataclass(frozen=True, eq=False)
class ParamMultiMap:
    """A family of maps F(., p): graph of (x, p, y) triples."""

    source: GridSpace
    params: GridSpace
    target: GridSpace
    graph: frozenset[tuple[Point, Point, Point]]
    label: str = "H"

    @cached_property
    def triples(self) -> tuple[tuple[Point, Point, Point], ...]:
        return tuple(sorted(self.graph))

    @cached_property
    def rows(self) -> dict[tuple[Point, Point], frozenset[Point]]:
        out: dict[tuple[Point, Point], set[Point]] = {}
        for x, p, y in self.triples:
            out.setdefault((x, p), set()).add(y)
        return {k: frozenset(v) for k, v in out.items()}

    def image_at(self, x, p) -> PointSet:
        key = (as_point(x), as_point(p))
        return PointSet(self.target, self.rows.get(key, frozenset()))

    def slice_param(self, p) -> MultiMap:
        """The map x -> F(x, p) at a fixed parameter."""
        pt = as_point(p)
        graph = frozenset((x, y) for x, q, y in self.graph if q == pt)
        return MultiMap(self.source, self.target, graph,
                        label=f"{self.label}(.,{pt})")

    def slice_source(self, x) -> MultiMap:
        """The map p -> F(x, p) at a fixed source point."""
        pt = as_point(x)
        graph = frozenset((p, y) for u, p, y in self.graph if u == pt)
        return MultiMap(self.params, self.target, graph,
                        label=f"{self.label}({pt},.)")

    def swap_roles(self) -> "ParamMultiMap":
        """Exchange variable and parameter (p becomes the moving argument)."""
        return ParamMultiMap(self.params, self.source, self.target,
                             frozenset((p, x, y) for x, p, y in self.graph),
                             label=f"{self.label}↔")

    def param_values(self) -> tuple[Point, ...]:
        idx = self.params.index
        return tuple(sorted({p for _, p, _ in self.graph}, key=idx.__getitem__))

    def __len__(self) -> int:
        return len(self.graph)


def param_multimap(source: GridSpace, params: GridSpace, target: GridSpace,
                   triples: Iterable, label: str = "H") -> ParamMultiMap:
    graph = set()
    for raw_x, raw_p, raw_y in triples:
        x = source.require(raw_x, context=f"{label} source point")
        p = params.require(raw_p, context=f"{label} parameter point")
        y = target.require(raw_y, context=f"{label} target point")
        graph.add((x, p, y))
    return ParamMultiMap(source, params, target, frozenset(graph), label=label)


@dataclass(frozen=True, eq=False)
class BiMultiMap:
    """A map of two arguments G(y, z): graph of (y, z, w) triples."""

    left: GridSpace
    right: GridSpace
    target: GridSpace
    graph: frozenset[tuple[Point, Point, Point]]
    label: str = "G"

    @cached_property
    def triples(self) -> tuple[tuple[Point, Point, Point], ...]:
        return tuple(sorted(self.graph))

    @cached_property
    def rows(self) -> dict[tuple[Point, Point], frozenset[Point]]:
        out: dict[tuple[Point, Point], set[Point]] = {}
        for y, z, w in self.triples:
            out.setdefault((y, z), set()).add(w)
        return {k: frozenset(v) for k, v in out.items()}

    def image_at(self, y, z) -> PointSet:
        key = (as_point(y), as_point(z))
        return PointSet(self.target, self.rows.get(key, frozenset()))

    def slice_left(self, y) -> MultiMap:
        pt = as_point(y)
        graph = frozenset((z, w) for u, z, w in self.graph if u == pt)
        return MultiMap(self.right, self.target, graph, label=f"{self.label}({pt},.)")

    def slice_right(self, z) -> MultiMap:
        pt = as_point(z)
        graph = frozenset((y, w) for y, v, w in self.graph if v == pt)
        return MultiMap(self.left, self.target, graph, label=f"{self.label}(.,{pt})")

    def as_param_in_left(self) -> ParamMultiMap:
        """View with the first argument moving and the second a parameter."""
        return ParamMultiMap(self.left, self.right, self.target,
                             self.graph, label=self.label)

    def as_param_in_right(self) -> ParamMultiMap:
        """View with the second argument moving and the first a parameter."""
        return ParamMultiMap(self.right, self.left, self.target,
                             frozenset((z, y, w) for y, z, w in self.graph),
                             label=f"{self.label}↔")

    def __len__(self) -> int:
        return len(self.graph)


def bimultimap(left: GridSpace, right: GridSpace, target: GridSpace,
               triples: Iterable, label: str = "G") -> BiMultiMap:
    graph = set()
    for raw_y, raw_z, raw_w in triples:
        y = left.require(raw_y, context=f"{label} left point")
        z = right.require(raw_z, context=f"{label} right point")
        w = target.require(raw_w, context=f"{label} target point")
        graph.add((y, z, w))
    return BiMultiMap(left, right, target, frozenset(graph), label=label)


def compose_g(f1: MultiMap, f2: MultiMap, g: BiMultiMap,
              label: str | None = None) -> MultiMap:
    """The composition x -> g(f1(x), f2(x))."""
    if not f1.source.compatible_with(f2.source):
        raise ValueError(
            f"compose: sources {f1.source.label!r} and {f2.source.label!r} differ")
    if not g.left.compatible_with(f1.target):
        raise ValueError(
            f"compose: left argument grid of {g.label!r} does not match the "
            f"target of {f1.label!r}")
    if not g.right.compatible_with(f2.target):
        raise ValueError(
            f"compose: right argument grid of {g.label!r} does not match the "
            f"target of {f2.label!r}")
    graph = set()
    rows_g = g.rows
    for x in f1.dom:
        zs = f2.rows.get(x)
        if not zs:
            continue
        for y in f1.rows[x]:
            for z in zs:
                for w in rows_g.get((y, z), ()):
                    graph.add((x, w))
    return MultiMap(f1.source, g.target, frozenset(graph),
                    label=label or f"{g.label}({f1.label},{f2.label})")


def _cluster_values(values: np.ndarray, blocks) -> tuple[Point, ...]:
    """Deduplicate rows within the distinctness tolerance, keeping the
    lexicographically first representative of each cluster."""
    rows = sorted(tuple(float(c) for c in v) for v in values)
    out: list[Point] = []
    for row in rows:
        if out and max(abs(a - b) for a, b in zip(row, out[-1])) <= 1e-12:
            continue
        out.append(row)
    return tuple(out)


def subtraction_bimap(left: GridSpace, right: GridSpace,
                      target: GridSpace | None = None,
                      label: str = "y-z") -> BiMultiMap:
    """The two-argument map (y, z) -> {y - z} on a declared value grid.

    With no target given, the grid of attained differences is
    synthesised (deduplicated, in the left space's norm).
    """
    if not left.same_ambient(right):
        raise ValueError(
            f"subtraction: ambient mismatch between {left.label!r} and "
            f"{right.label!r}")
    diffs = (left.array[:, None, :] - right.array[None, :, :]).reshape(-1, left.dim)
    if target is None:
        pts = _cluster_values(diffs, left.blocks)
        target = GridSpace(f"Δ({left.label},{right.label})", pts, left.blocks,
                           check_distinct=False)
    graph = set()
    for y in left.points:
        ya = np.asarray(y)
        for z in right.points:
            value = ya - np.asarray(z)
            w = target.locate(value, tol=SNAP)
            if w is None:
                raise OffGridError(
                    f"subtraction: difference {tuple(value)} of {y} and {z} "
                    f"misses the grid of {target.label!r}")
            graph.add((y, z, w))
    return BiMultiMap(left, right, target, frozenset(graph), label=label)


def difference(f1: MultiMap, f2: MultiMap, target: GridSpace | None = None,
               label: str | None = None) -> MultiMap:
    """The pointwise difference x -> f1(x) - f2(x)."""
    sub = subtraction_bimap(f1.target, f2.target, target)
    return compose_g(f1, f2, sub, label=label or f"{f1.label}-{f2.label}")
