"""Ekeland variational principle on finite domains, and the descent
solver that extracts a preimage from a certified composition rate.

The solver mirrors the variational argument behind the composition
certificate: minimize h(p,q,r,s) = |u - s| over the constraint set
Omega intersected with a closed box around the anchor, under a scaled
max-norm.  On a finite grid the argument may bottom out above zero;
that outcome is reported as a discretization gap, never an error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np

from .composition import PreconditionError, RateConstants, _pmap
from .maps import BiMultiMap, MultiMap
from .metric import TOLERANCE, GridSpace, Point, as_point
from .moduli import NeighborhoodConfig, jsonable

Norm = Callable[[Hashable, Hashable], float]

SUCCESS = "SUCCESS"
DISCRETIZATION_GAP = "DISCRETIZATION_GAP"


@dataclass(frozen=True)
class ScaledMaxNorm:
    """scale * max_i weights[i] * d_i(a_i, b_i) over a tuple of spaces."""

    spaces: tuple[GridSpace, ...]
    weights: tuple[float, ...]
    scale: float

    def __post_init__(self):
        if len(self.spaces) != len(self.weights):
            raise ValueError("one weight per space")
        if self.scale <= 0 or any(w <= 0 for w in self.weights):
            raise ValueError("scale and weights must be positive")

    @classmethod
    def for_rates(cls, spaces: tuple[GridSpace, ...],
                  constants: RateConstants, tau: float) -> "ScaledMaxNorm":
        """Weights (1, 1/L, 1/M, 1/(LC+MD)) at scale tau*(LC-MD)."""
        constants.require("L", "M", "C", "D")
        rate = constants.L * constants.C - constants.M * constants.D
        if rate <= 0:
            raise PreconditionError("LC - MD must be positive")
        if not 0 < tau < 1:
            raise PreconditionError(f"tau must lie in (0, 1), got {tau}")
        weights = (1.0, 1.0 / constants.L, 1.0 / constants.M,
                   1.0 / (constants.L * constants.C
                          + constants.M * constants.D))
        return cls(spaces, weights, tau * rate)

    def __call__(self, a, b) -> float:
        gaps = (w * s.distance(p, q)
                for s, w, p, q in zip(self.spaces, self.weights, a, b))
        return self.scale * max(gaps)


@dataclass(frozen=True)
class EkelandPoint:
    """A point satisfying both variational conclusions, with its descent.

    trace is the ordered (point, value) descent history, starting at
    the reference.
    """

    point: Hashable
    value: float
    reference: Hashable
    norm: Norm
    trace: tuple[tuple[Hashable, float], ...]

    @property
    def iterations(self) -> int:
        return len(self.trace) - 1

    def to_payload(self) -> dict:
        return {
            "point": jsonable(self.point),
            "value": self.value,
            "reference": jsonable(self.reference),
            "iterations": self.iterations,
            "trace": [[jsonable(p), v] for p, v in self.trace],
        }


def _verify_conclusions(point, value, reference, domain, h, norm) -> None:
    drop = norm(point, reference)
    if value > h[reference] - drop + TOLERANCE:
        raise RuntimeError(
            f"descent invariant broken: {value:g} > {h[reference]:g} - "
            f"{drop:g} at {point}")
    for other in domain:
        if value > h[other] + norm(point, other) + TOLERANCE:
            raise RuntimeError(
                f"minimality invariant broken against {other}")


def ekeland_point(domain: Sequence[Hashable], h: Mapping[Hashable, float],
                  reference: Hashable, norm: Norm, *,
                  jobs: int = 1) -> EkelandPoint:
    """Strict-improvement descent to a variational critical point.

    Repeatedly moves to the candidate w minimizing h(w) among those
    with h(w) + norm(current, w) < h(current), ties broken by point
    order; terminates when no candidate improves.  The returned point
    v satisfies, against the whole domain,

        h(v) <= h(reference) - norm(v, reference)
        h(v) <= h(w) + norm(v, w)   for every w,

    both re-verified exhaustively before returning.
    """
    points = sorted(set(domain))
    if not points:
        raise ValueError("domain must not be empty")
    for p in points:
        value = h[p]
        if not math.isfinite(value) or value < 0:
            raise ValueError(f"h must be finite and nonnegative, got "
                             f"{value} at {p}")
    if reference not in h or reference not in set(points):
        raise ValueError("reference must belong to the domain")

    current, trace = reference, [(reference, h[reference])]
    while True:
        bar = h[current] - TOLERANCE

        def attempt(w):
            return (h[w], w) if h[w] + norm(current, w) < bar else None

        best = None
        for cand in _pmap(attempt, points, jobs):
            if cand is not None and (best is None or cand < best):
                best = cand
        if best is None:
            break
        current = best[1]
        trace.append((best[1], best[0]))

    _verify_conclusions(current, h[current], reference, points, h, norm)
    return EkelandPoint(current, h[current], reference, norm, tuple(trace))


@dataclass(frozen=True)
class SolveResult:
    """Outcome of the descent solver.

    On SUCCESS, x solves u in H(x) with |x - anchor| < rho, both facts
    re-checked independently of the descent.  On DISCRETIZATION_GAP the
    grid contains no exact solution along the descent; residual is the
    terminal h value.
    """

    status: str
    x: Point | None
    residual: float
    rho: float
    tau: float
    point: tuple[Point, Point, Point, Point]
    trace: tuple[tuple[Hashable, float], ...]

    @property
    def succeeded(self) -> bool:
        return self.status == SUCCESS

    def to_payload(self) -> dict:
        return {
            "status": self.status,
            "x": jsonable(self.x),
            "residual": self.residual,
            "rho": self.rho,
            "tau": self.tau,
            "point": jsonable(self.point),
            "trace": [[jsonable(p), v] for p, v in self.trace],
        }


def _anchor_tuple(f1: MultiMap, f2: MultiMap, g: BiMultiMap, anchor):
    xbar = f1.source.require(anchor[0], "anchor x")
    ybar = f1.target.require(anchor[1], "anchor y")
    zbar = f2.target.require(anchor[2], "anchor z")
    wbar = g.target.require(anchor[3], "anchor w")
    if (xbar, ybar) not in f1.graph or (xbar, zbar) not in f2.graph:
        raise PreconditionError("anchor is not on the graphs of the pair")
    if (ybar, zbar, wbar) not in g.graph:
        raise PreconditionError("anchor is not on the outer graph")
    return xbar, ybar, zbar, wbar


def constraint_set(f1: MultiMap, f2: MultiMap, g: BiMultiMap, anchor,
                   radii: tuple[float, float, float, float]
                   ) -> tuple[tuple[Point, Point, Point, Point], ...]:
    """Graph tuples (x,y,z,w) inside the closed anchor box."""
    xbar, ybar, zbar, wbar = anchor
    rx, ry, rz, rw = radii
    out = []
    for x in f1.source.points:
        if f1.source.distance(x, xbar) > rx + TOLERANCE:
            continue
        ys = [y for y in f1.image(x).ordered
              if f1.target.distance(y, ybar) <= ry + TOLERANCE]
        if not ys:
            continue
        zs = [z for z in f2.image(x).ordered
              if f2.target.distance(z, zbar) <= rz + TOLERANCE]
        for y in ys:
            for z in zs:
                for w in g.image_at(y, z).ordered:
                    if g.target.distance(w, wbar) <= rw + TOLERANCE:
                        out.append((x, y, z, w))
    return tuple(out)


def solve_inclusion(f1: MultiMap, f2: MultiMap, g: BiMultiMap, anchor,
                    constants: RateConstants, u, cfg: NeighborhoodConfig,
                    *, tau: float | None = None,
                    jobs: int = 1) -> SolveResult:
    """Find x with u in G(F1(x), F2(x)) by variational descent.

    u may sit off the target grid; distances to it are measured by the
    target norm on raw coordinates.  rho is the smallest swept radius
    whose rate ball strictly contains u; tau defaults to the midpoint
    between the norm constraint |u - anchor| / ((LC-MD) rho) and 1.
    The rate hypotheses are assumed certified separately; this routine
    only re-checks its own conclusion.
    """
    constants.require("L", "M", "C", "D")
    L, M, C, D = constants.L, constants.M, constants.C, constants.D
    rate = L * C - M * D
    if rate <= 0:
        raise PreconditionError(f"rate LC - MD = {rate:g} must be positive")
    xbar, ybar, zbar, wbar = _anchor_tuple(f1, f2, g, anchor)

    uvec = np.asarray(as_point(u), dtype=float)
    gap = g.target.norm_of(uvec - np.asarray(wbar))
    rho = next((r for r in cfg.rho_grid if gap < rate * r - TOLERANCE), None)
    if rho is None:
        raise PreconditionError(
            f"u at distance {gap:g} from the anchor lies outside the rate "
            f"ball of every swept radius")
    if tau is None:
        tau = (1.0 + gap / (rate * rho)) / 2.0
    norm = ScaledMaxNorm.for_rates(
        (f1.source, f1.target, f2.target, g.target), constants, tau)

    domain = constraint_set(
        f1, f2, g, (xbar, ybar, zbar, wbar),
        (rho, L * rho, M * rho, (L * C + M * D) * rho))
    h = {pt: g.target.norm_of(uvec - np.asarray(pt[3])) for pt in domain}
    evp = ekeland_point(domain, h, (xbar, ybar, zbar, wbar), norm, jobs=jobs)

    a, b, c, d = evp.point
    if evp.value <= 1e-12:
        if (a, b) not in f1.graph or (a, c) not in f2.graph \
                or (b, c, d) not in g.graph:
            raise RuntimeError("descent left the constraint set")
        if f1.source.distance(a, xbar) >= rho - TOLERANCE:
            raise RuntimeError("solution escaped the open rho-ball")
        return SolveResult(SUCCESS, a, round(evp.value, 12), rho, tau,
                           evp.point, evp.trace)
    return SolveResult(DISCRETIZATION_GAP, None, round(evp.value, 12), rho,
                       tau, evp.point, evp.trace)
