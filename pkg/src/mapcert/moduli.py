"""Bracketed estimation of openness, Lipschitz and regularity rates.

Every modulus is reduced to a feasibility predicate in the candidate
constant, monotone by construction, and bracketed by bisection.  The
report records exactly what was swept (windows, rho grid, resolution)
so a claim can be re-checked from the report alone.

Conventions, applied uniformly:
  * windows and swept balls are open, closed balls get +1e-12 slack;
  * Lipschitz-style inequalities get +1e-12 slack on the right;
  * sup-type brackets certify lo feasible / hi infeasible, inf-type
    brackets the mirror image; the witness refutes the infeasible end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Literal

import numpy as np

from .metric import (
    GridSpace, Point, PointSet, TOLERANCE, as_point, ball,
    distance_point_set,
)
from .maps import MultiMap, ParamMultiMap

#: feasibility growth cap; beyond this a modulus is reported unbounded
GROWTH_CAP = float(2 ** 40)
#: hard ceiling on bisection steps
MAX_BISECTIONS = 40

Sense = Literal["sup", "inf"]

PARTIAL_KINDS = ("lop_x", "lip_p", "lip_x", "reg_x")


@dataclass(frozen=True)
class NeighborhoodConfig:
    """Window radii and the explicit rho sweep used by every estimator.

    The rho grid is recorded verbatim: a reported openness claim is a
    statement about these radii only, not about all of (0, epsilon).
    """

    radius_u: float
    radius_v: float
    epsilon: float
    rho_grid: tuple[float, ...]
    radius_w: float | None = None
    resolution: float = 1e-6

    def __post_init__(self):
        if self.radius_u <= 0 or self.radius_v <= 0:
            raise ValueError("window radii must be positive")
        if self.radius_w is not None and self.radius_w <= 0:
            raise ValueError("parameter window radius must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        if not self.rho_grid:
            raise ValueError("rho grid must not be empty")
        last = 0.0
        for rho in self.rho_grid:
            if rho <= last:
                raise ValueError("rho grid must be strictly increasing and positive")
            last = rho
        if last > self.epsilon + TOLERANCE:
            raise ValueError("rho grid may not exceed epsilon")

    @classmethod
    def default_for(cls, source: GridSpace, target: GridSpace,
                    params: GridSpace | None = None,
                    resolution: float = 1e-6) -> "NeighborhoodConfig":
        """Quarter-extent windows, epsilon half of that, geometric rho
        sweep of 8 values at ratio 1/2 going down from epsilon."""
        radius_u = source.diameter / 4
        radius_v = target.diameter / 4
        radius_w = params.diameter / 4 if params is not None else None
        epsilon = radius_u / 2
        rho = tuple(epsilon * 2.0 ** -k for k in range(7, -1, -1))
        return cls(radius_u, radius_v, epsilon, rho, radius_w, resolution)

    @classmethod
    def aligned(cls, source: GridSpace, target: GridSpace,
                params: GridSpace | None = None,
                epsilon: float | None = None,
                radius_u: float | None = None,
                radius_v: float | None = None,
                radius_w: float | None = None,
                resolution: float = 1e-6) -> "NeighborhoodConfig":
        """Arithmetic rho sweep in multiples of the source grid's gap.

        On uniform grids this puts the sweep radii exactly where the
        openness inclusions flip, so brackets land on the rates the
        sampled map actually has.
        """
        ru = radius_u if radius_u is not None else source.diameter / 4
        rv = radius_v if radius_v is not None else target.diameter / 4
        rw = radius_w if radius_w is not None else (
            params.diameter / 4 if params is not None else None)
        eps = epsilon if epsilon is not None else ru / 2
        step = source.min_gap
        rho = tuple(round(k * step, 12) for k in range(1, 65)
                    if k * step <= eps + TOLERANCE)
        if not rho:
            rho = (eps,)
        return cls(ru, rv, eps, rho, rw, resolution)

    def mirrored(self) -> "NeighborhoodConfig":
        """Swap source and target window roles (for inverse-map sweeps)."""
        return replace(self, radius_u=self.radius_v, radius_v=self.radius_u)

    def to_payload(self) -> dict:
        return {
            "radius_u": self.radius_u,
            "radius_v": self.radius_v,
            "radius_w": self.radius_w,
            "epsilon": self.epsilon,
            "rho_grid": list(self.rho_grid),
            "resolution": self.resolution,
        }


def jsonable(value):
    """Tuples to lists, recursively; leaves floats alone."""
    if isinstance(value, (tuple, list)):
        return [jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    return value


@dataclass(frozen=True)
class ModulusReport:
    """Outcome of one bracketed estimation.

    ``bracket == (lo, hi)``.  For sup-type moduli every constant <= lo
    passed the definitional sweep and the witness refutes hi; for
    inf-type moduli every constant >= hi passed and the witness refutes
    lo.  Either end may be infinite.
    """

    kind: str
    point: tuple
    config: NeighborhoodConfig
    lo: float
    hi: float
    sense: Sense
    witness: dict | None
    resolution: float
    boundary_clipped: bool = False

    @property
    def bracket(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    def refutes(self, constant: float) -> bool:
        """Whether the sweep certified this supplied constant impossible."""
        if self.sense == "sup":
            return constant > self.hi
        return constant < self.lo

    def certifies(self, constant: float) -> bool:
        """Whether the sweep certified this supplied constant feasible."""
        if self.sense == "sup":
            return constant <= self.lo
        return constant >= self.hi

    def to_payload(self) -> dict:
        return {
            "kind": self.kind,
            "point": jsonable(self.point),
            "config": self.config.to_payload(),
            "bracket": [self.lo, self.hi],
            "sense": self.sense,
            "witness": jsonable(self.witness),
            "resolution": self.resolution,
            "boundary_clipped": self.boundary_clipped,
        }


Checker = Callable[[float], dict | None]


def _bisect_sup(check: Checker, resolution: float) -> tuple[float, float, dict | None]:
    """Largest constant passing an antitone check, bracketed."""
    lo, hi, hi_witness = 0.0, None, None
    level = 1.0
    while level <= GROWTH_CAP:
        witness = check(level)
        if witness is None:
            lo = level
            level *= 2
        else:
            hi, hi_witness = level, witness
            break
    if hi is None:
        return lo, math.inf, None
    for _ in range(MAX_BISECTIONS):
        if hi - lo <= resolution:
            break
        mid = 0.5 * (lo + hi)
        witness = check(mid)
        if witness is None:
            lo = mid
        else:
            hi, hi_witness = mid, witness
    return lo, hi, hi_witness


def _bisect_inf(check: Checker, resolution: float) -> tuple[float, float, dict | None]:
    """Smallest constant passing a monotone check, bracketed."""
    if check(0.0) is None:
        return 0.0, 0.0, None
    lo, lo_witness = 0.0, None
    hi = None
    level = 1.0
    while level <= GROWTH_CAP:
        witness = check(level)
        if witness is None:
            hi = level
            break
        lo, lo_witness = level, witness
        level *= 2
    if lo_witness is None:
        lo_witness = check(lo if lo > 0 else 1.0)
    if hi is None:
        return lo, math.inf, lo_witness
    for _ in range(MAX_BISECTIONS):
        if hi - lo <= resolution:
            break
        mid = 0.5 * (lo + hi)
        witness = check(mid)
        if witness is None:
            hi = mid
        else:
            lo, lo_witness = mid, witness
    return lo, hi, lo_witness


def _clips(space: GridSpace, center: Point, reach: float) -> bool:
    """Whether a ball of this reach pokes past the sampled bounding box."""
    if not math.isfinite(reach):
        return True
    arr = space.array
    c = np.asarray(center)
    return bool(np.any(c - reach < arr.min(axis=0) - TOLERANCE)
                or np.any(c + reach > arr.max(axis=0) + TOLERANCE))


def _graph_window(mapping: MultiMap, xbar: Point, ybar: Point,
                  cfg: NeighborhoodConfig) -> list[tuple[Point, Point]]:
    src, tgt = mapping.source, mapping.target
    out = []
    for x, y in mapping.pairs:
        if (src.distance(x, xbar) < cfg.radius_u - TOLERANCE
                and tgt.distance(y, ybar) < cfg.radius_v - TOLERANCE):
            out.append((x, y))
    return out


def _openness_checker(mapping: MultiMap, pairs: list[tuple[Point, Point]],
                      rho_grid: tuple[float, ...],
                      tag: dict | None = None) -> Checker:
    """Checker for: every swept ball around y of radius rho*L is covered
    by the image of the matching ball around x."""
    src, tgt = mapping.source, mapping.target
    images: dict[tuple[Point, float], np.ndarray] = {}
    ydists: dict[Point, np.ndarray] = {}
    for x, y in pairs:
        for rho in rho_grid:
            if (x, rho) not in images:
                inside = [src.points[i] for i in np.flatnonzero(src.ball_mask(x, rho, "open"))]
                images[(x, rho)] = mapping.image_mask(inside)
        if y not in ydists:
            ydists[y] = tgt.dists_to(y)

    def check(level: float) -> dict | None:
        if level <= 0.0:
            return None
        for rho in rho_grid:
            radius = rho * level
            for x, y in pairs:
                missing = (ydists[y] < radius - TOLERANCE) & ~images[(x, rho)]
                if missing.any():
                    i = int(np.flatnonzero(missing)[0])
                    witness = {"x": x, "y": y, "rho": rho,
                               "ball_radius": radius,
                               "uncovered": tgt.points[i]}
                    if tag:
                        witness.update(tag)
                    return witness
        return None

    return check


def _ratio_checker(entries: list[tuple[float, float, dict]]) -> Checker:
    """Checker for a family of inequalities lhs <= L * base + slack."""
    live = [(lhs, base, info) for lhs, base, info in entries
            if not math.isinf(base)]

    def check(level: float) -> dict | None:
        for lhs, base, info in live:
            if lhs > level * base + TOLERANCE:
                witness = dict(info)
                witness.update({"lhs": lhs, "scale": base})
                return witness
        return None

    return check


def _lipschitz_entries(mapping: MultiMap, xbar: Point, ybar: Point,
                       cfg: NeighborhoodConfig,
                       tag: dict | None = None) -> list[tuple[float, float, dict]]:
    src = mapping.source
    window_u = ball(src, xbar, cfg.radius_u, "open")
    vmask = mapping.target.ball_mask(ybar, cfg.radius_v, "open")
    tgt_index = mapping.target.index
    entries = []
    for x in window_u:
        visible = [y for y in sorted(mapping.rows.get(x, ()))
                   if vmask[tgt_index[y]]]
        if not visible:
            continue
        for u in window_u:
            row_u = mapping.image(u)
            worst, arg = -1.0, None
            for y in visible:
                d = distance_point_set(mapping.target, y, row_u)
                if d > worst:
                    worst, arg = d, y
            info = {"x": x, "u": u, "y": arg, "distance": src.distance(x, u)}
            if tag:
                info.update(tag)
            entries.append((worst, src.distance(x, u), info))
    return entries


def _regularity_entries(mapping: MultiMap, xbar: Point, ybar: Point,
                        cfg: NeighborhoodConfig,
                        tag: dict | None = None) -> list[tuple[float, float, dict]]:
    src, tgt = mapping.source, mapping.target
    window_u = ball(src, xbar, cfg.radius_u, "open")
    window_v = ball(tgt, ybar, cfg.radius_v, "open")
    inverse = mapping.inverse()
    entries = []
    for x in window_u:
        row = mapping.image(x)
        for y in window_v:
            away = distance_point_set(tgt, y, row)
            if math.isinf(away):
                continue
            back = distance_point_set(src, x, inverse.image(y))
            info = {"x": x, "y": y}
            if tag:
                info.update(tag)
            entries.append((back, away, info))
    return entries


def _finish(kind: str, point: tuple, cfg: NeighborhoodConfig, sense: Sense,
            lo: float, hi: float, witness: dict | None,
            clipped: bool) -> ModulusReport:
    return ModulusReport(kind=kind, point=point, config=cfg, lo=lo, hi=hi,
                         sense=sense, witness=witness,
                         resolution=cfg.resolution, boundary_clipped=clipped)


def _require_pair(mapping: MultiMap, xbar, ybar) -> tuple[Point, Point]:
    x = mapping.source.require(xbar, "reference point")
    y = mapping.target.require(ybar, "reference point")
    if (x, y) not in mapping.graph:
        raise ValueError(
            f"reference pair ({x}, {y}) is not on the graph of {mapping.label!r}")
    return x, y


def estimate_lop_around(mapping: MultiMap, xbar, ybar,
                        cfg: NeighborhoodConfig) -> ModulusReport:
    """Openness rate holding at every graph pair inside the windows."""
    x, y = _require_pair(mapping, xbar, ybar)
    pairs = _graph_window(mapping, x, y, cfg)
    check = _openness_checker(mapping, pairs, cfg.rho_grid)
    lo, hi, witness = _bisect_sup(check, cfg.resolution)
    reach = cfg.radius_v + cfg.epsilon * (hi if math.isfinite(hi) else lo or 1.0)
    clipped = (_clips(mapping.source, x, cfg.radius_u + cfg.epsilon)
               or _clips(mapping.target, y, reach))
    return _finish("lop_around", (x, y), cfg, "sup", lo, hi, witness, clipped)


def estimate_plop_at(mapping: MultiMap, xbar, ybar,
                     cfg: NeighborhoodConfig) -> ModulusReport:
    """Openness rate at the reference pair only."""
    x, y = _require_pair(mapping, xbar, ybar)
    check = _openness_checker(mapping, [(x, y)], cfg.rho_grid)
    lo, hi, witness = _bisect_sup(check, cfg.resolution)
    reach = cfg.epsilon * (hi if math.isfinite(hi) else lo or 1.0)
    clipped = (_clips(mapping.source, x, cfg.epsilon)
               or _clips(mapping.target, y, reach))
    return _finish("plop_at", (x, y), cfg, "sup", lo, hi, witness, clipped)


def estimate_lip_around(mapping: MultiMap, xbar, ybar,
                        cfg: NeighborhoodConfig) -> ModulusReport:
    """Aubin-style Lipschitz rate over the windows."""
    x, y = _require_pair(mapping, xbar, ybar)
    entries = _lipschitz_entries(mapping, x, y, cfg)
    lo, hi, witness = _bisect_inf(_ratio_checker(entries), cfg.resolution)
    clipped = (_clips(mapping.source, x, cfg.radius_u)
               or _clips(mapping.target, y, cfg.radius_v))
    return _finish("lip_around", (x, y), cfg, "inf", lo, hi, witness, clipped)


def estimate_reg_around(mapping: MultiMap, xbar, ybar,
                        cfg: NeighborhoodConfig) -> ModulusReport:
    """Metric regularity rate over the windows."""
    x, y = _require_pair(mapping, xbar, ybar)
    entries = _regularity_entries(mapping, x, y, cfg)
    lo, hi, witness = _bisect_inf(_ratio_checker(entries), cfg.resolution)
    clipped = (_clips(mapping.source, x, cfg.radius_u)
               or _clips(mapping.target, y, cfg.radius_v))
    return _finish("reg_around", (x, y), cfg, "inf", lo, hi, witness, clipped)


def estimate_psdclm_at(mapping: MultiMap, xbar, ybar,
                       cfg: NeighborhoodConfig) -> ModulusReport:
    """Pseudocalmness at the reference pair: d(ybar, F(x)) <= L |x - xbar|."""
    x, y = _require_pair(mapping, xbar, ybar)
    src = mapping.source
    entries = []
    for u in ball(src, x, cfg.radius_u, "open"):
        away = distance_point_set(mapping.target, y, mapping.image(u))
        entries.append((away, src.distance(u, x), {"x": u}))
    lo, hi, witness = _bisect_inf(_ratio_checker(entries), cfg.resolution)
    clipped = _clips(src, x, cfg.radius_u)
    return _finish("psdclm_at", (x, y), cfg, "inf", lo, hi, witness, clipped)


def estimate_hemreg_at(mapping: MultiMap, xbar, ybar,
                       cfg: NeighborhoodConfig) -> ModulusReport:
    """Hemiregularity at the reference pair: d(xbar, F^{-1}(y)) <= L |y - ybar|."""
    x, y = _require_pair(mapping, xbar, ybar)
    tgt = mapping.target
    inverse = mapping.inverse()
    entries = []
    for v in ball(tgt, y, cfg.radius_v, "open"):
        back = distance_point_set(mapping.source, x, inverse.image(v))
        entries.append((back, tgt.distance(v, y), {"y": v}))
    lo, hi, witness = _bisect_inf(_ratio_checker(entries), cfg.resolution)
    clipped = _clips(tgt, y, cfg.radius_v)
    return _finish("hemreg_at", (x, y), cfg, "inf", lo, hi, witness, clipped)


def _require_triple(family: ParamMultiMap, xbar, pbar, ybar):
    x = family.source.require(xbar, "reference point")
    p = family.params.require(pbar, "reference parameter")
    y = family.target.require(ybar, "reference point")
    if (x, p, y) not in family.graph:
        raise ValueError(
            f"reference triple ({x}, {p}, {y}) is not on the graph of "
            f"{family.label!r}")
    return x, p, y


def estimate_partial(family: ParamMultiMap, which: str, xbar, pbar, ybar,
                     cfg: NeighborhoodConfig) -> ModulusReport:
    """Partial moduli of F(., p), uniform over parameters near pbar.

    ``which`` is one of lop_x / lip_x / reg_x (rate of the slices,
    uniform in p) or lip_p (rate in the parameter, uniform in x).
    """
    if which not in PARTIAL_KINDS:
        raise ValueError(f"unknown partial modulus {which!r}")
    if cfg.radius_w is None:
        raise ValueError("partial moduli need radius_w in the config")
    x, p, y = _require_triple(family, xbar, pbar, ybar)
    kind = f"{which}_uniform"
    point = ((x, p), y)
    pwindow = ball(family.params, p, cfg.radius_w, "open")

    if which == "lop_x":
        checkers = []
        for q in pwindow:
            fixed = family.slice_param(q)
            pairs = _graph_window(fixed, x, y, cfg)
            checkers.append(_openness_checker(fixed, pairs, cfg.rho_grid,
                                              tag={"p": q}))

        def check(level: float) -> dict | None:
            for sub in checkers:
                witness = sub(level)
                if witness is not None:
                    return witness
            return None

        lo, hi, witness = _bisect_sup(check, cfg.resolution)
        reach = cfg.radius_v + cfg.epsilon * (hi if math.isfinite(hi) else lo or 1.0)
        clipped = (_clips(family.source, x, cfg.radius_u + cfg.epsilon)
                   or _clips(family.target, y, reach))
        return _finish(kind, point, cfg, "sup", lo, hi, witness, clipped)

    entries: list[tuple[float, float, dict]] = []
    if which == "lip_x":
        for q in pwindow:
            entries.extend(_lipschitz_entries(family.slice_param(q), x, y, cfg,
                                              tag={"p": q}))
    elif which == "reg_x":
        for q in pwindow:
            entries.extend(_regularity_entries(family.slice_param(q), x, y, cfg,
                                               tag={"p": q}))
    else:  # lip_p: the parameter moves, uniformly over source points
        xwindow = ball(family.source, x, cfg.radius_u, "open")
        pcfg = replace(cfg, radius_u=cfg.radius_w)
        for u in xwindow:
            entries.extend(_lipschitz_entries(family.slice_source(u), p, y, pcfg,
                                              tag={"x_fixed": u}))
    lo, hi, witness = _bisect_inf(_ratio_checker(entries), cfg.resolution)
    clipped = (_clips(family.source, x, cfg.radius_u)
               or _clips(family.target, y, cfg.radius_v)
               or _clips(family.params, p, cfg.radius_w))
    return _finish(kind, point, cfg, "inf", lo, hi, witness, clipped)


@dataclass(frozen=True)
class EquivalenceReport:
    """Three routes to the same quantity, compared as intervals."""

    mode: str
    reports: tuple[ModulusReport, ModulusReport, ModulusReport]
    intervals: tuple[tuple[float, float], ...]
    gaps: tuple[float, ...]
    tolerance: float
    agree: bool

    def to_payload(self) -> dict:
        return {
            "mode": self.mode,
            "reports": [r.to_payload() for r in self.reports],
            "intervals": [list(iv) for iv in self.intervals],
            "gaps": list(self.gaps),
            "tolerance": self.tolerance,
            "agree": self.agree,
        }


def _reciprocal_interval(lo: float, hi: float) -> tuple[float, float]:
    upper = math.inf if lo <= 0 else 1.0 / lo
    lower = 0.0 if math.isinf(hi) else (math.inf if hi <= 0 else 1.0 / hi)
    return (lower, upper)


def _gap_part(lo: float, hi: float) -> float:
    if math.isinf(lo) and math.isinf(hi):
        return 0.0
    if math.isinf(lo):
        return math.inf
    if math.isinf(hi):
        return 0.0
    return max(0.0, lo - hi)


def _interval_gap(a: tuple[float, float], b: tuple[float, float]) -> float:
    return max(_gap_part(a[0], b[1]), _gap_part(b[0], a[1]))


def _equivalence(mode: str, reports, cfg: NeighborhoodConfig) -> EquivalenceReport:
    sup_report, first, second = reports
    recip = _reciprocal_interval(sup_report.lo, sup_report.hi)
    intervals = (recip, first.bracket, second.bracket)
    gaps = (_interval_gap(intervals[0], intervals[1]),
            _interval_gap(intervals[0], intervals[2]),
            _interval_gap(intervals[1], intervals[2]))
    tol = 2 * cfg.resolution
    return EquivalenceReport(mode, tuple(reports), intervals, gaps, tol,
                             agree=all(g <= tol for g in gaps))


def check_equivalence_around(mapping: MultiMap, xbar, ybar,
                             cfg: NeighborhoodConfig) -> EquivalenceReport:
    """Openness of F, Lipschitz rate of the inverse, regularity of F:
    the three brackets must agree reciprocally on the same windows."""
    x, y = _require_pair(mapping, xbar, ybar)
    lop = estimate_lop_around(mapping, x, y, cfg)
    lip_inv = estimate_lip_around(mapping.inverse(), y, x, cfg.mirrored())
    reg = estimate_reg_around(mapping, x, y, cfg)
    return _equivalence("around", (lop, lip_inv, reg), cfg)


def check_equivalence_at(mapping: MultiMap, xbar, ybar,
                         cfg: NeighborhoodConfig) -> EquivalenceReport:
    """Punctual counterpart: plop of F against pseudocalmness of the
    inverse and hemiregularity of F."""
    x, y = _require_pair(mapping, xbar, ybar)
    plop = estimate_plop_at(mapping, x, y, cfg)
    psd_inv = estimate_psdclm_at(mapping.inverse(), y, x, cfg.mirrored())
    hem = estimate_hemreg_at(mapping, x, y, cfg)
    return _equivalence("at", (plop, psd_inv, hem), cfg)


#: singular values below this are treated as zero
RANK_TOLERANCE = 1e-10


@dataclass(frozen=True)
class LinearModuli:
    """Exact moduli of a sampled linear operator, from singular values.

    For a surjective operator the openness and regularity rates are the
    smallest positive singular value and its reciprocal (Euclidean
    norms); punctual and around-type rates coincide by linearity.
    """

    rows: int
    cols: int
    rank: int
    surjective: bool
    sigma_min: float | None
    lop: float
    reg: float
    plop: float
    hemreg: float

    def to_payload(self) -> dict:
        return {
            "rows": self.rows, "cols": self.cols, "rank": self.rank,
            "surjective": self.surjective, "sigma_min": self.sigma_min,
            "lop": self.lop, "reg": self.reg,
            "plop": self.plop, "hemreg": self.hemreg,
        }


def linear_operator_moduli(matrix) -> LinearModuli:
    # a flat vector is read as the single row of a functional
    mat = np.atleast_2d(np.asarray(matrix, dtype=float))
    if mat.ndim != 2:
        raise ValueError(f"matrix must be 2-D, got shape {mat.shape}")
    rows, cols = mat.shape
    sigma = np.linalg.svd(mat, compute_uv=False)
    rank = int((sigma > RANK_TOLERANCE).sum())
    surjective = rank == rows
    if surjective:
        smin = float(sigma[rows - 1])
        return LinearModuli(rows, cols, rank, True, smin,
                            lop=smin, reg=1.0 / smin,
                            plop=smin, hemreg=1.0 / smin)
    return LinearModuli(rows, cols, rank, False, None,
                        lop=0.0, reg=math.inf, plop=0.0, hemreg=math.inf)


def _checker_for(mapping, report: ModulusReport) -> Checker:
    kind = report.kind
    cfg = report.config
    if kind in ("lop_around", "plop_at"):
        x, y = report.point
        pairs = _graph_window(mapping, x, y, cfg) if kind == "lop_around" else [(x, y)]
        return _openness_checker(mapping, pairs, cfg.rho_grid)
    if kind == "lip_around":
        x, y = report.point
        return _ratio_checker(_lipschitz_entries(mapping, x, y, cfg))
    if kind == "reg_around":
        x, y = report.point
        return _ratio_checker(_regularity_entries(mapping, x, y, cfg))
    if kind in ("psdclm_at", "hemreg_at"):
        x, y = report.point
        src_entries = []
        if kind == "psdclm_at":
            for u in ball(mapping.source, x, cfg.radius_u, "open"):
                away = distance_point_set(mapping.target, y, mapping.image(u))
                src_entries.append((away, mapping.source.distance(u, x), {"x": u}))
        else:
            inverse = mapping.inverse()
            for v in ball(mapping.target, y, cfg.radius_v, "open"):
                back = distance_point_set(mapping.source, x, inverse.image(v))
                src_entries.append((back, mapping.target.distance(v, y), {"y": v}))
        return _ratio_checker(src_entries)
    raise ValueError(f"cannot rebuild a checker for kind {report.kind!r}")


def recheck_report(mapping, report: ModulusReport) -> dict:
    """Re-audit a report against its own map and config.

    Confirms the feasible end passes the definitional sweep and that
    the witness still refutes the infeasible end.
    """
    check = _checker_for(mapping, report)
    if report.sense == "sup":
        feasible_ok = (report.lo <= 0.0) or check(report.lo) is None
        refuted = math.isinf(report.hi) or check(report.hi) is not None
    else:
        feasible_ok = math.isinf(report.hi) or check(report.hi) is None
        refuted = (report.lo <= 0.0 and report.hi == 0.0) or check(report.lo) is not None
    return {"feasible_end_ok": feasible_ok, "infeasible_end_refuted": refuted}
