"""Certificates for openness of compositions of set-valued maps.

Each certifier validates the supplied rate constants against grid
moduli brackets, then exhaustively checks the claimed ball inclusions
over the configured windows.  Nothing is interpolated: every
conclusion row is an explicit inclusion test on the sampled spaces,
and a failed hypothesis short-circuits the sweep so that a broken
instance is reported as a hypothesis failure, never as a mysterious
conclusion defect.

Window roles shared by the certifiers: ``radius_u`` windows the source
space X, ``radius_v`` windows Y and the composite target, ``radius_w``
windows Z (falling back to ``radius_v`` when absent).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .maps import BiMultiMap, MultiMap, compose_g, difference, identity_map
from .metric import (TOLERANCE, GridSpace, Point, PointSet, ball,
                     distance_point_set, uncovered_witness)
from .moduli import (ModulusReport, NeighborhoodConfig, estimate_lip_around,
                     estimate_lop_around, estimate_partial, estimate_plop_at,
                     estimate_reg_around, jsonable)


class PreconditionError(ValueError):
    """An instance violates a theorem's standing assumptions."""


@dataclass(frozen=True)
class RateConstants:
    """Named constants feeding the rate formulas; unused slots stay None."""

    L: float | None = None
    M: float | None = None
    C: float | None = None
    D: float | None = None
    l: float | None = None
    m: float | None = None

    def require(self, *names: str) -> tuple[float, ...]:
        values = []
        for name in names:
            raw = getattr(self, name)
            if raw is None:
                raise PreconditionError(f"constant {name} is required")
            value = float(raw)
            if name == "D":
                if value < 0:
                    raise PreconditionError("constant D must be nonnegative")
            elif value <= 0:
                raise PreconditionError(f"constant {name} must be positive")
            values.append(value)
        return tuple(values)

    def to_payload(self) -> dict:
        out = {}
        for name in ("L", "M", "C", "D", "l", "m"):
            value = getattr(self, name)
            if value is not None:
                out[name] = float(value)
        return out


@dataclass(frozen=True)
class HypothesisCheck:
    """One validated assumption: the supplied constant vs. its bracket."""

    name: str
    constant: float | None
    passed: bool
    certified: bool
    report: ModulusReport | None = None
    note: str = ""

    def to_payload(self) -> dict:
        return {
            "name": self.name,
            "constant": self.constant,
            "passed": self.passed,
            "certified": self.certified,
            "report": self.report.to_payload() if self.report else None,
            "note": self.note,
        }


@dataclass(frozen=True)
class ConclusionRow:
    """One inclusion check B(w, rate*rho) within H(B(x, rho)).

    ``observed`` is the largest rate that would still have zero defect
    at this row (distance from w to the nearest point missing from the
    image, divided by rho).
    """

    stage: str
    anchor: tuple
    rho: float
    defect: float
    witness: Point | None
    observed: float

    def to_payload(self) -> dict:
        return {
            "stage": self.stage,
            "anchor": jsonable(self.anchor),
            "rho": self.rho,
            "defect": self.defect,
            "witness": jsonable(self.witness),
            "observed": self.observed,
        }


@dataclass(frozen=True)
class CompositionCertificate:
    """Hypothesis checks plus an exhaustive conclusion sweep."""

    theorem: str
    constants: RateConstants
    rate: float
    epsilon: float
    hypotheses: tuple[HypothesisCheck, ...]
    conclusions: tuple[ConclusionRow, ...]
    status: str
    witness: dict | None = None
    notes: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.status == "PASS"

    @property
    def observed_rate(self) -> float:
        """Largest rate every swept row would tolerate with zero defect."""
        if not self.conclusions:
            return math.inf
        return min(row.observed for row in self.conclusions)

    @property
    def slack(self) -> float:
        return self.observed_rate - self.rate

    def to_payload(self) -> dict:
        return {
            "theorem": self.theorem,
            "constants": self.constants.to_payload(),
            "rate": self.rate,
            "epsilon": self.epsilon,
            "status": self.status,
            "observed_rate": self.observed_rate,
            "slack": self.slack,
            "hypotheses": [h.to_payload() for h in self.hypotheses],
            "conclusions": [row.to_payload() for row in self.conclusions],
            "witness": jsonable(self.witness),
            "notes": list(self.notes),
        }


def _pmap(fn: Callable, items: Iterable, jobs: int) -> list:
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _hypothesis(name: str, report: ModulusReport, constant: float,
                note: str = "") -> HypothesisCheck:
    return HypothesisCheck(name, constant, not report.refutes(constant),
                           report.certifies(constant), report, note)


_CLOSED = HypothesisCheck("closed_graphs", None, True, True, None,
                          "finite sampled graphs are closed")


def _on_graph(mapping: MultiMap, x: Point, y: Point, what: str) -> None:
    if (x, y) not in mapping.graph:
        raise PreconditionError(
            f"{what}: ({x}, {y}) is not on the graph of {mapping.label!r}")


def _on_bigraph(g: BiMultiMap, y: Point, z: Point, w: Point,
                what: str) -> None:
    if (y, z, w) not in g.graph:
        raise PreconditionError(
            f"{what}: (({y}, {z}), {w}) is not on the graph of {g.label!r}")


def _inclusion_row(mapping: MultiMap, x: Point, w: Point, rho: float,
                   rate: float, stage: str, anchor: tuple) -> ConclusionRow:
    source_ball = ball(mapping.source, x, rho, "open")
    image = PointSet.from_mask(mapping.target,
                               mapping.image_mask(source_ball.ordered))
    claimed = ball(mapping.target, w, rate * rho, "open")
    defect, witness = uncovered_witness(claimed, image)
    outside = mapping.target.dists_to(w)[~image.mask]
    observed = round(float(outside.min()) / rho, 12) if outside.size else math.inf
    return ConclusionRow(stage, anchor, rho, defect, witness, observed)


def _assemble(theorem: str, constants: RateConstants, rate: float,
              epsilon: float, hypotheses: Sequence[HypothesisCheck],
              rows: Sequence[ConclusionRow],
              notes: Sequence[str] = ()) -> CompositionCertificate:
    hypotheses = tuple(hypotheses)
    notes = tuple(notes)
    failed = next((h for h in hypotheses if not h.passed), None)
    if failed is not None:
        witness = {
            "hypothesis": failed.name,
            "constant": failed.constant,
            "bracket": list(failed.report.bracket) if failed.report else None,
            "refutation": failed.report.witness if failed.report else None,
        }
        notes += ("hypothesis failed; conclusion sweep skipped",)
        return CompositionCertificate(theorem, constants, rate, epsilon,
                                      hypotheses, (), "FAIL",
                                      jsonable(witness), notes)
    rows = tuple(rows)
    bad = next((row for row in rows if row.defect > 0.0), None)
    if bad is not None:
        witness = {
            "stage": bad.stage,
            "anchor": bad.anchor,
            "rho": bad.rho,
            "defect": bad.defect,
            "uncovered": bad.witness,
        }
        return CompositionCertificate(theorem, constants, rate, epsilon,
                                      hypotheses, rows, "FAIL",
                                      jsonable(witness), notes)
    return CompositionCertificate(theorem, constants, rate, epsilon,
                                  hypotheses, rows, "PASS", None, notes)


def _z_radius(cfg: NeighborhoodConfig) -> float:
    return cfg.radius_w if cfg.radius_w is not None else cfg.radius_v


def _visible(mapping: MultiMap, x: Point, center: Point,
             radius: float) -> list[Point]:
    return [y for y in mapping.image(x).ordered
            if mapping.target.distance(y, center) < radius - TOLERANCE]


def certify_op_comp(f1: MultiMap, f2: MultiMap, g: BiMultiMap,
                    anchor: Sequence, constants: RateConstants,
                    cfg: NeighborhoodConfig, *,
                    jobs: int = 1) -> CompositionCertificate:
    """Certificate for the composition H(x) = G(F1(x), F2(x)).

    Hypotheses: F1 is L-open around (x̄, ȳ); F2 is M-Lipschitz-like
    around (x̄, z̄); G is C-open in its first slot uniformly over the
    second and D-Lipschitz-like in the second uniformly over the
    first, both around ((ȳ, z̄), w̄); LC − MD > 0.

    The first conclusion checks B(w̄, rate·ρ) within H(B(x̄, ρ)) for
    every swept ρ < ε.  The second checks the same inclusion at every
    tuple (x, y, z, w) with y ∈ F1(x), z ∈ F2(x), w ∈ G(y, z) inside
    the half-ε boxes, for every swept ρ < ε/2.
    """
    L, M, C, D = constants.require("L", "M", "C", "D")
    rate = L * C - M * D
    if rate <= 0:
        raise PreconditionError(f"rate LC-MD = {rate:g} must be positive")
    xb = f1.source.require(anchor[0], "anchor x")
    yb = f1.target.require(anchor[1], "anchor y")
    zb = f2.target.require(anchor[2], "anchor z")
    wb = g.target.require(anchor[3], "anchor w")
    _on_graph(f1, xb, yb, "anchor")
    _on_graph(f2, xb, zb, "anchor")
    _on_bigraph(g, yb, zb, wb, "anchor")

    zr = _z_radius(cfg)
    cfg_m = replace(cfg, radius_v=zr)
    cfg_c = replace(cfg, radius_u=cfg.radius_v, radius_w=zr)
    cfg_d = replace(cfg, radius_u=zr, radius_w=cfg.radius_v)
    hypotheses = [
        _CLOSED,
        _hypothesis("F1_open_L", estimate_lop_around(f1, xb, yb, cfg), L),
        _hypothesis("F2_lipschitz_M",
                    estimate_lip_around(f2, xb, zb, cfg_m), M),
        _hypothesis("G_open_in_y_C",
                    estimate_partial(g.as_param_in_left(), "lop_x",
                                     yb, zb, wb, cfg_c), C),
        _hypothesis("G_lipschitz_in_z_D",
                    estimate_partial(g.as_param_in_right(), "lip_x",
                                     zb, yb, wb, cfg_d), D),
    ]
    window = min(cfg.radius_u, cfg.radius_v, zr)
    sufficient = min(window, 0.5 * window / L, 0.5 * window / M,
                     0.5 * window / (L * C + M * D))
    notes = [f"sufficient epsilon from the construction: {sufficient:g}; "
             f"sweeping with cfg epsilon {cfg.epsilon:g}"]
    if any(not h.passed for h in hypotheses):
        return _assemble("op_comp", constants, rate, cfg.epsilon,
                         hypotheses, (), notes)

    composed = compose_g(f1, f2, g)
    rows = [_inclusion_row(composed, xb, wb, rho, rate, "anchor", (xb, wb))
            for rho in cfg.rho_grid if rho < cfg.epsilon]
    half = 0.5 * cfg.epsilon
    inner = [rho for rho in cfg.rho_grid if rho < half]

    def rows_for(x: Point) -> list[ConclusionRow]:
        out = []
        for y in _visible(f1, x, yb, half):
            for z in _visible(f2, x, zb, half):
                for w in g.image_at(y, z).ordered:
                    if g.target.distance(w, wb) >= half - TOLERANCE:
                        continue
                    out.extend(
                        _inclusion_row(composed, x, w, rho, rate, "box",
                                       (x, y, z, w))
                        for rho in inner)
        return out

    xs = ball(f1.source, xb, half, "open").ordered
    for chunk in _pmap(rows_for, xs, jobs):
        rows.extend(chunk)
    return _assemble("op_comp", constants, rate, cfg.epsilon,
                     hypotheses, rows, notes)


def _box_rows(phi: MultiMap, f: MultiMap, g2: BiMultiMap, xb: Point,
              yb: Point, zb: Point, eps: float, rhos: Sequence[float],
              rate: float, jobs: int) -> list[ConclusionRow]:
    def rows_for(x: Point) -> list[ConclusionRow]:
        out = []
        for y in _visible(f, x, yb, eps):
            for z in g2.image_at(x, y).ordered:
                if g2.target.distance(z, zb) >= eps - TOLERANCE:
                    continue
                out.extend(
                    _inclusion_row(phi, x, z, rho, rate, "box", (x, y, z))
                    for rho in rhos)
        return out

    rows: list[ConclusionRow] = []
    for chunk in _pmap(rows_for, ball(f.source, xb, eps, "open").ordered,
                       jobs):
        rows.extend(chunk)
    return rows


def _graph_rows(phi: MultiMap, xb: Point, zb: Point, eps: float,
                rhos: Sequence[float], rate: float,
                jobs: int) -> list[ConclusionRow]:
    pairs = [(x, z) for x, z in phi.pairs
             if phi.source.distance(x, xb) < eps - TOLERANCE
             and phi.target.distance(z, zb) < eps - TOLERANCE]

    def rows_for(pair: tuple[Point, Point]) -> list[ConclusionRow]:
        x, z = pair
        return [_inclusion_row(phi, x, z, rho, rate, "graph", (x, z))
                for rho in rhos]

    rows: list[ConclusionRow] = []
    for chunk in _pmap(rows_for, pairs, jobs):
        rows.extend(chunk)
    return rows


def _cond_violation(g2: BiMultiMap, xs: Iterable[Point]) -> tuple | None:
    """First (x, y, y') with G(x, y) meeting G(x, y') despite y != y'."""
    wanted = set(xs)
    by_x: dict[Point, list[tuple[Point, frozenset]]] = {}
    for (x, y), values in sorted(g2.rows.items()):
        if x in wanted:
            by_x.setdefault(x, []).append((y, values))
    for x, entries in sorted(by_x.items()):
        for i, (y, values) in enumerate(entries):
            for y2, values2 in entries[i + 1:]:
                if values & values2:
                    return x, y, y2
    return None


def certify_part_A(f: MultiMap, g2: BiMultiMap, anchor: Sequence,
                   constants: RateConstants, cfg: NeighborhoodConfig, *,
                   check_cond: bool = False,
                   jobs: int = 1) -> CompositionCertificate:
    """Certificate for Phi(x) = G(x, F(x)) driven by openness of F.

    Hypotheses: G is D-Lipschitz-like in x uniformly over y and C-open
    in y uniformly over x, both around ((x̄, ȳ), z̄); F is L-open
    around (x̄, ȳ); LC − D > 0.  The sweep covers every (x, y, z) in
    the ε-boxes with y ∈ F(x), z ∈ G(x, y) and checks
    B(z, rate·ρ) within Phi(B(x, ρ)) for every swept ρ < ε.

    With ``check_cond`` the values of G at distinct y are first
    verified pairwise disjoint for every x in the ε-window; when that
    holds the sweep extends to every (x, z) on Gr Phi inside the
    ε′-boxes, ε′ = min{ε, C·ε/(D+1)}/2.  A violated disjointness
    records the witnessing triple and keeps the weaker conclusion.
    """
    L, C, D = constants.require("L", "C", "D")
    rate = L * C - D
    if rate <= 0:
        raise PreconditionError(f"rate LC-D = {rate:g} must be positive")
    xb = f.source.require(anchor[0], "anchor x")
    yb = f.target.require(anchor[1], "anchor y")
    zb = g2.target.require(anchor[2], "anchor z")
    _on_graph(f, xb, yb, "anchor")
    _on_bigraph(g2, xb, yb, zb, "anchor")

    zr = _z_radius(cfg)
    cfg_d = replace(cfg, radius_v=zr, radius_w=cfg.radius_v)
    cfg_c = replace(cfg, radius_u=cfg.radius_v, radius_v=zr,
                    radius_w=cfg.radius_u)
    hypotheses = [
        _CLOSED,
        _hypothesis("G_lipschitz_in_x_D",
                    estimate_partial(g2.as_param_in_left(), "lip_x",
                                     xb, yb, zb, cfg_d), D),
        _hypothesis("G_open_in_y_C",
                    estimate_partial(g2.as_param_in_right(), "lop_x",
                                     yb, xb, zb, cfg_c), C),
        _hypothesis("F_open_L", estimate_lop_around(f, xb, yb, cfg), L),
    ]
    notes: list[str] = []
    if any(not h.passed for h in hypotheses):
        return _assemble("op_comp_part_A", constants, rate, cfg.epsilon,
                         hypotheses, (), notes)

    phi = compose_g(identity_map(f.source), f, g2)
    eps = cfg.epsilon
    rhos = [rho for rho in cfg.rho_grid if rho < eps]
    rows = _box_rows(phi, f, g2, xb, yb, zb, eps, rhos, rate, jobs)
    if check_cond:
        violation = _cond_violation(g2, ball(f.source, xb, eps, "open"))
        if violation is None:
            eps2 = 0.5 * min(eps, C * eps / (D + 1))
            inner = [rho for rho in cfg.rho_grid if rho < eps2]
            rows.extend(_graph_rows(phi, xb, zb, eps2, inner, rate, jobs))
            notes.append(f"cond holds on the window; graph-quantified "
                         f"conclusion swept with epsilon' {eps2:g}")
        else:
            x, y, y2 = violation
            notes.append(f"cond violated at x={x}: G(x, {y}) meets "
                         f"G(x, {y2}); kept the weaker conclusion")
    return _assemble("op_comp_part_A", constants, rate, cfg.epsilon,
                     hypotheses, rows, notes)


def _full_lipschitz_witness(f: MultiMap, xb: Point, eps: float,
                            M: float) -> dict | None:
    window = ball(f.source, xb, eps, "open").ordered
    for x in window:
        values = f.image(x)
        if values.is_empty:
            continue
        for u in window:
            bound = M * f.source.distance(x, u) + TOLERANCE
            for y in values.ordered:
                if distance_point_set(f.target, y, f.image(u)) > bound:
                    return {"x": x, "u": u, "y": y}
    return None


def certify_part_B(f: MultiMap, g2: BiMultiMap, anchor: Sequence,
                   constants: RateConstants, cfg: NeighborhoodConfig, *,
                   singleton_check: bool = False,
                   jobs: int = 1) -> CompositionCertificate:
    """Certificate for Phi(x) = G(x, F(x)) driven by openness of G in x.

    Hypotheses: G is C-open in x uniformly over y and D-Lipschitz-like
    in y uniformly over x, both around ((x̄, ȳ), z̄); F is
    M-Lipschitz-like around (x̄, ȳ); C − MD > 0.  The weak sweep is
    the same (x, y, z) box sweep as part A at rate C − MD.

    With ``singleton_check`` the sweep extends to Gr Phi boxes at
    ε′ = min{ε, ε/M}/2 once F(x̄) = {ȳ} and F is plainly M-Lipschitz
    (no target localization) on the ε-window; failures of either extra
    assumption record a note and keep the weaker conclusion.
    """
    C, D, M = constants.require("C", "D", "M")
    rate = C - M * D
    if rate <= 0:
        raise PreconditionError(f"rate C-MD = {rate:g} must be positive")
    xb = f.source.require(anchor[0], "anchor x")
    yb = f.target.require(anchor[1], "anchor y")
    zb = g2.target.require(anchor[2], "anchor z")
    _on_graph(f, xb, yb, "anchor")
    _on_bigraph(g2, xb, yb, zb, "anchor")

    zr = _z_radius(cfg)
    cfg_c = replace(cfg, radius_v=zr, radius_w=cfg.radius_v)
    cfg_d = replace(cfg, radius_u=cfg.radius_v, radius_v=zr,
                    radius_w=cfg.radius_u)
    hypotheses = [
        _CLOSED,
        _hypothesis("G_open_in_x_C",
                    estimate_partial(g2.as_param_in_left(), "lop_x",
                                     xb, yb, zb, cfg_c), C),
        _hypothesis("G_lipschitz_in_y_D",
                    estimate_partial(g2.as_param_in_right(), "lip_x",
                                     yb, xb, zb, cfg_d), D),
        _hypothesis("F_lipschitz_M", estimate_lip_around(f, xb, yb, cfg), M),
    ]
    notes: list[str] = []
    if any(not h.passed for h in hypotheses):
        return _assemble("op_comp_part_B", constants, rate, cfg.epsilon,
                         hypotheses, (), notes)

    phi = compose_g(identity_map(f.source), f, g2)
    eps = cfg.epsilon
    rhos = [rho for rho in cfg.rho_grid if rho < eps]
    rows = _box_rows(phi, f, g2, xb, yb, zb, eps, rhos, rate, jobs)
    if singleton_check:
        if f.image(xb).members != frozenset((yb,)):
            notes.append(f"F({xb}) is not the singleton {{{yb}}}; "
                         "kept the weaker conclusion")
        else:
            witness = _full_lipschitz_witness(f, xb, eps, M)
            if witness is not None:
                notes.append(f"F is not plainly {M:g}-Lipschitz on the "
                             f"window (witness {witness}); kept the "
                             "weaker conclusion")
            else:
                eps2 = 0.5 * min(eps, eps / M)
                inner = [rho for rho in cfg.rho_grid if rho < eps2]
                rows.extend(_graph_rows(phi, xb, zb, eps2, inner, rate,
                                        jobs))
                notes.append(f"singleton and full-Lipschitz checks hold; "
                             f"graph-quantified conclusion swept with "
                             f"epsilon' {eps2:g}")
    return _assemble("op_comp_part_B", constants, rate, cfg.epsilon,
                     hypotheses, rows, notes)


def certify_main_const(f1: MultiMap, f2: MultiMap, anchor: Sequence,
                       constants: RateConstants, cfg: NeighborhoodConfig, *,
                       target: GridSpace | None = None,
                       jobs: int = 1) -> CompositionCertificate:
    """Certificate for B(y−z, (1/l − m)ρ) within (F1 − F2)(B(x, ρ)).

    Hypotheses: F1 is l-metrically-regular around (x̄, ȳ₁), F2 is
    m-Lipschitz-like around (x̄, ȳ₂), lm < 1; the rate is 1/l − m.
    The sweep covers every (x, y, z) with y ∈ F1(x), z ∈ F2(x) inside
    the ε-boxes and every swept ρ < ε.  ``target`` may pin the grid
    carrying the difference values; by default it is synthesized from
    the sampled differences.
    """
    l, m = constants.require("l", "m")
    if l * m >= 1:
        raise PreconditionError(f"lm = {l * m:g} must be < 1")
    rate = 1.0 / l - m
    xb = f1.source.require(anchor[0], "anchor x")
    y1 = f1.target.require(anchor[1], "anchor y1")
    y2 = f2.target.require(anchor[2], "anchor y2")
    _on_graph(f1, xb, y1, "anchor")
    _on_graph(f2, xb, y2, "anchor")

    zr = _z_radius(cfg)
    hypotheses = [
        _CLOSED,
        _hypothesis("F1_regular_l", estimate_reg_around(f1, xb, y1, cfg), l),
        _hypothesis("F2_lipschitz_m",
                    estimate_lip_around(f2, xb, y2,
                                        replace(cfg, radius_v=zr)), m),
    ]
    if any(not h.passed for h in hypotheses):
        return _assemble("main_const", constants, rate, cfg.epsilon,
                         hypotheses, ())

    diff = difference(f1, f2, target=target)
    eps = cfg.epsilon
    rhos = [rho for rho in cfg.rho_grid if rho < eps]

    def rows_for(x: Point) -> list[ConclusionRow]:
        out = []
        for y in _visible(f1, x, y1, eps):
            for z in _visible(f2, x, y2, eps):
                w = diff.target.require(np.subtract(y, z),
                                        "difference value")
                out.extend(
                    _inclusion_row(diff, x, w, rho, rate, "box", (x, y, z))
                    for rho in rhos)
        return out

    rows: list[ConclusionRow] = []
    for chunk in _pmap(rows_for, ball(f1.source, xb, eps, "open").ordered,
                       jobs):
        rows.extend(chunk)
    return _assemble("main_const", constants, rate, cfg.epsilon,
                     hypotheses, rows)


def _graph_wide_openness(mapping: MultiMap, constant: float, name: str,
                         cfg: NeighborhoodConfig) -> HypothesisCheck:
    """Punctual openness at every graph point, reported as one check."""
    worst: ModulusReport | None = None
    for x, y in mapping.pairs:
        report = estimate_plop_at(mapping, x, y, cfg)
        if worst is None or report.hi < worst.hi:
            worst = report
        if report.refutes(constant):
            return HypothesisCheck(
                name, constant, False, False, report,
                f"refuted at graph point ({x}, {y})")
    assert worst is not None
    certified = worst.certifies(constant)
    return HypothesisCheck(
        name, constant, True, certified, worst,
        f"checked at {len(mapping.pairs)} graph points; "
        f"binding bracket at {worst.point}")


def certify_lyusternik_graves(f: MultiMap, g: MultiMap,
                              constants: RateConstants,
                              cfg: NeighborhoodConfig, *,
                              both_directions: bool = False,
                              jobs: int = 1) -> CompositionCertificate:
    """Global openness of F − G⁻¹ from graph-wide openness of F and G.

    Hypotheses: F is L-open and G is M-open at every point of the
    respective graphs (punctual sweeps re-centered per point; the
    window roles of cfg are mirrored for G) and LM > 1.  The
    conclusion checks (L − 1/M)-openness of F − G⁻¹ at every point of
    its graph over the swept radii; ``both_directions`` appends the
    mirrored sweep for G − F⁻¹ at rate M − 1/L.
    """
    L, M = constants.require("L", "M")
    if L * M <= 1:
        raise PreconditionError(f"LM = {L * M:g} must exceed 1")
    rate = L - 1.0 / M
    if not f.graph or not g.graph:
        raise PreconditionError("both graphs must be nonempty")

    forward = difference(f, g.inverse())
    if not forward.dom:
        raise PreconditionError("Dom(F - G^{-1}) is empty on the grid")
    hypotheses = [
        _CLOSED,
        _graph_wide_openness(f, L, "F_open_L_everywhere", cfg),
        _graph_wide_openness(g, M, "G_open_M_everywhere", cfg.mirrored()),
    ]
    notes = [f"forward rate L - 1/M = {rate:g}"]
    if any(not h.passed for h in hypotheses):
        return _assemble("lyusternik_graves", constants, rate, cfg.epsilon,
                         hypotheses, (), notes)

    def forward_rows(pair: tuple[Point, Point]) -> list[ConclusionRow]:
        x, w = pair
        return [_inclusion_row(forward, x, w, rho, rate, "forward", (x, w))
                for rho in cfg.rho_grid]

    rows: list[ConclusionRow] = []
    for chunk in _pmap(forward_rows, forward.pairs, jobs):
        rows.extend(chunk)

    if both_directions:
        reverse = difference(g, f.inverse())
        if not reverse.dom:
            raise PreconditionError("Dom(G - F^{-1}) is empty on the grid")
        reverse_rate = M - 1.0 / L
        notes.append(f"reverse rate M - 1/L = {reverse_rate:g}")

        def reverse_rows(pair: tuple[Point, Point]) -> list[ConclusionRow]:
            y, w = pair
            return [_inclusion_row(reverse, y, w, rho, reverse_rate,
                                   "reverse", (y, w))
                    for rho in cfg.rho_grid]

        for chunk in _pmap(reverse_rows, reverse.pairs, jobs):
            rows.extend(chunk)
    return _assemble("lyusternik_graves", constants, rate, cfg.epsilon,
                     hypotheses, rows, notes)
