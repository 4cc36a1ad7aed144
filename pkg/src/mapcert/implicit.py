"""Implicit multifunctions: solution maps of 0 in H(x, p) and their bounds.

The solution map S(p) = {x : 0 in H(x, p)} is materialized eagerly as a
plain relation so every verifier can sweep it.  Distance estimates are
checked by enumeration; Lipschitz/regularity bounds on S are
cross-checked against independent sweeps of S itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .composition import PreconditionError
from .maps import BiMultiMap, MultiMap, ParamMultiMap
from .metric import (TOLERANCE, OffGridError, Point, PointSet, ball,
                     distance_point_set)
from .moduli import (ModulusReport, NeighborhoodConfig, estimate_lip_around,
                     estimate_partial, estimate_reg_around, jsonable)


class HypothesisRefuted(ValueError):
    """A supplied rate constant lies outside its estimator bracket."""

    def __init__(self, message: str, report: ModulusReport):
        super().__init__(message)
        self.report = report


class VerificationError(RuntimeError):
    """A claimed estimate failed its exhaustive check."""


def _zero_of(space) -> Point:
    zero = space.locate((0.0,) * space.dim)
    if zero is None:
        raise OffGridError(f"0 is not on the grid of {space.label!r}")
    return zero


def implicit_map(family: ParamMultiMap) -> MultiMap:
    """Solution map S(p) = {x : 0 in H(x, p)} as a relation over P x X."""
    zero = _zero_of(family.target)
    pairs = frozenset((p, x) for x, p, y in family.triples if y == zero)
    return MultiMap(family.params, family.source, pairs,
                    label=f"sol({family.label})")


@dataclass(frozen=True, eq=False)
class ImplicitInstance:
    """A parametric inclusion 0 in H(x, p) with its verification data.

    ``c`` is the uniform partial openness rate of the variable being
    inverted: x for the (p -> S(p)) estimates, p for the mirrored
    (x -> S^{-1}(x)) estimates obtained through ``swapped``.  Window
    roles in ``cfg``: radius_u on X, radius_v on Y, radius_w on P.
    """

    family: ParamMultiMap
    c: float
    gamma: float
    alpha: float
    beta: float
    xbar: Point
    pbar: Point
    cfg: NeighborhoodConfig

    def __post_init__(self):
        for name in ("c", "gamma", "alpha", "beta"):
            if getattr(self, name) <= 0:
                raise PreconditionError(f"{name} must be positive")
        if self.cfg.radius_w is None:
            raise PreconditionError("cfg.radius_w must window the parameters")
        object.__setattr__(self, "xbar",
                           self.family.source.require(self.xbar, "xbar"))
        object.__setattr__(self, "pbar",
                           self.family.params.require(self.pbar, "pbar"))
        if (self.xbar, self.pbar, self.zero) not in self.family.graph:
            raise PreconditionError(
                f"(({self.xbar}, {self.pbar}), {self.zero}) is not on the "
                f"graph of {self.family.label!r}")

    @cached_property
    def zero(self) -> Point:
        return _zero_of(self.family.target)

    @cached_property
    def solution(self) -> MultiMap:
        return implicit_map(self.family)

    @cached_property
    def openness_report(self) -> ModulusReport:
        return estimate_partial(self.family, "lop_x", self.xbar, self.pbar,
                                self.zero, self.cfg)

    def require_openness(self) -> ModulusReport:
        report = self.openness_report
        if report.refutes(self.c):
            raise HypothesisRefuted(
                f"openness rate {self.c:g} refuted by bracket "
                f"{report.bracket}", report)
        return report

    def swapped(self) -> "ImplicitInstance":
        """Roles of x and p exchanged; ``c`` becomes the rate in p."""
        cfg = replace(self.cfg, radius_u=self.cfg.radius_w,
                      radius_w=self.cfg.radius_u)
        return ImplicitInstance(self.family.swap_roles(), self.c, self.gamma,
                                self.beta, self.alpha, self.pbar, self.xbar,
                                cfg)


@dataclass(frozen=True)
class EstimateReport:
    """One verified instance of d(x, S(p)) <= rhs (or its mirror)."""

    kind: str
    x: Point
    p: Point
    lhs: float
    rhs: float
    margin: float
    gamma: float

    def to_payload(self) -> dict:
        return {
            "kind": self.kind,
            "x": jsonable(self.x),
            "p": jsonable(self.p),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "gamma": self.gamma,
        }


def _capped_residual(inst: ImplicitInstance, x: Point, p: Point) -> float:
    """d(0, H(x, p) within the open gamma-ball); +inf when empty."""
    target = inst.family.target
    values = inst.family.image_at(x, p)
    mask = values.mask & target.ball_mask(inst.zero, inst.gamma, "open")
    return distance_point_set(target, inst.zero,
                              PointSet.from_mask(target, mask))


def _inside(space, point: Point, center: Point, radius: float,
            what: str) -> None:
    if space.distance(point, center) >= radius - TOLERANCE:
        raise PreconditionError(
            f"{what} {point} lies outside the open ball around {center} "
            f"of radius {radius:g}")


def verify_xSp_estimate(inst: ImplicitInstance, x, p) -> EstimateReport:
    """Check d(x, S(p)) <= c^{-1} d(0, H(x,p) in the gamma-ball).

    The right side is +inf (vacuous) when H(x, p) misses the open
    gamma-ball entirely; the openness hypothesis is validated before
    anything is computed.
    """
    xq = inst.family.source.require(x, "x")
    pq = inst.family.params.require(p, "p")
    _inside(inst.family.source, xq, inst.xbar, inst.alpha, "x")
    _inside(inst.family.params, pq, inst.pbar, inst.beta, "p")
    inst.require_openness()
    lhs = distance_point_set(inst.family.source, xq, inst.solution.image(pq))
    rhs = _capped_residual(inst, xq, pq) / inst.c
    if lhs > rhs + TOLERANCE:
        raise VerificationError(
            f"d(x, S(p)) = {lhs:g} exceeds the bound {rhs:g} at "
            f"x={xq}, p={pq}")
    margin = rhs - lhs + 0.0 if math.isfinite(rhs) else math.inf
    return EstimateReport("x_in_S(p)", xq, pq, lhs, rhs, margin, inst.gamma)


def verify_pSx_estimate(inst: ImplicitInstance, x, p) -> EstimateReport:
    """Mirror estimate d(p, S^{-1}(x)) <= c^{-1} d(0, H(x,p) capped).

    Here ``inst.c`` must be the partial openness rate in p uniformly
    over x.
    """
    mirror = verify_xSp_estimate(inst.swapped(), p, x)
    return EstimateReport("p_in_Sinv(x)", mirror.p, mirror.x, mirror.lhs,
                          mirror.rhs, mirror.margin, mirror.gamma)


def sweep_xSp(inst: ImplicitInstance) -> tuple[EstimateReport, ...]:
    """The (xSpV) estimate at every (x, p) in the alpha/beta windows."""
    xs = ball(inst.family.source, inst.xbar, inst.alpha, "open").ordered
    ps = ball(inst.family.params, inst.pbar, inst.beta, "open").ordered
    return tuple(verify_xSp_estimate(inst, x, p) for x in xs for p in ps)


def sweep_pSx(inst: ImplicitInstance) -> tuple[EstimateReport, ...]:
    mirror = inst.swapped()
    xs = ball(inst.family.source, inst.xbar, inst.alpha, "open").ordered
    ps = ball(inst.family.params, inst.pbar, inst.beta, "open").ordered
    out = []
    for x in xs:
        for p in ps:
            rep = verify_xSp_estimate(mirror, p, x)
            out.append(EstimateReport("p_in_Sinv(x)", rep.p, rep.x, rep.lhs,
                                      rep.rhs, rep.margin, rep.gamma))
    return tuple(out)


def _solution_cfg(inst: ImplicitInstance) -> NeighborhoodConfig:
    return replace(inst.cfg, radius_u=inst.cfg.radius_w,
                   radius_v=inst.cfg.radius_u)


def bound_lip_S(inst: ImplicitInstance, lip_p_H: float) -> float:
    """Bound c^{-1}·lip_p on lip S(pbar, xbar), cross-checked on S.

    ``lip_p_H`` is validated against the uniform partial Lipschitz
    bracket of H in p; the returned bound is then compared with an
    independent sweep of S itself, which must not exceed it by more
    than twice the bisection resolution.
    """
    report = estimate_partial(inst.family, "lip_p", inst.xbar, inst.pbar,
                              inst.zero, inst.cfg)
    if report.refutes(lip_p_H):
        raise HypothesisRefuted(
            f"lip_p constant {lip_p_H:g} refuted by bracket "
            f"{report.bracket}", report)
    inst.require_openness()
    bound = lip_p_H / inst.c
    swept = estimate_lip_around(inst.solution, inst.pbar, inst.xbar,
                                _solution_cfg(inst))
    if swept.lo > bound + 2 * inst.cfg.resolution:
        raise VerificationError(
            f"swept lip of the solution map ({swept.lo:g}) exceeds the "
            f"bound {bound:g}")
    return bound


def bound_reg_S(inst: ImplicitInstance, lip_x_H: float) -> float:
    """Bound c^{-1}·lip_x on reg S(pbar, xbar); c is the rate in p."""
    report = estimate_partial(inst.family, "lip_x", inst.xbar, inst.pbar,
                              inst.zero, inst.cfg)
    if report.refutes(lip_x_H):
        raise HypothesisRefuted(
            f"lip_x constant {lip_x_H:g} refuted by bracket "
            f"{report.bracket}", report)
    inst.swapped().require_openness()
    bound = lip_x_H / inst.c
    swept = estimate_reg_around(inst.solution, inst.pbar, inst.xbar,
                                _solution_cfg(inst))
    if swept.lo > bound + 2 * inst.cfg.resolution:
        raise VerificationError(
            f"swept reg of the solution map ({swept.lo:g}) exceeds the "
            f"bound {bound:g}")
    return bound


@dataclass(frozen=True, eq=False)
class GammaInstance:
    """Level sets Gamma(z, w) = {y : w in G(y, z)} with Lipschitz data.

    Window roles in ``cfg``: radius_u on Y, radius_v on W, radius_w
    on Z.  ``delta`` is the slack factor of the dilated inclusion; the
    paper quantifies over every positive delta, the instance pins one.
    """

    relation: BiMultiMap
    C: float
    D: float
    gamma: float
    ybar: Point
    zbar: Point
    wbar: Point
    cfg: NeighborhoodConfig
    delta: float = 0.01

    def __post_init__(self):
        if self.C <= 0 or self.gamma <= 0 or self.delta <= 0:
            raise PreconditionError("C, gamma and delta must be positive")
        if self.D < 0:
            raise PreconditionError("D must be nonnegative")
        if self.cfg.radius_w is None:
            raise PreconditionError("cfg.radius_w must window Z")
        object.__setattr__(self, "ybar",
                           self.relation.left.require(self.ybar, "ybar"))
        object.__setattr__(self, "zbar",
                           self.relation.right.require(self.zbar, "zbar"))
        object.__setattr__(self, "wbar",
                           self.relation.target.require(self.wbar, "wbar"))
        if (self.ybar, self.zbar, self.wbar) not in self.relation.graph:
            raise PreconditionError(
                f"(({self.ybar}, {self.zbar}), {self.wbar}) is not on the "
                f"graph of {self.relation.label!r}")

    @cached_property
    def lipschitz_report(self) -> ModulusReport:
        cfg = replace(self.cfg, radius_u=self.cfg.radius_w,
                      radius_w=self.cfg.radius_u)
        return estimate_partial(self.relation.as_param_in_right(), "lip_x",
                                self.zbar, self.ybar, self.wbar, cfg)

    @cached_property
    def openness_report(self) -> ModulusReport:
        return estimate_partial(self.relation.as_param_in_left(), "lop_x",
                                self.ybar, self.zbar, self.wbar, self.cfg)

    def require_hypotheses(self) -> tuple[ModulusReport, ModulusReport]:
        lip, opn = self.lipschitz_report, self.openness_report
        if lip.refutes(self.D):
            raise HypothesisRefuted(
                f"Lipschitz constant {self.D:g} refuted by bracket "
                f"{lip.bracket}", lip)
        if opn.refutes(self.C):
            raise HypothesisRefuted(
                f"openness rate {self.C:g} refuted by bracket "
                f"{opn.bracket}", opn)
        return lip, opn


def gamma_map(inst: GammaInstance, z, w) -> PointSet:
    """Gamma(z, w) = {y : w in G(y, z)}."""
    zq = inst.relation.right.require(z, "z")
    wq = inst.relation.target.require(w, "w")
    members = frozenset(y for y, zz, ww in inst.relation.graph
                        if zz == zq and ww == wq)
    return PointSet(inst.relation.left, members)


@dataclass(frozen=True)
class GammaReport:
    """Dilated inclusion of Gamma(z, w) into Gamma(z', w') plus the
    intermediate Lipschitz claim for G(y, z) - w, for one pair of
    parameter points."""

    pair: tuple[Point, Point]
    pair_prime: tuple[Point, Point]
    radius: float
    defect: float
    witness: Point | None
    intermediate_defect: float
    intermediate_witness: dict | None
    delta: float

    @property
    def holds(self) -> bool:
        return self.defect == 0.0 and self.intermediate_defect == 0.0

    def to_payload(self) -> dict:
        return {
            "pair": jsonable(self.pair),
            "pair_prime": jsonable(self.pair_prime),
            "radius": self.radius,
            "defect": self.defect,
            "witness": jsonable(self.witness),
            "intermediate_defect": self.intermediate_defect,
            "intermediate_witness": jsonable(self.intermediate_witness),
            "delta": self.delta,
        }


def _dilation_defect(space, left: PointSet, right: PointSet,
                     radius: float) -> tuple[float, Point | None]:
    worst, witness = 0.0, None
    for y in left.ordered:
        gap = distance_point_set(space, y, right) - radius
        if gap > worst:
            worst, witness = gap, y
    if worst <= TOLERANCE:
        return 0.0, None
    return worst, witness


def _shifted_rows(inst: GammaInstance, z: Point, w: Point):
    """Raw vectors of G(y, z) - w for y in the gamma cap, by y."""
    cap = ball(inst.relation.left, inst.ybar, inst.gamma, "closed")
    shift = np.asarray(w, dtype=float)
    rows = {}
    for y in cap.ordered:
        values = inst.relation.image_at(y, z)
        if not values.is_empty:
            rows[y] = values.array - shift
    return rows


def verify_gamma_lipschitz(inst: GammaInstance, pair, pair_prime
                           ) -> GammaReport:
    """Check the dilated inclusion (lipGam) for one pair of (z, w).

    Gamma(z, w) within the closed gamma-cap around ybar must land in
    Gamma(z', w') dilated by ((1+delta)/C)(D|z-z'| + |w-w'|).  The
    intermediate claim that G(y, z) - w is Lipschitz-like in (z, w)
    uniformly over the capped y, with modulus D|z-z'| + |w-w'|, is
    re-verified on raw difference vectors capped at the closed
    gamma-ball around the origin.
    """
    rel = inst.relation
    z = rel.right.require(pair[0], "z")
    w = rel.target.require(pair[1], "w")
    z2 = rel.right.require(pair_prime[0], "z'")
    w2 = rel.target.require(pair_prime[1], "w'")
    for value, center, space, what in (
            (z, inst.zbar, rel.right, "z"), (z2, inst.zbar, rel.right, "z'"),
            (w, inst.wbar, rel.target, "w"),
            (w2, inst.wbar, rel.target, "w'")):
        if space.distance(value, center) > inst.gamma + TOLERANCE:
            raise PreconditionError(
                f"{what} {value} lies outside the closed gamma-cap")
    inst.require_hypotheses()

    move = inst.D * rel.right.distance(z, z2) + rel.target.distance(w, w2)
    radius = (1.0 + inst.delta) / inst.C * move
    cap_mask = rel.left.ball_mask(inst.ybar, inst.gamma, "closed")
    left = PointSet.from_mask(rel.left, gamma_map(inst, z, w).mask & cap_mask)
    right = gamma_map(inst, z2, w2)
    if radius > 0:
        defect, witness = _dilation_defect(rel.left, left, right, radius)
    else:
        defect, witness = _dilation_defect(rel.left, left, right, 0.0)

    inter_defect, inter_witness = 0.0, None
    rows = _shifted_rows(inst, z, w)
    rows_prime = _shifted_rows(inst, z2, w2)
    for y, vectors in rows.items():
        norms = np.array([rel.target.norm_of(v) for v in vectors])
        visible = vectors[norms <= inst.gamma + TOLERANCE]
        if not visible.size:
            continue
        other = rows_prime.get(y)
        for vec in visible:
            if other is None:
                gap = math.inf
            else:
                gaps = np.array([rel.target.norm_of(vec - o) for o in other])
                gap = float(gaps.min()) - move
            if gap > inter_defect:
                inter_defect = gap
                inter_witness = {"y": y, "vector": tuple(float(t) for t in vec)}
    if inter_defect <= TOLERANCE:
        inter_defect, inter_witness = 0.0, None

    return GammaReport((z, w), (z2, w2), radius, defect, witness,
                       inter_defect, inter_witness, inst.delta)


def sweep_gamma(inst: GammaInstance) -> tuple[GammaReport, ...]:
    """(lipGam) at every ((z, w), (z', w')) in the closed gamma-caps."""
    zs = ball(inst.relation.right, inst.zbar, inst.gamma, "closed").ordered
    ws = ball(inst.relation.target, inst.wbar, inst.gamma, "closed").ordered
    out = []
    for z in zs:
        for w in ws:
            for z2 in zs:
                for w2 in ws:
                    out.append(verify_gamma_lipschitz(inst, (z, w), (z2, w2)))
    return tuple(out)
