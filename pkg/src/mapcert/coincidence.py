"""Coincidence and fixed-point verification for pairs of maps.

Fix(F1^{-1} F2) = {x : F1(x) and F2(x) intersect} is enumerated
exactly; the distance-to-fixed-set bound with factor (1/l - m)^{-1} is
then checked pointwise, in its direct form and in the form routed
through the difference map.  A companion report grades the sufficient
radius inequalities used to establish the bound, since user-supplied
windows may be more generous than those.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

from .composition import PreconditionError
from .implicit import HypothesisRefuted, VerificationError
from .maps import MultiMap, ParamMultiMap, difference
from .metric import (TOLERANCE, Point, PointSet, ball, distance_point_set,
                     distance_set_set)
from .moduli import (ModulusReport, NeighborhoodConfig, estimate_lip_around,
                     estimate_reg_around, jsonable)

BOUND_DIRECT = "intersection"
BOUND_DIFFERENCE = "difference"


def fix_set(f1: MultiMap, f2: MultiMap) -> PointSet:
    """All x whose images under the two maps intersect."""
    if not f1.source.compatible_with(f2.source):
        raise PreconditionError("the two maps must share their source grid")
    if not f1.target.same_ambient(f2.target):
        raise PreconditionError("the two targets must share an ambient")
    members = frozenset(x for x in f1.source.points
                        if f1.image(x).members & f2.image(x).members)
    return PointSet(f1.source, members)


@dataclass(frozen=True, eq=False)
class CoincidenceInstance:
    """A pair (F1, F2) with a common point on both graphs.

    l bounds the regularity of F1 and m the Lipschitz modulus of F2,
    both around (xbar, ybar); lm < 1 makes the bound factor
    (1/l - m)^{-1} positive.  alpha and beta window the swept x and
    the value cap.
    """

    f1: MultiMap
    f2: MultiMap
    l: float
    m: float
    alpha: float
    beta: float
    xbar: Point
    ybar: Point
    cfg: NeighborhoodConfig

    def __post_init__(self):
        for name in ("l", "m", "alpha", "beta"):
            if getattr(self, name) <= 0:
                raise PreconditionError(f"{name} must be positive")
        if self.l * self.m >= 1:
            raise PreconditionError(
                f"l*m = {self.l * self.m:g} must be below 1")
        if not self.f1.source.compatible_with(self.f2.source):
            raise PreconditionError("maps must share their source grid")
        if not self.f1.target.same_ambient(self.f2.target):
            raise PreconditionError("targets must share an ambient")
        object.__setattr__(self, "xbar",
                           self.f1.source.require(self.xbar, "xbar"))
        object.__setattr__(self, "ybar",
                           self.f1.target.require(self.ybar, "ybar"))
        y2 = self.f2.target.locate(self.ybar)
        if (self.xbar, self.ybar) not in self.f1.graph or y2 is None \
                or (self.xbar, y2) not in self.f2.graph:
            raise PreconditionError(
                "(xbar, ybar) must lie on both graphs")

    @property
    def factor(self) -> float:
        return 1.0 / (1.0 / self.l - self.m)

    @cached_property
    def regularity_report(self) -> ModulusReport:
        return estimate_reg_around(self.f1, self.xbar, self.ybar, self.cfg)

    @cached_property
    def lipschitz_report(self) -> ModulusReport:
        return estimate_lip_around(self.f2, self.xbar, self.ybar, self.cfg)

    def require_hypotheses(self) -> tuple[ModulusReport, ModulusReport]:
        reg, lip = self.regularity_report, self.lipschitz_report
        if reg.refutes(self.l):
            raise HypothesisRefuted(
                f"regularity modulus {self.l:g} refuted by bracket "
                f"{reg.bracket}", reg)
        if lip.refutes(self.m):
            raise HypothesisRefuted(
                f"Lipschitz modulus {self.m:g} refuted by bracket "
                f"{lip.bracket}", lip)
        return reg, lip

    @cached_property
    def fixed(self) -> PointSet:
        return fix_set(self.f1, self.f2)

    @cached_property
    def diff(self) -> MultiMap:
        return difference(self.f1, self.f2)


@dataclass(frozen=True)
class FixpointReport:
    """One check of d(x, Fix) <= factor * residual distance."""

    kind: str
    x: Point
    lhs: float
    rhs: float
    ratio: float
    rhs_direct: float | None = None

    @property
    def vacuous(self) -> bool:
        return math.isinf(self.rhs)

    def to_payload(self) -> dict:
        out = {
            "kind": self.kind,
            "x": jsonable(self.x),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "vacuous": self.vacuous,
        }
        if self.rhs_direct is not None:
            out["rhs_direct"] = self.rhs_direct
        return out


def _admit(inst: CoincidenceInstance, x) -> Point:
    xq = inst.f1.source.require(x, "x")
    if inst.f1.source.distance(xq, inst.xbar) >= inst.alpha - TOLERANCE:
        raise PreconditionError(
            f"x {xq} lies outside the open alpha-ball around {inst.xbar}")
    return xq


def _finish(kind: str, inst: CoincidenceInstance, xq: Point, residual: float,
            rhs_direct: float | None = None) -> FixpointReport:
    lhs = distance_point_set(inst.f1.source, xq, inst.fixed)
    rhs = inst.factor * residual
    if lhs > rhs + TOLERANCE:
        raise VerificationError(
            f"d(x, Fix) = {lhs:g} exceeds the bound {rhs:g} at x={xq}")
    if math.isinf(rhs):
        ratio = 0.0
    elif rhs > 0:
        ratio = lhs / rhs
    else:
        ratio = 0.0
    return FixpointReport(kind, xq, lhs, rhs, ratio, rhs_direct)


def _direct_residual(inst: CoincidenceInstance, xq: Point) -> float:
    capped = inst.f1.image(xq).mask & inst.f1.target.ball_mask(
        inst.ybar, inst.beta, "open")
    return distance_set_set(inst.f1.target,
                            PointSet.from_mask(inst.f1.target, capped),
                            inst.f2.image(xq))


def verify_fixp_bound(inst: CoincidenceInstance, x) -> FixpointReport:
    """d(x, Fix) <= factor * d(F1(x) within B(ybar, beta), F2(x)).

    Vacuously true when the capped image is empty (rhs = +inf).
    """
    xq = _admit(inst, x)
    inst.require_hypotheses()
    return _finish(BOUND_DIRECT, inst, xq, _direct_residual(inst, xq))


def verify_fixp_bound_alt(inst: CoincidenceInstance, x) -> FixpointReport:
    """Same bound routed through the difference map.

    rhs = factor * d(0, (F1-F2)(x) within B(0, beta)); the report also
    carries the direct rhs on the same x for side-by-side reading, with
    no ordering asserted between the two.
    """
    xq = _admit(inst, x)
    inst.require_hypotheses()
    space = inst.diff.target
    zero = space.locate((0.0,) * space.dim)
    if zero is None:
        raise PreconditionError("0 is off the difference grid")
    capped = inst.diff.image(xq).mask & space.ball_mask(zero, inst.beta,
                                                        "open")
    residual = distance_point_set(space, zero,
                                  PointSet.from_mask(space, capped))
    return _finish(BOUND_DIFFERENCE, inst, xq, residual,
                   rhs_direct=inst.factor * _direct_residual(inst, xq))


def sweep_fixp(inst: CoincidenceInstance, *,
               alt: bool = False) -> tuple[FixpointReport, ...]:
    """The chosen bound at every x in the open alpha-ball."""
    check = verify_fixp_bound_alt if alt else verify_fixp_bound
    xs = ball(inst.f1.source, inst.xbar, inst.alpha, "open").ordered
    return tuple(check(inst, x) for x in xs)


def parametric_fix(family: ParamMultiMap, f2: MultiMap) -> MultiMap:
    """S(p) = {x : F1(x, p) and F2(x) intersect}, as a map over P."""
    if not family.source.compatible_with(f2.source):
        raise PreconditionError("the family and F2 must share their source")
    if not family.target.same_ambient(f2.target):
        raise PreconditionError("targets must share an ambient")
    values = {x: f2.image(x).members for x in f2.source.points}
    pairs = set()
    for x, p, y in family.graph:
        if y in values.get(x, frozenset()):
            pairs.add((p, x))
    return MultiMap(family.params, family.source, frozenset(pairs),
                    label=f"fix({family.label},{f2.label})")


@dataclass(frozen=True)
class SufficientReport:
    """The proof-side radius inequalities graded for one instance.

    These are sufficient conditions for the bound, not prerequisites;
    a verification may succeed with radii that violate them.  binding
    names the inequality with the smallest margin.
    """

    epsilon: float
    alpha: float
    beta: float
    checks: tuple[tuple[str, bool, float], ...]
    holds: bool
    binding: str

    def to_payload(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "alpha": self.alpha,
            "beta": self.beta,
            "checks": [[name, ok, margin] for name, ok, margin in self.checks],
            "holds": self.holds,
            "binding": self.binding,
        }


def sufficient_report(inst: CoincidenceInstance,
                      epsilon: float) -> SufficientReport:
    """Grade alpha, beta against the sufficient radius inequalities."""
    if epsilon <= 0:
        raise PreconditionError("epsilon must be positive")
    a, b = inst.alpha, inst.beta
    spread = 1.0 / inst.l - inst.m
    checks = (
        ("alpha < m", a < inst.m, inst.m - a),
        ("alpha < epsilon", a < epsilon, epsilon - a),
        ("m*alpha < beta", inst.m * a < b, b - inst.m * a),
        ("3*beta < epsilon", 3 * b < epsilon, epsilon - 3 * b),
        ("2*beta/spread < epsilon", 2 * b / spread < epsilon,
         epsilon - 2 * b / spread),
    )
    binding = min(checks, key=lambda row: row[2])[0]
    return SufficientReport(epsilon, a, b, checks,
                            all(ok for _, ok, _ in checks), binding)


def suggested_radii(l: float, m: float, epsilon: float) -> tuple[float, float]:
    """alpha, beta satisfying every sufficient inequality, with slack."""
    if l <= 0 or m <= 0 or l * m >= 1 or epsilon <= 0:
        raise PreconditionError("need l, m, epsilon > 0 with l*m < 1")
    spread = 1.0 / l - m
    beta = 0.5 * min(epsilon / 3.0, spread * epsilon / 2.0)
    alpha = 0.5 * min(m, epsilon, beta / m)
    return alpha, beta
