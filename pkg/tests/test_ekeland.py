import math

import pytest

from mapcert import (
    DISCRETIZATION_GAP,
    SUCCESS,
    PreconditionError,
    RateConstants,
    ScaledMaxNorm,
    bimultimap,
    constant_map,
    ekeland_point,
    from_linear,
    grid_1d,
    solve_inclusion,
)
from mapcert.ekeland import _verify_conclusions, constraint_set

LINE = grid_1d("L", 0.0, 1.0, 0.1)


def flat_norm(scale):
    return ScaledMaxNorm((LINE,), (1.0,), scale)


# ------------------------------------------------------------ scaled norm


def test_for_rates_weights_and_scale():
    rc = RateConstants(L=2.0, M=0.5, C=1.0, D=1.0)
    norm = ScaledMaxNorm.for_rates((LINE, LINE, LINE, LINE), rc, 0.5)
    assert norm.weights == (1.0, 0.5, 2.0, 1.0 / 2.5)
    assert norm.scale == pytest.approx(0.5 * 1.5)


def test_for_rates_validation():
    with pytest.raises(PreconditionError):
        ScaledMaxNorm.for_rates((LINE,) * 4, RateConstants(L=1.0), 0.5)
    bad = RateConstants(L=1.0, M=2.0, C=1.0, D=1.0)  # rate -1
    with pytest.raises(PreconditionError):
        ScaledMaxNorm.for_rates((LINE,) * 4, bad, 0.5)
    good = RateConstants(L=2.0, M=0.5, C=1.0, D=1.0)
    for tau in (0.0, 1.0, -0.2):
        with pytest.raises(PreconditionError):
            ScaledMaxNorm.for_rates((LINE,) * 4, good, tau)


def test_norm_shape_validation():
    with pytest.raises(ValueError):
        ScaledMaxNorm((LINE, LINE), (1.0,), 1.0)
    with pytest.raises(ValueError):
        ScaledMaxNorm((LINE,), (0.0,), 1.0)
    with pytest.raises(ValueError):
        ScaledMaxNorm((LINE,), (1.0,), -1.0)


def test_norm_is_a_weighted_max():
    norm = ScaledMaxNorm((LINE, LINE), (1.0, 4.0), 0.5)
    a = ((0.0,), (0.0,))
    b = ((0.3,), (0.1,))
    assert norm(a, b) == pytest.approx(0.5 * max(0.3, 0.4))


# -------------------------------------------------------------- principle


def test_descent_jumps_to_the_improving_minimum():
    domain = LINE.points
    h = {p: round(1.0 - p[0], 12) for p in domain}
    ek = ekeland_point(domain, h, (0.0,), flat_norm(0.01))
    assert ek.point == (1.0,) and ek.value == 0.0
    assert ek.iterations == 1
    assert ek.trace[0] == ((0.0,), 1.0)
    assert ek.iterations <= len(domain)


def test_move_flips_exactly_at_the_norm_scale():
    # gap 1.0 over distance 1.0: improvement needs scale < 1
    domain = [(0.0,), (1.0,)]
    h = {(0.0,): 1.0, (1.0,): 0.0}
    moved = ekeland_point(domain, h, (0.0,), flat_norm(0.5))
    assert moved.point == (1.0,) and moved.iterations == 1
    stayed = ekeland_point(domain, h, (0.0,), flat_norm(1.0))
    assert stayed.point == (0.0,) and stayed.iterations == 0


def test_constant_objective_keeps_the_reference():
    h = {p: 0.7 for p in LINE.points}
    ek = ekeland_point(LINE.points, h, (0.4,), flat_norm(1.0))
    assert ek.point == (0.4,) and ek.trace == (((0.4,), 0.7),)


def test_conclusions_hold_against_the_whole_domain():
    h = {p: round(abs(p[0] - 0.55), 12) for p in LINE.points}
    norm = flat_norm(0.3)
    ek = ekeland_point(LINE.points, h, (0.0,), norm)
    assert ek.value <= h[ek.reference] - norm(ek.point, ek.reference) + 1e-12
    for w in LINE.points:
        assert ek.value <= h[w] + norm(ek.point, w) + 1e-12


def test_verifier_rejects_a_fabricated_point():
    h = {p: round(p[0], 12) for p in LINE.points}
    with pytest.raises(RuntimeError):
        _verify_conclusions((1.0,), h[(1.0,)], (0.0,), LINE.points, h,
                            flat_norm(0.5))


def test_objective_validation():
    with pytest.raises(ValueError):
        ekeland_point([], {}, (0.0,), flat_norm(1.0))
    with pytest.raises(ValueError):
        ekeland_point([(0.0,)], {(0.0,): -0.1}, (0.0,), flat_norm(1.0))
    with pytest.raises(ValueError):
        ekeland_point([(0.0,)], {(0.0,): math.inf}, (0.0,), flat_norm(1.0))
    with pytest.raises(ValueError):
        ekeland_point([(0.0,)], {(0.0,): 1.0}, (0.5,), flat_norm(1.0))


# ----------------------------------------------------------------- solver


def system(step):
    x = grid_1d("X8", -1.0, 1.0, step)
    y = grid_1d("Y8", -1.0, 1.0, step)
    z = grid_1d("Z8", -1.0, 1.0, step)
    w = grid_1d("W8", -2.0, 2.0, step)
    f1 = from_linear([[1.0]], x, y, label="F1")
    f2 = constant_map(x, z, [(0.0,)], label="F2")
    g = bimultimap(y, z, w,
                   [((yy,), (zz,), (round(yy + zz, 12),))
                    for (yy,) in y.points for (zz,) in z.points
                    if abs(yy + zz) <= 2.0], label="G")
    return f1, f2, g


RC = RateConstants(L=1.0, M=0.01, C=1.0, D=1.0)  # rate 0.99
ANCHOR = ((0.0,), (0.0,), (0.0,), (0.0,))


def cfg8(*rho):
    from mapcert import NeighborhoodConfig
    return NeighborhoodConfig(0.7, 0.7, 0.6, rho, radius_w=0.7,
                              resolution=1e-7)


def test_solver_finds_an_exact_on_grid_solution():
    res = solve_inclusion(*system(0.05), ANCHOR, RC, (0.3,), cfg8(0.6),
                          tau=0.8)
    assert res.status == SUCCESS and res.succeeded
    assert res.x == (0.3,) and res.residual == 0.0
    assert res.rho == 0.6 and res.tau == 0.8
    assert len(res.trace) == 2  # one descent step


def test_solver_accepts_the_anchor_itself():
    res = solve_inclusion(*system(0.05), ANCHOR, RC, (0.0,), cfg8(0.6))
    assert res.succeeded and res.x == (0.0,)
    assert len(res.trace) == 1


def test_coarse_grid_reports_its_gap_honestly():
    res = solve_inclusion(*system(0.2), ANCHOR, RC, (0.3,), cfg8(0.6),
                          tau=0.8)
    assert res.status == DISCRETIZATION_GAP
    assert res.x is None
    assert res.residual == pytest.approx(0.1)
    assert res.point[3] == (0.2,)  # nearest lattice output below the target


def test_halving_the_step_closes_the_gap():
    coarse = solve_inclusion(*system(0.2), ANCHOR, RC, (0.3,), cfg8(0.6))
    fine = solve_inclusion(*system(0.1), ANCHOR, RC, (0.3,), cfg8(0.6))
    assert coarse.status == DISCRETIZATION_GAP
    assert fine.status == SUCCESS and fine.residual == 0.0


def test_solver_tau_and_rate_validation():
    with pytest.raises(PreconditionError):
        solve_inclusion(*system(0.1), ANCHOR, RC, (0.3,), cfg8(0.6), tau=1.2)
    sick = RateConstants(L=1.0, M=2.0, C=1.0, D=1.0)
    with pytest.raises(PreconditionError):
        solve_inclusion(*system(0.1), ANCHOR, sick, (0.3,), cfg8(0.6))


def test_target_outside_every_rate_ball():
    with pytest.raises(PreconditionError):
        solve_inclusion(*system(0.1), ANCHOR, RC, (1.8,), cfg8(0.6))


def test_anchor_must_sit_on_the_graphs():
    bad = ((0.1,), (0.3,), (0.0,), (0.3,))  # F1(0.1) = {0.1}, not 0.3
    with pytest.raises(PreconditionError):
        solve_inclusion(*system(0.1), bad, RC, (0.3,), cfg8(0.6))


def test_constraint_set_is_the_boxed_graph():
    f1, f2, g = system(0.2)
    pts = constraint_set(f1, f2, g, ANCHOR, (0.2, 0.2, 0.05, 0.4))
    assert pts == tuple(((xx,), (xx,), (0.0,), (xx,))
                        for xx in (-0.2, 0.0, 0.2))


def test_result_payload_round_trips_through_json():
    import json
    res = solve_inclusion(*system(0.2), ANCHOR, RC, (0.3,), cfg8(0.6))
    payload = res.to_payload()
    assert payload["status"] == DISCRETIZATION_GAP
    assert payload["x"] is None
    assert set(payload) == {"status", "x", "residual", "rho", "tau", "point",
                            "trace"}
    json.dumps(payload)
