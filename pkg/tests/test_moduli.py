"""Bracket checks against exhaustive definitional oracles.

Every oracle below re-derives its quantity by direct enumeration over
the sampled grids, independent of the bisection machinery, and the
clean cases pin frozen closed-form values.
"""

import math

import numpy as np
import pytest

from mapcert import (
    NeighborhoodConfig,
    check_equivalence_around,
    check_equivalence_at,
    estimate_hemreg_at,
    estimate_lip_around,
    estimate_lop_around,
    estimate_partial,
    estimate_plop_at,
    estimate_psdclm_at,
    estimate_reg_around,
    from_linear,
    grid_1d,
    linear_operator_moduli,
    multimap,
    param_multimap,
    product_space,
    recheck_report,
)

TOL = 1e-12
RES = 1e-7


# ---------------------------------------------------------------- oracles


def open_pts(space, center, radius):
    return [p for p in space.points if space.distance(p, center) < radius - TOL]


def union_image(mapping, pts):
    out = set()
    for p in pts:
        out |= mapping.rows.get(p, frozenset())
    return out


def window_pairs(mapping, xbar, ybar, cfg):
    return [(x, y) for x, y in mapping.pairs
            if mapping.source.distance(x, xbar) < cfg.radius_u - TOL
            and mapping.target.distance(y, ybar) < cfg.radius_v - TOL]


def oracle_openness(mapping, pairs, rho_grid):
    """Largest rate c with B(y, c*rho) inside the image of B(x, rho):
    the first excluded target point over rho, minimised over the pairs."""
    tgt = mapping.target
    best = math.inf
    for x, y in pairs:
        for rho in rho_grid:
            img = union_image(mapping, open_pts(mapping.source, x, rho))
            exc = min((tgt.distance(q, y) for q in tgt.points if q not in img),
                      default=math.inf)
            best = min(best, exc / rho)
    return best


def oracle_lip(mapping, xbar, ybar, cfg):
    src, tgt = mapping.source, mapping.target
    window = open_pts(src, xbar, cfg.radius_u)
    worst = 0.0
    for x in window:
        visible = [y for y in mapping.rows.get(x, ())
                   if tgt.distance(y, ybar) < cfg.radius_v - TOL]
        if not visible:
            continue
        for u in window:
            if u == x:
                continue
            d = src.distance(x, u)
            row_u = mapping.rows.get(u, frozenset())
            for y in visible:
                away = min((tgt.distance(y, q) for q in row_u),
                           default=math.inf)
                worst = max(worst, away / d)
    return worst


def oracle_reg(mapping, xbar, ybar, cfg):
    src, tgt = mapping.source, mapping.target
    inverse = {}
    for x, y in mapping.pairs:
        inverse.setdefault(y, set()).add(x)
    worst = 0.0
    for x in open_pts(src, xbar, cfg.radius_u):
        row = mapping.rows.get(x, frozenset())
        for y in open_pts(tgt, ybar, cfg.radius_v):
            away = min((tgt.distance(y, q) for q in row), default=math.inf)
            if math.isinf(away) or away == 0.0:
                continue
            back = min((src.distance(x, p) for p in inverse.get(y, ())),
                       default=math.inf)
            worst = max(worst, back / away)
    return worst


def oracle_psdclm(mapping, xbar, ybar, cfg):
    src, tgt = mapping.source, mapping.target
    worst = 0.0
    for u in open_pts(src, xbar, cfg.radius_u):
        if u == xbar:
            continue
        away = min((tgt.distance(ybar, q) for q in mapping.rows.get(u, ())),
                   default=math.inf)
        worst = max(worst, away / src.distance(u, xbar))
    return worst


def oracle_hemreg(mapping, xbar, ybar, cfg):
    src, tgt = mapping.source, mapping.target
    inverse = {}
    for x, y in mapping.pairs:
        inverse.setdefault(y, set()).add(x)
    worst = 0.0
    for v in open_pts(tgt, ybar, cfg.radius_v):
        if v == ybar:
            continue
        back = min((src.distance(xbar, p) for p in inverse.get(v, ())),
                   default=math.inf)
        worst = max(worst, back / tgt.distance(v, ybar))
    return worst


def assert_brackets(report, oracle_value, expected=None):
    lo, hi = report.bracket
    if math.isinf(oracle_value):
        assert hi > 1e9
    else:
        assert lo - 1e-9 <= oracle_value <= hi + 1e-9
        assert hi - lo <= report.resolution * 1.01
    if expected is not None:
        assert oracle_value == pytest.approx(expected, abs=1e-12)


# ----------------------------------------------------------------- cases


X = grid_1d("X", -1.0, 1.0, 0.1)
Y = grid_1d("Y", -2.0, 2.0, 0.2)
CFG = NeighborhoodConfig(0.45, 0.95, 0.2, (0.1, 0.2), resolution=RES)


def double():
    return from_linear([[2.0]], X, Y, label="double")


def abs_into(target):
    return multimap(X, target,
                    [((x,), (round(abs(x), 12),)) for (x,) in X.points],
                    label="abs")


def absmap():
    return abs_into(grid_1d("A", 0.0, 1.0, 0.1))


def threepair():
    two = grid_1d("T", 0.0, 0.1, 0.1)
    return multimap(two, two, [((0.0,), (0.0,)), ((0.0,), (0.1,)),
                               ((0.1,), (0.1,))], label="fork")


def plane_diag():
    xs = product_space(grid_1d("X1", -0.5, 0.5, 0.1),
                       grid_1d("X2", -1.0, 1.0, 0.2), label="P")
    ys = product_space(grid_1d("Y1", -1.0, 1.0, 0.2),
                       grid_1d("Y2", -0.5, 0.5, 0.1), label="Q")
    return from_linear([[2.0, 0.0], [0.0, 0.5]], xs, ys, label="diag")


def test_double_openness_bracket_and_oracle():
    f = double()
    rep = estimate_lop_around(f, 0.0, 0.0, CFG)
    value = oracle_openness(f, window_pairs(f, (0.0,), (0.0,), CFG),
                            CFG.rho_grid)
    assert_brackets(rep, value, expected=2.0)


def test_double_lipschitz_bracket_and_oracle():
    f = double()
    rep = estimate_lip_around(f, 0.0, 0.0, CFG)
    assert_brackets(rep, oracle_lip(f, (0.0,), (0.0,), CFG), expected=2.0)


def test_double_regularity_bracket_and_oracle():
    f = double()
    rep = estimate_reg_around(f, 0.0, 0.0, CFG)
    assert_brackets(rep, oracle_reg(f, (0.0,), (0.0,), CFG), expected=0.5)


def test_double_punctual_brackets():
    f = double()
    plop = estimate_plop_at(f, 0.0, 0.0, CFG)
    assert_brackets(plop, oracle_openness(f, [((0.0,), (0.0,))], CFG.rho_grid),
                    expected=2.0)
    psd = estimate_psdclm_at(f, 0.0, 0.0, CFG)
    assert_brackets(psd, oracle_psdclm(f, (0.0,), (0.0,), CFG), expected=2.0)
    hem = estimate_hemreg_at(f, 0.0, 0.0, CFG)
    assert_brackets(hem, oracle_hemreg(f, (0.0,), (0.0,), CFG), expected=0.5)


def test_identity_rates_are_one():
    f = from_linear([[1.0]], X, X, label="id")
    cfg = NeighborhoodConfig(0.45, 0.45, 0.2, (0.1, 0.2), resolution=RES)
    for estimate, oracle in [
        (estimate_lop_around, lambda: oracle_openness(
            f, window_pairs(f, (0.0,), (0.0,), cfg), cfg.rho_grid)),
        (estimate_lip_around, lambda: oracle_lip(f, (0.0,), (0.0,), cfg)),
        (estimate_reg_around, lambda: oracle_reg(f, (0.0,), (0.0,), cfg)),
    ]:
        assert_brackets(estimate(f, 0.0, 0.0, cfg), oracle(), expected=1.0)


def test_abs_away_from_the_kink_is_unit_rate():
    f = absmap()
    cfg = NeighborhoodConfig(0.35, 0.35, 0.2, (0.1, 0.2), resolution=RES)
    rep = estimate_lop_around(f, 0.4, 0.4, cfg)
    value = oracle_openness(f, window_pairs(f, (0.4,), (0.4,), cfg),
                            cfg.rho_grid)
    assert_brackets(rep, value, expected=1.0)
    assert_brackets(estimate_reg_around(f, 0.4, 0.4, cfg),
                    oracle_reg(f, (0.4,), (0.4,), cfg), expected=1.0)


def test_abs_at_the_kink_loses_openness_with_wider_sweeps():
    # with a target grid that extends below zero the kink shows up at
    # the second sweep radius: the image covers no negative neighbours
    f = abs_into(grid_1d("W", -1.0, 1.0, 0.1))
    narrow = NeighborhoodConfig(0.35, 0.35, 0.2, (0.1,), resolution=RES)
    wide = NeighborhoodConfig(0.35, 0.35, 0.2, (0.1, 0.2), resolution=RES)
    pairs_n = window_pairs(f, (0.0,), (0.0,), narrow)
    v_narrow = oracle_openness(f, pairs_n, narrow.rho_grid)
    v_wide = oracle_openness(f, pairs_n, wide.rho_grid)
    assert v_wide <= v_narrow
    assert (v_narrow, v_wide) == (pytest.approx(1.0), pytest.approx(0.5))
    assert_brackets(estimate_lop_around(f, 0.0, 0.0, narrow), v_narrow)
    assert_brackets(estimate_lop_around(f, 0.0, 0.0, wide), v_wide)


def test_abs_at_the_kink_regularity_blows_up():
    # the target window sees negative values that have no preimage, so
    # no finite regularity rate exists there while openness stays positive
    lifted = abs_into(grid_1d("W", -1.0, 1.0, 0.1))
    cfg = NeighborhoodConfig(0.35, 0.35, 0.2, (0.1, 0.2), resolution=RES)
    assert oracle_reg(lifted, (0.0,), (0.0,), cfg) == math.inf
    rep = estimate_reg_around(lifted, 0.0, 0.0, cfg)
    assert rep.hi > 1e9
    assert not check_equivalence_around(lifted, 0.0, 0.0, cfg).agree


def test_threepair_rates_all_one():
    f = threepair()
    cfg = NeighborhoodConfig(0.15, 0.15, 0.1, (0.1,), resolution=RES)
    anchor = ((0.1,), (0.1,))
    value = oracle_openness(f, window_pairs(f, *anchor, cfg), cfg.rho_grid)
    assert_brackets(estimate_lop_around(f, *anchor, cfg), value, expected=1.0)
    assert_brackets(estimate_reg_around(f, *anchor, cfg),
                    oracle_reg(f, *anchor, cfg), expected=1.0)
    inv_cfg = cfg.mirrored()
    assert_brackets(estimate_lip_around(f.inverse(), *anchor, inv_cfg),
                    oracle_lip(f.inverse(), *anchor, inv_cfg), expected=1.0)


def test_plane_diag_rates():
    f = plane_diag()
    cfg = NeighborhoodConfig(0.45, 0.95, 0.2, (0.1, 0.2), resolution=RES)
    origin = ((0.0, 0.0), (0.0, 0.0))
    value = oracle_openness(f, window_pairs(f, *origin, cfg), cfg.rho_grid)
    assert_brackets(estimate_lop_around(f, *origin, cfg), value, expected=0.5)
    assert_brackets(estimate_lip_around(f, *origin, cfg),
                    oracle_lip(f, *origin, cfg), expected=2.0)
    assert_brackets(estimate_reg_around(f, *origin, cfg),
                    oracle_reg(f, *origin, cfg), expected=2.0)


def test_equivalence_routes_agree_on_clean_maps():
    cfg = NeighborhoodConfig(0.45, 0.95, 0.2, (0.1, 0.2), resolution=RES)
    for mapping, x, y in [
        (double(), 0.0, 0.0),
        (plane_diag(), (0.0, 0.0), (0.0, 0.0)),
    ]:
        around = check_equivalence_around(mapping, x, y, cfg)
        at = check_equivalence_at(mapping, x, y, cfg)
        assert around.agree and at.agree
        assert max(around.gaps) <= around.tolerance
        assert max(at.gaps) <= at.tolerance


def test_bracket_refute_certify_contract():
    f = double()
    lop = estimate_lop_around(f, 0.0, 0.0, CFG)
    assert lop.certifies(lop.lo) and lop.certifies(lop.lo - 0.1)
    assert lop.refutes(lop.hi + 1e-9) and not lop.refutes(lop.lo)
    lip = estimate_lip_around(f, 0.0, 0.0, CFG)
    assert lip.certifies(lip.hi) and lip.certifies(lip.hi + 0.1)
    assert lip.refutes(lip.lo - 1e-9) and not lip.refutes(lip.hi)


def test_recheck_confirms_every_report():
    f = double()
    reports = [
        estimate_lop_around(f, 0.0, 0.0, CFG),
        estimate_lip_around(f, 0.0, 0.0, CFG),
        estimate_reg_around(f, 0.0, 0.0, CFG),
        estimate_plop_at(f, 0.0, 0.0, CFG),
        estimate_psdclm_at(f, 0.0, 0.0, CFG),
        estimate_hemreg_at(f, 0.0, 0.0, CFG),
    ]
    for rep in reports:
        audit = recheck_report(f, rep)
        assert audit == {"feasible_end_ok": True, "infeasible_end_refuted": True}


def test_report_payload_is_json_clean():
    rep = estimate_lop_around(double(), 0.0, 0.0, CFG)
    payload = rep.to_payload()
    assert payload["kind"] == "lop_around"
    assert payload["bracket"] == [rep.lo, rep.hi]
    assert isinstance(payload["config"], dict)


def test_reference_pair_must_sit_on_the_graph():
    with pytest.raises(ValueError):
        estimate_lop_around(double(), 0.0, 0.2, CFG)


def test_partial_openness_uniform_in_the_parameter():
    xs = grid_1d("XI", -1.0, 1.0, 0.05)
    ps = grid_1d("PI", -2.0, 2.0, 0.1)
    ys = grid_1d("YI", -4.0, 4.0, 0.1)
    fam = param_multimap(xs, ps, ys,
                         [((x,), (p,), (round(2 * x - p, 12),))
                          for (x,) in xs.points for (p,) in ps.points])
    cfg = NeighborhoodConfig(0.45, 0.9, 0.1, (0.05, 0.1), radius_w=0.35,
                             resolution=RES)
    rep = estimate_partial(fam, "lop_x", 0.0, 0.0, 0.0, cfg)
    # every slice 2x - p has the same exact rate as the p = 0 slice
    slice0 = fam.slice_param((0.0,))
    value = oracle_openness(slice0, window_pairs(slice0, (0.0,), (0.0,), cfg),
                            cfg.rho_grid)
    assert_brackets(rep, value, expected=2.0)
    lip_p = estimate_partial(fam, "lip_p", 0.0, 0.0, 0.0, cfg)
    assert lip_p.lo - 1e-9 <= 1.0 <= lip_p.hi + 1e-9


def test_partial_requires_parameter_window():
    xs = grid_1d("XI", -0.2, 0.2, 0.1)
    fam = param_multimap(xs, xs, xs,
                         [((x,), (p,), (x,))
                          for (x,) in xs.points for (p,) in xs.points])
    cfg = NeighborhoodConfig(0.15, 0.15, 0.1, (0.1,), resolution=RES)
    with pytest.raises(ValueError):
        estimate_partial(fam, "lop_x", 0.0, 0.0, 0.0, cfg)
    cfg_w = NeighborhoodConfig(0.15, 0.15, 0.1, (0.1,), radius_w=0.15,
                               resolution=RES)
    with pytest.raises(ValueError):
        estimate_partial(fam, "bogus", 0.0, 0.0, 0.0, cfg_w)


def test_linear_moduli_match_svd():
    for matrix in ([[2.0]], [[2.0, 0.0], [0.0, 0.5]], [[1.0, 1.0], [0.0, 1.0]]):
        lm = linear_operator_moduli(matrix)
        sigma = np.linalg.svd(np.asarray(matrix), compute_uv=False)
        assert lm.surjective
        assert lm.sigma_min == pytest.approx(float(sigma[-1]))
        assert lm.lop == pytest.approx(float(sigma[-1]))
        assert lm.reg == pytest.approx(1.0 / float(sigma[-1]))
        assert lm.plop == lm.lop and lm.hemreg == lm.reg


def test_linear_moduli_non_surjective():
    lm = linear_operator_moduli([[1.0], [1.0]])
    assert not lm.surjective
    assert lm.lop == 0.0 and math.isinf(lm.reg)
    assert lm.sigma_min is None


def test_config_validation():
    with pytest.raises(ValueError):
        NeighborhoodConfig(0.0, 0.1, 0.1, (0.1,))
    with pytest.raises(ValueError):
        NeighborhoodConfig(0.1, 0.1, 0.1, ())
    with pytest.raises(ValueError):
        NeighborhoodConfig(0.1, 0.1, 0.1, (0.1, 0.1))
    with pytest.raises(ValueError):
        NeighborhoodConfig(0.1, 0.1, 0.1, (0.2,))
    mirrored = CFG.mirrored()
    assert (mirrored.radius_u, mirrored.radius_v) == (CFG.radius_v, CFG.radius_u)
