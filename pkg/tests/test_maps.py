import pytest

from mapcert import (
    OffGridError,
    ball,
    bimultimap,
    compose_g,
    constant_map,
    difference,
    from_linear,
    grid_1d,
    identity_map,
    image_of_set,
    localize,
    multimap,
    param_multimap,
    subtraction_bimap,
)


def line(label, lo, hi, step):
    return grid_1d(label, lo, hi, step)


X = line("X", -1.0, 1.0, 0.1)
Y = line("Y", -2.0, 2.0, 0.2)


def double():
    return from_linear([[2.0]], X, Y, label="double")


def test_multimap_rows_and_ran():
    x = line("S", 0.0, 0.2, 0.1)
    f = multimap(x, x, [((0.0,), (0.0,)), ((0.0,), (0.1,)), ((0.1,), (0.1,))])
    assert f.dom == ((0.0,), (0.1,))
    assert f.ran == frozenset({(0.0,), (0.1,)})
    assert f.image((0.0,)).members == frozenset({(0.0,), (0.1,)})
    assert f.image((0.2,)).is_empty


def test_multimap_rejects_off_grid_pairs():
    with pytest.raises(OffGridError):
        multimap(X, Y, [((0.05,), (0.0,))])
    with pytest.raises(OffGridError):
        multimap(X, Y, [((0.0,), (0.1,))])


def test_inverse_is_an_involution():
    f = double()
    inv = f.inverse()
    assert inv.source is f.target and inv.target is f.source
    assert inv.inverse().graph == f.graph
    assert inv.image((0.4,)).members == frozenset({(0.2,)})


def test_identity_and_constant_builders():
    ident = identity_map(X)
    assert ident.image((0.3,)).members == frozenset({(0.3,)})
    const = constant_map(X, Y, [(0.4,)])
    assert const.ran == frozenset({(0.4,)})
    assert len(const.pairs) == len(X.points)
    with pytest.raises(OffGridError):
        constant_map(X, Y, [(0.5,)])


def test_from_linear_requires_commensurate_target():
    f = double()
    assert len(f.pairs) == len(X.points)
    assert f.image((0.3,)).members == frozenset({(0.6,)})
    bad = line("B", -1.0, 1.0, 0.3)
    with pytest.raises(OffGridError):
        from_linear([[2.0]], X, bad)


def test_from_linear_validates_shape():
    with pytest.raises(ValueError):
        from_linear([2.0], X, Y)
    with pytest.raises(ValueError):
        from_linear([[2.0, 1.0]], X, Y)


def test_image_of_set_unions_rows():
    f = double()
    window = ball(X, 0.0, 0.15, "open")
    assert image_of_set(f, window).members == frozenset({(-0.2,), (0.0,), (0.2,)})


def test_localize_clips_graph():
    f = double()
    loc = localize(f, ball(X, 0.0, 0.15, "open"), ball(Y, 0.0, 0.25, "open"))
    assert loc.graph == frozenset({((-0.1,), (-0.2,)), ((0.0,), (0.0,)),
                                   ((0.1,), (0.2,))})


def test_param_multimap_slices_and_swap():
    p = line("P", -0.2, 0.2, 0.1)
    fam = param_multimap(X, p, Y, [((x,), (q,), (round(2 * x - 2 * q, 12),))
                                   for (x,) in X.points for (q,) in p.points
                                   if abs(2 * x - 2 * q) <= 2.0])
    assert fam.image_at((0.3,), (0.1,)).members == frozenset({(0.4,)})
    sliced = fam.slice_param((0.1,))
    assert sliced.image((0.3,)).members == frozenset({(0.4,)})
    pinned = fam.slice_source((0.3,))
    assert pinned.image((0.1,)).members == frozenset({(0.4,)})
    swapped = fam.swap_roles()
    assert swapped.image_at((0.1,), (0.3,)).members == frozenset({(0.4,)})
    assert swapped.swap_roles().triples == fam.triples


def test_bimultimap_slices_and_param_views():
    z = line("Z", -1.0, 1.0, 0.1)
    w = line("W", -3.0, 3.0, 0.1)
    g = bimultimap(Y, z, w, [((y,), (c,), (round(y + c, 12),))
                             for (y,) in Y.points for (c,) in z.points])
    assert g.image_at((0.4,), (0.1,)).members == frozenset({(0.5,)})
    assert g.slice_right((0.1,)).image((0.4,)).members == frozenset({(0.5,)})
    assert g.slice_left((0.4,)).image((0.1,)).members == frozenset({(0.5,)})
    # the "moving" argument comes first in either parametric view
    in_left = g.as_param_in_left()
    assert in_left.image_at((0.4,), (0.1,)).members == frozenset({(0.5,)})
    in_right = g.as_param_in_right()
    assert in_right.image_at((0.1,), (0.4,)).members == frozenset({(0.5,)})


def test_compose_g_builds_the_composition():
    z = line("Z", -1.0, 1.0, 0.1)
    w = line("W", -3.0, 3.0, 0.1)
    f2 = from_linear([[1.0]], X, z, label="embed")
    g = bimultimap(Y, z, w, [((y,), (c,), (round(y + c, 12),))
                             for (y,) in Y.points for (c,) in z.points])
    h = compose_g(double(), f2, g)
    # 2x + x lands on the declared w grid for every source point
    assert h.image((0.3,)).members == frozenset({(0.9,)})
    assert len(h.dom) == len(X.points)


def test_compose_g_rejects_grid_mismatch():
    z = line("Z", -1.0, 1.0, 0.1)
    w = line("W", -3.0, 3.0, 0.1)
    g = bimultimap(Y, z, w, [((0.0,), (0.0,), (0.0,))])
    other = line("O", -1.0, 1.0, 0.2)
    f2 = from_linear([[1.0]], other, other, label="bad-source")
    with pytest.raises(ValueError):
        compose_g(double(), f2, g)


def test_subtraction_bimap_synthesizes_value_grid():
    a = line("A", 0.0, 0.2, 0.1)
    b = line("B", 0.0, 0.1, 0.1)
    sub = subtraction_bimap(a, b)
    values = {w for _, _, w in sub.triples}
    assert values == {(-0.1,), (0.0,), (0.1,), (0.2,)}
    assert sub.image_at((0.2,), (0.1,)).members == frozenset({(0.1,)})


def test_subtraction_bimap_respects_declared_target():
    a = line("A", 0.0, 0.2, 0.1)
    coarse = line("C", -0.05, 0.25, 0.3)
    with pytest.raises(OffGridError):
        subtraction_bimap(a, a, target=coarse)


def test_difference_map_values():
    z = line("Z", -1.0, 1.0, 0.1)
    f2 = from_linear([[1.0]], X, z, label="embed")
    diff = difference(double(), f2)
    # 2x - x = x pointwise; the synthesized value grid may carry float
    # noise below the snap tolerance, so compare through locate
    for (x,) in X.points:
        row = diff.image((x,)).ordered
        assert len(row) == 1
        assert diff.target.locate((x,)) == row[0]


def test_difference_multivalued_rows():
    x = line("S", 0.0, 0.2, 0.1)
    f1 = multimap(x, x, [((0.0,), (0.0,)), ((0.0,), (0.2,)), ((0.1,), (0.1,))])
    f2 = identity_map(x)
    diff = difference(f1, f2)
    assert diff.image((0.0,)).members == frozenset({(0.0,), (0.2,)})
    assert diff.image((0.1,)).members == frozenset({(0.0,)})
