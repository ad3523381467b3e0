import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from shearlab import kernel as K
from shearlab import oracles as O
from shearlab import shear as S
from shearlab.errors import (
    BadSeedLeaves,
    CrossingLost,
    DuplicateCrossing,
    LeafMissesAxis,
    LeavesCross,
    NotHyperbolic,
)

from conftest import configs

E = math.e
GAMMA = K.Isometry.diag(E)  # translation length 2 along (0, inf)
PERP = K.Geodesic.of(-1, 1)


def single(weight=1.0, leaf=PERP, gamma=GAMMA):
    return S.build_config(gamma, [(leaf, weight)])


# --- building configurations ----------------------------------------------------------


def test_single_perpendicular_leaf():
    c = single()
    assert c.n == 1
    assert c.positions[0] == 0.0
    assert c.crossings[0].theta == pytest.approx(math.pi / 2)
    assert c.basepoint == pytest.approx((0.0, 1.0))


def test_scaled_copy_sits_one_unit_further():
    c = S.build_config(GAMMA, [(PERP, 1.0), (K.Geodesic.of(-E, E), 0.5)])
    assert c.positions == pytest.approx([0.0, 1.0], abs=1e-14)


def test_crossing_leaves_are_rejected():
    with pytest.raises(LeavesCross):
        S.build_config(GAMMA, [(PERP, 1.0), (K.Geodesic.of(-3, 0.5), 0.5)])


def test_nested_leaves_are_accepted():
    # (-0.5, 0.6) sits inside (-1, 1): the two leaves are disjoint
    c = S.build_config(GAMMA, [(PERP, 1.0), (K.Geodesic.of(-0.5, 0.6), 0.5)])
    assert c.n == 2


def test_translate_crossing_is_rejected():
    # the two leaves are disjoint, but gamma^-1 of the second crosses the first
    with pytest.raises(LeavesCross):
        S.build_config(GAMMA, [(K.Geodesic.of(-1.5, 1.2), 1.0), (K.Geodesic.of(-1.5 * E * E * 1.2, 1.0), 1.0)])


def test_build_errors():
    with pytest.raises(LeafMissesAxis):
        single(leaf=K.Geodesic.of(1, 2))
    with pytest.raises(DuplicateCrossing):
        S.build_config(GAMMA, [(PERP, 1.0), (K.Geodesic.of(-E * E, E * E), 1.0)])
    with pytest.raises(NotHyperbolic):
        single(gamma=K.Isometry.identity())


@given(configs())
def test_positions_are_reduced_and_increasing(c):
    s = c.positions
    assert np.all(s >= 0) and np.all(s < c.length)
    assert np.all(np.diff(s) > 0)


@given(configs())
def test_basepoint_shift_keeps_derivatives(c):
    from shearlab import derivatives as Dv

    ax = K.axis(c.gamma)
    moved = K.point_on_geodesic(ax, 0.37 * c.length, c.basepoint)
    shifted = S.build_config(c.gamma, c.leaves, moved)
    for f in (Dv.d1_length, Dv.d2_length, Dv.d3_length):
        assert f(shifted) == pytest.approx(f(c), rel=1e-12, abs=1e-12)


# --- the sheared isometry -----------------------------------------------------------------


@given(configs())
def test_zero_shear_is_gamma(c):
    assert S.sheared_isometry(c, 0.0).isclose(c.gamma, 1e-10 * max(1.0, np.abs(c.gamma.m).max()))
    assert S.deformed_length(c, 0.0) == pytest.approx(c.length, rel=1e-12)


def test_single_leaf_product():
    t = 0.3
    c = single()
    # leaves are stored pointing left of the axis: (1 -> -1)
    assert c.leaves[0].geodesic.same_as(PERP.reverse())
    expected = K.translate_along(PERP.reverse(), t) @ GAMMA
    assert S.sheared_isometry(c, t).isclose(expected, 1e-12)


def test_two_leaf_telescoping_identity():
    g1, g2 = PERP, K.Geodesic.of(-1.7, 2.1)
    c1, c2 = 0.4, -0.9
    literal = K.translate_along(g1, c1) @ K.translate_along(g2, -c1) @ K.translate_along(g2, c1 + c2)
    collapsed = K.translate_along(g1, c1) @ K.translate_along(g2, c2)
    assert literal.distance(collapsed) <= 1e-12


@given(configs(), st.floats(-1, 1))
def test_telescoped_and_recursive_products_agree(c, t):
    prod = S.shear_product(c, t)
    scale = max(1.0, np.abs(prod.m).max()) ** 2
    assert S.telescoped_isometry(c, t).distance(S.sheared_isometry(c, t)) <= 1e-10 * scale * np.abs(c.gamma.m).max()
    assert S.recursive_transport(c, t).distance(prod) <= 1e-12 * scale


@given(st.floats(-1, 1), st.floats(-1, 1))
def test_single_leaf_group_property(t, s):
    c = single(0.8, K.Geodesic.of(-1.3, 0.9))
    g_inv = c.gamma.inverse()
    lhs = S.sheared_isometry(c, t) @ g_inv @ S.sheared_isometry(c, s) @ g_inv
    assert lhs.distance(S.sheared_isometry(c, t + s) @ g_inv) <= 1e-12


def test_perpendicular_leaf_is_symmetric_in_t():
    c = single(0.9)
    for t in (0.1, 0.5, 1.0):
        assert S.deformed_length(c, t) == pytest.approx(S.deformed_length(c, -t), abs=1e-10)
        cos_p = S.deformed_crossings(c, t)[0].cos
        cos_m = S.deformed_crossings(c, -t)[0].cos
        assert cos_p == pytest.approx(-cos_m, abs=1e-8)


@given(configs(weight_range=(0.0, 1.0)))
def test_positive_weights_give_convex_length(c):
    ts = np.linspace(-1, 1, 21)
    ell = [S.deformed_length(c, t) for t in ts]
    assert min(np.diff(ell, 2)) >= -1e-9


# --- moved leaves and crossings ----------------------------------------------------------------


@given(configs())
def test_leaves_and_crossings_at_zero(c):
    assert all(a.same_as(b.geodesic, 1e-9) for a, b in zip(S.deformed_leaves(c, 0.0), c.leaves))
    for d, c0 in zip(S.deformed_crossings(c, 0.0), c.crossings):
        assert d.s == pytest.approx(c0.s, abs=1e-9)
        assert d.theta == pytest.approx(c0.theta, abs=1e-9)


@given(configs(), st.floats(-0.1, 0.1))
def test_first_leaf_never_moves_and_all_still_cross(c, t):
    moved = S.deformed_leaves(c, t)
    assert moved[0].same_as(c.leaves[0].geodesic, 1e-9)
    ax = K.axis(S.sheared_isometry(c, t))
    assert all(K.links(ax, g) for g in moved)
    S.check_crossings_persist(c, [t])


def test_crossing_loss_is_reported():
    c = S.build_config(GAMMA, [(PERP, 0.7), (K.Geodesic.of(-2, 1.5), -0.4), (K.Geodesic.of(2.5, -2.4), 0.3)])
    S.check_crossings_persist(c, [-0.1, 0.1, 10.0])
    # floating point gives out long before the geometry would
    with pytest.raises(CrossingLost):
        S.check_crossings_persist(c, [100.0])


@given(configs())
def test_fd_slope_of_cosine_matches_formula(c):
    from shearlab import derivatives as Dv

    i = c.n // 2
    fd = O.fd_derivative(lambda t: S.deformed_crossings(c, t)[i].cos, 1).value
    assert Dv.d_cos_theta(c, i) == pytest.approx(fd, rel=1e-6, abs=1e-9)


# --- arc distances ----------------------------------------------------------------------


def test_arc_distance_examples():
    c = S.build_config(GAMMA, [(PERP, 1.0), (K.Geodesic.of(-E, E), 0.5)])
    assert S.arc_distance(c, 0, 0) == 0.0
    assert S.arc_distance(c, 0, 1) == pytest.approx(1.0)
    assert S.arc_distance(c, 0, 1, oriented=True) == pytest.approx(1.0)
    assert S.arc_distance(c, 1, 0, oriented=True) == pytest.approx(1.0)


@given(configs())
def test_arc_kernel_is_independent_of_segment(c):
    for i in range(c.n):
        for j in range(c.n):
            fwd = S.arc_distance(c, i, j, oriented=True)
            back = S.arc_distance(c, j, i, oriented=True)
            if i != j:
                assert fwd + back == pytest.approx(c.length, abs=1e-12)
                assert math.cosh(c.length / 2 - fwd) == pytest.approx(math.cosh(c.length / 2 - back), rel=1e-12)
            assert S.arc_distance(c, i, j) == pytest.approx(S.arc_distance(c, j, i), abs=1e-15)


# --- spiralling leaves -------------------------------------------------------------------------


def seeds(x0=-1.0, x1=-0.7):
    return K.Geodesic.of(x0, "inf"), K.Geodesic.of(x1, "inf")


def test_zero_weights_give_gamma_back():
    fam = S.spiral_config(0.9, *seeds(), [0.0], 6)
    for n in range(1, 5):
        assert fam.one_sided(n).isclose(K.Isometry.identity())
        assert fam.interleaved(n).isclose(K.Isometry.identity())
    assert fam.closed_leaf_image().isclose(fam.gamma)


@pytest.mark.parametrize("length,a1,a2", [(1.0, 0.3, -0.2), (0.5, 1.0, 1.0), (2.5, -0.6, 0.4)])
def test_closed_leaf_length(length, a1, a2):
    fam = S.spiral_config(length, *seeds(-1.0, -0.8), [a1, a2], 2)
    assert K.translation_length(fam.closed_leaf_image()) == pytest.approx(length + a1 + a2, abs=1e-12)


def test_naive_dilation_oscillates_while_interleaved_is_constant():
    fam = S.spiral_config(math.log(2.0), *seeds(), [1.0, -1.0], 12, h_weights=[1.0, -1.0], total=0.5)
    naive = [S.dilation(fam.two_sided(n)) for n in range(1, 11)]
    ordered = [S.dilation(fam.interleaved(n)) for n in range(1, 11)]
    assert naive[0::2] == pytest.approx([E**2] * 5)
    assert naive[1::2] == pytest.approx([1.0] * 5)
    assert ordered == pytest.approx([math.exp(0.5)] * 10, rel=1e-13)


def test_bad_seed_leaves():
    with pytest.raises(BadSeedLeaves):
        S.spiral_config(1.0, *seeds(1.0, -0.5), [1.0], 2)
    with pytest.raises(BadSeedLeaves):
        S.spiral_config(1.0, *seeds(-1.0, -0.1), [1.0], 2)
