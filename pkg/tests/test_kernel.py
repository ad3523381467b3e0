import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from shearlab import kernel as K
from shearlab import oracles as O
from shearlab.errors import DegeneratePoints, Intersecting, NotHyperbolic, PointOffGeodesic, SharedEndpoint

from conftest import distinct_points, isometries, rel

E = math.e
DIAG_E = K.Isometry.diag(E)


# --- boundary points and geodesics ------------------------------------------------


def test_boundary_point_canonical_pair():
    p = K.BoundaryPoint(-3.0, -4.0)
    assert (p.a, p.b) == pytest.approx((0.6, 0.8))
    assert K.BoundaryPoint.of("inf") == K.BoundaryPoint(5.0, 0.0)
    assert K.BoundaryPoint.of(-math.inf).value == math.inf


def test_boundary_point_rejects_zero_pair():
    with pytest.raises(ValueError):
        K.BoundaryPoint(0.0, 0.0)


def test_geodesic_needs_distinct_endpoints():
    with pytest.raises(DegeneratePoints):
        K.Geodesic.of(1.0, (2.0, 2.0))


@given(distinct_points(2))
def test_reverse_is_an_involution(xs):
    g = K.Geodesic.of(*xs)
    assert g.reverse().reverse() == g


# --- isometries ----------------------------------------------------------------------


def test_compose_identity_inverse_and_diagonal():
    g = K.translate_along(K.Geodesic.of(-1, 2), 0.7)
    assert K.compose(K.Isometry.identity(), g).isclose(g)
    assert K.compose(g, K.inverse(g)).isclose(K.Isometry.identity())
    assert K.compose(DIAG_E, DIAG_E).isclose(K.Isometry.diag(E * E))


def test_sign_is_canonical():
    f = K.Isometry([[-2.0, 0.0], [0.0, -0.5]])
    assert f.m[0, 0] > 0
    assert K.Isometry([[0.0, -1.0], [1.0, 0.0]]).m[0, 1] > 0


@given(isometries(spread=3.0), isometries(spread=3.0))
def test_composition_keeps_unit_determinant(f, g):
    h = f @ g @ f.inverse() @ g
    assert abs(np.linalg.det(h.m) - 1.0) <= 1e-12 * max(1.0, np.abs(h.m).max() ** 2)


def test_classify():
    rot = K.Isometry([[math.cos(math.pi / 6), math.sin(math.pi / 6)], [-math.sin(math.pi / 6), math.cos(math.pi / 6)]])
    assert K.classify(DIAG_E) == "hyperbolic"
    assert K.classify(rot) == "elliptic"
    assert K.classify(K.Isometry([[1.0, 1.0], [0.0, 1.0]])) == "parabolic"
    assert K.classify(K.Isometry.identity()) == "identity"


def test_translation_length_examples():
    assert K.translation_length(DIAG_E) == pytest.approx(2.0, abs=1e-15)
    with pytest.raises(NotHyperbolic):
        K.translation_length(K.Isometry.identity())


@given(isometries(spread=2.0), st.floats(0.1, 8.0))
def test_translation_length_conjugation_invariant(w, length):
    f = w @ K.Isometry.diag(math.exp(length / 2)) @ w.inverse()
    assert rel(K.translation_length(f), length) <= 1e-10


def test_axis_examples():
    assert K.axis(DIAG_E).same_as(K.Geodesic.of(0, "inf"))
    assert K.axis(DIAG_E.inverse()).same_as(K.Geodesic.of("inf", 0))


@given(isometries(spread=2.0), st.floats(0.2, 6.0))
def test_axis_endpoints_are_fixed_and_conjugate(w, length):
    base = K.Isometry.diag(math.exp(length / 2))
    f = w @ base @ w.inverse()
    ax = K.axis(f)
    for p in (ax.source, ax.target):
        assert abs(K._det(f(p), p)) <= 1e-10
    assert ax.same_as(w(K.axis(base)), 1e-9)


def test_translate_along_examples():
    g = K.Geodesic.of(0, "inf")
    assert K.translate_along(g, 2.0).isclose(DIAG_E)
    assert K.translate_along(g, 0.0).isclose(K.Isometry.identity())
    # W maps (0, inf) to (-1, 1)
    w = K.Isometry(np.array([[1.0, -1.0], [1.0, 1.0]]) / math.sqrt(2.0))
    assert w(g).same_as(K.Geodesic.of(-1, 1))
    expected = w @ K.Isometry.diag(math.exp(0.5)) @ w.inverse()
    assert K.translate_along(K.Geodesic.of(-1, 1), 1.0).isclose(expected, 1e-12)


@given(distinct_points(2), st.floats(-3, 3), st.floats(-3, 3))
def test_translations_along_one_geodesic_form_a_group(xs, u, v):
    g = K.Geodesic.of(*xs)
    lhs = K.translate_along(g, u) @ K.translate_along(g, v)
    assert lhs.distance(K.translate_along(g, u + v)) <= 1e-12 * max(1.0, np.abs(lhs.m).max()) ** 2


@given(distinct_points(2), st.floats(0.05, 4))
def test_translation_axis_and_length(xs, u):
    g = K.Geodesic.of(*xs)
    t = K.translate_along(g, u)
    assert K.axis(t).same_as(g, 1e-9)
    assert K.axis(K.translate_along(g, -u)).same_as(g.reverse(), 1e-9)
    assert K.translation_length(t) == pytest.approx(u, rel=1e-9)


# --- cross-ratio ---------------------------------------------------------------------------


def test_cross_ratio_convention_is_pinned():
    assert K.CROSS_RATIO_CONVENTION == "(p-r)(q-s)/((p-s)(q-r))"
    # [0, 1, inf, x] = (x - 1)/x in this convention
    for x in (-2.0, 0.5, 3.0):
        assert K.cross_ratio(0, 1, "inf", x) == pytest.approx((x - 1) / x, rel=1e-14)


def test_cross_ratio_identities_on_fixed_pairs():
    # geodesics (ps) and (qr): perpendicular crossing at i
    assert K.cross_ratio(0, -1, 1, "inf") == pytest.approx(0.5, abs=1e-15)
    d = 1.3
    far = K.translate_along(K.Geodesic.of(0, "inf"), d)(K.Geodesic.of(-1, 1))
    x = K.cross_ratio(-1, far.target, far.source, 1)
    assert x == pytest.approx(-math.sinh(d / 2) ** 2, rel=1e-12)
    # the opposite pairing of the far endpoints gives 1 + sinh^2
    x = K.cross_ratio(-1, far.source, far.target, 1)
    assert x == pytest.approx(1 + math.sinh(d / 2) ** 2, rel=1e-12)


def test_cross_ratio_degenerate():
    with pytest.raises(DegeneratePoints):
        K.cross_ratio(0, 0, 1, 2)


@given(distinct_points(4, gap=0.2), isometries(spread=1.0))
def test_cross_ratio_invariance(xs, f):
    pts = [K.BoundaryPoint.of(x) for x in xs]
    moved = [f(p) for p in pts]
    if min(abs(K._det(p, q)) for i, p in enumerate(moved) for q in moved[i + 1 :]) < 0.05:
        return
    assert K.cross_ratio(*moved) == pytest.approx(K.cross_ratio(*pts), rel=1e-11, abs=1e-12)


# --- intersections and distances ----------------------------------------------------------------


def test_intersect_examples():
    ax = K.Geodesic.of(0, "inf")
    cr = K.intersect(ax, K.Geodesic.of(-1, 1))
    assert cr.point == pytest.approx((0.0, 1.0))
    assert cr.theta == pytest.approx(math.pi / 2)
    assert K.intersect(ax, K.Geodesic.of(1, -1)).theta == pytest.approx(math.pi / 2)
    cr = K.intersect(ax, K.Geodesic.of(-1, 2))
    assert cr.point == pytest.approx((0.0, math.sqrt(2.0)))
    assert cr.theta == pytest.approx(O.tangent_angle_between(ax, K.Geodesic.of(-1, 2), cr.point), abs=1e-10)
    # frozen from the tangent-vector oracle: the leaf leans toward the source of the axis
    assert cr.theta == pytest.approx(1.9106332362490186, abs=1e-12)


def test_intersect_disjoint_and_asymptotic():
    assert K.intersect(K.Geodesic.of(-2, -1), K.Geodesic.of(1, 2)) is None
    with pytest.raises(SharedEndpoint):
        K.intersect(K.Geodesic.of(0, 1), K.Geodesic.of(0, 2))


@given(distinct_points(4, gap=0.1))
def test_intersect_and_distance_are_exclusive_and_exhaustive(xs):
    g, h = K.Geodesic.of(xs[0], xs[1]), K.Geodesic.of(xs[2], xs[3])
    crossing = K.intersect(g, h)
    if crossing is None:
        assert K.geodesic_distance(g, h) > 0
    else:
        with pytest.raises(Intersecting):
            K.geodesic_distance(g, h)
        x = K.cross_ratio(g.source, K.left_oriented(g, h).source, K.left_oriented(g, h).target, g.target)
        assert x == pytest.approx(math.cos(crossing.theta / 2) ** 2, abs=1e-10)


def test_geodesic_distance_examples():
    g, h = K.Geodesic.of(-2, -1), K.Geodesic.of(1, 2)
    assert K.geodesic_distance(g, h) == pytest.approx(O.minimized_distance(g, h), abs=1e-8)
    base = K.Geodesic.of(-1, 1)
    moved = K.translate_along(K.Geodesic.of(0, "inf"), 0.8)(base)
    assert K.geodesic_distance(base, moved) == pytest.approx(0.8, abs=1e-12)
    with pytest.raises(SharedEndpoint):
        K.geodesic_distance(K.Geodesic.of(0, 1), K.Geodesic.of(0, 2))


def test_point_distance_examples():
    assert K.point_distance((0, 1), (0, 1)) == 0.0
    assert K.point_distance((0, 1), (0, E)) == pytest.approx(1.0, abs=1e-15)


@given(isometries(spread=2.0), st.tuples(st.floats(-3, 3), st.floats(0.1, 3)), st.tuples(st.floats(-3, 3), st.floats(0.1, 3)))
def test_point_distance_is_symmetric_and_invariant(f, p, q):
    d = K.point_distance(p, q)
    assert d == pytest.approx(K.point_distance(q, p), abs=1e-14)
    fp, fq = f(K.InteriorPoint.of(p)), f(K.InteriorPoint.of(q))
    assert K.point_distance(fp, fq) == pytest.approx(d, rel=1e-10, abs=1e-10)


def test_common_perpendicular_symmetric_example():
    g, h = K.Geodesic.of(-2, -1), K.Geodesic.of(1, 2)
    a, ap = K.common_perpendicular(g, h)
    assert a.x == pytest.approx(-ap.x, abs=1e-12)
    assert a.y == pytest.approx(ap.y, abs=1e-12)
    assert K.point_distance(a, ap) == pytest.approx(K.geodesic_distance(g, h), abs=1e-10)


@given(distinct_points(4, gap=0.1))
def test_common_perpendicular_meets_both_at_right_angles(xs):
    g, h = K.Geodesic.of(xs[0], xs[1]), K.Geodesic.of(xs[2], xs[3])
    if K.links(g, h):
        return
    a, ap = K.common_perpendicular(g, h)
    assert K.distance_to_geodesic(a, g) <= 1e-9
    assert K.distance_to_geodesic(ap, h) <= 1e-9
    perp = K.Geodesic.of(*_through(a, ap))
    for other in (g, h):
        assert abs(K.intersect(perp, other).cos) <= 1e-9
    assert K.point_distance(a, ap) == pytest.approx(K.geodesic_distance(g, h), rel=1e-9, abs=1e-10)


def _through(p, q):
    """Endpoints of the geodesic through two interior points."""
    if abs(p.x - q.x) <= 1e-14 * max(1, abs(p.x)):
        return p.x, "inf"
    c = (abs(q.z) ** 2 - abs(p.z) ** 2) / (2 * (q.x - p.x))
    r = abs(p.z - c)
    return c - r, c + r


def test_signed_position_examples():
    g = K.Geodesic.of(0, "inf")
    assert K.signed_position(g, (0, E), (0, 1)) == pytest.approx(1.0)
    assert K.signed_position(g, (0, 2), (0, 2)) == 0.0
    assert K.signed_position(g.reverse(), (0, E), (0, 1)) == pytest.approx(-1.0)
    with pytest.raises(PointOffGeodesic):
        K.signed_position(g, (1, 1), (0, 1))


@given(distinct_points(2), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_signed_position_is_additive(xs, s1, s2, s3):
    g = K.Geodesic.of(*xs)
    p1, p2, p3 = (K.point_on_geodesic(g, s) for s in (s1, s2, s3))
    total = K.signed_position(g, p3, p1)
    parts = K.signed_position(g, p2, p1) + K.signed_position(g, p3, p2)
    assert total == pytest.approx(parts, abs=1e-12)
    assert total == pytest.approx(s3 - s1, abs=1e-9)
