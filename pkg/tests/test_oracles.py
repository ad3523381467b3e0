import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from shearlab import derivatives as Dv
from shearlab import kernel as K
from shearlab import oracles as O
from shearlab import shear as S
from shearlab.errors import NonFiniteSample, TraceTooClose
from shearlab.verify import spiral_instance

from conftest import configs, distinct_points, rel


# --- finite differences ------------------------------------------------------------------


def test_fd_spec_validation_and_defaults():
    assert O.FDSpec.default(1) == O.FDSpec(1, 1e-2, 4)
    assert O.FDSpec.default(2) == O.FDSpec(2, 1e-2, 4)
    assert O.FDSpec.default(3) == O.FDSpec(3, 5e-2, 3)
    for args in ((4, 1e-2, 4), (1, 1.0, 4), (1, 1e-5, 4), (1, 1e-2, 1)):
        with pytest.raises(ValueError):
            O.FDSpec(*args)
    assert O.FDSpec.default(3).reach == pytest.approx(0.1)
    pts = O.FDSpec(1, 1e-2, 2).sample_points()
    assert pts == pytest.approx([-1e-2, -5e-3, 0.0, 5e-3, 1e-2])


@pytest.mark.parametrize("order,tol", [(1, 1e-9), (2, 1e-7), (3, 1e-5)])
def test_fd_of_exp(order, tol):
    r = O.fd_derivative(math.exp, order)
    assert r.value == pytest.approx(1.0, abs=tol)
    assert r.error >= 0


def test_fd_of_quadratic():
    assert O.fd_derivative(lambda t: t * t, 3).value == pytest.approx(0.0, abs=1e-8)
    assert O.fd_derivative(lambda t: t * t, 2).value == pytest.approx(2.0, abs=1e-10)


def test_fd_rejects_nonfinite_samples():
    with pytest.raises(NonFiniteSample):
        O.fd_derivative(lambda t: math.inf if t > 0 else 0.0, 1)
    with pytest.raises(ValueError):
        O.fd_derivative(math.exp, 2, O.FDSpec.default(1))


def test_adaptive_levels_shrink_the_error_estimate():
    f = lambda t: math.exp(8 * t)
    plain = O.fd_derivative(f, 2)
    adaptive = O.fd_derivative(f, 2, rtol=1e-12)
    assert adaptive.error <= plain.error
    assert adaptive.value == pytest.approx(64.0, rel=1e-9)


@given(configs())
def test_fd_scales_with_the_weights(c):
    big = c.with_weights(3.0 * c.weights)
    assert O.length_derivative_fd(big, 1).value == pytest.approx(3.0 * O.length_derivative_fd(c, 1).value, rel=1e-9, abs=1e-12)


def test_fd_of_zero_direction():
    c = S.build_config(K.Isometry.diag(math.e), [(K.Geodesic.of(-1, 1), 0.0)])
    assert O.length_derivative_fd(c, 2) == O.FDResult(0.0, 0.0)


# --- dual numbers ----------------------------------------------------------------------------


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.1, 3))
def test_dual_arithmetic(x, y, z):
    X, Y, Z = O.Dual(x, 1.0), O.Dual(y), O.Dual(z, 2.0)
    assert (X * X + Y).b == pytest.approx(2 * x)
    assert (X / Z).b == pytest.approx(1 / z - 2 * x / z**2)
    assert (1.0 - X).b == -1.0
    assert X.exp().b == pytest.approx(math.exp(x))
    w = O.Dual(1.0 + z, 1.0).acosh()
    assert w.a == pytest.approx(math.acosh(1 + z))
    assert w.b == pytest.approx(1 / math.sqrt((1 + z) ** 2 - 1))


def test_dual_derivative_of_perpendicular_leaf():
    c = S.build_config(K.Isometry.diag(math.e), [(K.Geodesic.of(-1, 1), 0.9)])
    assert abs(O.dual_derivative(c)) <= 1e-13


def test_dual_refuses_near_parabolic_gamma():
    c = S.build_config(K.Isometry.diag(math.exp(5e-5)), [(K.Geodesic.of(-1, 1), 1.0)])
    with pytest.raises(TraceTooClose):
        O.dual_derivative(c)


@given(configs())
def test_oracle_triangle(c):
    d1, dual = Dv.d1_length(c), O.dual_derivative(c)
    fd = O.length_derivative_fd(c, 1).value
    size = max(1e-3, abs(d1))
    assert abs(d1 - dual) <= 1e-11 * size
    assert abs(dual - fd) <= 1e-9 * size


def test_richardson_estimate_usually_bounds_the_error():
    rng = np.random.default_rng(2024)
    from shearlab.sampling import random_config

    hits = 0
    trials = 200
    for _ in range(trials):
        c = random_config(rng)
        r = O.length_derivative_fd(c, 1)
        hits += abs(r.value - O.dual_derivative(c)) <= r.error
    assert hits >= 0.95 * trials


# --- geometric oracles -------------------------------------------------------------------------


def test_euclidean_tangent():
    assert O.euclidean_tangent(K.Geodesic.of(0, "inf"), (0, 1)) == pytest.approx(1j)
    assert O.euclidean_tangent(K.Geodesic.of("inf", 0), (0, 1)) == pytest.approx(-1j)
    # top of the semicircle from -1 to 1 heads right
    assert O.euclidean_tangent(K.Geodesic.of(-1, 1), (0, 1)) == pytest.approx(1.0)


@given(distinct_points(4, gap=0.2))
def test_minimized_distance_matches_closed_form(xs):
    g, h = K.Geodesic.of(xs[0], xs[1]), K.Geodesic.of(xs[2], xs[3])
    if K.links(g, h):
        return
    d = K.geodesic_distance(g, h)
    if d > 5:
        return
    assert O.minimized_distance(g, h) == pytest.approx(d, abs=1e-8)


# --- partial products on spiralling leaves ------------------------------------------------------


def test_zero_weights_give_zero_deltas():
    fam = S.spiral_config(math.log(2), K.Geodesic.of(-1, "inf"), K.Geodesic.of(-0.7, "inf"), [0.0], 10)
    trace = O.spiral_convergence(fam)
    assert all(t.matrix_delta == 0.0 for t in trace)
    assert trace[-1].rate is None


def test_alternating_unit_masses_converge():
    trace = O.spiral_convergence(spiral_instance(30))
    assert len(trace) == 29
    assert all(t.matrix_delta >= 0 for t in trace)
    assert trace[-1].rate <= -0.3
    assert trace[-1].rate == pytest.approx(-math.log(2) / 2, rel=1e-6)
    assert trace[-1].derivative_value == pytest.approx(trace[-2].derivative_value, abs=1e-6)


def test_growing_cumulative_mass_diverges():
    # masses +1 on every leaf: cumulative mass grows like n and beats the gap decay
    fam = S.spiral_config(2 * math.log(2), K.Geodesic.of(-1, "inf"), K.Geodesic.of(-0.7, "inf"), [1.0], 20, h_weights=[1.0])
    assert O.spiral_convergence(fam)[-1].rate > 0


def test_closed_leaf_identity():
    fam = S.spiral_config(1.3, K.Geodesic.of(-1, "inf"), K.Geodesic.of(-0.6, "inf"), [0.4, -0.25], 2)
    assert K.translation_length(fam.closed_leaf_image()) == pytest.approx(1.3 + 0.4 - 0.25, abs=1e-12)


def test_fitted_rate():
    assert O.fitted_rate([(1, 0.0)]) is None
    assert O.fitted_rate([(n, -0.5 * n + 2) for n in range(1, 6)]) == pytest.approx(-0.5)
