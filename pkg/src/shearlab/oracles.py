"""Independent differentiation oracles and the spiral convergence experiment.

Nothing here uses the closed-form derivative formulas: the finite difference
oracle only samples ``t -> deformed_length(config, t)`` and the dual-number
oracle pushes ``(value, derivative)`` pairs through the matrix product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from . import kernel as K
from . import shear as S
from .errors import NonFiniteSample, TraceTooClose

# central stencils: offsets (in units of h), weights, and the power of h
_STENCILS = {
    1: ((-1, 1), (-0.5, 0.5), 1),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0), 2),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5), 3),
}


# relative size of the tableau error estimate that triggers extra levels
ADAPTIVE_RTOL = {1: None, 2: 1e-9, 3: 1e-6}


@dataclass(frozen=True)
class FDSpec:
    order: int
    h0: float
    levels: int

    def __post_init__(self):
        if self.order not in _STENCILS:
            raise ValueError("order must be 1, 2 or 3")
        if not 1e-4 <= self.h0 <= 1e-1:
            raise ValueError("base step must lie in [1e-4, 1e-1]")
        if self.levels < 2:
            raise ValueError("need at least two Richardson levels")

    @classmethod
    def default(cls, order: int) -> "FDSpec":
        if order == 3:
            return cls(3, 5e-2, 3)
        return cls(order, 1e-2, 4)

    def sample_points(self) -> list[float]:
        offsets = _STENCILS[self.order][0]
        return sorted({o * self.h0 / 2**i for i in range(self.levels) for o in offsets} | {0.0})

    @property
    def reach(self) -> float:
        """Largest ``|t|`` sampled."""
        return max(abs(o) for o in _STENCILS[self.order][0]) * self.h0


@dataclass(frozen=True)
class FDResult:
    value: float
    error: float


_EPS = 2.0**-52
# sum of |weights| in a full Richardson row is below 2 for the tableaux used here
_ROUNDING_GAIN = 2.0


def fd_derivative(
    f: Callable[[float], float],
    order: int,
    spec: FDSpec | None = None,
    rtol: float | None = None,
    max_extra: int = 4,
    noise: float | None = None,
) -> FDResult:
    """Richardson-extrapolated central difference of ``f`` at 0.

    The error estimate is the change between the last two entries on the
    final row of the tableau plus the rounding floor of the finest stencil,
    ``sum |w| * noise / h^order`` amplified by the extrapolation.  ``noise``
    is the absolute evaluation error of one sample of ``f``; by default one
    ulp of the sample.  With ``rtol`` set, rows keep being added (at
    most ``max_extra`` beyond ``spec.levels``) while that estimate exceeds
    ``rtol * |value|``, and the row with the smallest estimate wins.
    """
    spec = spec or FDSpec.default(order)
    if spec.order != order:
        raise ValueError("spec order mismatch")
    offsets, weights, power = _STENCILS[order]
    cache: dict[float, float] = {}

    def sample(t):
        if t not in cache:
            v = float(f(t))
            if not math.isfinite(v):
                raise NonFiniteSample(f"f({t}) = {v}")
            cache[t] = v
        return cache[t]

    rows: list[list[float]] = []
    best: FDResult | None = None
    limit = spec.levels + (max_extra if rtol is not None else 0)
    for i in range(limit):
        h = spec.h0 / 2**i
        d = math.fsum(w * sample(o * h) for o, w in zip(offsets, weights)) / h**power
        floor = math.fsum(
            abs(w) * (noise if noise is not None else _EPS * abs(sample(o * h)))
            for o, w in zip(offsets, weights)
        )
        floor *= _ROUNDING_GAIN / h**power
        row = [d]
        for j in range(1, i + 1):
            row.append(row[j - 1] + (row[j - 1] - rows[i - 1][j - 1]) / (4**j - 1))
        rows.append(row)
        if i + 1 < spec.levels:
            continue
        cur = FDResult(row[-1], abs(row[-1] - row[-2]) + floor)
        if best is None or cur.error < best.error:
            best = cur
        if rtol is None or best.error <= rtol * abs(best.value):
            break
    return best


def length_noise(config: S.ShearConfig) -> float:
    """Evaluation error of one deformed length.

    Each of the ``n + 1`` factors in the product puts about one ulp into the
    trace, and ``l = 2 acosh(T/2)`` turns a relative trace error into an
    absolute length error of size ``coth(l/2)`` times it.
    """
    return (config.n + 1) * _EPS * (1.0 + 1.0 / math.tanh(config.length / 2.0))


def length_derivative_fd(config: S.ShearConfig, order: int, spec: FDSpec | None = None) -> FDResult:
    """FD of ``t -> deformed_length(config, t)``.

    The length depends on ``t`` only through ``t * a``, so the direction is
    rescaled to unit largest mass before sampling and the result scaled back
    by ``scale**order``; default steps are tuned for unit-size directions.
    """
    scale = float(np.max(np.abs(config.weights), initial=0.0))
    if scale == 0.0:
        return FDResult(0.0, 0.0)
    unit = config.with_weights(config.weights / scale)
    r = fd_derivative(
        lambda t: S.deformed_length(unit, t),
        order,
        spec,
        rtol=ADAPTIVE_RTOL[order],
        noise=length_noise(config),
    )
    return FDResult(r.value * scale**order, r.error * scale**order)


class Dual:
    """First-order dual number ``a + b eps``."""

    __slots__ = ("a", "b")

    def __init__(self, a: float, b: float = 0.0):
        self.a = float(a)
        self.b = float(b)

    @staticmethod
    def lift(x) -> "Dual":
        return x if isinstance(x, Dual) else Dual(x)

    def __add__(self, other):
        other = Dual.lift(other)
        return Dual(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.a, -self.b)

    def __sub__(self, other):
        return self + (-Dual.lift(other))

    def __rsub__(self, other):
        return Dual.lift(other) - self

    def __mul__(self, other):
        other = Dual.lift(other)
        return Dual(self.a * other.a, self.a * other.b + self.b * other.a)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Dual.lift(other)
        if other.a == 0.0:
            raise ZeroDivisionError("dual division by a pure infinitesimal")
        return Dual(self.a / other.a, (self.b * other.a - self.a * other.b) / other.a**2)

    def __abs__(self):
        return -self if self.a < 0 else self

    def exp(self) -> "Dual":
        e = math.exp(self.a)
        return Dual(e, e * self.b)

    def acosh(self) -> "Dual":
        return Dual(math.acosh(self.a), self.b / math.sqrt(self.a * self.a - 1.0))

    def __repr__(self):
        return f"Dual({self.a!r}, {self.b!r})"


def _matmul(x, y):
    return [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]


def _dual_translation(g: K.Geodesic, u: Dual):
    w = K.frame(g).m
    winv = K.frame(g).inverse().m
    e = (u * 0.5).exp()
    einv = (-u * 0.5).exp()
    mid = [[e, Dual(0.0)], [Dual(0.0), einv]]
    wl = [[Dual(x) for x in row] for row in w.tolist()]
    wr = [[Dual(x) for x in row] for row in winv.tolist()]
    return _matmul(_matmul(wl, mid), wr)


def dual_length(config: S.ShearConfig, t0: float = 0.0) -> Dual:
    """``deformed_length`` at ``t0`` with its exact first derivative."""
    t = Dual(t0, 1.0)
    gamma, leaves = config.framed
    m = [[Dual(1.0), Dual(0.0)], [Dual(0.0), Dual(1.0)]]
    for g, leaf in zip(leaves, config.leaves):
        m = _matmul(m, _dual_translation(g, t * leaf.weight))
    m = _matmul(m, [[Dual(x) for x in row] for row in gamma.m.tolist()])
    half_trace = abs(m[0][0] + m[1][1]) * 0.5
    if half_trace.a <= 1.0 + 0.5e-8:
        raise TraceTooClose("|trace| too close to 2 for a differentiable arccosh")
    return half_trace.acosh() * 2.0


def dual_derivative(config: S.ShearConfig) -> float:
    return dual_length(config).b


# --- geometric oracles for the kernel ---------------------------------------


def euclidean_tangent(g: K.Geodesic, p) -> complex:
    """Unit Euclidean tangent of ``g`` at ``p`` from the circle picture.

    A vertical line points up or down; on a semicircle the tangent is the
    radius turned by a quarter, clockwise when running left to right.
    """
    p = K.InteriorPoint.of(p)
    u, v = g.source.value, g.target.value
    if math.isinf(v):
        return 1j
    if math.isinf(u):
        return -1j
    r = p.z - 0.5 * (u + v)
    t = -1j * r if u < v else 1j * r
    return t / abs(t)


def tangent_angle_between(g: K.Geodesic, h: K.Geodesic, p) -> float:
    """Counterclockwise angle in (0, pi) from ``g`` to ``h`` at a common point ``p``.

    ``h`` is taken with whichever orientation makes the angle less than pi,
    which is the leftward orientation.
    """
    z = euclidean_tangent(h, p) / euclidean_tangent(g, p)
    a = math.atan2(z.imag, z.real) % (2 * math.pi)
    return a - math.pi if a > math.pi else a


def minimized_distance(g: K.Geodesic, h: K.Geodesic, span: float = 60.0) -> float:
    """Distance between disjoint geodesics by minimizing over points of ``g``.

    Distance to ``h`` is convex along ``g``; the minimizer is found by a
    bounded scalar search over arc length measured from the frame origin.
    """

    def f(s):
        return K.distance_to_geodesic(K.point_on_geodesic(g, s), h)

    res = minimize_scalar(f, bounds=(-span, span), method="bounded", options={"xatol": 1e-11})
    return float(res.fun)


# --- convergence of partial products on a spiral ----------------------------


@dataclass(frozen=True)
class ConvergenceTrace:
    n: int
    matrix_delta: float
    derivative_value: float
    rate: float | None


def _max_entry_delta(f: K.Isometry, g: K.Isometry) -> float:
    return f.distance(g)


def spiral_convergence(family: S.SpiralFamily, n_max: int | None = None) -> list[ConvergenceTrace]:
    """Cauchy deltas of the interleaved partial products on a spiral.

    ``rate`` is the log-linear slope of the deltas fitted over ``1..n``
    (None until two positive deltas exist).  ``derivative_value`` is the
    first derivative in the shear parameter of the translation length of the
    sheared ``gamma``, computed by finite differences of the partial product.
    """
    # interleaved(n) reads leaves up to index n + 1
    n_max = family.n - 2 if n_max is None else n_max
    out = []
    logs: list[tuple[int, float]] = []
    prev = family.interleaved(1)
    for n in range(1, n_max + 1):
        cur = family.interleaved(n + 1)
        delta = _max_entry_delta(prev, cur)
        if delta > 0:
            logs.append((n, math.log(delta)))
        rate = fitted_rate(logs)
        deriv = fd_derivative(
            lambda t, n=n: K.translation_length(family.interleaved(n, scale=t) @ family.gamma), 1
        ).value
        out.append(ConvergenceTrace(n, delta, deriv, rate))
        prev = cur
    return out


def fitted_rate(points) -> float | None:
    """Least-squares slope of ``log(delta)`` against ``n``."""
    if len(points) < 2:
        return None
    n, y = np.array(points, dtype=float).T
    return float(np.polyfit(n, y, 1)[0])
