"""Upper half-plane geometry: ideal points, oriented geodesics, PSL(2,R).

Ideal points are stored as normalized projective pairs ``(a, b)`` standing for
``a / b``, so the point at infinity is ``(1, 0)`` and needs no special casing.
Every geodesic formula below is written through a *frame*: the unit
determinant matrix sending ``0`` to the source and ``infinity`` to the target
of a geodesic.  In that frame the geodesic is the positive imaginary axis and
most quantities have one-line expressions.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .errors import (
    DegeneratePoints,
    Intersecting,
    NotHyperbolic,
    PointOffGeodesic,
    SharedEndpoint,
)

TOL_GEOM = 1e-10
TOL_ALG = 1e-12
_EPS4 = 4.0 * float(np.finfo(float).eps)
# hyperbolic distance below which a point counts as lying on a geodesic
ON_GEODESIC_TOL = 1e-9

#: Ordering of the cross-ratio.  With ``(p, s)`` the endpoints of one geodesic
#: and ``(q, r)`` the endpoints of another, ``[p, q, r, s]`` equals
#: ``cos^2(theta/2)`` when they cross and ``-sinh^2(d/2)`` when they are
#: disjoint (for the orientation of ``(q, r)`` that makes it negative).
CROSS_RATIO_CONVENTION = "(p-r)(q-s)/((p-s)(q-r))"


def _det(p: "BoundaryPoint", q: "BoundaryPoint") -> float:
    return p.a * q.b - p.b * q.a


@dataclass(frozen=True)
class BoundaryPoint:
    """Point of the ideal boundary R u {inf} as a projective pair."""

    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        norm = math.hypot(a, b)
        if norm == 0.0 or not math.isfinite(norm):
            raise ValueError("boundary point needs a finite nonzero pair")
        a, b = a / norm, b / norm
        if a < 0 or (a == 0 and b < 0):
            a, b = -a, -b
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def of(cls, x: "PointLike") -> "BoundaryPoint":
        """Coerce a real, ``inf``/``"inf"`` or an ``(a, b)`` pair."""
        if isinstance(x, BoundaryPoint):
            return x
        if isinstance(x, str):
            if x.strip().lower() in ("inf", "infinity", "+inf", "-inf", "oo"):
                return cls(1.0, 0.0)
            return cls(float(x), 1.0)
        if isinstance(x, (tuple, list, np.ndarray)):
            if len(x) != 2:
                raise ValueError("projective pair must have two entries")
            return cls(float(x[0]), float(x[1]))
        x = float(x)
        if math.isinf(x):
            return cls(1.0, 0.0)
        return cls(x, 1.0)

    @property
    def value(self) -> float:
        return math.inf if self.b == 0 else self.a / self.b

    @property
    def is_infinite(self) -> bool:
        return abs(self.b) <= TOL_ALG

    def vec(self) -> np.ndarray:
        return np.array([self.a, self.b])

    def same_as(self, other: "BoundaryPoint", tol: float = TOL_GEOM) -> bool:
        return abs(_det(self, other)) <= tol

    def __repr__(self):
        v = self.value
        return "BoundaryPoint(inf)" if math.isinf(v) else f"BoundaryPoint({v:.12g})"


PointLike = Union[BoundaryPoint, float, int, str, tuple, list]


class InteriorPoint(NamedTuple):
    x: float
    y: float

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @classmethod
    def of(cls, z) -> "InteriorPoint":
        if isinstance(z, InteriorPoint):
            return z
        if isinstance(z, complex):
            p = cls(z.real, z.imag)
        else:
            p = cls(float(z[0]), float(z[1]))
        if not p.y > 0:
            raise ValueError(f"interior point needs y > 0, got {p}")
        return p


@dataclass(frozen=True)
class Geodesic:
    """Oriented geodesic from ``source`` to ``target``."""

    source: BoundaryPoint
    target: BoundaryPoint

    def __post_init__(self):
        object.__setattr__(self, "source", BoundaryPoint.of(self.source))
        object.__setattr__(self, "target", BoundaryPoint.of(self.target))
        if self.source.same_as(self.target, TOL_ALG):
            raise DegeneratePoints("geodesic endpoints coincide")

    @classmethod
    def of(cls, p: PointLike, q: PointLike) -> "Geodesic":
        return cls(BoundaryPoint.of(p), BoundaryPoint.of(q))

    def reverse(self) -> "Geodesic":
        return Geodesic(self.target, self.source)

    def same_as(self, other: "Geodesic", tol: float = TOL_GEOM) -> bool:
        """Equal as oriented geodesics."""
        return self.source.same_as(other.source, tol) and self.target.same_as(other.target, tol)

    def same_support(self, other: "Geodesic", tol: float = TOL_GEOM) -> bool:
        return self.same_as(other, tol) or self.same_as(other.reverse(), tol)

    def __repr__(self):
        return f"Geodesic({self.source.value:.12g} -> {self.target.value:.12g})"


class Isometry:
    """Orientation-preserving isometry: a unit determinant matrix up to sign."""

    __slots__ = ("m",)

    def __init__(self, m, det_slack: float | None = None):
        m = np.array(m, dtype=float).reshape(2, 2)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if not det > 0:
            raise ValueError("matrix must have positive determinant")
        # the determinant of a large unimodular matrix is itself inaccurate;
        # rescale only when it is off by more than its own error bound
        if det_slack is None:
            det_slack = _EPS4 * (abs(m[0, 0] * m[1, 1]) + abs(m[0, 1] * m[1, 0]))
        if abs(det - 1.0) > det_slack:
            m = m / math.sqrt(det)
        first = m[0, 0] if m[0, 0] != 0 else m[0, 1]
        if first < 0:
            m = -m
        m.flags.writeable = False
        self.m = m

    @classmethod
    def identity(cls) -> "Isometry":
        return cls(np.eye(2))

    @classmethod
    def diag(cls, lam: float) -> "Isometry":
        return cls([[lam, 0.0], [0.0, 1.0 / lam]])

    @property
    def trace(self) -> float:
        return float(self.m[0, 0] + self.m[1, 1])

    def inverse(self) -> "Isometry":
        (a, b), (c, d) = self.m
        return Isometry([[d, -b], [-c, a]])

    def __matmul__(self, other: "Isometry") -> "Isometry":
        m = self.m @ other.m
        # rounding in the product moves det by about eps |A| |B| |AB|
        size = np.abs(self.m).max() * np.abs(other.m).max() * np.abs(m).max()
        return Isometry(m, det_slack=_EPS4 * max(size, 1.0))

    def __call__(self, x):
        if isinstance(x, Geodesic):
            return Geodesic(self(x.source), self(x.target))
        if isinstance(x, BoundaryPoint):
            v = self.m @ x.vec()
            return BoundaryPoint(v[0], v[1])
        if isinstance(x, InteriorPoint):
            w = self._mobius(x.z)
            return InteriorPoint(w.real, w.imag)
        if isinstance(x, complex):
            return self._mobius(x)
        raise TypeError(f"cannot apply an isometry to {type(x).__name__}")

    def _mobius(self, z: complex) -> complex:
        (a, b), (c, d) = self.m.tolist()
        return (a * z + b) / (c * z + d)

    def distance(self, other: "Isometry") -> float:
        """Max-entry distance between matrices, minimized over the sign."""
        return float(min(np.abs(self.m - other.m).max(), np.abs(self.m + other.m).max()))

    def isclose(self, other: "Isometry", tol: float = TOL_GEOM) -> bool:
        return self.distance(other) <= tol

    def __repr__(self):
        return f"Isometry({self.m.tolist()})"


def compose(f: Isometry, g: Isometry) -> Isometry:
    """``f o g``, renormalized to determinant one with canonical sign."""
    return f @ g


def inverse(f: Isometry) -> Isometry:
    return f.inverse()


def classify(f: Isometry, tol: float = TOL_GEOM) -> str:
    tr = abs(f.trace)
    if tr > 2.0 + tol:
        return "hyperbolic"
    if tr < 2.0 - tol:
        return "elliptic"
    if f.distance(Isometry.identity()) <= math.sqrt(tol):
        return "identity"
    return "parabolic"


def translation_length(f: Isometry) -> float:
    if classify(f) != "hyperbolic":
        raise NotHyperbolic(f"isometry is {classify(f)}, not hyperbolic: {f}")
    return 2.0 * math.acosh(abs(f.trace) / 2.0)


def _eigvec(m: np.ndarray, mu: float) -> np.ndarray:
    (a, b), (c, d) = m
    v1 = np.array([b, mu - a])
    v2 = np.array([mu - d, c])
    return v1 if np.hypot(*v1) >= np.hypot(*v2) else v2


def axis(f: Isometry) -> Geodesic:
    """Invariant geodesic, oriented from the repelling to the attracting point."""
    if classify(f) != "hyperbolic":
        raise NotHyperbolic(f"isometry is {classify(f)}, not hyperbolic")
    m = f.m if f.trace > 0 else -f.m
    tr = m[0, 0] + m[1, 1]
    root = math.sqrt((tr - 2.0) * (tr + 2.0))
    lam = (tr + root) / 2.0
    attracting = _eigvec(m, lam)
    repelling = _eigvec(m, 1.0 / lam)
    return Geodesic(BoundaryPoint(*repelling), BoundaryPoint(*attracting))


def frame(g: Geodesic) -> Isometry:
    """Isometry taking ``0 -> infinity`` (the imaginary axis) onto ``g``."""
    t, s = g.target, g.source
    w = np.array([[t.a, s.a], [t.b, s.b]])
    if _det(t, s) < 0:
        w[:, 0] = -w[:, 0]
    return Isometry(w)


def translate_along(g: Geodesic, u: float) -> Isometry:
    """Translation by signed length ``u`` along ``g`` (toward its target if u > 0)."""
    if u == 0:
        return Isometry.identity()
    w = frame(g)
    e = math.exp(u / 2.0)
    return Isometry(w.m @ np.diag([e, 1.0 / e]) @ w.inverse().m)


def cross_ratio(p: PointLike, q: PointLike, r: PointLike, s: PointLike) -> float:
    p, q, r, s = (BoundaryPoint.of(x) for x in (p, q, r, s))
    dets = [_det(p, q), _det(p, r), _det(p, s), _det(q, r), _det(q, s), _det(r, s)]
    if min(abs(d) for d in dets) <= TOL_ALG:
        raise DegeneratePoints("cross-ratio needs four distinct points")
    return _det(p, r) * _det(q, s) / (_det(p, s) * _det(q, r))


def _check_not_asymptotic(g: Geodesic, h: Geodesic) -> None:
    for x in (g.source, g.target):
        for y in (h.source, h.target):
            if x.same_as(y):
                raise SharedEndpoint(f"{g} and {h} share an endpoint")


def _in_frame(g: Geodesic, h: Geodesic) -> tuple[float, float]:
    """Endpoints of ``h`` seen in the frame of ``g`` (finite, nonzero reals)."""
    winv = frame(g).inverse()
    u = winv(h.source)
    v = winv(h.target)
    return u.a / u.b, v.a / v.b


def links(g: Geodesic, h: Geodesic) -> bool:
    """True when the endpoints of ``g`` and ``h`` alternate on the circle."""
    _check_not_asymptotic(g, h)
    x = cross_ratio(g.source, h.source, h.target, g.target)
    return 0.0 < x < 1.0


def left_oriented(g: Geodesic, h: Geodesic) -> Geodesic:
    """``h`` oriented so that it points to the left when crossed by ``g``."""
    u, _ = _in_frame(g, h)
    # in the frame g runs upward, so leftward geodesics start on the positive side
    return h if u > 0 else h.reverse()


class Crossing(NamedTuple):
    point: InteriorPoint
    theta: float
    cos: float
    sin: float


def intersect(g: Geodesic, h: Geodesic) -> Crossing | None:
    """Crossing point of ``g`` and ``h`` with the angle from ``g`` to ``h``.

    The angle is counterclockwise from the direction of ``g`` to ``h``
    oriented leftward, so it always lies in (0, pi); the orientation of ``h``
    given by the caller is ignored.  Returns None for disjoint geodesics.
    """
    _check_not_asymptotic(g, h)
    u, v = _in_frame(g, h)
    if u * v > 0:
        return None
    hl = h if u > 0 else h.reverse()
    x = cross_ratio(g.source, hl.source, hl.target, g.target)
    c = 2.0 * x - 1.0
    s = 2.0 * math.sqrt(max(x * (1.0 - x), 0.0))
    z = frame(g)(complex(0.0, math.sqrt(-u * v)))
    return Crossing(InteriorPoint(z.real, z.imag), math.atan2(s, c), c, s)


def geodesic_distance(g: Geodesic, h: Geodesic) -> float:
    _check_not_asymptotic(g, h)
    x = cross_ratio(g.source, h.source, h.target, g.target)
    if 0.0 < x < 1.0:
        raise Intersecting(f"{g} and {h} intersect")
    sh2 = -x if x < 0 else x - 1.0
    return 2.0 * math.asinh(math.sqrt(sh2))


def point_distance(p, q) -> float:
    p, q = InteriorPoint.of(p), InteriorPoint.of(q)
    return 2.0 * math.asinh(abs(p.z - q.z) / (2.0 * math.sqrt(p.y * q.y)))


def distance_to_geodesic(p, g: Geodesic) -> float:
    w = frame(g).inverse()(InteriorPoint.of(p).z)
    return math.asinh(abs(w.real) / w.imag)


def project(p, g: Geodesic) -> InteriorPoint:
    """Orthogonal projection of an interior point onto ``g``."""
    f = frame(g)
    w = f.inverse()(InteriorPoint.of(p).z)
    return f(InteriorPoint(0.0, abs(w)))


def common_perpendicular(g: Geodesic, h: Geodesic) -> tuple[InteriorPoint, InteriorPoint]:
    """Feet ``(a, a')`` on ``g`` and ``h`` of their common perpendicular."""
    _check_not_asymptotic(g, h)
    u, v = _in_frame(g, h)
    if u * v < 0:
        raise Intersecting(f"{g} and {h} intersect")
    uv = u * v
    # circle |z| = sqrt(uv) is orthogonal to both the imaginary axis and (u, v)
    x = 2.0 * uv / (u + v)
    y = math.sqrt(max(uv - x * x, 0.0))
    f = frame(g)
    return f(InteriorPoint(0.0, math.sqrt(uv))), f(InteriorPoint(x, y))


def point_on_geodesic(g: Geodesic, s: float, base=None) -> InteriorPoint:
    """Point at signed arc length ``s`` from ``base`` (default: frame origin)."""
    f = frame(g)
    y0 = 1.0 if base is None else abs(f.inverse()(InteriorPoint.of(base).z))
    return f(InteriorPoint(0.0, y0 * math.exp(s)))


def signed_position(g: Geodesic, p, basepoint) -> float:
    """Signed arc length from ``basepoint`` to ``p``, both on ``g``."""
    winv = frame(g).inverse()
    out = []
    for x in (p, basepoint):
        w = winv(InteriorPoint.of(x).z)
        if math.asinh(abs(w.real) / w.imag) > ON_GEODESIC_TOL:
            raise PointOffGeodesic(f"{x} is not on {g}")
        out.append(abs(w))
    return math.log(out[0] / out[1])


def tangent_angle(g: Geodesic, p) -> float:
    """Euclidean direction (radians) of the unit tangent of ``g`` at ``p``."""
    f = frame(g)
    p = InteriorPoint.of(p)
    (a, b), (c, d) = f.m.tolist()
    w = f.inverse()(p.z)
    # derivative of the Mobius map at w applied to the upward direction
    dz = 1j / (c * w + d) ** 2
    return cmath.phase(dz)
