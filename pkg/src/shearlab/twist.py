"""Shearing an annulus along a single geodesic.

Setting: ``gamma`` is hyperbolic with axis ``g``, ``h`` crosses ``g`` and
``h' = gamma(h)``.  The deformation is ``gamma(t) = T(h', t) o gamma`` with
``T(h', t)`` the translation by ``t`` along ``h'``; its axis ``g(t)`` moves
while ``h``, ``h'`` and every probe geodesic ``l`` between them stay fixed.

Two facts drive everything: ``gamma(t)`` still maps ``h`` to ``h'``, so the
angles at ``h`` and ``h'`` agree for every ``t``; and the midpoint ``M`` of
the common perpendicular of ``h`` and ``h'`` stays on ``g(t)``, which
therefore rotates about ``M``.

Every geodesic crossing the axis is oriented so that it points to the left
when crossed.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import kernel as K
from .errors import DegenerateResult, NotHyperbolic, ProbeOutOfRange, SharedEndpoint
from .kernel import Geodesic, InteriorPoint, Isometry

#: Direction in which ``f_l`` is measured along a probe ``l``: ``+1`` is the
#: leftward orientation of ``l``.  Fixed by the anchor ``f_h' = -1/2``.
F_ORIENTATION = +1

#: Sign of ``d cos(theta_l)/dt`` relative to the positive expression
#: ``cosh(l/2 - l_hl) sin(theta_h) sin(theta_l) / (2 sinh(l/2))``.
DCOS_SIGN = +1

#: Sense in which the rotation of ``g(t)`` about ``M`` is counted: ``-1``
#: means clockwise in the upper half-plane is positive, the sense in which
#: ``f_l' = rho' sinh(l/2 - l_hl) / sin(theta_l)`` holds.
ROTATION_SIGN = -1


@dataclass(frozen=True, eq=False)
class TwistScene:
    """The twist configuration.

    Geometry is stored in the caller's coordinates; ``local`` is the same
    scene pulled back by ``frame`` so that the axis is the imaginary axis and
    ``h`` crosses it at ``i``.  All measurements run in ``local``, where
    matrix entries stay of order ``e^(l/2)``.
    """

    gamma: Isometry
    h: Geodesic
    h_prime: Geodesic
    probes: tuple[Geodesic, ...]
    axis: Geodesic
    length: float
    perp_feet: tuple[InteriorPoint, InteriorPoint]
    midpoint: InteriorPoint
    # arc position along the axis of each probe, measured from h
    probe_offsets: tuple[float, ...]
    frame: Isometry
    local: "TwistScene | None" = field(default=None, repr=False)

    def pull(self, l: Geodesic) -> Geodesic:
        """Geodesic in the caller's coordinates -> local coordinates."""
        return self.frame.inverse()(l)


def _midpoint(p: InteriorPoint, q: InteriorPoint) -> InteriorPoint:
    g = _through(p, q)
    d = K.point_distance(p, q)
    return K.point_on_geodesic(g, d / 2.0, base=p)


def _through(p: InteriorPoint, q: InteriorPoint) -> Geodesic:
    """Oriented geodesic from ``p`` toward ``q``."""
    p, q = InteriorPoint.of(p), InteriorPoint.of(q)
    if abs(p.x - q.x) <= 1e-15 * max(1.0, abs(p.x)):
        return Geodesic.of(p.x, "inf") if q.y > p.y else Geodesic.of("inf", p.x)
    # centre on the real line equidistant from p and q
    c = (abs(q.z) ** 2 - abs(p.z) ** 2) / (2.0 * (q.x - p.x))
    r = abs(p.z - c)
    ends = (c - r, c + r) if q.x > p.x else (c + r, c - r)
    return Geodesic.of(*ends)


def _assemble(gamma: Isometry, h: Geodesic, probes, frame: Isometry, local=None) -> TwistScene:
    if K.classify(gamma) != "hyperbolic":
        raise NotHyperbolic(f"gamma must be hyperbolic, got {K.classify(gamma)}")
    ax = K.axis(gamma)
    ell = K.translation_length(gamma)
    cr = _h_crossing(ax, h)
    h = K.left_oriented(ax, h)
    hp = gamma(h)
    a, ap = K.common_perpendicular(h, hp)
    offsets = []
    oriented = []
    for l in probes:
        off = _offset(ax, l, cr.point)
        if not 0.0 < off < ell:
            raise ProbeOutOfRange(f"{l} does not cross the axis between h and h'")
        oriented.append(K.left_oriented(ax, l))
        offsets.append(off)
    return TwistScene(
        gamma=gamma,
        h=h,
        h_prime=hp,
        probes=tuple(oriented),
        axis=ax,
        length=ell,
        perp_feet=(a, ap),
        midpoint=_midpoint(a, ap),
        probe_offsets=tuple(offsets),
        frame=frame,
        local=local,
    )


def _h_crossing(ax: Geodesic, h: Geodesic) -> K.Crossing:
    try:
        cr = K.intersect(ax, h)
    except SharedEndpoint as exc:
        raise ProbeOutOfRange("h is asymptotic to the axis") from exc
    if cr is None:
        raise ProbeOutOfRange("h does not cross the axis")
    return cr


def build_scene(gamma: Isometry, h: Geodesic, probes: Iterable[Geodesic] = ()) -> TwistScene:
    """Validate ``h`` against ``gamma`` and set up the perpendicular and ``M``.

    Probes must cross the axis strictly between ``h`` and ``h'``.
    """
    probes = list(probes)
    if K.classify(gamma) != "hyperbolic":
        raise NotHyperbolic(f"gamma must be hyperbolic, got {K.classify(gamma)}")
    ax = K.axis(gamma)
    w = K.frame(ax)
    y = abs(w.inverse()(_h_crossing(ax, h).point.z))
    w = w @ Isometry.diag(math.sqrt(y))
    winv = w.inverse()
    local = _assemble(winv @ gamma @ w, winv(h), [winv(l) for l in probes], Isometry.identity())
    return _assemble(gamma, h, probes, w, local)


def _offset(ax: Geodesic, l: Geodesic, h_point: InteriorPoint) -> float:
    try:
        cr = K.intersect(ax, l)
    except SharedEndpoint as exc:
        raise ProbeOutOfRange(f"{l} is asymptotic to the axis") from exc
    if cr is None:
        raise ProbeOutOfRange(f"{l} does not cross the axis")
    return K.signed_position(ax, cr.point, h_point)


def _loc(scene: TwistScene) -> TwistScene:
    return scene.local if scene.local is not None else scene


def _local_family(loc: TwistScene, t: float) -> Isometry:
    g = K.translate_along(loc.h_prime, t) @ loc.gamma
    if K.classify(g) != "hyperbolic":
        raise DegenerateResult(f"twisted isometry at t={t} is {K.classify(g)}")
    return g


def twist_family(scene: TwistScene, t: float) -> Isometry:
    """``T(h', t) o gamma``."""
    g = _local_family(_loc(scene), t)
    return scene.frame @ g @ scene.frame.inverse()


def twisted_length(scene: TwistScene, t: float) -> float:
    return K.translation_length(_local_family(_loc(scene), t))


def _local_axis(scene: TwistScene, t: float) -> Geodesic:
    return K.axis(_local_family(_loc(scene), t))


def twisted_axis(scene: TwistScene, t: float) -> Geodesic:
    return scene.frame(_local_axis(scene, t))


def midpoint_invariance(scene: TwistScene, t: float) -> float:
    """Hyperbolic distance from ``M`` to the axis of ``gamma(t)``."""
    return K.distance_to_geodesic(_loc(scene).midpoint, _local_axis(scene, t))


def _crossing(ax: Geodesic, l: Geodesic) -> K.Crossing:
    cr = K.intersect(ax, l)
    if cr is None:
        raise ProbeOutOfRange(f"{l} no longer crosses the moving axis")
    return cr


def angle_at(scene: TwistScene, l: Geodesic, t: float) -> float:
    """Angle from ``g(t)`` to ``l``."""
    return _crossing(_local_axis(scene, t), scene.pull(l)).theta


def angle_symmetry(scene: TwistScene, t: float) -> float:
    """``|theta_h(t) - theta_h'(t)|``."""
    loc = _loc(scene)
    ax = _local_axis(scene, t)
    return abs(_crossing(ax, loc.h).theta - _crossing(ax, loc.h_prime).theta)


def _perp_point(loc: TwistScene, l: Geodesic) -> InteriorPoint:
    """``l`` meets the common perpendicular ``[a, a']``."""
    a, ap = loc.perp_feet
    cr = K.intersect(_through(a, ap), l)
    if cr is None:
        raise ProbeOutOfRange(f"{l} misses the common perpendicular")
    return cr.point


def f_l(scene: TwistScene, l: Geodesic, t: float) -> float:
    """Signed distance along ``l`` from ``l`` meets ``[a, a']`` to ``l`` meets ``g(t)``."""
    loc = _loc(scene)
    ax = _local_axis(scene, t)
    l = K.left_oriented(loc.axis, scene.pull(l))
    p = _crossing(ax, l).point
    return F_ORIENTATION * K.signed_position(l, p, _perp_point(loc, l))


def ell_hl(scene: TwistScene, l: Geodesic, t: float = 0.0) -> float:
    """Distance along ``g(t)`` from its crossing with ``h`` to its crossing with ``l``."""
    ax = _local_axis(scene, t)
    return K.signed_position(ax, _crossing(ax, scene.pull(l)).point, _crossing(ax, _loc(scene).h).point)


def rotation_angle(scene: TwistScene, t: float) -> float:
    """Angle from ``g(0)`` to ``g(t)`` at ``M``, counted in the sense of :data:`ROTATION_SIGN`."""
    loc = _loc(scene)
    m = loc.midpoint
    d = K.tangent_angle(_local_axis(scene, t), m) - K.tangent_angle(loc.axis, m)
    return ROTATION_SIGN * math.remainder(d, 2.0 * math.pi)


def _probe_data(scene: TwistScene, l: Geodesic):
    loc = _loc(scene)
    l = scene.pull(l)
    cr_h = K.intersect(loc.axis, loc.h)
    try:
        cr_l = K.intersect(loc.axis, l)
    except SharedEndpoint as exc:
        raise ProbeOutOfRange(f"{l} is asymptotic to the axis") from exc
    if cr_l is None:
        raise ProbeOutOfRange(f"{l} does not cross the axis")
    if l.same_support(loc.h):
        off = 0.0
    elif l.same_support(loc.h_prime):
        off = loc.length
    else:
        off = K.signed_position(loc.axis, cr_l.point, cr_h.point)
        if not 0.0 < off < loc.length:
            raise ProbeOutOfRange(f"{l} does not cross the axis between h and h'")
    return cr_h, cr_l, off


def ell_prime(scene: TwistScene) -> float:
    """Derivative of the translation length: ``cos(theta_h)``."""
    loc = _loc(scene)
    return K.intersect(loc.axis, loc.h).cos


def angular_velocity(scene: TwistScene) -> float:
    """Rate at which ``g(t)`` turns about ``M``: ``-sin(theta_h) / (2 sinh(l/2))``."""
    loc = _loc(scene)
    return -K.intersect(loc.axis, loc.h).sin / (2.0 * math.sinh(loc.length / 2.0))


def f_l_prime(scene: TwistScene, l: Geodesic) -> float:
    """Speed of ``l`` meets ``g(t)`` along ``l``.

    ``rho' sinh(l/2 - l_hl) / sin(theta_l)``, i.e.
    ``-sin(theta_h) sinh(l/2 - l_hl) / (2 sin(theta_l) sinh(l/2))``; equal to
    ``-1/2`` at ``l = h``.
    """
    _, cr_l, off = _probe_data(scene, l)
    return angular_velocity(scene) * math.sinh(scene.length / 2.0 - off) / cr_l.sin


def ell_llprime_prime(scene: TwistScene, l: Geodesic, lp: Geodesic) -> float:
    """Derivative of the distance along ``g(t)`` from ``l`` to ``lp``.

    ``sin(theta_h)/(2 sinh(l/2)) * (sinh(l/2 - l_hl) cot(theta_l)
    - sinh(l/2 - l_hl') cot(theta_l'))``; antisymmetric in the two probes.
    """
    cr_h, cr_l, off_l = _probe_data(scene, l)
    _, cr_lp, off_lp = _probe_data(scene, lp)
    half = scene.length / 2.0
    return (
        cr_h.sin
        / (2.0 * math.sinh(half))
        * (
            math.sinh(half - off_l) * cr_l.cos / cr_l.sin
            - math.sinh(half - off_lp) * cr_lp.cos / cr_lp.sin
        )
    )


def d_cos_theta_l(scene: TwistScene, l: Geodesic) -> float:
    """``cosh(l/2 - l_hl) sin(theta_h) sin(theta_l) / (2 sinh(l/2))``."""
    cr_h, cr_l, off = _probe_data(scene, l)
    half = scene.length / 2.0
    return DCOS_SIGN * 0.5 * math.cosh(half - off) / math.sinh(half) * cr_h.sin * cr_l.sin


# --- trajectories ---------------------------------------------------------------


@dataclass(frozen=True)
class TrajectoryRow:
    t: float
    ell: float
    theta: tuple[float, ...]
    f: tuple[float, ...]
    midpoint_residual: float
    angle_residual: float


def parse_grid(spec: str) -> list[float]:
    """``"a:b:n"`` -> ``n`` evenly spaced values from ``a`` to ``b``."""
    try:
        a, b, n = spec.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise ValueError(f"grid must look like a:b:n, got {spec!r}") from None
    if n < 1:
        raise ValueError("grid needs at least one point")
    if n == 1:
        return [a]
    return [a + (b - a) * k / (n - 1) for k in range(n)]


def trajectory(scene: TwistScene, ts: Sequence[float]) -> list[TrajectoryRow]:
    loc = _loc(scene)
    rows = []
    for t in ts:
        ax = _local_axis(scene, t)
        rows.append(
            TrajectoryRow(
                t=t,
                ell=twisted_length(scene, t),
                theta=tuple(_crossing(ax, l).theta for l in loc.probes),
                f=tuple(f_l(scene, l, t) for l in scene.probes),
                midpoint_residual=K.distance_to_geodesic(loc.midpoint, ax),
                angle_residual=abs(_crossing(ax, loc.h).theta - _crossing(ax, loc.h_prime).theta),
            )
        )
    return rows


def second_differences(values: Sequence[float]) -> list[float]:
    return [values[i - 1] - 2.0 * values[i] + values[i + 1] for i in range(1, len(values) - 1)]


def trajectory_csv(rows: Sequence[TrajectoryRow], fmt=repr) -> str:
    n = len(rows[0].theta) if rows else 0
    header = ["t", "ell"]
    header += [f"theta_{k}" for k in range(n)] + [f"f_{k}" for k in range(n)]
    header += ["midpoint_residual", "angle_residual"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in (r.t, r.ell, *r.theta, *r.f, r.midpoint_residual, r.angle_residual)])
    return buf.getvalue()
