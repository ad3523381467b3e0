"""Shearing a hyperbolic annulus along finitely many weighted leaves.

A :class:`ShearConfig` is a hyperbolic deck transformation ``gamma`` together
with the leaves crossing its axis during one period, each carrying a signed
mass.  Shearing by ``t`` replaces ``gamma`` with::

    T(l_1, t a_1) o T(l_2, t a_2) o ... o T(l_n, t a_n) o gamma

where ``T(l, u)`` translates by ``u`` along the leftward-oriented leaf ``l``
and the leaves are ordered by where they cross the axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import kernel as K
from .errors import (
    BadSeedLeaves,
    CrossingLost,
    DegenerateResult,
    DuplicateCrossing,
    GeometryError,
    LeafMissesAxis,
    LeavesCross,
    NotHyperbolic,
    SharedEndpoint,
)
from .kernel import Geodesic, InteriorPoint, Isometry

K_CHECK = 3
DUPLICATE_TOL = 1e-10


@dataclass(frozen=True)
class Leaf:
    geodesic: Geodesic
    weight: float
    label: str | None = None


@dataclass(frozen=True)
class CrossingData:
    """Where a leaf crosses the axis: arc position, angle, mass."""

    s: float
    theta: float
    weight: float
    cos: float
    sin: float
    point: InteriorPoint


@dataclass(frozen=True, eq=False)
class ShearConfig:
    gamma: Isometry
    leaves: tuple[Leaf, ...]
    basepoint: InteriorPoint
    axis: Geodesic
    length: float
    crossings: tuple[CrossingData, ...]

    @property
    def n(self) -> int:
        return len(self.leaves)

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.crossings])

    @property
    def positions(self) -> np.ndarray:
        return np.array([c.s for c in self.crossings])

    @property
    def cosines(self) -> np.ndarray:
        return np.array([c.cos for c in self.crossings])

    @property
    def sines(self) -> np.ndarray:
        return np.array([c.sin for c in self.crossings])

    def oriented_distances(self) -> np.ndarray:
        """``D[i, j]``: arc length from crossing i forward to crossing j."""
        s = self.positions
        return np.mod(s[None, :] - s[:, None], self.length)

    @cached_property
    def frame(self) -> Isometry:
        """Isometry taking the imaginary axis to the axis and ``i`` to the basepoint."""
        w = K.frame(self.axis)
        y = abs(w.inverse()(self.basepoint.z))
        return w @ Isometry.diag(math.sqrt(y))

    @cached_property
    def framed(self) -> tuple[Isometry, tuple[Geodesic, ...]]:
        """``gamma`` and the leaves pulled back by :attr:`frame`.

        There ``gamma`` is diagonal and the leaves are semicircles straddling
        0 at heights ``e^s``, which keeps long matrix products well scaled.
        """
        winv = self.frame.inverse()
        return winv @ self.gamma @ self.frame, tuple(winv(lf.geodesic) for lf in self.leaves)

    def with_weights(self, weights: Sequence[float]) -> "ShearConfig":
        """Same geometry, new masses."""
        if len(weights) != self.n:
            raise ValueError("one weight per leaf")
        leaves = tuple(replace(lf, weight=float(w)) for lf, w in zip(self.leaves, weights))
        crossings = tuple(replace(c, weight=float(w)) for c, w in zip(self.crossings, weights))
        return replace(self, leaves=leaves, crossings=crossings)


def _as_leaf(item) -> Leaf:
    if isinstance(item, Leaf):
        return item
    if len(item) == 3:
        g, w, label = item
        return Leaf(g, float(w), label)
    g, w = item
    return Leaf(g, float(w))


def default_basepoint(g: Geodesic) -> InteriorPoint:
    """Point of ``g`` closest to ``i``."""
    return K.project(InteriorPoint(0.0, 1.0), g)


def build_config(
    gamma: Isometry,
    leaves: Iterable,
    basepoint=None,
    k_check: int = K_CHECK,
) -> ShearConfig:
    """Validate a shear configuration and compute its crossing data.

    ``leaves`` holds :class:`Leaf` objects or ``(geodesic, weight)`` pairs.
    Leaves are re-oriented to point left of the axis and sorted by where they
    cross it; their translates by ``gamma**k`` for ``|k| <= k_check`` must not
    cross any leaf.
    """
    if K.classify(gamma) != "hyperbolic":
        raise NotHyperbolic(f"gamma must be hyperbolic, got {K.classify(gamma)}")
    ax = K.axis(gamma)
    ell = K.translation_length(gamma)
    base = default_basepoint(ax) if basepoint is None else InteriorPoint.of(basepoint)
    if K.distance_to_geodesic(base, ax) > K.ON_GEODESIC_TOL:
        base = K.project(base, ax)

    rows = []
    for leaf in map(_as_leaf, leaves):
        try:
            cr = K.intersect(ax, leaf.geodesic)
        except SharedEndpoint as exc:
            raise LeafMissesAxis(f"{leaf.geodesic} is asymptotic to the axis") from exc
        if cr is None:
            raise LeafMissesAxis(f"{leaf.geodesic} does not cross the axis {ax}")
        raw = K.signed_position(ax, cr.point, base)
        # reducing the position mod the period moves the leaf to its translate
        k = math.floor(raw / ell)
        s = raw - k * ell
        if ell - s <= DUPLICATE_TOL:
            s, k = 0.0, k + 1
        if k:
            shift = _power(gamma, -k)
            leaf = replace(leaf, geodesic=shift(leaf.geodesic))
            cr = K.intersect(ax, leaf.geodesic)
        oriented = replace(leaf, geodesic=K.left_oriented(ax, leaf.geodesic))
        rows.append((s, oriented, CrossingData(s, cr.theta, leaf.weight, cr.cos, cr.sin, cr.point)))
    rows.sort(key=lambda r: r[0])

    s_sorted = [r[0] for r in rows]
    for i in range(len(rows)):
        j = (i + 1) % len(rows)
        if len(rows) > 1 and (s_sorted[j] - s_sorted[i]) % ell <= DUPLICATE_TOL:
            raise DuplicateCrossing(f"two leaves cross the axis at s={s_sorted[i]:.12g}")

    leaves_sorted = tuple(r[1] for r in rows)
    _check_lamination(gamma, [lf.geodesic for lf in leaves_sorted], k_check)
    return ShearConfig(
        gamma=gamma,
        leaves=leaves_sorted,
        basepoint=base,
        axis=ax,
        length=ell,
        crossings=tuple(r[2] for r in rows),
    )


def _power(f: Isometry, k: int) -> Isometry:
    base = f if k >= 0 else f.inverse()
    out = Isometry.identity()
    for _ in range(abs(k)):
        out = out @ base
    return out


def _log_feet(ax: Geodesic, g: Geodesic) -> tuple[float, float]:
    """``(log|u|, log v)`` for the endpoints ``u < 0 < v`` of ``g`` in the axis frame."""
    u, v = K._in_frame(ax, g)
    if u > v:
        u, v = v, u
    return math.log(-u), math.log(v)


def _check_lamination(gamma: Isometry, geodesics: list[Geodesic], k_check: int) -> None:
    """No leaf crosses a ``gamma**k`` translate of a leaf, ``|k| <= k_check``.

    In the axis frame ``gamma`` scales by ``e^l``, so translating shifts both
    log-coordinates of a leaf by ``k l``; two leaves cross exactly when their
    log-coordinates are ordered oppositely.
    """
    ax = K.axis(gamma)
    ell = K.translation_length(gamma)
    feet = [_log_feet(ax, g) for g in geodesics]
    for i, (x1, y1) in enumerate(feet):
        for j, (x2, y2) in enumerate(feet):
            for k in range(-k_check, k_check + 1):
                if k == 0 and j <= i:
                    continue
                dx = x1 - x2 - k * ell
                dy = y1 - y2 - k * ell
                if abs(dx) <= K.TOL_ALG or abs(dy) <= K.TOL_ALG:
                    continue  # same leaf or asymptotic
                if dx * dy < 0:
                    raise LeavesCross(f"leaf {i} crosses the gamma^{k} translate of leaf {j}")


def shear_product(config: ShearConfig, t: float) -> Isometry:
    """The product of leaf translations, without ``gamma``."""
    phi = Isometry.identity()
    for leaf in config.leaves:
        phi = phi @ K.translate_along(leaf.geodesic, t * leaf.weight)
    return phi


def sheared_isometry(config: ShearConfig, t: float) -> Isometry:
    rho = shear_product(config, t) @ config.gamma
    if K.classify(rho) != "hyperbolic":
        raise DegenerateResult(f"sheared isometry at t={t} is {K.classify(rho)}")
    return rho


def telescoped_isometry(config: ShearConfig, t: float) -> Isometry:
    """Sheared isometry built from cumulative masses, one pair per gap.

    Each component between consecutive leaves contributes a translation by
    its cumulative mass on the leaf facing the start and the opposite
    translation on the leaf facing the end.  The pairs telescope to
    :func:`sheared_isometry`; kept as an independent construction.
    """
    geos = [lf.geodesic for lf in config.leaves]
    cum = np.cumsum([t * lf.weight for lf in config.leaves])
    phi = Isometry.identity()
    for k in range(len(geos) - 1):
        phi = phi @ K.translate_along(geos[k], cum[k]) @ K.translate_along(geos[k + 1], -cum[k])
    if geos:
        phi = phi @ K.translate_along(geos[-1], cum[-1])
    return phi @ config.gamma


def framed_sheared_isometry(config: ShearConfig, t: float) -> Isometry:
    """:func:`sheared_isometry` conjugated into the axis frame of the config."""
    gamma, leaves = config.framed
    phi = Isometry.identity()
    for g, leaf in zip(leaves, config.leaves):
        phi = phi @ K.translate_along(g, t * leaf.weight)
    rho = phi @ gamma
    if K.classify(rho) != "hyperbolic":
        raise DegenerateResult(f"sheared isometry at t={t} is {K.classify(rho)}")
    return rho


def deformed_length(config: ShearConfig, t: float) -> float:
    """Translation length of the sheared isometry (computed in the axis frame)."""
    return K.translation_length(framed_sheared_isometry(config, t))


def _framed_leaves(config: ShearConfig, t: float) -> list[Geodesic]:
    _, leaves = config.framed
    out = []
    phi = Isometry.identity()
    for g, leaf in zip(leaves, config.leaves):
        out.append(phi(g))
        phi = phi @ K.translate_along(g, t * leaf.weight)
    return out


def deformed_leaves(config: ShearConfig, t: float) -> list[Geodesic]:
    """Leaf ``j`` transported by the translations along the leaves before it."""
    return [config.frame(g) for g in _framed_leaves(config, t)]


def recursive_transport(config: ShearConfig, t: float) -> Isometry:
    """Same product as :func:`shear_product`, built leaf by leaf from moved leaves.

    ``Phi_j = T(moved l_j, t a_j) o Phi_{j-1}`` with ``moved l_j = Phi_{j-1}(l_j)``;
    agreement with the plain product is the conjugation identity
    ``T(Phi(l), u) = Phi T(l, u) Phi^-1``.
    """
    phi = Isometry.identity()
    for leaf in config.leaves:
        moved = phi(leaf.geodesic)
        phi = K.translate_along(moved, t * leaf.weight) @ phi
    return phi


def deformed_crossings(config: ShearConfig, t: float) -> list[CrossingData]:
    """Crossing data of the moved leaves against the moved axis.

    Arc positions are measured from the projection of the basepoint and are
    shifted by whole periods to stay next to their values at ``t = 0``.
    """
    rho = framed_sheared_isometry(config, t)
    ax = K.axis(rho)
    ell = K.translation_length(rho)
    base = K.project(InteriorPoint(0.0, 1.0), ax)
    out = []
    for j, (g, c0) in enumerate(zip(_framed_leaves(config, t), config.crossings)):
        try:
            cr = K.intersect(ax, g)
        except SharedEndpoint:
            cr = None
        if cr is None:
            raise CrossingLost(f"leaf {j} no longer crosses the axis at t={t}")
        s = K.signed_position(ax, cr.point, base)
        s += ell * round((c0.s - s) / ell)
        out.append(CrossingData(s, cr.theta, c0.weight, cr.cos, cr.sin, config.frame(cr.point)))
    return out


def check_crossings_persist(config: ShearConfig, ts: Iterable[float]) -> None:
    """Raise :class:`CrossingLost` unless every crossing survives at every ``t``.

    Disjoint leaves keep crossing the sheared axis for every real ``t``, so in
    practice this fires when floating point gives out (large ``|t a|``).
    """
    for t in ts:
        try:
            deformed_crossings(config, t)
        except CrossingLost:
            raise
        except (GeometryError, ValueError, ArithmeticError) as exc:
            raise CrossingLost(f"crossing data breaks down at t={t}: {exc}") from exc


def arc_distance(config: ShearConfig, i: int, j: int, oriented: bool = False) -> float:
    """Arc length between crossings ``i`` and ``j``.

    Unoriented: the shorter of the two arcs.  Oriented: from ``i`` forward
    (along the axis direction) to ``j``, in ``[0, length)``.
    """
    ell = config.length
    d = (config.crossings[j].s - config.crossings[i].s) % ell
    if oriented:
        return d
    return min(d, ell - d)


# --- spiralling leaves around a closed leaf ---------------------------------


def _vertical(x: float) -> Geodesic:
    return Geodesic.of(x, "inf")


@dataclass(frozen=True, eq=False)
class SpiralFamily:
    """Vertical leaves accumulating on the imaginary axis from both sides.

    ``g[i]`` (``i >= 0``) lie left of the axis and ``h[i]`` right of it, both
    indexed toward the axis; ``P_i`` sits between ``g[i]`` and ``g[i+1]``,
    ``Q_i`` between ``h[i]`` and ``h[i+1]``.  ``a[i-1]`` is the mass crossed
    going from ``P_{i-1}`` to ``P_i``, ``b[i-1]`` the mass crossed going
    rightward from ``Q_i`` to ``Q_{i-1}``, and ``total`` the mass from ``P_0``
    to ``Q_0``.  All leaves are oriented upward.
    """

    length: float
    gamma: Isometry
    g_feet: tuple[float, ...]
    h_feet: tuple[float, ...]
    a: tuple[float, ...]
    b: tuple[float, ...]
    total: float

    @property
    def n(self) -> int:
        return len(self.a)

    def g(self, i: int) -> Geodesic:
        return _vertical(self.g_feet[i])

    def h(self, i: int) -> Geodesic:
        return _vertical(self.h_feet[i])

    def one_sided(self, n: int, scale: float = 1.0) -> Isometry:
        """``T(g_1, a_1) ... T(g_n, a_n)``: the left half on its own."""
        phi = Isometry.identity()
        for i in range(1, n + 1):
            phi = phi @ K.translate_along(self.g(i), scale * self.a[i - 1])
        return phi

    def two_sided(self, n: int, scale: float = 1.0) -> Isometry:
        """Naive product of both halves, nearest-the-axis factors in the middle."""
        psi = self.one_sided(n, scale)
        for j in range(n, 0, -1):
            psi = psi @ K.translate_along(self.h(j), scale * self.b[j - 1])
        return psi

    def interleaved(self, n: int, scale: float = 1.0) -> Isometry:
        """Product over ``{P_1..P_n, Q_n..Q_1}`` with cumulative masses.

        Each component contributes ``T(near side, +m) T(far side, -m)`` with
        ``m`` its cumulative mass from ``P_0``, followed by ``T(h_1, total)``.
        """
        phi = Isometry.identity()
        cum = 0.0
        for i in range(1, n + 1):
            cum += scale * self.a[i - 1]
            phi = phi @ K.translate_along(self.g(i), cum) @ K.translate_along(self.g(i + 1), -cum)
        cum_q = [scale * self.total]
        for j in range(1, n + 1):
            cum_q.append(cum_q[-1] - scale * self.b[j - 1])
        for j in range(n, 0, -1):
            m = cum_q[j]
            phi = phi @ K.translate_along(self.h(j + 1), m) @ K.translate_along(self.h(j), -m)
        return phi @ K.translate_along(self.h(1), scale * self.total)

    def closed_leaf_image(self, scale: float = 1.0) -> Isometry:
        """Sheared image of ``gamma``: the two leaves of one period, then ``gamma``."""
        return self.one_sided(2, scale) @ self.gamma


def dilation(f: Isometry) -> float:
    """``lambda`` for an affine map ``z -> lambda z + c`` (fixes infinity)."""
    m = f.m
    if abs(m[1, 0]) > K.TOL_ALG * max(1.0, np.abs(m).max()):
        raise ValueError("isometry does not fix infinity")
    return float(m[0, 0] / m[1, 1])


def spiral_config(
    length: float,
    g0: Geodesic,
    g1: Geodesic,
    weights: Sequence[float],
    n: int,
    h_weights: Sequence[float] | None = None,
    total: float = 0.0,
    h0: Geodesic | None = None,
    h1: Geodesic | None = None,
) -> SpiralFamily:
    """Leaf families ``g_{2k} = gamma^-k(g_0)``, ``g_{2k+1} = gamma^-k(g_1)``.

    ``gamma(z) = e^length z``.  ``weights`` (and ``h_weights``) are either
    given for every leaf ``1..n+1`` or cycled with period 2, which is what an
    invariant transverse distribution assigns to lifts of two spiralling
    leaves.  The right-hand seeds default to mirror images of ``g0, g1``.
    """
    feet_g = _seed_feet(g0, g1, length, side=-1)
    feet_h = _seed_feet(
        h0 if h0 is not None else _vertical(-feet_g[0]),
        h1 if h1 is not None else _vertical(-feet_g[1]),
        length,
        side=+1,
    )
    count = n + 2
    decay = math.exp(-length)

    def family(x0, x1):
        return tuple((x0 if i % 2 == 0 else x1) * decay ** (i // 2) for i in range(count))

    def cycled(w):
        w = list(w) if w is not None else [0.0]
        if not w:
            w = [0.0]
        return tuple(float(w[i % len(w)]) if len(w) < n + 1 else float(w[i]) for i in range(n + 1))

    gamma = Isometry.diag(math.exp(length / 2.0))
    return SpiralFamily(
        length=float(length),
        gamma=gamma,
        g_feet=family(*feet_g),
        h_feet=family(*feet_h),
        a=cycled(weights),
        b=cycled(h_weights),
        total=float(total),
    )


def _seed_feet(s0: Geodesic, s1: Geodesic, length: float, side: int) -> tuple[float, float]:
    feet = []
    for g in (s0, s1):
        ends = (g.source, g.target)
        finite = [p for p in ends if not p.is_infinite]
        if len(finite) != 1:
            raise BadSeedLeaves(f"{g} is not vertical")
        feet.append(finite[0].value)
    x0, x1 = feet
    nxt = x0 * math.exp(-length)
    ok = side * x0 > 0 and side * x1 > 0 and abs(x0) > abs(x1) > abs(nxt)
    if not ok:
        raise BadSeedLeaves(
            f"seeds must satisfy |x0| > |x1| > e^-L |x0| on the {'left' if side < 0 else 'right'}"
        )
    return x0, x1
