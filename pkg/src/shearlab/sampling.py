"""Seeded random configurations for property checks and verification runs.

Leaves are drawn in the frame where the axis is the imaginary axis: a leaf
crossing it is a semicircle ``(u, v)`` with ``u < 0 < v``.  Drawing
``log|u|`` and ``log v`` as increasing sequences inside one period makes the
leaves nested, hence pairwise disjoint, and keeps them disjoint from their
``gamma``-translates.  A random isometry then moves the whole picture.
"""

from __future__ import annotations

import math

import numpy as np

from . import kernel as K
from . import shear as S


def random_isometry(rng: np.random.Generator, spread: float = 1.0) -> K.Isometry:
    """Product of a rotation about i, a dilation and a horizontal shift."""
    phi = rng.uniform(0, 2 * math.pi)
    rot = K.Isometry([[math.cos(phi / 2), math.sin(phi / 2)], [-math.sin(phi / 2), math.cos(phi / 2)]])
    dil = K.Isometry.diag(math.exp(rng.uniform(-spread, spread) / 2))
    shift = K.Isometry([[1.0, rng.uniform(-spread, spread)], [0.0, 1.0]])
    return shift @ dil @ rot


def _sorted_logs(rng, n, lo, hi, min_gap):
    while True:
        x = np.sort(rng.uniform(lo, hi, n))
        if n < 2 or np.min(np.diff(x)) > min_gap:
            return x


def random_config(
    rng: np.random.Generator,
    n_leaves: int | None = None,
    length: float | None = None,
    weight_range: tuple[float, float] = (-1.0, 1.0),
    n_range: tuple[int, int] = (2, 6),
    length_range: tuple[float, float] = (0.5, 5.0),
    min_gap: float = 0.02,
    offset: float = 1.0,
) -> S.ShearConfig:
    n = int(rng.integers(n_range[0], n_range[1] + 1)) if n_leaves is None else n_leaves
    ell = float(rng.uniform(*length_range)) if length is None else length
    gap = min(min_gap, 0.5 * ell / max(n, 1))
    xs = _sorted_logs(rng, n, 0.0, ell, gap)
    c = rng.uniform(-offset, offset)
    ys = _sorted_logs(rng, n, c, c + ell, gap)
    w = random_isometry(rng)
    leaves = []
    for x, y, a in zip(xs, ys, rng.uniform(*weight_range, n)):
        g = K.Geodesic.of(-math.exp(x), math.exp(y))
        leaves.append((w(g), float(a)))
    gamma = w @ K.Isometry.diag(math.exp(ell / 2)) @ w.inverse()
    return S.build_config(gamma, leaves)


def random_twist_scene(
    rng: np.random.Generator,
    n_probes: int = 3,
    length_range: tuple[float, float] = (0.5, 5.0),
    offset: float = 1.0,
):
    from . import twist as TW

    ell = float(rng.uniform(*length_range))
    x0 = rng.uniform(-1, 1)
    y0 = x0 + rng.uniform(-offset, offset)
    # probes strictly inside the period, away from h and h'
    xs = _sorted_logs(rng, n_probes, x0 + 0.05 * ell, x0 + 0.95 * ell, 0.01 * ell)
    ys = _sorted_logs(rng, n_probes, y0 + 0.05 * ell, y0 + 0.95 * ell, 0.01 * ell)
    w = random_isometry(rng)
    gamma = w @ K.Isometry.diag(math.exp(ell / 2)) @ w.inverse()
    h = w(K.Geodesic.of(-math.exp(x0), math.exp(y0)))
    probes = [w(K.Geodesic.of(-math.exp(x), math.exp(y))) for x, y in zip(xs, ys)]
    return TW.build_scene(gamma, h, probes)
