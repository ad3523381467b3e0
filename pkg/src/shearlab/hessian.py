"""Positivity certificates for the second derivative of length functions.

The second derivative is the quadratic form ``B^T H B / (2 sinh(l/2))`` with
``B_i = a_i sin(theta_i)`` and ``H_ij = cosh(l/2 - D[i, j])``.  ``H`` has
positive entries and a strictly dominant diagonal.  Those two entry-wise
properties do not by themselves make a matrix positive definite (see
:func:`gauss_positivity`), but ``H`` is: ``cosh(l/2 - |s|) / (2 sinh(l/2))``
is the Green's function of ``1 - d^2/ds^2`` on a circle of length ``l``, whose
Fourier coefficients are all positive.  Elimination without row exchanges
therefore always succeeds on ``H``, and serves as its certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .derivatives import WeightedMulticurve
from .errors import HypothesesFail, SingleCrossing
from .shear import ShearConfig, arc_distance

SYMMETRY_TOL = 1e-12


class SymMatrix:
    """Real symmetric matrix, symmetrized on construction."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("need a square matrix")
        scale = max(1.0, float(np.abs(a).max(initial=0.0)))
        if np.abs(a - a.T).max(initial=0.0) > SYMMETRY_TOL * scale:
            raise ValueError("matrix is not symmetric")
        a = 0.5 * (a + a.T)
        a.flags.writeable = False
        self.entries = a

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def quadratic(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(x @ self.entries @ x)

    def __repr__(self):
        return f"SymMatrix({self.entries.tolist()})"


@dataclass(frozen=True)
class PositivityCertificate:
    verdict: str  # "definite" | "semidefinite" | "not_applicable"
    pivots: tuple[float, ...]
    lower_bound_coeffs: tuple[float, ...]
    # for not_applicable inputs: outcome of a generic factorization
    generic_definite: bool | None = None
    # the entry-wise hypotheses held but elimination met a nonpositive pivot
    hypotheses_insufficient: bool = False


def _hypotheses(a: np.ndarray, tol: float) -> tuple[bool, bool]:
    """(weak, strict) forms of: entries >= 0 and each diagonal entry dominates its row."""
    n = a.shape[0]
    if np.any(a < -tol):
        return False, False
    off = a - np.diag(np.diag(a))
    row_max = off.max(axis=1) if n > 1 else np.zeros(n)
    gap = np.diag(a) - row_max
    strict = bool(np.all(gap > tol)) if n > 1 else bool(a[0, 0] > tol)
    weak = bool(np.all(gap >= -tol)) if n > 1 else bool(a[0, 0] >= -tol)
    return weak, strict


def lower_bound_coeffs(a: SymMatrix) -> tuple[float, ...]:
    """``d_i = min_{j != i} (a_ii - a_ij)``."""
    m = a.entries
    n = a.n
    if n == 1:
        return (float(m[0, 0]),)
    return tuple(float(min(m[i, i] - m[i, j] for j in range(n) if j != i)) for i in range(n))


def _eliminate(m: np.ndarray, tol: float) -> tuple[list[float], bool]:
    """Pivots of Gauss elimination without row exchanges.

    Returns ``(pivots, clean)``.  A pivot within ``tol`` of zero is skipped
    when the rest of its column vanishes too (a semidefinite direction);
    otherwise, and after a negative pivot, elimination stops and ``clean``
    is False.
    """
    m = m.copy()
    n = m.shape[0]
    pivots: list[float] = []
    for k in range(n):
        p = float(m[k, k])
        pivots.append(p)
        col = m[k + 1 :, k]
        if p < -tol:
            return pivots, False
        if abs(p) <= tol:
            if np.any(np.abs(col) > tol):
                return pivots, False
            continue
        m[k + 1 :, k + 1 :] -= np.outer(col, m[k, k + 1 :]) / p
    return pivots, True


def _generic_definite(m: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(m)
        return True
    except np.linalg.LinAlgError:
        return False


def gauss_positivity(a: SymMatrix, tol: float | None = None) -> PositivityCertificate:
    """Certify positivity of ``a`` by plain Gauss elimination.

    The entry-wise hypotheses (nonnegative entries, ``a_ii > a_ij`` for
    ``j != i``) are checked first, then elimination without row exchanges
    is carried out.  ``definite`` needs the strict hypotheses and all
    pivots positive; ``semidefinite`` the weak form ``a_ii >= a_ij`` and
    no negative pivot.  The hypotheses alone do not force positive pivots
    once ``n >= 3``: ``[[1, .9, 0], [.9, 1, .9], [0, .9, 1]]`` satisfies
    them and is indefinite.  Such inputs, and inputs failing the
    hypotheses, get ``not_applicable`` with a Cholesky outcome attached.
    """
    m = a.entries
    if tol is None:
        tol = 1e-12 * a.n * max(1.0, float(np.abs(m).max(initial=0.0)))
    weak, strict = _hypotheses(m, tol)
    coeffs = lower_bound_coeffs(a)
    pivots, clean = _eliminate(m, tol)
    pivots_t = tuple(pivots)
    if clean and strict and all(p > tol for p in pivots):
        return PositivityCertificate("definite", pivots_t, coeffs)
    if clean and weak:
        return PositivityCertificate("semidefinite", pivots_t, coeffs)
    return PositivityCertificate(
        "not_applicable", pivots_t, coeffs, _generic_definite(m), hypotheses_insufficient=weak
    )


def quadratic_lower_bound(a: SymMatrix, x: Sequence[float]) -> tuple[float, float]:
    """``(x^T A x, sum d_i x_i^2)``.

    The second is a lower bound for the first whenever ``A - diag(d)`` is
    positive semidefinite.  The entry-wise hypotheses checked here are
    necessary but, for ``n >= 3``, not sufficient for that.
    """
    weak, _ = _hypotheses(a.entries, 0.0)
    if not weak:
        raise HypothesesFail("need nonnegative entries and a_ii >= a_ij")
    x = np.asarray(x, dtype=float)
    return a.quadratic(x), math.fsum(d * xi * xi for d, xi in zip(lower_bound_coeffs(a), x))


def hessian_matrix(config: ShearConfig) -> SymMatrix:
    """``H_ij = cosh(l/2 - l_ij)``, diagonal ``cosh(l/2)``."""
    h = np.cosh(config.length / 2.0 - config.oriented_distances())
    return SymMatrix(0.5 * (h + h.T))


def hessian_vector(config: ShearConfig) -> np.ndarray:
    """``B_i = a_i sin(theta_i)``: second derivative is ``B^T H B / (2 sinh(l/2))``."""
    return config.weights * config.sines


def gaps(config: ShearConfig) -> np.ndarray:
    """``eps_i``: arc distance from crossing ``i`` to the nearest other crossing."""
    n = config.n
    if n < 2:
        raise SingleCrossing("the gap to the nearest other crossing needs two crossings")
    return np.array([min(arc_distance(config, i, j) for j in range(n) if j != i) for i in range(n)])


def hessian_lower_bound(config: ShearConfig) -> float:
    """``1/(2 sinh(l/2)) sum_i sinh(l/2 - eps_i) eps_i a_i^2 sin^2(theta_i)``.

    Each ``d_i = cosh(l/2) - cosh(l/2 - eps_i)`` is at least
    ``sinh(l/2 - eps_i) eps_i``, so the bound holds whenever
    ``H - diag(d)`` is positive semidefinite.  That is not always the case:
    with masses chosen along a negative direction of ``H - diag(d)`` the
    bound exceeds the second derivative.  For masses of moderate oscillation
    it holds with a wide margin.
    """
    eps = gaps(config)
    half = config.length / 2.0
    b = hessian_vector(config)
    return math.fsum((np.sinh(half - eps) * eps * b * b).tolist()) / (2.0 * math.sinh(half))


def bound_tolerance(config: ShearConfig, rel: float = 1e-10) -> float:
    """Slack for ``d2 >= bound``: ``rel * cosh(l/2) * sum a_i^2``."""
    return rel * math.cosh(config.length / 2.0) * float(np.sum(config.weights**2))


def hessian_lower_bound_multicurve(
    mc: WeightedMulticurve, arcs: Sequence[Sequence[tuple[int, int]]] | None = None
) -> float:
    """Lower bound for ``sum_k mu_k d2(component_k)``.

    ``arcs`` groups crossings into isolated arcs: each arc is a list of
    ``(component, crossing)`` pairs sharing one mass (one leaf).  By default
    every crossing is its own arc.  For an arc ``s`` with gap ``eps_s`` (the
    smallest gap of its crossings) the contribution is
    ``sinh(l_k/2 - eps_s) eps_s a_s^2 sum mu_k sin^2(theta) / (2 sinh(l_k/2))``,
    evaluated per crossing with the length ``l_k`` of its component.
    """
    if arcs is None:
        arcs = [[(k, i)] for k, cfg in enumerate(mc.components) for i in range(cfg.n)]
    comp_gaps = [gaps(cfg) for cfg in mc.components]
    total = []
    for arc in arcs:
        eps = min(comp_gaps[k][i] for k, i in arc)
        for k, i in arc:
            cfg = mc.components[k]
            half = cfg.length / 2.0
            b = cfg.weights[i] * cfg.sines[i]
            total.append(mc.mu[k] * math.sinh(half - eps) * eps * b * b / (2.0 * math.sinh(half)))
    return math.fsum(total)

