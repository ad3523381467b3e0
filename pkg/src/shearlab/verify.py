"""Seeded verification suites.

Every check draws its own cases from a generator seeded by ``(seed, check
name)``, so a suite is reproducible and checks do not perturb one another.
Each check reports the worst error it saw against its tolerance.
"""

from __future__ import annotations

import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import derivatives as Dv
from . import hessian as H
from . import kernel as K
from . import oracles as O
from . import shear as S
from . import twist as TW
from .sampling import random_config, random_isometry, random_twist_scene


@dataclass(frozen=True)
class CheckResult:
    name: str
    criterion: int
    worst: float
    tol: float
    cases: int
    passed: bool
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] c{self.criterion} {self.name}: worst {self.worst:.3e} (tol {self.tol:.1e}, {self.cases} cases){' ' + self.detail if self.detail else ''}"


def _rel(x: float, ref: float) -> float:
    err = abs(x - ref)
    return err / abs(ref) if ref != 0 else err


def _rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


class _Worst:
    """Running maximum of an error, remembering where it occurred."""

    def __init__(self):
        self.value = 0.0
        self.where = ""

    def add(self, err: float, where: str = ""):
        if not err <= self.value:  # also catches nan
            self.value = err
            self.where = where


def _result(name, crit, w: _Worst, tol, cases, scale, ok=None) -> CheckResult:
    tol = tol * scale
    passed = (w.value <= tol) if ok is None else ok
    return CheckResult(name, crit, w.value, tol, cases, bool(passed), w.where if not passed else "")


# --- criterion 7: kernel identities ------------------------------------------


def _random_pair(rng):
    ends = rng.standard_normal(4) * 2.0
    w = random_isometry(rng)
    return w(K.Geodesic.of(ends[0], ends[1])), w(K.Geodesic.of(ends[2], ends[3]))


def check_cross_ratio_angle(seed, cases=1000, scale=1.0):
    rng = _rng(seed, "cross_ratio_angle")
    w = _Worst()
    done = 0
    while done < cases:
        g, h = _random_pair(rng)
        cr = K.intersect(g, h)
        if cr is None:
            continue
        done += 1
        theta = O.tangent_angle_between(g, h, cr.point)
        hl = K.left_oriented(g, h)
        x = K.cross_ratio(g.source, hl.source, hl.target, g.target)
        w.add(max(abs(x - math.cos(theta / 2) ** 2), abs(cr.theta - theta)), f"pair {done}")
    return _result("cross_ratio_vs_tangent_angle", 7, w, 1e-10, cases, scale)


def check_cross_ratio_distance(seed, cases=1000, scale=1.0):
    rng = _rng(seed, "cross_ratio_distance")
    w = _Worst()
    done = 0
    while done < cases:
        g, h = _random_pair(rng)
        if K.links(g, h):
            continue
        done += 1
        d = O.minimized_distance(g, h)
        x = K.cross_ratio(g.source, h.source, h.target, g.target)
        x = min(x, 1.0 - x)
        sh2 = math.sinh(d / 2) ** 2
        w.add(max(_rel(-x, sh2), _rel(K.geodesic_distance(g, h), d)), f"pair {done}")
    return _result("cross_ratio_vs_minimized_distance", 7, w, 1e-10, cases, scale)


def _separated_points(rng, f: K.Isometry, sep: float = 0.05):
    """Four ideal points pairwise ``sep`` apart (projectively), before and after ``f``.

    Two points at projective distance ``delta`` carry a cross-ratio condition
    number of order ``1/delta``; well-separated samples keep the check about
    the isometry rather than about input rounding.
    """
    while True:
        pts = [K.BoundaryPoint.of(x) for x in rng.standard_normal(4) * 2]
        ok = all(
            abs(K._det(a, b)) >= sep and abs(K._det(f(a), f(b))) >= sep
            for i, a in enumerate(pts)
            for b in pts[i + 1 :]
        )
        if ok:
            return pts


def check_invariance(seed, cases=1000, scale=1.0):
    """Conjugation, cross-ratio, distance and one-parameter-group identities.

    The group-law residual is measured relative to ``|T^u| |T^v|``, the scale
    of rounding in a matrix product.
    """
    rng = _rng(seed, "invariance")
    w = _Worst()
    for k in range(cases):
        f = random_isometry(rng)
        ell = rng.uniform(0.5, 5.0)
        gamma = f @ K.Isometry.diag(math.exp(ell / 2)) @ f.inverse()
        pts = _separated_points(rng, f)
        x0 = K.cross_ratio(*pts)
        x1 = K.cross_ratio(*(f(p) for p in pts))
        p = K.InteriorPoint(rng.standard_normal(), rng.uniform(0.2, 2))
        q = K.InteriorPoint(rng.standard_normal(), rng.uniform(0.2, 2))
        d0 = K.point_distance(p, q)
        d1 = K.point_distance(f(p), f(q))
        g = f(K.Geodesic.of(pts[0], pts[1]))
        u, v = rng.uniform(-2, 2, 2)
        tu, tv = K.translate_along(g, u), K.translate_along(g, v)
        size = float(np.abs(tu.m).max() * np.abs(tv.m).max())
        group = (tu @ tv).distance(K.translate_along(g, u + v)) / size
        errs = (
            _rel(K.translation_length(gamma), ell),
            abs(x1 - x0) / max(1.0, abs(x0)),
            _rel(d1, d0),
            group,
        )
        w.add(max(errs), f"case {k}")
    return _result("isometry_invariance", 7, w, 1e-12, cases, scale)


# --- criterion 1: derivative formulas vs oracles ------------------------------


def check_formula_oracles(seed, cases=200, scale=1.0):
    rng = _rng(seed, "formula_oracles")
    worst = {k: _Worst() for k in ("dual", "fd1", "fd2", "fd3")}
    for k in range(cases):
        c = random_config(rng)
        d1 = Dv.d1_length(c)
        worst["dual"].add(_rel(d1, O.dual_derivative(c)), f"config {k}")
        worst["fd1"].add(_rel(d1, O.length_derivative_fd(c, 1).value), f"config {k}")
        worst["fd2"].add(_rel(Dv.d2_length(c), O.length_derivative_fd(c, 2).value), f"config {k}")
        worst["fd3"].add(_rel(Dv.d3_length(c), O.length_derivative_fd(c, 3).value), f"config {k}")
    tols = {"dual": 1e-10, "fd1": 1e-8, "fd2": 1e-6, "fd3": 1e-4}
    names = {"dual": "d1_vs_dual", "fd1": "d1_vs_fd", "fd2": "d2_vs_fd", "fd3": "d3_vs_fd"}
    return [_result(names[k], 1, worst[k], tols[k], cases, scale) for k in tols]


def check_fd_error_estimate(seed, cases=200, scale=1.0):
    """The tableau error estimate of the order-1 FD covers its actual error."""
    rng = _rng(seed, "fd_error_estimate")
    covered = 0
    for k in range(cases):
        c = random_config(rng)
        r = O.length_derivative_fd(c, 1)
        covered += abs(r.value - O.dual_derivative(c)) <= r.error
    share = covered / cases if cases else 1.0
    w = _Worst()
    w.add(1.0 - share, f"covered {covered}/{cases}")
    return _result("fd_error_estimate_coverage", 1, w, 0.05, cases, 1.0, ok=share >= 0.95)


# --- criterion 2: angle and arc-length variations -----------------------------


def check_variation_formulas(seed, cases=100, scale=1.0):
    rng = _rng(seed, "variation_formulas")
    w_cos, w_sin, w_arc, w_pyth = _Worst(), _Worst(), _Worst(), _Worst()

    def fd(c, fn):
        return O.fd_derivative(lambda t: fn(S.deformed_crossings(c, t), t), 1).value

    for k in range(cases):
        c = random_config(rng)
        for p in range(c.n):
            w_cos.add(_rel(Dv.d_cos_theta(c, p), fd(c, lambda cr, t: cr[p].cos)), f"config {k}")
            w_sin.add(_rel(Dv.d_sin_theta(c, p), fd(c, lambda cr, t: cr[p].sin)), f"config {k}")
            w_pyth.add(abs(c.sines[p] * Dv.d_sin_theta(c, p) + c.cosines[p] * Dv.d_cos_theta(c, p)))
            q = (p + 1 + k) % c.n
            if q == p:
                continue
            ref = fd(c, lambda cr, t: (cr[q].s - cr[p].s) % S.deformed_length(c, t))
            w_arc.add(_rel(Dv.d_arc_distance(c, p, q), ref), f"config {k}")
    return [
        _result("d_cos_theta_vs_fd", 2, w_cos, 1e-6, cases, scale),
        _result("d_sin_theta_vs_fd", 2, w_sin, 1e-6, cases, scale),
        _result("d_arc_distance_vs_fd", 2, w_arc, 1e-6, cases, scale),
        _result("pythagorean_identity", 2, w_pyth, 1e-12, cases, scale),
    ]


# --- criterion 6: internal consistency ----------------------------------------


def check_recursive(seed, cases=200, scale=1.0):
    rng = _rng(seed, "recursive")
    w = _Worst()
    for k in range(cases):
        c = random_config(rng)
        e2 = _rel(Dv.recursive_derivative(c, 2), Dv.d2_length(c))
        e3 = _rel(Dv.recursive_derivative(c, 3), Dv.d3_length(c))
        w.add(max(e2, e3), f"config {k}")
    return _result("recursive_vs_closed_form", 6, w, 1e-10, cases, scale)


def check_twist_vs_d2(seed, cases=100, scale=1.0):
    rng = _rng(seed, "twist_vs_d2")
    w = _Worst()
    for k in range(cases):
        sc = random_twist_scene(rng, n_probes=1)
        single = S.build_config(sc.gamma, [(sc.h, 1.0)])
        w.add(abs(TW.d_cos_theta_l(sc, sc.h) - Dv.d2_length(single)), f"scene {k}")
    return _result("twist_d_cos_vs_single_leaf_d2", 6, w, 1e-12, cases, scale)


# --- criterion 8: convexity ---------------------------------------------------


def check_convexity(seed, cases=100, scale=1.0, grid: int = 41):
    rng = _rng(seed, "convexity")
    w = _Worst()
    ts = np.linspace(-1.0, 1.0, grid)
    for k in range(cases):
        c = random_config(rng, weight_range=(0.0, 1.0))
        values = [S.deformed_length(c, t) for t in ts]
        w.add(max(0.0, -min(TW.second_differences(values))), f"config {k}")
    return _result("convexity_second_differences", 8, w, 1e-9, cases, scale)


# --- criterion 3: twist closed forms ------------------------------------------


def check_twist(seed, cases=100, scale=1.0):
    rng = _rng(seed, "twist")
    keys = ("ell_prime", "f_h", "f_l", "ell_ll", "d_cos", "midpoint", "angles")
    w = {k: _Worst() for k in keys}

    def fd(f):
        return O.fd_derivative(f, 1).value

    grid = np.linspace(-1.0, 1.0, 9)
    for k in range(cases):
        sc = random_twist_scene(rng)
        at = f"scene {k}"
        w["ell_prime"].add(_rel(TW.ell_prime(sc), fd(lambda t: TW.twisted_length(sc, t))), at)
        w["f_h"].add(abs(TW.f_l_prime(sc, sc.h) + 0.5), at)
        for l in sc.probes:
            w["f_l"].add(_rel(TW.f_l_prime(sc, l), fd(lambda t: TW.f_l(sc, l, t))), at)
            ref = fd(lambda t: math.cos(TW.angle_at(sc, l, t)))
            w["d_cos"].add(_rel(TW.d_cos_theta_l(sc, l), ref), at)
        l, lp = sc.probes[0], sc.probes[-1]
        ref = fd(lambda t: TW.ell_hl(sc, lp, t) - TW.ell_hl(sc, l, t))
        w["ell_ll"].add(_rel(TW.ell_llprime_prime(sc, l, lp), ref), at)
        w["midpoint"].add(max(TW.midpoint_invariance(sc, t) for t in grid), at)
        w["angles"].add(max(TW.angle_symmetry(sc, t) for t in grid), at)
    spec = {
        "ell_prime": ("ell_prime_vs_fd", 1e-7),
        "f_h": ("f_h_prime_anchor", 1e-12),
        "f_l": ("f_l_prime_vs_fd", 1e-7),
        "ell_ll": ("ell_ll_prime_vs_fd", 1e-7),
        "d_cos": ("d_cos_theta_l_vs_fd", 1e-7),
        "midpoint": ("midpoint_on_axis", 1e-9),
        "angles": ("theta_h_equals_theta_h_prime", 1e-10),
    }
    return [_result(spec[k][0], 3, w[k], spec[k][1], cases, scale) for k in keys]


# --- criterion 4: positivity ----------------------------------------------------


def check_single_signed(seed, cases=500, scale=1.0):
    rng = _rng(seed, "single_signed")
    bad = 0
    lowest = math.inf
    for k in range(cases):
        sign = 1.0 if k % 2 == 0 else -1.0
        c = random_config(rng, weight_range=(0.0, sign) if sign > 0 else (sign, 0.0))
        d2 = Dv.d2_length(c)
        lowest = min(lowest, d2)
        bad += not d2 > 0
    w = _Worst()
    w.add(float(bad), f"smallest d2 {lowest:.3e}")
    return _result("single_signed_d2_positive", 4, w, 0.0, cases, 1.0, ok=bad == 0)


def check_lower_bound(seed, cases=500, scale=1.0):
    rng = _rng(seed, "lower_bound")
    w = _Worst()
    for k in range(cases):
        c = random_config(rng)
        slack = H.hessian_lower_bound(c) - Dv.d2_length(c)
        # measured in units of the scale-free tolerance
        w.add(max(0.0, slack) / H.bound_tolerance(c, 1.0), f"config {k}")
    return _result("d2_at_least_hessian_bound", 4, w, 1e-10, cases, scale)


def random_lemma_matrix(rng: np.random.Generator, strict: bool = True) -> H.SymMatrix:
    """Nonnegative symmetric matrix whose diagonal dominates each row entry."""
    n = int(rng.integers(1, 9))
    a = rng.uniform(0.0, 1.0, (n, n))
    a = 0.5 * (a + a.T)
    np.fill_diagonal(a, 0.0)
    row_max = a.max(axis=1) if n > 1 else np.zeros(1)
    margin = rng.uniform(1e-3, 1.0, n) if strict else np.zeros(n)
    np.fill_diagonal(a, row_max + margin)
    return H.SymMatrix(a)


def check_gauss_lemma(seed, cases=1000, scale=1.0, vectors: int = 100):
    """Certificates against sampled quadratic forms.

    A ``definite`` verdict must see ``x^T A x > 0`` for every sample, a
    ``semidefinite`` one ``>= -tol``, and a Cholesky-definite
    ``not_applicable`` one also ``> 0``.  The detail records how many
    matrices met the entry-wise hypotheses yet were not certified.
    """
    rng = _rng(seed, "gauss_lemma")
    counter = 0
    insufficient = 0
    for k in range(cases):
        a = random_lemma_matrix(rng, strict=k % 4 != 0)
        cert = H.gauss_positivity(a)
        xs = rng.standard_normal((vectors, a.n))
        quad = np.einsum("ki,ij,kj->k", xs, a.entries, xs)
        tol = 1e-12 * a.n * float(np.abs(a.entries).max()) * (xs**2).sum(axis=1)
        if cert.verdict == "definite" or cert.generic_definite:
            counter += int(np.sum(quad <= 0))
        elif cert.verdict == "semidefinite":
            counter += int(np.sum(quad < -tol))
        insufficient += cert.hypotheses_insufficient
    w = _Worst()
    w.add(float(counter), f"{counter} counterexamples")
    note = f"{insufficient} matrices met the entry-wise hypotheses but are not positive"
    res = _result("gauss_certificate_vs_sampling", 4, w, 0.0, cases, 1.0, ok=counter == 0)
    return CheckResult(res.name, res.criterion, res.worst, res.tol, res.cases, res.passed, note)


# --- criterion 5: spiralling leaves -------------------------------------------


def check_closed_leaf(seed, cases=100, scale=1.0):
    rng = _rng(seed, "closed_leaf")
    w = _Worst()
    for k in range(cases):
        L = rng.uniform(0.5, 3.0)
        x0 = -rng.uniform(0.5, 2.0)
        x1 = x0 * math.exp(-L * rng.uniform(0.2, 0.8))
        # the identity needs L + a_1 + a_2 > 0 (a translation length is positive)
        a = rng.uniform(-0.25 * L, 1.0, 2)
        fam = S.spiral_config(L, K.Geodesic.of(x0, "inf"), K.Geodesic.of(x1, "inf"), a, 2)
        w.add(abs(K.translation_length(fam.closed_leaf_image()) - (L + a.sum())), f"case {k}")
    return _result("closed_leaf_identity", 5, w, 1e-12, cases, scale)


def spiral_instance(n: int = 30) -> S.SpiralFamily:
    """Gap ratio 1/2 per leaf and masses alternating ``+1, -1`` on both sides."""
    return S.spiral_config(
        math.log(2.0),
        K.Geodesic.of(-1.0, "inf"),
        K.Geodesic.of(-0.7, "inf"),
        [1.0, -1.0],
        n,
        h_weights=[1.0, -1.0],
        total=0.5,
    )


def check_spiral_cauchy(seed, cases=30, scale=1.0):
    trace = O.spiral_convergence(spiral_instance(max(cases, 4)))
    rate = trace[-1].rate
    w = _Worst()
    w.add(rate, f"fitted slope {rate:.3f}")
    return _result("spiral_cauchy_decay", 5, w, 0.0, len(trace), 1.0, ok=rate is not None and rate < 0)


def check_spiral_dilation(seed, cases=30, scale=1.0):
    n = max(cases, 4)
    fam = S.spiral_config(
        math.log(2.0), K.Geodesic.of(-1.0, "inf"), K.Geodesic.of(-0.7, "inf"), [1.0, 1.0], n, total=0.5
    )
    naive = [math.log(S.dilation(fam.two_sided(k))) for k in range(1, n + 1)]
    ordered = [math.log(S.dilation(fam.interleaved(k))) for k in range(1, n + 1)]
    spread = max(ordered) - min(ordered)
    # the naive factor's log grows by one per step, so it has no limit
    steps = np.diff(naive)
    diverges = bool(np.all(steps > 0.5))
    w = _Worst()
    w.add(spread, f"naive log-dilation steps min {steps.min():.3f}")
    ok = diverges and spread <= 1e-12 * scale and abs(ordered[0] - 0.5) <= 1e-12 * scale
    return _result("spiral_dilation_ordering", 5, w, 1e-12, n, scale, ok=ok)


# --- registry -------------------------------------------------------------------

Check = Callable[..., "CheckResult | list[CheckResult]"]

SUITES: dict[str, list[Check]] = {
    "kernel": [check_cross_ratio_angle, check_cross_ratio_distance, check_invariance],
    "derivatives": [
        check_formula_oracles,
        check_fd_error_estimate,
        check_variation_formulas,
        check_recursive,
        check_convexity,
    ],
    "twist": [check_twist, check_twist_vs_d2],
    "hessian": [check_single_signed, check_lower_bound, check_gauss_lemma],
    "spiral": [check_closed_leaf, check_spiral_cauchy, check_spiral_dilation],
}


def _run_check(job) -> list[CheckResult]:
    check, seed, cases, scale = job
    kwargs = {} if cases is None else {"cases": cases}
    r = check(seed, scale=scale, **kwargs)
    return r if isinstance(r, list) else [r]


def run_suite(
    name: str, seed: int = 0, cases: int | None = None, scale: float = 1.0, workers: int = 1
) -> list[CheckResult]:
    """Run one suite (or ``"all"``); ``cases=None`` uses each check's default count.

    With ``workers > 1`` the checks run in a process pool.  Every check draws
    from its own seeded stream, so results do not depend on scheduling, and
    they come back in registry order.
    """
    if name == "all":
        checks = [c for s in SUITES.values() for c in s]
    elif name in SUITES:
        checks = list(SUITES[name])
    else:
        raise KeyError(f"unknown suite {name!r}")
    jobs = [(c, seed, cases, scale) for c in checks]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            batches = list(pool.map(_run_check, jobs))
    else:
        batches = [_run_check(j) for j in jobs]
    return [r for b in batches for r in b]
