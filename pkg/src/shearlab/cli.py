"""Command line entry point: ``shearlab derive|hessian|twist|spiral|verify``.

Reports go to stdout as JSON with floats written to 17 significant digits.
Exit codes: 0 ok, 1 verification failure, 2 input or geometry error,
3 internal error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import derivatives as Dv
from . import kernel as K
from . import hessian as H
from . import oracles as O
from . import shear as S
from . import twist as TW
from . import verify as V
from .errors import (
    GeometryError,
    HypothesesFail,
    NotHyperbolic,
    SceneError,
    ShearlabError,
    TraceTooClose,
    UnsupportedOrder,
)
from .scene import SceneFile, parse_scene

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3
TOL_ENV = "SHEARLAB_TOL_SCALE"

# oracle agreement required by ``derive --oracle`` (relative error)
DERIVE_TOL = {1: 1e-8, 2: 1e-6, 3: 1e-4}
DUAL_TOL = 1e-10
TWIST_TOL = {"midpoint": 1e-9, "angle": 1e-10, "convexity": 1e-9}


class UsageError(Exception):
    """Bad flags or a scene of the wrong kind for the command."""


# --- output -------------------------------------------------------------------


def _num(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = format(x, ".17g")
    return text if any(c in text for c in ".en") else text + ".0"


def dumps(obj, indent: int | None = 2, _level: int = 0) -> str:
    """JSON text with 17-significant-digit floats and sorted keys."""
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    pad = "" if indent is None else "\n" + " " * (indent * (_level + 1))
    end = "" if indent is None else "\n" + " " * (indent * _level)
    sep = ","
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        colon = ":" if indent is None else ": "
        items = [f"{pad}{json.dumps(str(k))}{colon}{dumps(v, indent, _level + 1)}" for k, v in sorted(obj.items())]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{dumps(v, indent, _level + 1)}" for v in obj]
        return "[" + sep.join(items) + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(report: dict, compact: bool = False) -> None:
    sys.stdout.write(dumps(report, None if compact else 2) + "\n")


def _tol_scale(honor: bool = True) -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None or not honor:
        return 1.0
    try:
        scale = float(raw)
    except ValueError:
        raise UsageError(f"{TOL_ENV} must be a number, got {raw!r}") from None
    if not scale > 0 or not math.isfinite(scale):
        raise UsageError(f"{TOL_ENV} must be positive and finite")
    return scale


def _rel(x: float, ref: float) -> float:
    err = abs(x - ref)
    return err / abs(ref) if ref != 0 else err


def _need(scene: SceneFile, *kinds: str) -> None:
    if scene.kind not in kinds:
        raise UsageError(f"this command needs a scene of kind {' or '.join(kinds)}, got {scene.kind}")


# --- derive -------------------------------------------------------------------


def _fd_times(config: S.ShearConfig, order: int) -> list[float]:
    """Shear parameters the finite-difference oracle samples, in caller units."""
    scale = float(np.max(np.abs(config.weights), initial=0.0)) or 1.0
    spec = O.FDSpec.default(order)
    extra = O.FDSpec(order, spec.h0, spec.levels + 4) if O.ADAPTIVE_RTOL[order] else spec
    return [t / scale for t in extra.sample_points()]


def cmd_derive(args) -> int:
    scene = parse_scene(args.scene)
    _need(scene, "shear_config", "multicurve")
    order = args.order
    tol_scale = _tol_scale()
    report: dict = {"command": "derive", "kind": scene.kind, "order": order}
    if scene.kind == "multicurve":
        mc = scene.value
        formulas = {1: Dv.d1_length_multicurve, 2: Dv.d2_length_multicurve}
        if order not in formulas:
            raise UnsupportedOrder("multicurves support orders 1 and 2")
        value = formulas[order](mc)
        report["formula"] = value
        if args.oracle:
            fd = O.fd_derivative(mc.length, order)
            report["oracle"] = _agreement({"fd": (fd.value, DERIVE_TOL[order])}, value, tol_scale, fd.error)
    else:
        config = scene.value
        value = Dv.length_derivative(config, order)
        report["formula"] = value
        report["crossings"] = config.n
        report["length"] = config.length
        if args.oracle:
            S.check_crossings_persist(config, _fd_times(config, order))
            fd = O.length_derivative_fd(config, order)
            oracles = {"fd": (fd.value, DERIVE_TOL[order])}
            if order == 1:
                oracles["dual"] = (O.dual_derivative(config), DUAL_TOL)
            report["oracle"] = _agreement(oracles, value, tol_scale, fd.error)
    _emit(report, args.json)
    return EXIT_OK if report.get("oracle", {}).get("agree", True) else EXIT_FAIL


def _agreement(oracles: dict, value: float, tol_scale: float, fd_error: float) -> dict:
    out: dict = {"fd_error_estimate": fd_error, "tol_scale": tol_scale}
    agree = True
    for name, (ref, tol) in oracles.items():
        rel = _rel(value, ref)
        ok = rel <= tol * tol_scale
        agree &= ok
        out[name] = {"value": ref, "rel_err": rel, "tol": tol * tol_scale, "agree": ok}
    out["agree"] = agree
    return out


# --- hessian ------------------------------------------------------------------


def _certificate(config: S.ShearConfig) -> dict:
    h = H.hessian_matrix(config)
    cert = H.gauss_positivity(h)
    return {
        "matrix": h.entries.tolist(),
        "verdict": cert.verdict,
        "pivots": list(cert.pivots),
        "lower_bound_coeffs": list(cert.lower_bound_coeffs),
        "d2": Dv.d2_length(config),
    }


def cmd_hessian(args) -> int:
    scene = parse_scene(args.scene)
    _need(scene, "shear_config", "multicurve")
    tol_scale = _tol_scale()
    ok = True
    report: dict = {"command": "hessian", "kind": scene.kind}
    if scene.kind == "shear_config":
        config = scene.value
        report.update(_certificate(config))
        ok &= report["verdict"] == "definite"
        if args.bound:
            bound = H.hessian_lower_bound(config)
            tol = H.bound_tolerance(config) * tol_scale
            holds = report["d2"] >= bound - tol
            report["bound"] = {"gaps": H.gaps(config).tolist(), "value": bound, "tol": tol, "holds": holds}
            ok &= holds
    else:
        mc = scene.value
        comps = [_certificate(c) for c in mc.components]
        report["components"] = comps
        report["mu"] = list(mc.mu)
        report["d2"] = Dv.d2_length_multicurve(mc)
        ok &= all(c["verdict"] == "definite" for c in comps)
        if args.bound:
            bound = H.hessian_lower_bound_multicurve(mc, scene.arcs)
            tol = tol_scale * sum(m * H.bound_tolerance(c) for c, m in zip(mc.components, mc.mu))
            holds = report["d2"] >= bound - tol
            report["bound"] = {"value": bound, "tol": tol, "holds": holds}
            ok &= holds
    _emit(report, args.json)
    return EXIT_OK if ok else EXIT_FAIL


# --- twist --------------------------------------------------------------------


def cmd_twist(args) -> int:
    scene = parse_scene(args.scene)
    _need(scene, "twist_scene")
    try:
        ts = TW.parse_grid(args.t_grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    tol_scale = _tol_scale()
    sc = scene.value
    rows = TW.trajectory(sc, ts)
    probes = []
    for j, l in enumerate(sc.probes):
        probes.append(
            {
                "index": j,
                "ell_hl": TW.ell_hl(sc, l),
                "theta": TW.angle_at(sc, l, 0.0),
                "f_prime": TW.f_l_prime(sc, l),
                "d_cos_theta": TW.d_cos_theta_l(sc, l),
            }
        )
    pairs = [
        {"probes": [j, j + 1], "ell_prime": TW.ell_llprime_prime(sc, sc.probes[j], sc.probes[j + 1])}
        for j in range(len(sc.probes) - 1)
    ]
    mid = max(r.midpoint_residual for r in rows)
    ang = max(r.angle_residual for r in rows)
    second = TW.second_differences([r.ell for r in rows])
    lowest = min(second) if second else 0.0
    checks = {
        "midpoint_residual_max": {"value": mid, "tol": TWIST_TOL["midpoint"] * tol_scale},
        "angle_residual_max": {"value": ang, "tol": TWIST_TOL["angle"] * tol_scale},
        "min_second_difference": {"value": lowest, "tol": -TWIST_TOL["convexity"] * tol_scale},
    }
    checks["midpoint_residual_max"]["ok"] = mid <= checks["midpoint_residual_max"]["tol"]
    checks["angle_residual_max"]["ok"] = ang <= checks["angle_residual_max"]["tol"]
    checks["min_second_difference"]["ok"] = lowest >= checks["min_second_difference"]["tol"]
    report = {
        "command": "twist",
        "length": sc.length,
        "theta_h": TW.angle_at(sc, sc.h, 0.0),
        "ell_prime": TW.ell_prime(sc),
        "angular_velocity": TW.angular_velocity(sc),
        "probes": probes,
        "probe_pairs": pairs,
        "grid": {"points": len(ts), "start": ts[0], "stop": ts[-1]},
        "checks": checks,
    }
    if args.csv:
        _write_text(args.csv, TW.trajectory_csv(rows, fmt=lambda x: format(x, ".17g")))
        report["csv"] = str(args.csv)
    _emit(report, args.json)
    return EXIT_OK if all(c["ok"] for c in checks.values()) else EXIT_FAIL


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stderr.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror or exc}") from None


# --- spiral -------------------------------------------------------------------


def cmd_spiral(args) -> int:
    scene = parse_scene(args.scene)
    _need(scene, "spiral")
    fam = scene.value
    n_max = fam.n - 2 if args.n_max is None else args.n_max
    if not 1 <= n_max <= fam.n - 2:
        raise UsageError(f"--n-max must lie in [1, {fam.n - 2}] for this scene")
    trace = O.spiral_convergence(fam, n_max)
    try:
        closed = K.translation_length(fam.closed_leaf_image())
    except NotHyperbolic:
        closed = None
    rate = trace[-1].rate if trace else None
    report = {
        "command": "spiral",
        "length": fam.length,
        "closed_leaf": {
            "translation_length": closed,
            "expected": fam.length + fam.a[0] + fam.a[1],
        },
        "fitted_rate": rate,
        "decays": rate is not None and rate < 0,
        "trace": [
            {"n": t.n, "matrix_delta": t.matrix_delta, "derivative": t.derivative_value, "rate": t.rate}
            for t in trace
        ],
        "dilation": {
            "two_sided": [S.dilation(fam.two_sided(k)) for k in range(1, n_max + 1)],
            "interleaved": [S.dilation(fam.interleaved(k)) for k in range(1, n_max + 1)],
        },
    }
    if args.csv:
        lines = ["n,matrix_delta,derivative,rate"]
        for t in trace:
            rate_s = "" if t.rate is None else format(t.rate, ".17g")
            lines.append(f"{t.n},{t.matrix_delta:.17g},{t.derivative_value:.17g},{rate_s}")
        _write_text(args.csv, "\n".join(lines) + "\n")
        report["csv"] = str(args.csv)
    _emit(report, args.json)
    return EXIT_OK


# --- verify -------------------------------------------------------------------


def cmd_verify(args) -> int:
    if os.environ.get(TOL_ENV) is not None and not args.allow_tol_scale:
        print(f"warning: {TOL_ENV} ignored without --allow-tol-scale", file=sys.stderr)
    scale = _tol_scale(honor=args.allow_tol_scale)
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    if args.cases is not None and args.cases < 0:
        raise UsageError("--cases must be nonnegative")
    if args.cases == 0:
        print("warning: --cases 0, nothing to run", file=sys.stderr)
        results = []
    else:
        results = V.run_suite(args.suite, args.seed, args.cases, scale, workers=args.workers)
    for r in results:
        print(r.line(), file=sys.stderr)
    report = {
        "command": "verify",
        "suite": args.suite,
        "seed": args.seed,
        "cases": args.cases,
        "tol_scale": scale,
        "checks": [
            {
                "name": r.name,
                "criterion": r.criterion,
                "worst": r.worst,
                "tol": r.tol,
                "cases": r.cases,
                "passed": r.passed,
                "detail": r.detail,
            }
            for r in results
        ],
        "passed": all(r.passed for r in results),
    }
    _emit(report, args.json)
    return EXIT_OK if report["passed"] else EXIT_FAIL


# --- entry point ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shearlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def scene_cmd(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("scene", type=Path, help="scene JSON file")
        p.add_argument("--json", action="store_true", help="compact single-line JSON")
        return p

    p = scene_cmd("derive", "length derivatives along the shear path")
    p.add_argument("--order", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--oracle", action="store_true", help="compare with finite differences (and dual numbers)")
    p.set_defaults(func=cmd_derive)

    p = scene_cmd("hessian", "positivity certificate of the second derivative")
    p.add_argument("--bound", action="store_true", help="also evaluate the gap lower bound")
    p.set_defaults(func=cmd_hessian)

    p = scene_cmd("twist", "twist along one geodesic: closed forms and trajectories")
    p.add_argument("--t-grid", default="-1:1:21", metavar="A:B:N")
    p.add_argument("--csv", metavar="PATH", help="write the trajectory as CSV ('-' for stderr)")
    p.set_defaults(func=cmd_twist)

    p = scene_cmd("spiral", "partial products on spiralling leaves")
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--csv", metavar="PATH", help="write the convergence trace as CSV")
    p.set_defaults(func=cmd_spiral)

    p = sub.add_parser("verify", help="run seeded verification suites")
    p.add_argument("--suite", choices=(*V.SUITES, "all"), default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=None, help="cases per check (default: each check's own)")
    p.add_argument("--workers", type=int, default=1, help="process pool size for the checks")
    p.add_argument("--allow-tol-scale", action="store_true", help=f"honor {TOL_ENV}")
    p.add_argument("--json", action="store_true", help="compact single-line JSON")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SceneError, GeometryError, UsageError, UnsupportedOrder, HypothesesFail, TraceTooClose) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ShearlabError as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to the internal exit code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
