"""Scene files: JSON documents describing configurations, validated on load.

Boundary points are written as a number, the string ``"inf"`` or a
projective pair ``[a, b]``.  ``gamma`` is either ``{"matrix": [[a, b], [c, d]]}``
or ``{"axis": [p, q], "length": L}`` (translation by ``L`` along ``p -> q``).
The schema ships next to this module as ``scene.schema.json``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from . import kernel as K
from . import shear as S
from . import twist as TW
from .derivatives import WeightedMulticurve
from .errors import GeometryError, SceneGeometryError, SceneIOError, SchemaError

KINDS = ("shear_config", "twist_scene", "multicurve", "spiral")


@dataclass(frozen=True, eq=False)
class SceneFile:
    kind: str
    document: dict
    # ShearConfig, TwistScene, WeightedMulticurve or SpiralFamily
    value: Any
    # isolated-leaf arcs of a multicurve, as (component, crossing) pairs
    arcs: tuple | None = None


@lru_cache(maxsize=1)
def schema() -> dict:
    text = resources.files("shearlab").joinpath("scene.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


def validate(doc: Any) -> None:
    """Raise :class:`SchemaError` pointing at the first violation, if any."""
    validator = jsonschema.Draft202012Validator(schema())
    err = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if err is not None:
        raise SchemaError(err.message, _pointer(err.absolute_path))
    _check_endpoints(doc)


def _geodesic_paths(doc: dict):
    kind = doc["kind"]
    if kind == "shear_config":
        yield from _config_paths(doc, "")
    elif kind == "multicurve":
        for k, comp in enumerate(doc["components"]):
            yield from _config_paths(comp, f"/components/{k}")
    elif kind == "twist_scene":
        yield "/h", doc["h"]
        for j, g in enumerate(doc.get("probes", [])):
            yield f"/probes/{j}", g
        gamma = doc["gamma"]
        if "axis" in gamma:
            yield "/gamma/axis", gamma["axis"]


def _config_paths(body: dict, prefix: str):
    if "axis" in body["gamma"]:
        yield f"{prefix}/gamma/axis", body["gamma"]["axis"]
    for j, leaf in enumerate(body["leaves"]):
        yield f"{prefix}/leaves/{j}/endpoints", leaf["endpoints"]


def _check_endpoints(doc: dict) -> None:
    for ptr, (p, q) in _geodesic_paths(doc):
        if K.BoundaryPoint.of(p).same_as(K.BoundaryPoint.of(q), K.TOL_ALG):
            raise SchemaError("geodesic endpoints must be distinct", ptr)


def _gamma(spec: dict) -> K.Isometry:
    if "matrix" in spec:
        return K.Isometry(spec["matrix"])
    return K.translate_along(K.Geodesic.of(*spec["axis"]), float(spec["length"]))


def _config(body: dict) -> S.ShearConfig:
    leaves = [
        S.Leaf(K.Geodesic.of(*lf["endpoints"]), float(lf["weight"]), lf.get("label"))
        for lf in body["leaves"]
    ]
    kwargs = {}
    if "k_check" in body:
        kwargs["k_check"] = body["k_check"]
    return S.build_config(_gamma(body["gamma"]), leaves, body.get("basepoint"), **kwargs)


def build(doc: dict) -> SceneFile:
    """Turn a validated document into library objects."""
    kind = doc["kind"]
    try:
        if kind == "shear_config":
            return SceneFile(kind, doc, _config(doc))
        if kind == "twist_scene":
            probes = [K.Geodesic.of(*g) for g in doc.get("probes", [])]
            value = TW.build_scene(_gamma(doc["gamma"]), K.Geodesic.of(*doc["h"]), probes)
            return SceneFile(kind, doc, value)
        if kind == "multicurve":
            comps = []
            for k, comp in enumerate(doc["components"]):
                try:
                    comps.append(_config(comp))
                except (GeometryError, ValueError) as exc:
                    raise SceneGeometryError(f"{type(exc).__name__}: {exc}", f"/components/{k}") from exc
            mc = WeightedMulticurve(comps, [c["mu"] for c in doc["components"]])
            arcs = doc.get("arcs")
            if arcs is not None:
                for a, arc in enumerate(arcs):
                    for b, (k, i) in enumerate(arc):
                        if k >= len(comps) or i >= comps[k].n:
                            raise SchemaError("no such crossing", f"/arcs/{a}/{b}")
                arcs = tuple(tuple((k, i) for k, i in arc) for arc in arcs)
            return SceneFile(kind, doc, mc, arcs)
        value = S.spiral_config(
            doc["length"],
            K.Geodesic.of(doc["g0"], "inf"),
            K.Geodesic.of(doc["g1"], "inf"),
            doc["weights"],
            doc["n"],
            h_weights=doc.get("h_weights"),
            total=doc.get("total", 0.0),
            h0=K.Geodesic.of(doc["h0"], "inf") if "h0" in doc else None,
            h1=K.Geodesic.of(doc["h1"], "inf") if "h1" in doc else None,
        )
        return SceneFile(kind, doc, value)
    except (GeometryError, ValueError) as exc:
        raise SceneGeometryError(f"{type(exc).__name__}: {exc}", "") from exc


def parse_document(doc: Any) -> SceneFile:
    validate(doc)
    return build(doc)


def parse_scene(path) -> SceneFile:
    """Read, validate and build the scene stored at ``path``."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SceneIOError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_document(doc)


# --- writing scenes -------------------------------------------------------------


def point_json(p: K.BoundaryPoint):
    """``"inf"`` or the stored projective pair (exact, unlike the quotient)."""
    return "inf" if p.b == 0.0 else [p.a, p.b]


def geodesic_json(g: K.Geodesic) -> list:
    return [point_json(g.source), point_json(g.target)]


def config_document(config: S.ShearConfig) -> dict:
    """A ``shear_config`` document reproducing ``config``."""
    return {
        "kind": "shear_config",
        "gamma": {"matrix": config.gamma.m.tolist()},
        "leaves": [
            {"endpoints": geodesic_json(lf.geodesic), "weight": lf.weight}
            | ({"label": lf.label} if lf.label else {})
            for lf in config.leaves
        ],
        "basepoint": [config.basepoint.x, config.basepoint.y],
    }


def twist_document(scene: TW.TwistScene) -> dict:
    return {
        "kind": "twist_scene",
        "gamma": {"matrix": scene.gamma.m.tolist()},
        "h": geodesic_json(scene.h),
        "probes": [geodesic_json(l) for l in scene.probes],
    }
