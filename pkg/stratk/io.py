"""Helpers for reading and writing stratk JSON documents."""
from __future__ import annotations

import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from .bundle import VBundle
from .complex import Cell, CellComplex, CellularMap, Layer, StratifiedSpace
from .errors import SchemaError, StratkError
from .lincat import (
    Mor,
    Obj,
    StructureCategory,
    builtin_category,
    format_rational,
    is_builtin_name,
    is_invertible,
)
from .strata import StratifiedBundle, StratifiedMap, build_stratified
from .tangent import PolytopalManifold

logger = logging.getLogger(__name__)
SCHEMA_VERSION = "stratk-1"


Document = Dict[str, Any]


def stamp(kind: str, payload: Mapping[str, Any]) -> Document:
    return {"schema": SCHEMA_VERSION, "kind": kind, **payload}


def normalize(document: Mapping[str, Any]) -> str:
    """Canonical text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def read_document(path: Path, kinds: Optional[Tuple[str, ...]] = None) -> Document:
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as error:
        raise SchemaError(f"cannot read file: {error.strerror}", entity=str(path)) from error
    except json.JSONDecodeError as error:
        raise SchemaError(f"invalid JSON at line {error.lineno}", entity=str(path)) from error
    if not isinstance(raw, dict):
        raise SchemaError("document must be a JSON object", entity=str(path))
    version = raw.get("schema")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema version {version!r}, expected {SCHEMA_VERSION}", entity=str(path))
    if kinds is not None and raw.get("kind") not in kinds:
        raise SchemaError(f"expected a {' or '.join(kinds)} document, got {raw.get('kind')!r}", entity=str(path))
    return raw


def write_report(report: Mapping[str, Any], destination: Optional[Path]) -> None:
    """Write one normalized document to stdout or ``destination``."""
    text = normalize(report)
    if destination is None:
        sys.stdout.write(text)
        return
    destination.parent.mkdir(parents=True, exist_ok=True)
    destination.write_text(text, encoding="utf-8")
    logger.info("Wrote %s report to %s", report.get("kind", "stratk"), destination)


def _field(raw: Mapping[str, Any], key: str, where: str) -> Any:
    try:
        return raw[key]
    except (KeyError, TypeError) as error:
        raise SchemaError(f"missing field '{key}'", entity=where) from error


# ---------------------------------------------------------------------------
# Matrices and categories
# ---------------------------------------------------------------------------


def matrix_to_json(f: Mor) -> Document:
    return {
        "src": f.src.dim,
        "dst": f.dst.dim,
        "rows": [[format_rational(x) for x in row] for row in f.matrix],
    }


def matrix_from_json(raw: Any, where: str = "matrix") -> Mor:
    """Accept ``{"src", "dst", "rows"}`` or a bare list of rows."""
    try:
        if isinstance(raw, list):
            return Mor.of(raw)
        f = Mor.of(raw.get("rows", []), src_dim=int(raw["src"]))
        declared = int(raw.get("dst", f.dst.dim))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as error:
        raise SchemaError(f"malformed matrix: {error}", entity=where) from error
    if f.dst.dim != declared:
        raise SchemaError(f"matrix has {f.dst.dim} rows, declared {declared}", entity=where)
    return f


def category_to_json(category: StructureCategory) -> Document:
    if is_builtin_name(category.name):
        return {"builtin": category.name}
    return {
        "name": category.name,
        "objects": [o.dim for o in category.objects],
        "morphisms": [matrix_to_json(m) for m in sorted(category.morphisms, key=Mor.sort_key)],
        "groupoid": category.is_groupoid,
        "sum": category.has_sum,
        "tensor": category.has_tensor,
    }


def category_from_json(raw: Any, where: str = "category") -> StructureCategory:
    if isinstance(raw, str):
        raw = {"builtin": raw}
    if "builtin" in raw:
        try:
            return builtin_category(str(raw["builtin"]))
        except ValueError as error:
            raise SchemaError(str(error), entity=where) from error
    morphisms = tuple(
        matrix_from_json(m, f"{where}.morphisms[{i}]") for i, m in enumerate(_field(raw, "morphisms", where))
    )
    return StructureCategory(
        name=str(raw.get("name", "custom")),
        objects=tuple(Obj(int(d)) for d in sorted(_field(raw, "objects", where))),
        morphisms=morphisms,
        is_groupoid=bool(raw.get("groupoid", all(is_invertible(m) for m in morphisms))),
        has_sum=bool(raw.get("sum", False)),
        has_tensor=bool(raw.get("tensor", False)),
    )


def resolve_category(value: str) -> StructureCategory:
    """A builtin name or the path of a category document."""
    if is_builtin_name(value):
        return builtin_category(value)
    path = Path(value)
    if not path.exists():
        raise SchemaError("not a builtin category name or an existing file", entity=value)
    return category_from_json(read_document(path, ("category",)), where=str(path))


# ---------------------------------------------------------------------------
# Complexes, maps and spaces
# ---------------------------------------------------------------------------


def _boundary_to_json(cell: Cell) -> List[Any]:
    if cell.dim == 2:
        return [[edge, sign] for edge, sign in cell.boundary]
    return list(cell.boundary)


def complex_to_json(complex_: CellComplex) -> Document:
    payload: Document = {
        "cells": [{"id": c.id, "dim": c.dim, "boundary": _boundary_to_json(c)} for c in complex_.cells]
    }
    if complex_.strata:
        payload["strata"] = dict(complex_.strata)
    return payload


def complex_from_json(raw: Any, where: str = "complex") -> CellComplex:
    cells: List[Cell] = []
    for i, entry in enumerate(_field(raw, "cells", where)):
        cell_id = str(_field(entry, "id", f"{where}.cells[{i}]"))
        dim = int(_field(entry, "dim", cell_id))
        boundary = entry.get("boundary", [])
        if dim == 2:
            cells.append(Cell(cell_id, 2, tuple((str(e), int(s)) for e, s in boundary)))
        else:
            cells.append(Cell(cell_id, dim, tuple(str(b) for b in boundary)))
    strata = {str(k): int(v) for k, v in raw.get("strata", {}).items()}
    return CellComplex.build(cells, strata)


def map_to_json(f: CellularMap) -> Document:
    return {
        "images": dict(f.cell_images),
        "paths": {edge: [[e, s] for e, s in path] for edge, path in f.edge_paths},
    }


def map_from_json(raw: Any, src: CellComplex, dst: CellComplex, where: str = "map") -> CellularMap:
    images = {str(k): str(v) for k, v in _field(raw, "images", where).items()}
    paths = {str(edge): [(str(e), int(s)) for e, s in steps] for edge, steps in raw.get("paths", {}).items()}
    return CellularMap.build(src, dst, images, paths)


def space_to_json(space: StratifiedSpace) -> Document:
    return {
        "base0": complex_to_json(space.base0),
        "layers": [
            {"m": complex_to_json(layer.m), "a": sorted(layer.a), "h": map_to_json(layer.h)}
            for layer in space.layers
        ],
    }


def space_from_json(raw: Any, where: str = "space") -> StratifiedSpace:
    """A space document, or a bare complex read as a one-stratum space."""
    if "base0" not in raw:
        return StratifiedSpace(complex_from_json(raw, where))
    base0 = complex_from_json(raw["base0"], f"{where}.base0")
    layers: List[Layer] = []
    for level, block in enumerate(raw.get("layers", []), start=1):
        label = f"{where}.layers[{level}]"
        m = complex_from_json(_field(block, "m", label), label)
        a = tuple(sorted(str(c) for c in _field(block, "a", label)))
        below = StratifiedSpace(base0, tuple(layers)).totals()[-1]
        h = map_from_json(_field(block, "h", label), m.subcomplex(a), below, label)
        layers.append(Layer(m=m, a=a, h=h))
    return StratifiedSpace(base0, tuple(layers))


def stratified_map_to_json(f: StratifiedMap) -> Document:
    payload: Document = {"src": space_to_json(f.src), "dst": space_to_json(f.dst), **map_to_json(f.total)}
    if f.layer_maps is not None:
        payload["layer_maps"] = [map_to_json(g) for g in f.layer_maps]
    return payload


def stratified_map_from_json(raw: Any, where: str = "stratified_map") -> StratifiedMap:
    src = space_from_json(_field(raw, "src", where), f"{where}.src")
    dst = space_from_json(_field(raw, "dst", where), f"{where}.dst")
    total = map_from_json(raw, src.totals()[-1], dst.totals()[-1], where)
    layer_maps = None
    if "layer_maps" in raw:
        sources = [src.base0] + [layer.m for layer in src.layers]
        targets = [dst.base0] + [layer.m for layer in dst.layers]
        layer_maps = tuple(
            map_from_json(block, s, t, f"{where}.layer_maps[{i}]")
            for i, (block, s, t) in enumerate(zip(raw["layer_maps"], sources, targets))
        )
    return StratifiedMap(src, dst, total, layer_maps)


# ---------------------------------------------------------------------------
# Bundles
# ---------------------------------------------------------------------------


def _cocycle_to_json(bundle: VBundle) -> Document:
    return {
        "fiber": dict(bundle.fiber),
        "labels": {edge: matrix_to_json(m) for edge, m in bundle.labels},
    }


def _cocycle_from_json(raw: Any, base: CellComplex, category: StructureCategory, where: str) -> VBundle:
    fiber = {str(k): int(v) for k, v in _field(raw, "fiber", where).items()}
    labels = {str(e): matrix_from_json(m, f"{where}.labels.{e}") for e, m in raw.get("labels", {}).items()}
    return VBundle.build(base, category, fiber, labels)


def bundle_to_json(bundle: VBundle) -> Document:
    return stamp(
        "bundle",
        {"category": category_to_json(bundle.category), "base": complex_to_json(bundle.base), **_cocycle_to_json(bundle)},
    )


def bundle_from_json(raw: Any, where: str = "bundle") -> VBundle:
    category = category_from_json(_field(raw, "category", where), f"{where}.category")
    base = complex_from_json(_field(raw, "base", where), f"{where}.base")
    return _cocycle_from_json(raw, base, category, where)


def stratified_to_json(bundle: StratifiedBundle) -> Document:
    layers = []
    for m_bundle, attach in bundle.layers:
        block = _cocycle_to_json(m_bundle)
        block["fiber_maps"] = {cell: matrix_to_json(phi) for cell, phi in attach.fiber_maps}
        layers.append(block)
    return stamp(
        "stratified_bundle",
        {
            "category": category_to_json(bundle.category),
            "space": space_to_json(bundle.space),
            "layer0": _cocycle_to_json(bundle.layer0),
            "layers": layers,
        },
    )


def stratified_from_json(raw: Any, where: str = "stratified_bundle") -> StratifiedBundle:
    category = category_from_json(_field(raw, "category", where), f"{where}.category")
    space = space_from_json(_field(raw, "space", where), f"{where}.space")
    layer0 = _cocycle_from_json(_field(raw, "layer0", where), space.base0, category, f"{where}.layer0")
    blocks = raw.get("layers", [])
    if len(blocks) != len(space.layers):
        raise SchemaError(f"space has {len(space.layers)} layers, document has {len(blocks)}", entity=where)
    layers = []
    for level, (block, layer) in enumerate(zip(blocks, space.layers), start=1):
        label = f"{where}.layers[{level}]"
        m_bundle = _cocycle_from_json(block, layer.m, category, label)
        fiber_maps = {
            str(cell): matrix_from_json(phi, f"{label}.fiber_maps.{cell}")
            for cell, phi in block.get("fiber_maps", {}).items()
        }
        layers.append((m_bundle, fiber_maps))
    return build_stratified(space, layer0, layers)


def as_stratified(raw: Document, where: str) -> StratifiedBundle:
    """Read a bundle document as a one-stratum stratified bundle."""
    if raw.get("kind") == "stratified_bundle":
        return stratified_from_json(raw, where)
    bundle = bundle_from_json(raw, where)
    return build_stratified(StratifiedSpace(bundle.base), bundle)


# ---------------------------------------------------------------------------
# Polytopal manifolds
# ---------------------------------------------------------------------------


def manifold_from_json(raw: Any, where: str = "polytope") -> PolytopalManifold:
    """Cells list their vertex ids; a missing level defaults to the cell dimension."""
    coordinates = {str(v): list(coords) for v, coords in _field(raw, "coordinates", where).items()}
    cells: List[Tuple[str, int, List[str]]] = []
    levels: Dict[str, int] = {v: 0 for v in coordinates}
    for i, entry in enumerate(raw.get("cells", [])):
        cell_id = str(_field(entry, "id", f"{where}.cells[{i}]"))
        dim = int(_field(entry, "dim", cell_id))
        cells.append((cell_id, dim, [str(v) for v in _field(entry, "vertices", cell_id)]))
        levels[cell_id] = dim
    levels.update({str(k): int(v) for k, v in raw.get("levels", {}).items()})
    try:
        return PolytopalManifold.from_cells(coordinates, cells, levels)
    except StratkError:
        raise
    except (ValueError, ZeroDivisionError) as error:
        raise SchemaError(f"malformed polytope: {error}", entity=where) from error


__all__ = [
    "SCHEMA_VERSION",
    "as_stratified",
    "bundle_from_json",
    "bundle_to_json",
    "category_from_json",
    "category_to_json",
    "complex_from_json",
    "complex_to_json",
    "manifold_from_json",
    "map_from_json",
    "map_to_json",
    "matrix_from_json",
    "matrix_to_json",
    "normalize",
    "read_document",
    "resolve_category",
    "space_from_json",
    "space_to_json",
    "stamp",
    "stratified_from_json",
    "stratified_map_from_json",
    "stratified_map_to_json",
    "stratified_to_json",
    "write_report",
]
