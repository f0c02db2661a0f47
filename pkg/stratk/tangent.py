"""Stratified tangent families of polytopal stratified manifolds.

Every stratum component is a flat polytopal piece carrying a frame of its
direction space. The layer bundle of a stratum is the product family of
that frame's rank; an attached cell is glued by projecting the coface frame
onto the face frame, by default orthogonally.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .bundle import trivial_bundle
from .complex import Cell, CellComplex, CellularMap, Layer, StratifiedSpace
from .errors import ConstructionError, PreconditionError, StratkError
from .lincat import (
    Mor,
    Obj,
    StructureCategory,
    ValidationReport,
    compose,
    inverse,
    is_surjective,
    parse_rational,
    rank,
    solve_columns,
    surj_open_category,
    transpose,
    zero,
)
from .strata import StratifiedBundle, StratifiedIsoResult, build_stratified, is_isomorphic_stratified

logger = logging.getLogger(__name__)

Point = Tuple[Fraction, ...]
# (attached cell id, coface frame, face frame) -> fiber map
ProjectionRule = Callable[[str, Mor, Mor], Mor]


def _column_matrix(columns: Sequence[Point], rows: int) -> Mor:
    return Mor(
        Obj(len(columns)),
        Obj(rows),
        tuple(tuple(column[i] for column in columns) for i in range(rows)),
    )


def tangent_projection(x: Sequence[object]) -> Mor:
    """P(x) = I - x·xᵀ/(x·x): orthogonal projection onto the hyperplane normal to x."""
    point = tuple(parse_rational(value) for value in x)
    norm_sq = sum((value * value for value in point), Fraction(0))
    if norm_sq == 0:
        raise PreconditionError("tangent projection needs a non-zero point")
    n = len(point)
    rows = tuple(
        tuple((Fraction(1) if i == j else Fraction(0)) - point[i] * point[j] / norm_sq for j in range(n))
        for i in range(n)
    )
    return Mor(Obj(n), Obj(n), rows)


def circle_point(t: Fraction) -> Point:
    """Rational point ((1 - t²)/(1 + t²), 2t/(1 + t²)) on the unit circle."""
    return sphere_point([t])


def sphere_point(u: Sequence[object]) -> Point:
    """Inverse stereographic image of ``u`` in Qⁿ⁻¹ on the unit sphere in Qⁿ."""
    coords = tuple(Fraction(value) for value in u)
    norm_sq = sum((c * c for c in coords), Fraction(0))
    return ((1 - norm_sq) / (1 + norm_sq),) + tuple(2 * c / (1 + norm_sq) for c in coords)


def check_circle_projection(samples: int = 50, seed: int = 0, dim: int = 2) -> ValidationReport:
    """P(x) is symmetric, idempotent, of rank n-1 and kills x at seeded sphere points in Qⁿ."""
    if dim < 2:
        raise PreconditionError("sphere projections need dimension at least 2", entity=str(dim))
    rng = np.random.default_rng(seed)
    issues: List[str] = []
    for _ in range(samples):
        u = [Fraction(int(rng.integers(-20, 21)), int(rng.integers(1, 12))) for _ in range(dim - 1)]
        x = sphere_point(u)
        p = tangent_projection(x)
        label = "u=(" + ", ".join(str(c) for c in u) + ")"
        if compose(p, p) != p:
            issues.append(f"{label}: projection is not idempotent")
        if transpose(p) != p:
            issues.append(f"{label}: projection is not symmetric")
        if rank(p) != dim - 1:
            issues.append(f"{label}: projection has rank {rank(p)}")
        if any(sum(p.matrix[i][j] * x[j] for j in range(dim)) for i in range(dim)):
            issues.append(f"{label}: x is not in the kernel")
    return ValidationReport(subject="sphere-projection", issues=tuple(issues))


# ---------------------------------------------------------------------------
# Polytopal stratified manifolds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolytopalManifold:
    """Rational vertex coordinates on a cell complex tagged with stratum levels."""

    ambient: int
    coordinates: Tuple[Tuple[str, Point], ...]
    complex: CellComplex

    @classmethod
    def from_cells(
        cls,
        coordinates: Mapping[str, Sequence[object]],
        cells: Sequence[Tuple[str, int, Sequence[str]]],
        levels: Mapping[str, int],
    ) -> "PolytopalManifold":
        """Cells are ``(id, dim, vertex ids)``; a 2-cell lists its vertices in cyclic order."""
        points = {v: tuple(parse_rational(x) for x in coords) for v, coords in coordinates.items()}
        ambient = len(next(iter(points.values()))) if points else 0
        built: List[Cell] = [Cell(v, 0, ()) for v in sorted(points)]
        vertex_sets: Dict[str, frozenset] = {v: frozenset([v]) for v in points}
        edges: Dict[frozenset, Tuple[str, Tuple[str, str]]] = {}
        for cell_id, dim, vertices in sorted(cells, key=lambda c: (c[1], c[0])):
            vertices = tuple(vertices)
            vertex_sets[cell_id] = frozenset(vertices)
            if dim == 1:
                if len(vertices) != 2:
                    raise ConstructionError("1-cell needs two vertices", entity=cell_id)
                edges[frozenset(vertices)] = (cell_id, (vertices[0], vertices[1]))
                built.append(Cell(cell_id, 1, vertices))
            elif dim == 2:
                walk = []
                for a, b in zip(vertices, vertices[1:] + vertices[:1]):
                    found = edges.get(frozenset((a, b)))
                    if found is None:
                        raise ConstructionError(f"no 1-cell joins {a} and {b}", entity=cell_id)
                    edge_id, ends = found
                    walk.append((edge_id, 1 if ends == (a, b) else -1))
                built.append(Cell(cell_id, 2, tuple(walk)))
            else:
                facets = tuple(
                    sorted(
                        other for other, other_dim, _ in cells
                        if other_dim == dim - 1 and vertex_sets.get(other, frozenset()) <= frozenset(vertices)
                    )
                )
                built.append(Cell(cell_id, dim, facets))
        return cls(ambient, tuple(sorted(points.items())), CellComplex.build(built, dict(levels)))

    def point(self, vertex: str) -> Point:
        return dict(self.coordinates)[vertex]

    def direction_space(self, cell_ids: Sequence[str]) -> Mor:
        """Basis columns of the linear span of differences of the cells' vertices."""
        vertices = sorted({v for c in cell_ids for v in self.complex.closure_vertices(c)})
        origin = self.point(vertices[0])
        chosen: List[Point] = []
        for vertex in vertices[1:]:
            diff = tuple(a - b for a, b in zip(self.point(vertex), origin))
            trial = chosen + [diff]
            if rank(_column_matrix(trial, self.ambient)) == len(trial):
                chosen = trial
        return _column_matrix(chosen, self.ambient)


def _stratum_components(complex_: CellComplex, level: int) -> List[Tuple[str, ...]]:
    members = [c for c in complex_.ids if complex_.tag(c) == level]
    graph = nx.Graph()
    graph.add_nodes_from(members)
    for cell_id in members:
        for face in complex_.cell(cell_id).faces():
            if complex_.tag(face) == level:
                graph.add_edge(cell_id, face)
    return sorted(tuple(sorted(component)) for component in nx.connected_components(graph))


def validate_manifold(manifold: PolytopalManifold) -> ValidationReport:
    issues: List[str] = []
    complex_ = manifold.complex
    for vertex, point in manifold.coordinates:
        if len(point) != manifold.ambient:
            issues.append(f"{vertex}: has {len(point)} coordinates, expected {manifold.ambient}")
    if issues:
        return ValidationReport(subject="polytopal-manifold", issues=tuple(issues))
    for cell in complex_.cells:
        span = manifold.direction_space([cell.id]).src.dim
        if span != cell.dim:
            issues.append(f"{cell.id}: direction space has dimension {span}, expected {cell.dim}")
        for face in cell.faces():
            if complex_.tag(face) > complex_.tag(cell.id):
                issues.append(f"{cell.id}: face {face} lies in a higher stratum")
    levels = sorted({complex_.tag(c) for c in complex_.ids})
    if levels and levels != list(range(levels[-1] + 1)):
        issues.append(f"strata levels {levels} are not contiguous from 0")
    for level in levels:
        for component in _stratum_components(complex_, level):
            top = max(complex_.cell(c).dim for c in component)
            if manifold.direction_space(component).src.dim != top:
                issues.append(f"{component[0]}: stratum component is not flat")
    return ValidationReport(subject="polytopal-manifold", issues=tuple(issues))


def _copy_id(cell_id: str, key: str) -> str:
    return f"{cell_id}~{key}"


def _renamed(cell: Cell, rename: Mapping[str, str]) -> Cell:
    if cell.dim == 0:
        boundary: Tuple = ()
    elif cell.dim == 1:
        boundary = tuple(rename[v] for v in cell.boundary)
    elif cell.dim == 2:
        boundary = tuple((rename[e], s) for e, s in cell.boundary)
    else:
        boundary = tuple(rename[f] for f in cell.boundary)
    return Cell(rename[cell.id], cell.dim, boundary)


def stratify(manifold: PolytopalManifold) -> StratifiedSpace:
    """Skeletal stratified space: one attached layer per stratum level.

    Each connected component of an open stratum is attached through its own
    copy of its closure; lower cells of the copy are renamed ``cell~key``
    where ``key`` is the least cell id of the component.
    """
    complex_ = manifold.complex
    top = max((complex_.tag(c) for c in complex_.ids), default=0)
    base_ids = [c for c in complex_.ids if complex_.tag(c) == 0]
    space = StratifiedSpace(base0=complex_.subcomplex(base_ids).with_strata({}))
    for level in range(1, top + 1):
        cells: List[Cell] = []
        attached: List[str] = []
        images: Dict[str, str] = {}
        paths: Dict[str, Tuple] = {}
        for component in _stratum_components(complex_, level):
            members = set(component)
            rename = {c: c if c in members else _copy_id(c, component[0]) for c in complex_.closure(component)}
            for cell_id in sorted(rename):
                cells.append(_renamed(complex_.cell(cell_id), rename))
                if cell_id in members:
                    continue
                attached.append(rename[cell_id])
                images[rename[cell_id]] = cell_id
                if complex_.cell(cell_id).dim == 1:
                    paths[rename[cell_id]] = ((cell_id, 1),)
        m = CellComplex.build(cells)
        below = space.totals()[-1]
        h = CellularMap.build(m.subcomplex(attached), below, images, paths)
        layer = Layer(m=m, a=tuple(sorted(attached)), h=h)
        space = StratifiedSpace(base0=space.base0, layers=space.layers + (layer,))
    logger.info("Stratified polytopal manifold into %s layers.", space.depth)
    return space


def cube_manifold(size: int = 1) -> PolytopalManifold:
    """The cube [0, size]³ stratified by cell dimension."""
    coords = {f"v{x}{y}{z}": (x * size, y * size, z * size) for x, y, z in itertools.product((0, 1), repeat=3)}
    cells: List[Tuple[str, int, Sequence[str]]] = []
    for axis, name in enumerate("xyz"):
        others = [i for i in range(3) if i != axis]
        for a, b in itertools.product((0, 1), repeat=2):
            start, end = [0, 0, 0], [0, 0, 0]
            start[others[0]] = end[others[0]] = a
            start[others[1]] = end[others[1]] = b
            end[axis] = 1
            cells.append((f"e{name}{a}{b}", 1, ("v%d%d%d" % tuple(start), "v%d%d%d" % tuple(end))))
    for axis, name in enumerate("xyz"):
        u, w = [i for i in range(3) if i != axis]
        for side in (0, 1):
            corners = []
            for du, dw in ((0, 0), (1, 0), (1, 1), (0, 1)):
                point = [0, 0, 0]
                point[axis], point[u], point[w] = side, du, dw
                corners.append("v%d%d%d" % tuple(point))
            cells.append((f"f{name}{side}", 2, tuple(corners)))
    cells.append(("C", 3, tuple(sorted(coords))))
    levels = {v: 0 for v in coords}
    levels.update({cell_id: dim for cell_id, dim, _ in cells})
    return PolytopalManifold.from_cells(coords, cells, levels)


def segment_manifold() -> PolytopalManifold:
    """[0, 1] with its endpoints as the bottom stratum."""
    return PolytopalManifold.from_cells({"a": (0,), "b": (1,)}, [("s", 1, ("a", "b"))], {"a": 0, "b": 0, "s": 1})


# ---------------------------------------------------------------------------
# Tangent families
# ---------------------------------------------------------------------------


def orthogonal_projection(cell_id: str, source: Mor, target: Mor) -> Mor:
    """Coordinates in ``target`` of the orthogonal projection of the ``source`` frame."""
    if target.src.dim == 0:
        return zero(0, source.src.dim)
    gram = compose(transpose(target), target)
    return compose(inverse(gram), compose(transpose(target), source))


def projection_along(complements: Mapping[str, Sequence[Sequence[object]]]) -> ProjectionRule:
    """Project along user-chosen complements on the listed attached cells.

    ``complements[cell]`` holds vectors spanning a complement of the face's
    direction space inside the coface's; other cells project orthogonally.
    """
    parsed = {
        cell: tuple(tuple(parse_rational(x) for x in vector) for vector in vectors)
        for cell, vectors in complements.items()
    }

    def rule(cell_id: str, source: Mor, target: Mor) -> Mor:
        if cell_id not in parsed or target.src.dim == 0:
            return orthogonal_projection(cell_id, source, target)
        columns = [tuple(target.matrix[i][j] for i in range(target.dst.dim)) for j in range(target.src.dim)]
        basis = _column_matrix(columns + list(parsed[cell_id]), target.dst.dim)
        coords = solve_columns(basis, source)
        return Mor(source.src, target.src, coords.matrix[: target.src.dim])

    return rule


@dataclass(frozen=True)
class TangentFamily:
    manifold: PolytopalManifold
    bundle: StratifiedBundle
    frames: Tuple[Tuple[str, Mor], ...]

    def stratum_dims(self) -> Dict[int, Tuple[int, ...]]:
        return self.bundle.stratum_dims()


def _component_frames(manifold: PolytopalManifold) -> Tuple[Dict[str, str], Dict[str, Mor]]:
    owner: Dict[str, str] = {}
    frames: Dict[str, Mor] = {}
    complex_ = manifold.complex
    for level in sorted({complex_.tag(c) for c in complex_.ids}):
        for component in _stratum_components(complex_, level):
            frame = manifold.direction_space(component)
            top = max(complex_.cell(c).dim for c in component)
            if frame.src.dim != top:
                raise ConstructionError("stratum component is not flat", entity=component[0])
            frames[component[0]] = frame
            for cell_id in component:
                owner[cell_id] = component[0]
    return owner, frames


def build_tangent(
    manifold: PolytopalManifold,
    alt_p1: Optional[ProjectionRule] = None,
    category: Optional[StructureCategory] = None,
) -> TangentFamily:
    """Tangent family: product layers of the stratum ranks glued by projections.

    The attaching map copies cells identically, so its derivative is the
    identity and each fiber map is the projection alone.
    """
    report = validate_manifold(manifold)
    if not report.ok:
        entity = report.issues[0].split(":", 1)[0]
        raise ConstructionError(report.issues[0], entity=entity)
    rule = alt_p1 or orthogonal_projection
    category = category or surj_open_category(manifold.ambient)
    space = stratify(manifold)
    owner, frames = _component_frames(manifold)

    layer0 = trivial_bundle(
        space.base0, category, {bp: frames[owner[bp]].src.dim for bp in space.base0.basepoints}
    )
    layers = []
    for layer in space.layers:
        # every component of a closure copy contains open cells of exactly one stratum component
        keys = {layer.m.cell_component(c): owner[c] for c in layer.open_cells}
        m_bundle = trivial_bundle(layer.m, category, {bp: frames[key].src.dim for bp, key in keys.items()})
        fiber_maps: Dict[str, Mor] = {}
        for cell_id in layer.a:
            source = frames[keys[layer.m.cell_component(cell_id)]]
            target = frames[owner[layer.h.image(cell_id)]]
            phi = rule(cell_id, source, target)
            if not is_surjective(phi):
                raise ConstructionError(f"projection {phi} is not surjective", entity=cell_id)
            fiber_maps[cell_id] = phi
        layers.append((m_bundle, fiber_maps))
    bundle = build_stratified(space, layer0, layers)
    logger.info("Built tangent family with stratum fiber dimensions %s.", bundle.stratum_dims())
    return TangentFamily(manifold=manifold, bundle=bundle, frames=tuple(sorted(frames.items())))


@dataclass(frozen=True)
class ChoiceIndependence:
    report: ValidationReport
    result: StratifiedIsoResult

    @property
    def ok(self) -> bool:
        return self.report.ok

    def to_dict(self) -> Dict[str, object]:
        return {**self.report.to_dict(), "witness": self.result.to_dict()}


def choice_independence_check(manifold: PolytopalManifold, alt_p1: ProjectionRule) -> ChoiceIndependence:
    """Tangent families from the default and an alternative projection are isomorphic."""
    reference = build_tangent(manifold)
    try:
        alternative = build_tangent(manifold, alt_p1=alt_p1)
    except StratkError as error:
        raise PreconditionError(f"alternative projection gives invalid attaching data: {error}") from error
    result = is_isomorphic_stratified(reference.bundle, alternative.bundle)
    issues = () if result.found else (f"tangent-family: {result.status} ({result.reason})",)
    return ChoiceIndependence(
        report=ValidationReport(subject="choice-independence", issues=issues),
        result=result,
    )


__all__ = [
    "ChoiceIndependence",
    "PolytopalManifold",
    "ProjectionRule",
    "TangentFamily",
    "build_tangent",
    "check_circle_projection",
    "choice_independence_check",
    "circle_point",
    "cube_manifold",
    "orthogonal_projection",
    "projection_along",
    "segment_manifold",
    "sphere_point",
    "stratify",
    "tangent_projection",
    "validate_manifold",
]
