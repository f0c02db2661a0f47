"""Stratified V-bundles glued from layer bundles along attaching V-maps.

Layer 0 is a V-bundle over X̄₀. Layer i is a V-bundle over M̄ᵢ together with
fiber maps over the attached subcomplex Āᵢ that cover the attaching map
h̄ᵢ: Āᵢ → X̄ᵢ₋₁. The fiber over a cell of stratum i is read from layer i.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple

from .bundle import (
    Gauge,
    VBundle,
    cocycle_issues,
    compare_bundles,
    component_conjugators,
    normalize,
    pullback_bundle,
    restrict_bundle,
    tree_transports,
    trivial_bundle,
    witness_gauge,
)
from .complex import (
    CellComplex,
    CellularMap,
    Layer,
    Path,
    StratifiedPrism,
    StratifiedSpace,
    check_stratum_preserving,
    compose_maps,
    cyclic_match,
    identity_map,
    inclusion_map,
    pi1,
    prism_space,
    reduce_cyclic,
    reduce_path,
    reverse_path,
)
from .errors import (
    AmbiguousDecompositionError,
    BundleTheoremError,
    NaturalityError,
    PreconditionError,
    StratumPreservingError,
)
from .lincat import (
    Mor,
    StructureCategory,
    ValidationReport,
    compose,
    det,
    first_invertible,
    format_matrix,
    identity,
    inverse,
    is_invertible,
    scale,
    solve_matrix_equations,
    zero,
)

logger = logging.getLogger(__name__)

ISO_SEARCH_BUDGET = 10**6

ISOMORPHIC = "isomorphic"
NOT_ISOMORPHIC = "not-isomorphic"
INCONCLUSIVE_BUDGET = "inconclusive-budget"
INCONCLUSIVE_OPEN = "inconclusive-open"


@dataclass(frozen=True)
class AttachingVMap:
    """Fiber maps over Ā covering the attaching map of one layer."""

    src: VBundle
    base_map: CellularMap
    fiber_maps: Tuple[Tuple[str, Mor], ...]

    @property
    def maps(self) -> Dict[str, Mor]:
        cached = self.__dict__.get("_maps")
        if cached is None:
            cached = dict(self.fiber_maps)
            object.__setattr__(self, "_maps", cached)
        return cached

    def fiber_map(self, cell_id: str) -> Mor:
        try:
            return self.maps[cell_id]
        except KeyError as error:
            raise PreconditionError("no attaching fiber map over cell", entity=cell_id) from error


@dataclass(frozen=True)
class StratifiedBundle:
    space: StratifiedSpace
    layer0: VBundle
    layers: Tuple[Tuple[VBundle, AttachingVMap], ...] = ()

    @property
    def category(self) -> StructureCategory:
        return self.layer0.category

    @property
    def depth(self) -> int:
        return len(self.layers) + 1

    @property
    def total(self) -> CellComplex:
        return self.space.totals()[-1]

    def layer_bundle(self, level: int) -> VBundle:
        return self.layer0 if level == 0 else self.layers[level - 1][0]

    def attach(self, level: int) -> AttachingVMap:
        if level < 1 or level > len(self.layers):
            raise PreconditionError("layer has no attaching map", entity=f"layer{level}")
        return self.layers[level - 1][1]

    def fiber_dim(self, cell_id: str) -> int:
        """Dimension of the fiber over a cell of the assembled complex."""
        return self.layer_bundle(self.total.tag(cell_id)).dim_over(cell_id)

    def stratum_dims(self) -> Dict[int, Tuple[int, ...]]:
        total = self.total
        dims: Dict[int, Set[int]] = {level: set() for level in range(self.depth)}
        for cell_id in total.ids:
            dims[total.tag(cell_id)].add(self.fiber_dim(cell_id))
        return {level: tuple(sorted(values)) for level, values in dims.items()}


# ---------------------------------------------------------------------------
# Construction and validation
# ---------------------------------------------------------------------------


def _path_stratum(total: CellComplex, path: Path, start: str) -> Optional[int]:
    """Common stratum of every cell the path visits, or None when it crosses strata."""
    level = total.tag(start)
    for step in path:
        if total.tag(step[0]) != level:
            return None
        _, end = total.oriented_endpoints(step)
        if total.tag(end) != level:
            return None
    return level


def _stratified_issues(bundle: StratifiedBundle) -> List[Tuple[str, str, str]]:
    """(kind, entity, message) triples; kinds are cocycle, fiber-map and naturality."""
    issues: List[Tuple[str, str, str]] = []
    category = bundle.category
    for level in range(bundle.depth):
        for issue in cocycle_issues(bundle.layer_bundle(level)):
            entity, _, message = issue.partition(": ")
            issues.append(("cocycle", entity, f"layer {level}: {message}"))
    total = bundle.total
    for level, layer in enumerate(bundle.space.layers, start=1):
        m_bundle = bundle.layer_bundle(level)
        attach = bundle.attach(level)
        attached = set(layer.a)
        checked: Dict[str, Mor] = {}
        for cell_id in sorted(set(attach.maps) - attached):
            issues.append(("fiber-map", cell_id, "fiber map over a cell outside the attached subcomplex"))
        for cell_id in sorted(attached):
            phi = attach.maps.get(cell_id)
            if phi is None:
                if layer.m.cell(cell_id).dim == 0:
                    issues.append(("fiber-map", cell_id, "attached 0-cell has no fiber map"))
                continue
            target = layer.h.image(cell_id)
            expected = (m_bundle.dim_over(cell_id), bundle.fiber_dim(target))
            if (phi.src.dim, phi.dst.dim) != expected:
                issues.append(
                    ("fiber-map", cell_id, f"fiber map {phi} should run R^{expected[0]} -> R^{expected[1]}")
                )
                continue
            if not category.contains(phi):
                issues.append(("fiber-map", cell_id, f"fiber map {phi} is outside {category.name}"))
                continue
            checked[cell_id] = phi
        for edge in sorted(e for e in layer.m.edges if e in attached):
            u, v = layer.m.endpoints(edge)
            if u not in checked or v not in checked:
                continue
            path = layer.h.path(edge)
            start = layer.h.image(u)
            level_below = _path_stratum(total, path, start)
            if level_below is None:
                continue
            transport = bundle.layer_bundle(level_below).transport(path, start)
            left = compose(checked[v], m_bundle.label(edge))
            right = compose(transport, checked[u])
            if left != right:
                issues.append(
                    ("naturality", edge, f"fiber maps are not natural along the edge ({left} != {right})")
                )
    return issues


def validate_stratified(bundle: StratifiedBundle) -> ValidationReport:
    issues = tuple(f"{entity}: {message}" for _, entity, message in _stratified_issues(bundle))
    return ValidationReport(subject="stratified-bundle", issues=issues)


def _require_valid(bundle: StratifiedBundle) -> None:
    issues = _stratified_issues(bundle)
    if not issues:
        return
    kind, entity, message = issues[0]
    if kind == "naturality":
        raise NaturalityError(message, entity=entity)
    raise PreconditionError(message, entity=entity)


def build_stratified(
    space: StratifiedSpace,
    layer0: VBundle,
    layers: Sequence[Tuple[VBundle, Mapping[str, Mor]]] = (),
) -> StratifiedBundle:
    """Glue layer bundles along their attaching fiber maps and validate the result."""
    if len(layers) != len(space.layers):
        raise PreconditionError(
            f"space has {len(space.layers)} attached layers, got {len(layers)} layer bundles"
        )
    if set(layer0.base.ids) != set(space.base0.ids):
        raise PreconditionError("layer 0 bundle does not live over the base stratum", entity="layer0")
    built: List[Tuple[VBundle, AttachingVMap]] = []
    for level, ((m_bundle, fiber_maps), layer) in enumerate(zip(layers, space.layers), start=1):
        if set(m_bundle.base.ids) != set(layer.m.ids):
            raise PreconditionError("layer bundle does not live over its attached space", entity=f"layer{level}")
        if m_bundle.category.name != layer0.category.name:
            raise PreconditionError(
                f"layer uses {m_bundle.category.name}, expected {layer0.category.name}",
                entity=f"layer{level}",
            )
        src = restrict_bundle(m_bundle, layer.a)
        attach = AttachingVMap(src=src, base_map=layer.h, fiber_maps=tuple(sorted(fiber_maps.items())))
        built.append((m_bundle, attach))
    bundle = StratifiedBundle(space=space, layer0=layer0, layers=tuple(built))
    _require_valid(bundle)
    logger.info("Built stratified bundle with %s strata over %s cells.", bundle.depth, len(bundle.total.cells))
    return bundle


def coordinate_map(src_dim: int, dst_dim: int) -> Mor:
    """The matrix with ones on the diagonal: identity, projection or inclusion."""
    return Mor.of(
        [[1 if i == j else 0 for j in range(src_dim)] for i in range(dst_dim)],
        src_dim=src_dim,
    )


def trivial_stratified(
    space: StratifiedSpace,
    category: StructureCategory,
    dims: int | Sequence[int],
) -> StratifiedBundle:
    """Product layers glued by coordinate maps over the attached vertices."""
    per_level = [dims] * space.depth if isinstance(dims, int) else list(dims)
    if len(per_level) != space.depth:
        raise PreconditionError(f"expected {space.depth} fiber dimensions, got {len(per_level)}")
    totals = space.totals()
    layer0 = trivial_bundle(space.base0, category, per_level[0])
    layers: List[Tuple[VBundle, Dict[str, Mor]]] = []
    for level, layer in enumerate(space.layers, start=1):
        m_bundle = trivial_bundle(layer.m, category, per_level[level])
        below = totals[level - 1]
        fiber_maps = {
            a: coordinate_map(per_level[level], per_level[below.tag(layer.h.image(a))])
            for a in layer.a
            if layer.m.cell(a).dim == 0
        }
        layers.append((m_bundle, fiber_maps))
    return build_stratified(space, layer0, layers)


# ---------------------------------------------------------------------------
# Flattening
# ---------------------------------------------------------------------------


def layer_inclusion(space: StratifiedSpace, level: int) -> CellularMap:
    """The characteristic map of layer ``level`` into the assembled complex."""
    totals = space.totals()
    total = totals[-1]
    if level == 0:
        return inclusion_map(space.base0, total)
    step = space.steps()[level - 1]
    return compose_maps(inclusion_map(totals[level], total), step.from_m)


def restrict_to_layer(bundle: VBundle, space: StratifiedSpace, level: int) -> VBundle:
    """Pull a bundle over the assembled complex back to one layer's space."""
    return pullback_bundle(layer_inclusion(space, level), bundle)


def flatten(bundle: StratifiedBundle) -> VBundle:
    """One flat cocycle on the assembled complex.

    Every attaching fiber map must be invertible; the label of an edge in
    stratum i is its layer label conjugated by the fiber maps at its
    attached endpoints.
    """
    for level in range(1, bundle.depth):
        for cell_id, phi in bundle.attach(level).fiber_maps:
            if not is_invertible(phi):
                raise BundleTheoremError(
                    f"attaching fiber map {phi} of layer {level} is not invertible", entity=cell_id
                )
    total = bundle.total
    fiber = {v: bundle.fiber_dim(v) for v in total.vertices}
    labels: Dict[str, Mor] = {}
    for edge in total.edges:
        level = total.tag(edge)
        layer_b = bundle.layer_bundle(level)
        label = layer_b.label(edge)
        if level == 0:
            labels[edge] = label
            continue
        maps = bundle.attach(level).maps
        u, v = layer_b.base.endpoints(edge)
        into_v = maps.get(v, identity(layer_b.dim_at(v)))
        into_u = maps.get(u, identity(layer_b.dim_at(u)))
        labels[edge] = compose(into_v, compose(label, inverse(into_u)))
    try:
        flat = VBundle.build(total, bundle.category, fiber, labels)
    except PreconditionError as error:
        raise BundleTheoremError("fiber dimensions jump across strata", entity=error.entity) from error
    issues = cocycle_issues(flat)
    if issues:
        entity, _, message = issues[0].partition(": ")
        raise BundleTheoremError(f"flattened cocycle is invalid: {message}", entity=entity)
    logger.info("Flattened %s strata into one cocycle on %s edges.", bundle.depth, len(labels))
    return flat


# ---------------------------------------------------------------------------
# Stratified maps and their layer decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StratifiedMap:
    """A cellular map of assembled complexes, optionally with its layer maps.

    ``layer_maps[0]`` maps X̄₀ to X̄′₀ and ``layer_maps[i]`` maps M̄ᵢ to M̄′ᵢ.
    """

    src: StratifiedSpace
    dst: StratifiedSpace
    total: CellularMap
    layer_maps: Optional[Tuple[CellularMap, ...]] = None

    @classmethod
    def build(
        cls,
        src: StratifiedSpace,
        dst: StratifiedSpace,
        cell_images: Mapping[str, str],
        edge_paths: Optional[Mapping[str, Path]] = None,
        layer_maps: Optional[Sequence[CellularMap]] = None,
    ) -> "StratifiedMap":
        total = CellularMap.build(src.totals()[-1], dst.totals()[-1], cell_images, edge_paths)
        return cls(src, dst, total, tuple(layer_maps) if layer_maps is not None else None)

    def tagged(self) -> CellularMap:
        """The total map re-based on the stratum-tagged assembled complexes."""
        src_total = self.src.totals()[-1]
        dst_total = self.dst.totals()[-1]
        if set(self.total.src.ids) != set(src_total.ids) or set(self.total.dst.ids) != set(dst_total.ids):
            raise PreconditionError("map does not run between the assembled complexes")
        return CellularMap(src_total, dst_total, self.total.cell_images, self.total.edge_paths)

    def decompose(self) -> Tuple[CellularMap, ...]:
        if self.layer_maps is not None:
            if len(self.layer_maps) != self.src.depth:
                raise PreconditionError(
                    f"expected {self.src.depth} layer maps, got {len(self.layer_maps)}"
                )
            return self.layer_maps
        cached = self.__dict__.get("_decomposition")
        if cached is None:
            cached = decompose_map(self)
            object.__setattr__(self, "_decomposition", cached)
        return cached


def identity_stratified(space: StratifiedSpace) -> StratifiedMap:
    layer_maps = [identity_map(space.base0)] + [identity_map(layer.m) for layer in space.layers]
    return StratifiedMap(space, space, identity_map(space.totals()[-1]), tuple(layer_maps))


def require_stratum_preserving(f: StratifiedMap) -> CellularMap:
    tagged = f.tagged()
    report = check_stratum_preserving(tagged)
    if not report.ok:
        entity = report.issues[0].split(":", 1)[0]
        raise StratumPreservingError(report.issues[0], entity=entity)
    return tagged


def compose_stratified(g: StratifiedMap, f: StratifiedMap) -> StratifiedMap:
    """Return ``g ∘ f``; layer maps compose when both sides carry them."""
    if f.dst != g.src:
        raise PreconditionError("stratified maps are not composable")
    total = compose_maps(g.total, f.total)
    layer_maps = None
    if f.layer_maps is not None and g.layer_maps is not None:
        layer_maps = tuple(compose_maps(gl, fl) for gl, fl in zip(g.layer_maps, f.layer_maps))
    return StratifiedMap(f.src, g.dst, total, layer_maps)


def _only(candidates: Sequence, cell_id: str):
    if len(candidates) == 1:
        return candidates[0]
    if not candidates:
        raise AmbiguousDecompositionError("no cell of the target layer covers this cell", entity=cell_id)
    raise AmbiguousDecompositionError(
        f"{len(candidates)} cells of the target layer could cover this cell", entity=cell_id
    )


def _stratum_path(path: Path, allowed: Set[str], entity: str) -> Path:
    for edge, _ in path:
        if edge not in allowed:
            raise StratumPreservingError("edge path leaves the matching stratum", entity=entity)
    return path


def _base_layer_map(f: CellularMap, src: StratifiedSpace, dst: StratifiedSpace) -> CellularMap:
    allowed = set(dst.base0.edges)
    images = {c: f.image(c) for c in src.base0.ids}
    paths = {e: _stratum_path(f.path(e), allowed, e) for e in src.base0.edges}
    return CellularMap.build(src.base0, dst.base0, images, paths)


def _infer_layer_map(f: CellularMap, layer: Layer, target: Layer) -> CellularMap:
    m, m2 = layer.m, target.m
    attached = set(layer.a)
    attached2 = set(target.a)
    open2 = set(target.open_cells)
    images: Dict[str, str] = {c: f.image(c) for c in layer.open_cells}
    paths: Dict[str, Path] = {}
    open_edges = [e for e in m.edges if e not in attached]
    for edge in open_edges:
        paths[edge] = _stratum_path(f.path(edge), open2, edge)

    # open edges pin down the images of their attached endpoints
    forced: Dict[str, Set[str]] = {}
    for edge in open_edges:
        u, v = m.endpoints(edge)
        path = paths[edge]
        if path:
            start = m2.oriented_endpoints(path[0])[0]
            end = m2.oriented_endpoints(path[-1])[1]
        else:
            start = end = images[edge]
        for vertex, image in ((u, start), (v, end)):
            if vertex in attached:
                forced.setdefault(vertex, set()).add(image)

    vertices2 = [b for b in sorted(attached2) if m2.cell(b).dim == 0]
    for vertex in sorted(a for a in attached if m.cell(a).dim == 0):
        wanted = f.image(layer.h.image(vertex))
        candidates = [b for b in vertices2 if target.h.image(b) == wanted]
        if vertex in forced:
            candidates = [b for b in candidates if b in forced[vertex]]
        images[vertex] = _only(candidates, vertex)

    edges2 = [b for b in sorted(attached2) if m2.cell(b).dim == 1]
    for edge in sorted(e for e in attached if m.cell(e).dim == 1):
        u, v = m.endpoints(edge)
        gu, gv = images[u], images[v]
        wanted = reduce_path(f.image_path(layer.h.path(edge)))
        options: List[Tuple[str, Path]] = []
        if gu == gv and not wanted:
            options.append((gu, ()))
        for b in edges2:
            bu, bv = m2.endpoints(b)
            image_path = reduce_path(target.h.path(b))
            if (bu, bv) == (gu, gv) and image_path == wanted:
                options.append((b, ((b, 1),)))
            elif (bu, bv) == (gv, gu) and reduce_path(reverse_path(image_path)) == wanted:
                options.append((b, ((b, -1),)))
        images[edge], paths[edge] = _only(options, edge)

    for cell_id in sorted((c for c in attached if m.cell(c).dim >= 2), key=lambda c: (m.cell(c).dim, c)):
        cell = m.cell(cell_id)
        wanted = f.image(layer.h.image(cell_id))
        candidates = [
            b for b in sorted(attached2) if m2.cell(b).dim <= cell.dim and target.h.image(b) == wanted
        ]
        if cell.dim == 2 and len(candidates) > 1:
            walk: List = []
            for edge, sign in cell.boundary:
                walk.extend(paths[edge] if sign > 0 else reverse_path(paths[edge]))
            word = reduce_cyclic(walk)
            candidates = [
                b for b in candidates
                if m2.cell(b).dim == 2 and cyclic_match(word, reduce_cyclic(m2.cell(b).boundary))
            ]
        images[cell_id] = _only(candidates, cell_id)
    return CellularMap.build(m, m2, images, paths)


def decompose_map(f: StratifiedMap) -> Tuple[CellularMap, ...]:
    """Infer the layer maps of a stratum-preserving map cell by cell.

    Open cells keep their ids, so their images are read off directly; an
    attached cell must go to the unique attached cell of the target layer
    whose attaching image agrees. Several candidates are never guessed
    between.
    """
    total = require_stratum_preserving(f)
    maps = [_base_layer_map(total, f.src, f.dst)]
    for level, layer in enumerate(f.src.layers, start=1):
        maps.append(_infer_layer_map(total, layer, f.dst.layers[level - 1]))
    logger.debug("Decomposed stratified map into %s layer maps.", len(maps))
    return tuple(maps)


def pullback_stratified(f: StratifiedMap, bundle: StratifiedBundle) -> StratifiedBundle:
    """Layerwise pullback; attaching fiber maps are read through the layer maps."""
    if f.dst != bundle.space:
        raise PreconditionError("map target is not the stratified base of the bundle")
    require_stratum_preserving(f)
    layer_maps = f.decompose()
    layer0 = pullback_bundle(layer_maps[0], bundle.layer0)
    layers: List[Tuple[VBundle, Dict[str, Mor]]] = []
    for level, (g, layer) in enumerate(zip(layer_maps[1:], f.src.layers), start=1):
        m_bundle = pullback_bundle(g, bundle.layer_bundle(level))
        source_maps = bundle.attach(level).maps
        fiber_maps = {a: source_maps[g.image(a)] for a in layer.a if g.image(a) in source_maps}
        layers.append((m_bundle, fiber_maps))
    return build_stratified(f.src, layer0, layers)


# ---------------------------------------------------------------------------
# Isomorphism search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StratifiedIsoResult:
    status: str
    gauges: Tuple[Gauge, ...] = ()
    reason: str = ""

    @property
    def found(self) -> bool:
        return self.status == ISOMORPHIC

    def to_dict(self) -> Dict[str, object]:
        return {
            "status": self.status,
            "reason": self.reason,
            "gauges": [
                {cell: format_matrix(value.matrix) for cell, value in gauge.values} for gauge in self.gauges
            ],
        }


def _gauge_over(gauge: Gauge, base: CellComplex, cell_id: str) -> Mor:
    values = dict(gauge.values)
    if cell_id in values:
        return values[cell_id]
    return values[base.anchor(cell_id)]


def _lower_gauge(x: StratifiedBundle, gauges: Sequence[Gauge], target: str) -> Mor:
    level = x.total.tag(target)
    return _gauge_over(gauges[level], x.layer_bundle(level).base, target)


def _intertwines(x: StratifiedBundle, y: StratifiedBundle, level: int, gauges: Sequence[Gauge]) -> bool:
    attach_x = x.attach(level)
    attach_y = y.attach(level)
    base = x.layer_bundle(level).base
    for cell_id, phi_x in attach_x.fiber_maps:
        phi_y = attach_y.maps.get(cell_id)
        if phi_y is None:
            continue
        lower = _lower_gauge(x, gauges, attach_x.base_map.image(cell_id))
        if compose(lower, phi_x) != compose(phi_y, _gauge_over(gauges[level], base, cell_id)):
            return False
    return True


def _finite_search(x: StratifiedBundle, y: StratifiedBundle, budget: int) -> StratifiedIsoResult:
    per_level: List[Dict[str, List[Mor]]] = []
    for level in range(x.depth):
        options = component_conjugators(x.layer_bundle(level), y.layer_bundle(level))
        stuck = [bp for bp, found in options.items() if not found]
        if stuck:
            return StratifiedIsoResult(NOT_ISOMORPHIC, reason=f"layer {level}: no gauge on component {stuck[0]}")
        per_level.append(options)
    combinations = math.prod(len(found) for options in per_level for found in options.values())
    if combinations > budget:
        logger.warning("Stratified isomorphism search needs %s combinations (budget %s).", combinations, budget)
        return StratifiedIsoResult(
            INCONCLUSIVE_BUDGET, reason=f"{combinations} gauge combinations exceed the budget {budget}"
        )
    chosen: List[Gauge] = []

    def search(level: int) -> bool:
        if level == x.depth:
            return True
        options = per_level[level]
        basepoints = sorted(options)
        xb, yb = x.layer_bundle(level), y.layer_bundle(level)
        for combo in itertools.product(*(options[bp] for bp in basepoints)):
            chosen.append(witness_gauge(xb, yb, dict(zip(basepoints, combo))))
            if (level == 0 or _intertwines(x, y, level, chosen)) and search(level + 1):
                return True
            chosen.pop()
        return False

    if search(0):
        return StratifiedIsoResult(ISOMORPHIC, gauges=tuple(chosen))
    return StratifiedIsoResult(NOT_ISOMORPHIC, reason="no layer gauges intertwine the attaching maps")


def _satisfied_by_identity(constraints, dim: int) -> bool:
    unit = identity(dim)
    for terms, constant in constraints:
        total = None
        for left, right in terms:
            value = compose(left, compose(unit, right))
            total = value if total is None else Mor(
                value.src, value.dst,
                tuple(tuple(a + b for a, b in zip(r1, r2)) for r1, r2 in zip(total.matrix, value.matrix)),
            )
        if total is not None and total != constant:
            return False
    return True


def _solve_invertible(constraints, dim: int, det_sign: Optional[int] = None) -> Optional[Mor]:
    if _satisfied_by_identity(constraints, dim) and det_sign in (None, 1):
        return identity(dim)
    solved = solve_matrix_equations(constraints, dim, dim)
    if solved is None:
        return None
    return first_invertible(*solved, det_sign=det_sign)


def _open_layer_gauge(
    x: StratifiedBundle,
    y: StratifiedBundle,
    level: int,
    gauges: Sequence[Gauge],
) -> Optional[Gauge]:
    xb, yb = x.layer_bundle(level), y.layer_bundle(level)
    attach_x, attach_y = x.attach(level), y.attach(level)
    t_x, t_y = tree_transports(xb), tree_transports(yb)
    normal_x, normal_y = normalize(xb), normalize(yb)
    values: Dict[str, Mor] = {}
    for basepoint, dim in xb.fiber:
        presentation = pi1(xb.base, basepoint)
        constraints = []
        for generator in presentation.generators:
            a, b = normal_x.label(generator), normal_y.label(generator)
            constraints.append((((identity(dim), a), (scale(b, -1), identity(dim))), zero(dim, dim)))
        for vertex in presentation.vertices:
            phi_x, phi_y = attach_x.maps.get(vertex), attach_y.maps.get(vertex)
            if phi_x is None or phi_y is None:
                continue
            lower = _lower_gauge(x, gauges, attach_x.base_map.image(vertex))
            constraints.append(
                (((compose(phi_y, t_y[vertex]), inverse(t_x[vertex])),), compose(lower, phi_x))
            )
        g0 = _solve_invertible(constraints, dim)
        if g0 is None:
            logger.info("No invertible gauge found on component %s of layer %s.", basepoint, level)
            return None
        for vertex in presentation.vertices:
            values[vertex] = compose(t_y[vertex], compose(g0, inverse(t_x[vertex])))
    # positive-dimensional attached cells get their own value in the anchor's component of GL
    for cell_id, phi_x in attach_x.fiber_maps:
        phi_y = attach_y.maps.get(cell_id)
        if phi_y is None or xb.base.cell(cell_id).dim == 0:
            continue
        anchor_value = values[xb.base.anchor(cell_id)]
        rhs = compose(_lower_gauge(x, gauges, attach_x.base_map.image(cell_id)), phi_x)
        if compose(phi_y, anchor_value) == rhs:
            continue
        dim = anchor_value.src.dim
        sign = 1 if det(anchor_value) > 0 else -1
        value = _solve_invertible([(((phi_y, identity(dim)),), rhs)], dim, det_sign=sign)
        if value is None:
            logger.info("No cellwise gauge found over %s of layer %s.", cell_id, level)
            return None
        values[cell_id] = value
    return Gauge.build(values)


def _open_search(x: StratifiedBundle, y: StratifiedBundle) -> StratifiedIsoResult:
    gauges: List[Gauge] = []
    for level in range(x.depth):
        if level == 0:
            comparison = compare_bundles(x.layer0, y.layer0)
            found, why = comparison.gauge, comparison.reason
        else:
            found, why = _open_layer_gauge(x, y, level, gauges), "no gauge found"
        if found is None:
            logger.warning("Open-category isomorphism search gave up on layer %s: %s.", level, why)
            return StratifiedIsoResult(INCONCLUSIVE_OPEN, reason=f"layer {level}: {why}")
        gauges.append(found)
    return StratifiedIsoResult(ISOMORPHIC, gauges=tuple(gauges))


def is_isomorphic_stratified(
    x: StratifiedBundle,
    y: StratifiedBundle,
    budget: int = ISO_SEARCH_BUDGET,
) -> StratifiedIsoResult:
    """Search layer gauges that carry x's layers onto y's and intertwine the attaching maps.

    Finite categories are searched exhaustively within ``budget`` gauge
    combinations. Open categories solve one linear system per component and
    never conclude "not isomorphic" once fiber dimensions agree.
    """
    if x.space != y.space:
        return StratifiedIsoResult(NOT_ISOMORPHIC, reason="different stratified bases")
    for level in range(x.depth):
        if x.layer_bundle(level).fiber != y.layer_bundle(level).fiber:
            return StratifiedIsoResult(NOT_ISOMORPHIC, reason=f"fiber dimensions differ on layer {level}")
    if x.category.is_open:
        return _open_search(x, y)
    return _finite_search(x, y, budget)


# ---------------------------------------------------------------------------
# Homotopies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Homotopy:
    """A stratified map out of X̄ × I, given on the assembled prism complex."""

    src: StratifiedSpace
    dst: StratifiedSpace
    total: CellularMap
    layer_maps: Optional[Tuple[CellularMap, ...]] = None

    @property
    def prism(self) -> StratifiedPrism:
        cached = self.__dict__.get("_prism")
        if cached is None:
            cached = prism_space(self.src)
            object.__setattr__(self, "_prism", cached)
        return cached

    def as_map(self) -> StratifiedMap:
        return StratifiedMap(self.prism.space, self.dst, self.total, self.layer_maps)

    def end(self, which: int) -> StratifiedMap:
        """The map at time 0 or 1: the homotopy precomposed with an end inclusion."""
        prism = self.prism
        if which == 0:
            inclusion = StratifiedMap(self.src, prism.space, prism.bottom, prism.layer_bottoms)
        elif which == 1:
            inclusion = StratifiedMap(self.src, prism.space, prism.top, prism.layer_tops)
        else:
            raise PreconditionError(f"homotopy end must be 0 or 1, got {which}")
        outer = self.as_map()
        outer = StratifiedMap(outer.src, outer.dst, outer.total, outer.decompose())
        return compose_stratified(outer, inclusion)


def check_homotopy_invariance(homotopy: Homotopy, bundle: StratifiedBundle) -> StratifiedIsoResult:
    """Compare the pullbacks of ``bundle`` along both ends of the homotopy."""
    start = pullback_stratified(homotopy.end(0), bundle)
    finish = pullback_stratified(homotopy.end(1), bundle)
    result = is_isomorphic_stratified(start, finish)
    logger.info("Homotopy invariance check: %s.", result.status)
    return result


def describe_stratified(bundle: StratifiedBundle) -> Dict[str, object]:
    return {
        "category": bundle.category.name,
        "depth": bundle.depth,
        "stratum_dims": {str(level): list(dims) for level, dims in bundle.stratum_dims().items()},
    }


__all__ = [
    "AttachingVMap",
    "Homotopy",
    "INCONCLUSIVE_BUDGET",
    "INCONCLUSIVE_OPEN",
    "ISOMORPHIC",
    "ISO_SEARCH_BUDGET",
    "NOT_ISOMORPHIC",
    "StratifiedBundle",
    "StratifiedIsoResult",
    "StratifiedMap",
    "build_stratified",
    "check_homotopy_invariance",
    "compose_stratified",
    "coordinate_map",
    "decompose_map",
    "describe_stratified",
    "flatten",
    "identity_stratified",
    "is_isomorphic_stratified",
    "layer_inclusion",
    "pullback_stratified",
    "require_stratum_preserving",
    "restrict_to_layer",
    "trivial_stratified",
    "validate_stratified",
]
