"""V-bundles over cell complexes as flat cocycles.

A bundle assigns a fiber dimension to each connected component and a
morphism to each 1-cell, read along the cell's boundary orientation
(first endpoint to second). Reversed traversal uses the inverse label.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .complex import CellComplex, CellularMap, Path, inclusion_map, pi1
from .errors import PreconditionError, UnsupportedCategoryError
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
    solve_matrix_equations,
    zero,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VBundle:
    base: CellComplex
    category: StructureCategory
    fiber: Tuple[Tuple[str, int], ...]
    labels: Tuple[Tuple[str, Mor], ...]

    @classmethod
    def build(
        cls,
        base: CellComplex,
        category: StructureCategory,
        fiber: Mapping[str, int],
        labels: Optional[Mapping[str, Mor]] = None,
    ) -> "VBundle":
        """Fiber keys may be any vertex; missing labels default to identities."""
        dims: Dict[str, int] = {}
        for vertex, dim in fiber.items():
            basepoint = base.component_of(vertex)
            if dims.get(basepoint, dim) != dim:
                raise PreconditionError("conflicting fiber dimensions on one component", entity=vertex)
            dims[basepoint] = dim
        for basepoint in base.basepoints:
            if basepoint not in dims:
                raise PreconditionError("component has no fiber dimension", entity=basepoint)
        given = dict(labels or {})
        full: Dict[str, Mor] = {}
        for edge in base.edges:
            if edge in given:
                full[edge] = given[edge]
            else:
                full[edge] = identity(dims[base.component_of(base.endpoints(edge)[0])])
        unknown = sorted(set(given) - set(base.edges))
        if unknown:
            raise PreconditionError("label on a cell that is not a 1-cell", entity=unknown[0])
        return cls(base, category, tuple(sorted(dims.items())), tuple(sorted(full.items())))

    @property
    def label_map(self) -> Dict[str, Mor]:
        cached = self.__dict__.get("_labels")
        if cached is None:
            cached = dict(self.labels)
            object.__setattr__(self, "_labels", cached)
        return cached

    def label(self, edge: str) -> Mor:
        return self.label_map[edge]

    def dim_at(self, vertex: str) -> int:
        return dict(self.fiber)[self.base.component_of(vertex)]

    def dim_over(self, cell_id: str) -> int:
        return self.dim_at(self.base.anchor(cell_id))

    def transport(self, path: Path, start: str) -> Mor:
        """Parallel transport along ``path``; identity on the fiber at ``start`` when empty."""
        result = identity(self.dim_at(start))
        for edge, sign in path:
            step = self.label(edge) if sign > 0 else inverse(self.label(edge))
            result = compose(step, result)
        return result

    def with_labels(self, labels: Mapping[str, Mor]) -> "VBundle":
        return VBundle(self.base, self.category, self.fiber, tuple(sorted(labels.items())))

    def sort_key(self) -> Tuple:
        return (
            tuple(d for _, d in self.fiber),
            tuple(self.label(e).matrix for e in self.base.edges),
        )


@dataclass(frozen=True)
class Gauge:
    """Automorphism per vertex; acts on labels by g(dst)·label·g(src)⁻¹."""

    values: Tuple[Tuple[str, Mor], ...]

    @classmethod
    def build(cls, values: Mapping[str, Mor]) -> "Gauge":
        return cls(tuple(sorted(values.items())))

    def at(self, vertex: str) -> Mor:
        return dict(self.values)[vertex]

    @property
    def is_identity(self) -> bool:
        return all(g == identity(g.src.dim) for _, g in self.values)


def trivial_bundle(base: CellComplex, category: StructureCategory, dim: int | Mapping[str, int]) -> VBundle:
    """Product family with identity labels."""
    if isinstance(dim, int):
        dims = {bp: dim for bp in base.basepoints}
    else:
        dims = dict(dim)
    return VBundle.build(base, category, dims)


def cocycle_issues(bundle: VBundle) -> List[str]:
    """Shape, membership, invertibility and flatness problems of the cocycle."""
    issues: List[str] = []
    base = bundle.base
    for edge in base.edges:
        label = bundle.label(edge)
        u, v = base.endpoints(edge)
        if label.src.dim != bundle.dim_at(u) or label.dst.dim != bundle.dim_at(v):
            issues.append(f"{edge}: label {label} does not map fiber({u}) to fiber({v})")
            continue
        if not is_invertible(label):
            issues.append(f"{edge}: label {label} is not an automorphism")
            continue
        if not bundle.category.contains(label):
            issues.append(f"{edge}: label {label} is outside {bundle.category.name}")
    if issues:
        return issues
    for cell in base.cells_of_dim(2):
        if not cell.boundary:
            continue
        start = base.oriented_endpoints(cell.boundary[0])[0]
        holonomy = bundle.transport(cell.boundary, start)
        if holonomy != identity(holonomy.src.dim):
            issues.append(f"{cell.id}: holonomy {holonomy} is not the identity")
    return issues


def validate_bundle(bundle: VBundle) -> ValidationReport:
    if not bundle.category.is_groupoid:
        raise UnsupportedCategoryError(
            "bundle validation needs a groupoid structure category", entity=bundle.category.name
        )
    return ValidationReport(subject="bundle", issues=tuple(cocycle_issues(bundle)))


def apply_gauge(gauge: Gauge, bundle: VBundle) -> VBundle:
    values = dict(gauge.values)
    labels: Dict[str, Mor] = {}
    for edge in bundle.base.edges:
        u, v = bundle.base.endpoints(edge)
        labels[edge] = compose(values[v], compose(bundle.label(edge), inverse(values[u])))
    return bundle.with_labels(labels)


def tree_transports(bundle: VBundle) -> Dict[str, Mor]:
    """Transport from each component's basepoint along the spanning tree."""
    cached = bundle.__dict__.get("_transports")
    if cached is None:
        cached = {}
        for basepoint in bundle.base.basepoints:
            presentation = pi1(bundle.base, basepoint)
            for vertex in presentation.vertices:
                cached[vertex] = bundle.transport(presentation.tree_path(vertex), basepoint)
        object.__setattr__(bundle, "_transports", cached)
    return cached


def normal_gauge(bundle: VBundle) -> Gauge:
    """Gauge making every spanning-tree label the identity."""
    return Gauge.build({v: inverse(t) for v, t in tree_transports(bundle).items()})


def normalize(bundle: VBundle) -> VBundle:
    return apply_gauge(normal_gauge(bundle), bundle)


def generator_labels(bundle: VBundle, basepoint: str) -> Tuple[Tuple[str, Mor], ...]:
    """Holonomies of the non-tree edges of one component after normalization."""
    normal = normalize(bundle)
    presentation = pi1(bundle.base, basepoint)
    return tuple((edge, normal.label(edge)) for edge in presentation.generators)


def _conjugate(g: Mor, a: Mor) -> Mor:
    return compose(g, compose(a, inverse(g)))


def _identity_first(automorphisms: List[Mor], dim: int) -> List[Mor]:
    unit = identity(dim)
    return sorted(automorphisms, key=lambda g: g != unit)


def _component_conjugator(
    category: StructureCategory,
    dim: int,
    source: Sequence[Mor],
    target: Sequence[Mor],
) -> Tuple[Optional[Mor], bool]:
    """A conjugator, or None plus whether the search gave up rather than ruled one out."""
    if not category.is_open:
        for g in _identity_first(category.automorphisms(dim), dim):
            if all(_conjugate(g, a) == b for a, b in zip(source, target)):
                return g, False
        return None, False
    if all(a == b for a, b in zip(source, target)):
        return identity(dim), False
    # g·a = b·g for every generator, solved linearly
    constraints = [
        (((identity(dim), a), (_negate(b), identity(dim))), zero(dim, dim))
        for a, b in zip(source, target)
    ]
    solved = solve_matrix_equations(constraints, dim, dim)
    if solved is None:
        return None, False
    particular, basis = solved
    found = first_invertible(particular, basis)
    # with no homogeneous directions the unique intertwiner is singular
    return found, found is None and bool(basis)


def _negate(f: Mor) -> Mor:
    return Mor(f.src, f.dst, tuple(tuple(-x for x in row) for row in f.matrix))


@dataclass(frozen=True)
class BundleComparison:
    """Outcome of ``compare_bundles``; ``gave_up`` marks an open-category search that proved nothing."""

    gauge: Optional[Gauge]
    gave_up: bool = False
    reason: str = ""

    @property
    def found(self) -> bool:
        return self.gauge is not None


def is_isomorphic(e: VBundle, f: VBundle) -> Optional[Gauge]:
    """Return a gauge ``w`` with ``apply_gauge(w, e) == f`` or None.

    Over open categories None also covers a search that gave up; use
    ``compare_bundles`` to tell the two apart.
    """
    return compare_bundles(e, f).gauge


def compare_bundles(e: VBundle, f: VBundle) -> BundleComparison:
    if e.base.cells != f.base.cells:
        raise PreconditionError("bundles live over different complexes")
    if e.fiber != f.fiber:
        logger.info("Not isomorphic: fiber dimensions differ (%s vs %s).", e.fiber, f.fiber)
        return BundleComparison(None, reason="fiber dimensions differ")
    normal_e = normalize(e)
    normal_f = normalize(f)
    choice: Dict[str, Mor] = {}
    for basepoint, dim in e.fiber:
        presentation = pi1(e.base, basepoint)
        source = [normal_e.label(g) for g in presentation.generators]
        target = [normal_f.label(g) for g in presentation.generators]
        g0, gave_up = _component_conjugator(e.category, dim, source, target)
        if g0 is None and gave_up:
            logger.info("No invertible conjugator among small combinations on component %s.", basepoint)
            return BundleComparison(None, gave_up=True, reason=f"component {basepoint}: search gave up")
        if g0 is None:
            logger.info("Not isomorphic: no conjugator on component %s.", basepoint)
            return BundleComparison(None, reason=f"component {basepoint}: no conjugator exists")
        choice[basepoint] = g0
    return BundleComparison(witness_gauge(e, f, choice))


def witness_gauge(e: VBundle, f: VBundle, choice: Mapping[str, Mor]) -> Gauge:
    """Spread one conjugator per component over its vertices: w(v) = T_f(v)·g0·T_e(v)⁻¹."""
    t_e = tree_transports(e)
    t_f = tree_transports(f)
    witness: Dict[str, Mor] = {}
    for vertex in e.base.vertices:
        g0 = choice[e.base.component_of(vertex)]
        witness[vertex] = compose(t_f[vertex], compose(g0, inverse(t_e[vertex])))
    return Gauge.build(witness)


def component_conjugators(e: VBundle, f: VBundle) -> Dict[str, List[Mor]]:
    """Every automorphism conjugating e's normalized holonomies onto f's, per component.

    Only finite categories can be enumerated; an empty list means the
    component admits no gauge.
    """
    e.category.require_finite()
    normal_e = normalize(e)
    normal_f = normalize(f)
    result: Dict[str, List[Mor]] = {}
    for basepoint, dim in e.fiber:
        if dict(f.fiber).get(basepoint) != dim:
            result[basepoint] = []
            continue
        generators = pi1(e.base, basepoint).generators
        source = [normal_e.label(g) for g in generators]
        target = [normal_f.label(g) for g in generators]
        result[basepoint] = [
            g for g in _identity_first(e.category.automorphisms(dim), dim)
            if all(_conjugate(g, a) == b for a, b in zip(source, target))
        ]
    return result


def pullback_bundle(f: CellularMap, bundle: VBundle) -> VBundle:
    """Labels are products of the bundle's labels along f's edge paths."""
    if f.dst.cells != bundle.base.cells:
        raise PreconditionError("map target is not the bundle's base")
    dims = {bp: bundle.dim_at(f.image(bp)) for bp in f.src.basepoints}
    labels: Dict[str, Mor] = {}
    for edge in f.src.edges:
        u, _ = f.src.endpoints(edge)
        labels[edge] = bundle.transport(f.path(edge), f.image(u))
    return VBundle.build(f.src, bundle.category, dims, labels)


def restrict_bundle(bundle: VBundle, cells: Iterable[str]) -> VBundle:
    """Restriction to the closure of ``cells``: pullback along the inclusion."""
    sub = bundle.base.subcomplex(cells)
    return pullback_bundle(inclusion_map(sub, bundle.base), bundle)


def _canonical_labeling(category: StructureCategory, dim: int, labeling: Tuple[Mor, ...]) -> Tuple:
    best = None
    for g in category.automorphisms(dim):
        key = tuple(_conjugate(g, a).matrix for a in labeling)
        if best is None or key < best:
            best = key
    return best if best is not None else ()


def _relators_hold(relators: Sequence[Path], values: Mapping[str, Mor], dim: int) -> bool:
    for word in relators:
        result = identity(dim)
        for edge, sign in word:
            step = values[edge] if sign > 0 else inverse(values[edge])
            result = compose(step, result)
        if result != identity(dim):
            return False
    return True


def _component_classes(
    base: CellComplex,
    category: StructureCategory,
    basepoint: str,
    rank_cap: int,
) -> List[Tuple[int, Dict[str, Mor]]]:
    presentation = pi1(base, basepoint)
    classes: List[Tuple[int, Dict[str, Mor]]] = []
    for dim in range(rank_cap + 1):
        if not category.has_object(dim):
            continue
        automorphisms = category.automorphisms(dim)
        seen: Dict[Tuple, Dict[str, Mor]] = {}
        for labeling in itertools.product(automorphisms, repeat=len(presentation.generators)):
            values = dict(zip(presentation.generators, labeling))
            if not _relators_hold(presentation.relators, values, dim):
                continue
            key = _canonical_labeling(category, dim, labeling)
            if key not in seen:
                seen[key] = values
        for key in sorted(seen):
            canonical = {
                g: Mor(identity(dim).src, identity(dim).dst, matrix)
                for g, matrix in zip(presentation.generators, key)
            }
            classes.append((dim, canonical))
    return classes


def classify_bundles(base: CellComplex, category: StructureCategory, rank_cap: int) -> List[VBundle]:
    """One normalized representative per gauge class with fiber dimension <= rank_cap."""
    category.require_finite()
    if not category.is_groupoid:
        raise UnsupportedCategoryError("classification needs a groupoid", entity=category.name)
    per_component = [_component_classes(base, category, bp, rank_cap) for bp in base.basepoints]
    representatives: List[VBundle] = []
    for combo in itertools.product(*per_component):
        dims = {bp: dim for bp, (dim, _) in zip(base.basepoints, combo)}
        labels: Dict[str, Mor] = {}
        for _, values in combo:
            labels.update(values)
        representatives.append(VBundle.build(base, category, dims, labels))
    representatives.sort(key=VBundle.sort_key)
    logger.info("Classified %s bundle classes over %s cells (cap %s).", len(representatives), len(base.cells), rank_cap)
    return representatives


def bundle_invariants(bundle: VBundle) -> Dict[str, object]:
    """Fiber dimension and generator determinant signs per component."""
    components = []
    for basepoint, dim in bundle.fiber:
        signs = {}
        for edge, holonomy in generator_labels(bundle, basepoint):
            signs[edge] = 1 if det(holonomy) > 0 else -1
        components.append({"basepoint": basepoint, "dim": dim, "orientation": signs})
    return {"components": components}


def describe_bundle(bundle: VBundle) -> Dict[str, object]:
    return {
        "fiber": dict(bundle.fiber),
        "labels": {edge: format_matrix(m.matrix) for edge, m in bundle.labels},
    }


__all__ = [
    "BundleComparison",
    "Gauge",
    "VBundle",
    "apply_gauge",
    "bundle_invariants",
    "classify_bundles",
    "cocycle_issues",
    "compare_bundles",
    "component_conjugators",
    "describe_bundle",
    "generator_labels",
    "is_isomorphic",
    "normal_gauge",
    "normalize",
    "pullback_bundle",
    "restrict_bundle",
    "trivial_bundle",
    "tree_transports",
    "validate_bundle",
    "witness_gauge",
]
