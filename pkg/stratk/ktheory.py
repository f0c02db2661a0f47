"""Iso-class monoids of stratified bundles and their Grothendieck groups.

Classes are enumerated exhaustively up to a per-stratum rank cap. Sums and
products are only recorded when an isomorphism to an enumerated class has
been verified; everything else is marked and surfaced as a window caveat.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from sympy import Matrix, ZZ
from sympy.core.intfunc import igcdex
from sympy.matrices.normalforms import smith_normal_decomp

from .bundle import VBundle, classify_bundles, restrict_bundle
from .complex import StratifiedSpace
from .errors import BundleTheoremError, IntegrityError, PreconditionError, UnsupportedCategoryError
from .functorial import map_stratified2
from .lincat import DIRECT_SUM, TENSOR, Mor, StructureCategory, ValidationReport, identity
from .strata import (
    ISOMORPHIC,
    NOT_ISOMORPHIC,
    AttachingVMap,
    StratifiedBundle,
    StratifiedMap,
    build_stratified,
    coordinate_map,
    flatten,
    is_isomorphic_stratified,
    pullback_stratified,
    trivial_stratified,
    validate_stratified,
)

logger = logging.getLogger(__name__)

DEFAULT_RANK_CAP = 4
ENUMERATION_BUDGET = 10**5

OUTSIDE_WINDOW = "outside-window"
UNRESOLVED = "unresolved"

TableEntry = Union[int, str]
Element = Tuple[int, ...]
Signature = Tuple[Tuple[int, ...], ...]


def signature(bundle: StratifiedBundle) -> Signature:
    """Fiber dimensions per component, layer by layer."""
    return tuple(tuple(d for _, d in bundle.layer_bundle(level).fiber) for level in range(bundle.depth))


def _twist_count(bundle: StratifiedBundle) -> int:
    count = 0
    for level in range(bundle.depth):
        count += sum(1 for _, label in bundle.layer_bundle(level).labels if label != identity(label.src.dim))
    for _, attach in bundle.layers:
        count += sum(1 for _, phi in attach.fiber_maps if phi != coordinate_map(phi.src.dim, phi.dst.dim))
    return count


def _class_key(bundle: StratifiedBundle) -> Tuple:
    return (
        sum(sum(dims) for dims in signature(bundle)),
        signature(bundle),
        _twist_count(bundle),
        tuple(bundle.layer_bundle(level).sort_key() for level in range(bundle.depth)),
        tuple(tuple(phi.matrix for _, phi in attach.fiber_maps) for _, attach in bundle.layers),
    )


@dataclass(frozen=True)
class ClassMonoid:
    space: StratifiedSpace
    category: StructureCategory
    classes: Tuple[StratifiedBundle, ...]
    add_table: Mapping[Tuple[int, int], TableEntry]
    rank_cap: int
    partial: bool = False

    @property
    def size(self) -> int:
        return len(self.classes)

    def within_window(self, sig: Signature) -> bool:
        return all(d <= self.rank_cap and self.category.has_object(d) for dims in sig for d in dims)

    def locate(self, bundle: StratifiedBundle) -> TableEntry:
        """Index of the class isomorphic to ``bundle``, or a window marker."""
        sig = signature(bundle)
        if not self.within_window(sig):
            return OUTSIDE_WINDOW
        unresolved = False
        for index, candidate in enumerate(self.classes):
            if signature(candidate) != sig:
                continue
            result = is_isomorphic_stratified(bundle, candidate)
            if result.status == ISOMORPHIC:
                return index
            if result.status != NOT_ISOMORPHIC:
                unresolved = True
        if unresolved:
            return UNRESOLVED
        raise IntegrityError("bundle within the window matches no enumerated class", entity=str(sig))

    def to_dict(self) -> Dict[str, object]:
        return {
            "classes": [list(map(list, signature(c))) for c in self.classes],
            "add_table": [[i, j, entry] for (i, j), entry in sorted(self.add_table.items()) if i <= j],
            "window": self.rank_cap,
            "partial": self.partial,
        }


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


def _fiber_map_options(
    space: StratifiedSpace,
    level: int,
    category: StructureCategory,
    lower: Sequence[VBundle],
    m_bundle: VBundle,
) -> Tuple[List[str], List[List[Mor]]]:
    layer = space.layers[level - 1]
    below = space.totals()[level - 1]
    cells = sorted(a for a in layer.a if layer.m.cell(a).dim == 0)
    options: List[List[Mor]] = []
    for a in cells:
        target = layer.h.image(a)
        target_dim = lower[below.tag(target)].dim_over(target)
        options.append(category.hom(m_bundle.dim_over(a), target_dim))
    return cells, options


def _glue(
    space: StratifiedSpace,
    layer0: VBundle,
    layers: Sequence[Tuple[VBundle, Mapping[str, Mor]]],
) -> StratifiedBundle:
    built = []
    for (m_bundle, fiber_maps), layer in zip(layers, space.layers):
        src = restrict_bundle(m_bundle, layer.a)
        built.append((m_bundle, AttachingVMap(src, layer.h, tuple(sorted(fiber_maps.items())))))
    return StratifiedBundle(space, layer0, tuple(built))


def _candidates(
    space: StratifiedSpace,
    category: StructureCategory,
    rank_cap: int,
    budget: int,
) -> Tuple[List[StratifiedBundle], bool]:
    """Valid stratified bundles built from layer class representatives."""
    spent = 0
    layer0_classes = classify_bundles(space.base0, category, rank_cap)
    complete = [_glue(space, layer0, ()) for layer0 in layer0_classes]
    partials: List[Tuple[Tuple[VBundle, ...], Tuple[Tuple[VBundle, Dict[str, Mor]], ...]]] = [
        ((layer0,), ()) for layer0 in layer0_classes
    ]
    for level, layer in enumerate(space.layers, start=1):
        prefix = StratifiedSpace(space.base0, space.layers[:level])
        m_classes = classify_bundles(layer.m, category, rank_cap)
        extended = []
        complete = []
        for lower, built in partials:
            for m_bundle in m_classes:
                cells, options = _fiber_map_options(space, level, category, lower, m_bundle)
                for choice in itertools.product(*options):
                    spent += 1
                    if spent > budget:
                        logger.warning("Enumeration budget of %s candidates exhausted at layer %s.", budget, level)
                        return (complete if level == len(space.layers) else []), True
                    layers = built + ((m_bundle, dict(zip(cells, choice))),)
                    candidate = _glue(prefix, lower[0], layers)
                    if validate_stratified(candidate).ok:
                        extended.append((lower + (m_bundle,), layers))
                        complete.append(candidate)
        partials = extended
    return complete, False


def _dedupe(candidates: Sequence[StratifiedBundle]) -> Tuple[List[StratifiedBundle], bool]:
    classes: List[StratifiedBundle] = []
    partial = False
    for candidate in sorted(candidates, key=_class_key):
        sig = signature(candidate)
        duplicate = False
        for known in classes:
            if signature(known) != sig:
                continue
            result = is_isomorphic_stratified(candidate, known)
            if result.status == ISOMORPHIC:
                duplicate = True
                break
            if result.status != NOT_ISOMORPHIC:
                partial = True
        if not duplicate:
            classes.append(candidate)
    return classes, partial


def _table(
    classes: Sequence[StratifiedBundle],
    monoid: ClassMonoid,
    combine: Callable,
    dims: Callable[[int, int], int],
) -> Tuple[Dict[Tuple[int, int], TableEntry], bool]:
    table: Dict[Tuple[int, int], TableEntry] = {}
    partial = False
    for i, j in itertools.combinations_with_replacement(range(len(classes)), 2):
        sig = tuple(
            tuple(dims(a, b) for a, b in zip(left, right))
            for left, right in zip(signature(classes[i]), signature(classes[j]))
        )
        if not monoid.within_window(sig):
            entry: TableEntry = OUTSIDE_WINDOW
        else:
            entry = monoid.locate(combine(classes[i], classes[j]))
        if entry == UNRESOLVED:
            partial = True
        table[(i, j)] = table[(j, i)] = entry
    return table, partial


def enumerate_classes(
    space: StratifiedSpace,
    category: StructureCategory,
    rank_cap: int = DEFAULT_RANK_CAP,
    budget: int = ENUMERATION_BUDGET,
) -> ClassMonoid:
    """Every iso class with per-stratum rank at most ``rank_cap``, with its sum table."""
    category.require_finite()
    if not category.has_sum:
        raise UnsupportedCategoryError("class monoids need direct sums", entity=category.name)
    candidates, exhausted = _candidates(space, category, rank_cap, budget)
    classes, unresolved = _dedupe(candidates)
    monoid = ClassMonoid(space, category, tuple(classes), {}, rank_cap)
    table, open_entries = _table(
        classes,
        monoid,
        lambda x, y: map_stratified2(DIRECT_SUM, x, y),
        lambda a, b: a + b,
    )
    result = ClassMonoid(space, category, tuple(classes), table, rank_cap, exhausted or unresolved or open_entries)
    logger.info(
        "Enumerated %s classes from %s candidates over %s strata (window %s).",
        len(classes),
        len(candidates),
        space.depth,
        rank_cap,
    )
    return result


def mul_table(monoid: ClassMonoid) -> Dict[Tuple[int, int], TableEntry]:
    """Tensor products of classes, located in the same window."""
    if not monoid.category.has_tensor:
        raise UnsupportedCategoryError("category has no tensor product", entity=monoid.category.name)
    table, _ = _table(
        monoid.classes,
        monoid,
        lambda x, y: map_stratified2(TENSOR, x, y),
        lambda a, b: a * b,
    )
    return table


@dataclass(frozen=True)
class SubMonoidReport:
    """Flattenable classes: the classes that come from ordinary bundles."""

    indices: Tuple[int, ...]
    report: ValidationReport

    @property
    def ok(self) -> bool:
        return self.report.ok

    def to_dict(self) -> Dict[str, object]:
        return {"indices": list(self.indices), **self.report.to_dict()}


def bundle_subtable(monoid: ClassMonoid) -> SubMonoidReport:
    flat: List[int] = []
    for index, bundle in enumerate(monoid.classes):
        try:
            flatten(bundle)
        except BundleTheoremError:
            continue
        flat.append(index)
    members = set(flat)
    issues = []
    for i, j in itertools.combinations_with_replacement(flat, 2):
        entry = monoid.add_table.get((i, j))
        if isinstance(entry, int) and entry not in members:
            issues.append(f"{i}+{j}: sum of flattenable classes is class {entry}, which does not flatten")
    return SubMonoidReport(tuple(flat), ValidationReport(subject="bundle-subtable", issues=tuple(issues)))


# ---------------------------------------------------------------------------
# Grothendieck group
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KGroup:
    """Z^r (+) Z/d1 (+) ... presented by sum relations among nonzero classes.

    Elements are integer tuples: free coordinates first, then one coordinate
    per torsion divisor reduced modulo that divisor.
    """

    generators: Tuple[int, ...]
    relations: Tuple[Tuple[int, ...], ...]
    divisors: Tuple[int, ...]
    free_rank: int
    torsion: Tuple[int, ...]
    class_map: Tuple[Element, ...]
    coordinate_words: Tuple[Tuple[int, ...], ...]
    window: Optional[int] = None
    partial: bool = False
    monoid: Optional[ClassMonoid] = field(default=None, compare=False, repr=False)

    @property
    def presentation(self) -> str:
        parts: List[str] = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        parts.extend(f"Z/{d}" for d in self.torsion)
        return " (+) ".join(parts) if parts else "0"

    @property
    def zero(self) -> Element:
        return (0,) * (self.free_rank + len(self.torsion))

    def reduce(self, element: Sequence[int]) -> Element:
        free = tuple(int(x) for x in element[: self.free_rank])
        cyclic = tuple(int(x) % d for x, d in zip(element[self.free_rank :], self.torsion))
        return free + cyclic

    def add(self, a: Sequence[int], b: Sequence[int]) -> Element:
        return self.reduce([x + y for x, y in zip(a, b)])

    def scale(self, factor: int, a: Sequence[int]) -> Element:
        return self.reduce([factor * x for x in a])

    def element(self, class_index: int) -> Element:
        return self.class_map[class_index]

    def to_dict(self) -> Dict[str, object]:
        return {
            "generators": list(self.generators),
            "relations": [list(row) for row in self.relations],
            "divisors": list(self.divisors),
            "presentation": self.presentation,
            "free_rank": self.free_rank,
            "torsion": list(self.torsion),
            "class_map": [list(e) for e in self.class_map],
            "window": self.window,
            "partial": self.partial,
        }


def _check_table(size: int, table: Mapping[Tuple[int, int], TableEntry]) -> None:
    for (i, j), entry in sorted(table.items(), key=lambda item: item[0]):
        mirror = table.get((j, i))
        if mirror is not None and mirror != entry:
            raise IntegrityError(f"[{i}]+[{j}] = {entry} but [{j}]+[{i}] = {mirror}", entity=f"{i}+{j}")
        if isinstance(entry, int) and not 0 <= entry < size:
            raise IntegrityError(f"sum refers to unknown class {entry}", entity=f"{i}+{j}")
    for i in range(size):
        entry = table.get((0, i))
        if isinstance(entry, int) and entry != i:
            raise IntegrityError(f"zero class is not neutral: [0]+[{i}] = [{entry}]", entity=f"0+{i}")


def smith_form(relations: Sequence[Sequence[int]], count: int) -> Tuple[List[int], Matrix]:
    """Invariant factors of the relation rows and a unimodular change of generators.

    Returns one factor per generator (0 for a free direction) and ``basis``
    with ``rowspace(relations · basis)`` spanned by the diagonal of factors.
    The nonzero factors form a divisibility chain in position order.
    """
    if not relations or not count:
        return [0] * count, Matrix.eye(count)
    smith, _, basis = smith_normal_decomp(Matrix(relations), domain=ZZ)
    basis = Matrix(basis)
    diagonal = [abs(int(smith[k, k])) if k < min(smith.shape) else 0 for k in range(count)]
    while True:
        clash = next(
            (
                (i, j)
                for i in range(count)
                for j in range(i + 1, count)
                if diagonal[i] and diagonal[j] and diagonal[j] % diagonal[i]
            ),
            None,
        )
        if clash is None:
            return diagonal, basis
        i, j = clash
        a, b = diagonal[i], diagonal[j]
        x, y, g = (int(v) for v in igcdex(a, b))
        # diag(a, b) · [[1, -yb/g], [1, xa/g]] is row-equivalent to diag(g, ab/g)
        left, right = basis[:, i], basis[:, j]
        basis[:, i] = left + right
        basis[:, j] = left * (-y * b // g) + right * (x * a // g)
        diagonal[i], diagonal[j] = g, a * b // g


def grothendieck_from_table(
    size: int,
    table: Mapping[Tuple[int, int], TableEntry],
    window: Optional[int] = None,
    partial: bool = False,
    monoid: Optional[ClassMonoid] = None,
) -> KGroup:
    """Group completion of a partial commutative monoid table; class 0 is zero."""
    _check_table(size, table)
    generators = tuple(range(1, size))
    column = {g: n for n, g in enumerate(generators)}
    rows = set()
    for (i, j), entry in table.items():
        if i > j or not isinstance(entry, int):
            continue
        row = [0] * len(generators)
        for cls, sign in ((i, 1), (j, 1), (entry, -1)):
            if cls != 0:
                row[column[cls]] += sign
        if any(row):
            rows.add(tuple(row))
    relations = tuple(sorted(rows))
    count = len(generators)
    diagonal, basis = smith_form(relations, count)
    inverse_basis = basis.inv() if count else basis
    free = [k for k in range(count) if diagonal[k] == 0]
    cyclic = [k for k in range(count) if diagonal[k] > 1]
    order = free + cyclic
    torsion = tuple(diagonal[k] for k in cyclic)

    def reduce(values: Sequence[int]) -> Element:
        head = tuple(values[: len(free)])
        return head + tuple(v % d for v, d in zip(values[len(free) :], torsion))

    class_map: List[Element] = [(0,) * len(order)]
    for n in range(count):
        class_map.append(reduce([int(basis[n, k]) for k in order]))
    words = tuple(tuple(int(inverse_basis[k, n]) for n in range(count)) for k in order)
    group = KGroup(
        generators=generators,
        relations=relations,
        divisors=tuple(d for d in diagonal if d != 0),
        free_rank=len(free),
        torsion=torsion,
        class_map=tuple(class_map[:size]),
        coordinate_words=words,
        window=window,
        partial=partial,
        monoid=monoid,
    )
    return group


def grothendieck(monoid: ClassMonoid) -> KGroup:
    group = grothendieck_from_table(monoid.size, monoid.add_table, monoid.rank_cap, monoid.partial, monoid)
    logger.info("K0 within window %s: %s.", monoid.rank_cap, group.presentation)
    return group


def check_additivity(group: KGroup, table: Mapping[Tuple[int, int], TableEntry]) -> ValidationReport:
    issues: List[str] = []
    for (i, j), entry in sorted(table.items(), key=lambda item: item[0]):
        if i > j or not isinstance(entry, int):
            continue
        if group.add(group.class_map[i], group.class_map[j]) != group.class_map[entry]:
            issues.append(f"{i}+{j}: class map is not additive onto class {entry}")
    return ValidationReport(subject="class-map", issues=tuple(issues))


def _require_monoid(group: KGroup) -> ClassMonoid:
    if group.monoid is None:
        raise PreconditionError("K-group was not computed from a class monoid")
    return group.monoid


# ---------------------------------------------------------------------------
# Homomorphisms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupHom:
    """A homomorphism given by the images of the source's classes.

    ``None`` marks a class whose image fell outside the target's window.
    """

    source: KGroup
    target: KGroup
    images: Tuple[Optional[Element], ...]

    @property
    def partial(self) -> bool:
        return any(image is None for image in self.images)

    @property
    def matrix(self) -> Tuple[Tuple[int, ...], ...]:
        """Columns are the images of the source's coordinate basis."""
        columns = []
        for word in self.source.coordinate_words:
            column = self.target.zero
            for n, coefficient in enumerate(word):
                if coefficient == 0:
                    continue
                image = self.images[self.source.generators[n]]
                if image is None:
                    raise PreconditionError(
                        "homomorphism is partial on a generator", entity=str(self.source.generators[n])
                    )
                column = self.target.add(column, self.target.scale(coefficient, image))
            columns.append(column)
        height = len(self.target.zero)
        return tuple(tuple(column[row] for column in columns) for row in range(height))

    def apply(self, element: Sequence[int]) -> Element:
        matrix = self.matrix
        values = [sum(row[k] * element[k] for k in range(len(element))) for row in matrix]
        return self.target.reduce(values)

    def to_dict(self) -> Dict[str, object]:
        payload: Dict[str, object] = {
            "source": self.source.presentation,
            "target": self.target.presentation,
            "images": [None if image is None else list(image) for image in self.images],
            "partial": self.partial,
        }
        if not self.partial:
            payload["matrix"] = [list(row) for row in self.matrix]
        return payload


def check_hom(hom: GroupHom) -> ValidationReport:
    """Additivity of ``hom`` on every resolved entry of the source's sum table."""
    issues: List[str] = []
    monoid = _require_monoid(hom.source)
    for (i, j), entry in sorted(monoid.add_table.items(), key=lambda item: item[0]):
        if i > j or not isinstance(entry, int):
            continue
        left, right, total = hom.images[i], hom.images[j], hom.images[entry]
        if left is None or right is None or total is None:
            continue
        if hom.target.add(left, right) != total:
            issues.append(f"{i}+{j}: images do not add up to the image of class {entry}")
    return ValidationReport(subject="homomorphism", issues=tuple(issues))


def _located(group: KGroup, entry: TableEntry) -> Optional[Element]:
    return group.class_map[entry] if isinstance(entry, int) else None


def layer_space(space: StratifiedSpace, level: int) -> StratifiedSpace:
    """X̄₀ for level 0, otherwise M̄ᵢ as a one-stratum space."""
    if level == 0:
        return StratifiedSpace(space.base0)
    if not 1 <= level <= len(space.layers):
        raise PreconditionError("no such layer", entity=f"layer{level}")
    return StratifiedSpace(space.layers[level - 1].m)


def restriction_hom(group: KGroup, target: KGroup, level: Union[str, int] = "X0") -> GroupHom:
    """Restrict representatives to X̄₀ or pull their layer back to M̄ᵢ."""
    monoid = _require_monoid(group)
    target_monoid = _require_monoid(target)
    index = 0 if level == "X0" else int(level)
    space = layer_space(monoid.space, index)
    if target_monoid.space != space:
        raise PreconditionError("target K-group does not live over the requested stratum", entity=str(level))
    images = []
    for bundle in monoid.classes:
        restricted = build_stratified(space, bundle.layer_bundle(index))
        images.append(_located(target, target_monoid.locate(restricted)))
    hom = GroupHom(group, target, tuple(images))
    logger.info("Restriction to %s: %s classes, partial=%s.", level, len(images), hom.partial)
    return hom


def pullback_hom(f: StratifiedMap, group: KGroup, target: KGroup) -> GroupHom:
    """K0(Y) -> K0(X) induced by f: X -> Y; ``group`` lives over Y and ``target`` over X."""
    monoid = _require_monoid(group)
    target_monoid = _require_monoid(target)
    if monoid.space != f.dst or target_monoid.space != f.src:
        raise PreconditionError("K-groups do not live over the map's source and target")
    images = [_located(target, target_monoid.locate(pullback_stratified(f, bundle))) for bundle in monoid.classes]
    return GroupHom(group, target, tuple(images))


def compose_homs(g: GroupHom, f: GroupHom) -> GroupHom:
    """g ∘ f on classes of f's source."""
    if f.target != g.source:
        raise PreconditionError("homomorphisms are not composable")
    images = [None if image is None else g.apply(image) for image in f.images]
    return GroupHom(f.source, g.target, tuple(images))


def identity_hom(group: KGroup) -> GroupHom:
    return GroupHom(group, group, group.class_map)


# ---------------------------------------------------------------------------
# Ring structure
# ---------------------------------------------------------------------------


def _products(group: KGroup) -> Mapping[Tuple[int, int], TableEntry]:
    cached = group.__dict__.get("_products")
    if cached is None:
        cached = mul_table(_require_monoid(group))
        object.__setattr__(group, "_products", cached)
    return cached


def unit(group: KGroup) -> Optional[Element]:
    """Class of the trivial line bundle on every stratum."""
    monoid = _require_monoid(group)
    line = trivial_stratified(monoid.space, monoid.category, 1)
    return _located(group, monoid.locate(line))


def ring_product(group: KGroup, a: Sequence[int], b: Sequence[int]) -> Optional[Element]:
    """Bilinear extension of [E]·[F] = [E ⊗ F]; None when a product leaves the window."""
    table = _products(group)
    words = group.coordinate_words
    result = group.zero
    for k, a_k in enumerate(a):
        for l, b_l in enumerate(b):
            if a_k == 0 or b_l == 0:
                continue
            for n, w_n in enumerate(words[k]):
                for m, w_m in enumerate(words[l]):
                    if w_n == 0 or w_m == 0:
                        continue
                    entry = table[(group.generators[n], group.generators[m])]
                    if not isinstance(entry, int):
                        return None
                    term = group.scale(a_k * b_l * w_n * w_m, group.class_map[entry])
                    result = group.add(result, term)
    return result


def describe_k0(group: KGroup) -> Dict[str, object]:
    """Report payload for the ``k0`` verb."""
    payload = group.to_dict()
    payload["window"] = f"within stable window {group.window}"
    payload["rank_cap"] = group.window
    if group.monoid is not None:
        payload["classes"] = group.monoid.to_dict()["classes"]
        payload["add_table"] = group.monoid.to_dict()["add_table"]
    return payload


__all__ = [
    "DEFAULT_RANK_CAP",
    "ENUMERATION_BUDGET",
    "OUTSIDE_WINDOW",
    "UNRESOLVED",
    "ClassMonoid",
    "GroupHom",
    "KGroup",
    "SubMonoidReport",
    "bundle_subtable",
    "check_additivity",
    "check_hom",
    "compose_homs",
    "describe_k0",
    "enumerate_classes",
    "grothendieck",
    "grothendieck_from_table",
    "identity_hom",
    "layer_space",
    "mul_table",
    "pullback_hom",
    "restriction_hom",
    "ring_product",
    "signature",
    "smith_form",
    "unit",
]
