"""Finite regular cell complexes, cellular maps and stratified spaces.

A 1-cell's boundary is its ordered endpoint pair. A 2-cell's boundary is a
closed walk of oriented edges ``(edge_id, ±1)``. Cells of dimension three
and above keep only their facet ids.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import networkx as nx

from .errors import ComplexError, MapError
from .lincat import ValidationReport

logger = logging.getLogger(__name__)

OrientedEdge = Tuple[str, int]
Path = Tuple[OrientedEdge, ...]


@dataclass(frozen=True)
class Cell:
    id: str
    dim: int
    boundary: Tuple = ()

    def faces(self) -> Tuple[str, ...]:
        if self.dim == 1:
            return tuple(dict.fromkeys(self.boundary))
        if self.dim == 2:
            return tuple(dict.fromkeys(edge for edge, _ in self.boundary))
        return tuple(self.boundary)


def reverse_path(path: Path) -> Path:
    return tuple((edge, -sign) for edge, sign in reversed(path))


def reduce_path(path: Iterable[OrientedEdge]) -> Path:
    """Free reduction: cancel adjacent ``(e, s)(e, -s)`` pairs."""
    stack: List[OrientedEdge] = []
    for step in path:
        if stack and stack[-1][0] == step[0] and stack[-1][1] == -step[1]:
            stack.pop()
        else:
            stack.append(step)
    return tuple(stack)


def reduce_cyclic(path: Iterable[OrientedEdge]) -> Path:
    word = list(reduce_path(path))
    while len(word) >= 2 and word[0][0] == word[-1][0] and word[0][1] == -word[-1][1]:
        word = word[1:-1]
    return tuple(word)


@dataclass(frozen=True)
class CellComplex:
    """Immutable complex; ``strata`` optionally tags each cell with a stratum index."""

    cells: Tuple[Cell, ...]
    strata: Tuple[Tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        issues = _complex_issues(self)
        if issues:
            raise ComplexError(issues[0][1], entity=issues[0][0])

    @classmethod
    def build(
        cls,
        cells: Iterable[Cell],
        strata: Optional[Mapping[str, int]] = None,
    ) -> "CellComplex":
        ordered = tuple(sorted(cells, key=lambda c: (c.dim, c.id)))
        tags = tuple(sorted((strata or {}).items()))
        return cls(ordered, tags)

    # -- lookup -------------------------------------------------------------

    @property
    def index(self) -> Dict[str, Cell]:
        cached = self.__dict__.get("_index")
        if cached is None:
            cached = {c.id: c for c in self.cells}
            object.__setattr__(self, "_index", cached)
        return cached

    def cell(self, cell_id: str) -> Cell:
        try:
            return self.index[cell_id]
        except KeyError as error:
            raise ComplexError("unknown cell", entity=cell_id) from error

    def __contains__(self, cell_id: object) -> bool:
        return cell_id in self.index

    @property
    def ids(self) -> Tuple[str, ...]:
        return tuple(c.id for c in self.cells)

    def cells_of_dim(self, dim: int) -> Tuple[Cell, ...]:
        return tuple(c for c in self.cells if c.dim == dim)

    @property
    def vertices(self) -> Tuple[str, ...]:
        return tuple(c.id for c in self.cells_of_dim(0))

    @property
    def edges(self) -> Tuple[str, ...]:
        return tuple(c.id for c in self.cells_of_dim(1))

    @property
    def dimension(self) -> int:
        return max((c.dim for c in self.cells), default=-1)

    def counts(self) -> Tuple[int, ...]:
        return tuple(len(self.cells_of_dim(d)) for d in range(self.dimension + 1))

    def euler(self) -> int:
        return sum((-1) ** c.dim for c in self.cells)

    def endpoints(self, edge: str) -> Tuple[str, str]:
        cell = self.cell(edge)
        if cell.dim != 1:
            raise ComplexError("not a 1-cell", entity=edge)
        return cell.boundary[0], cell.boundary[1]

    def oriented_endpoints(self, step: OrientedEdge) -> Tuple[str, str]:
        u, v = self.endpoints(step[0])
        return (u, v) if step[1] > 0 else (v, u)

    # -- strata -------------------------------------------------------------

    @property
    def tags(self) -> Dict[str, int]:
        cached = self.__dict__.get("_tags")
        if cached is None:
            cached = dict(self.strata)
            object.__setattr__(self, "_tags", cached)
        return cached

    @property
    def is_stratified(self) -> bool:
        return bool(self.strata)

    def tag(self, cell_id: str) -> int:
        return self.tags.get(cell_id, 0)

    def with_strata(self, strata: Mapping[str, int]) -> "CellComplex":
        return CellComplex(self.cells, tuple(sorted(strata.items())))

    def stratum_counts(self) -> Dict[int, Tuple[int, ...]]:
        result: Dict[int, Tuple[int, ...]] = {}
        levels = sorted(set(self.tag(c) for c in self.ids))
        for level in levels:
            members = [c for c in self.cells if self.tag(c.id) == level]
            top = max(c.dim for c in members)
            result[level] = tuple(sum(1 for c in members if c.dim == d) for d in range(top + 1))
        return result

    # -- closure and subcomplexes --------------------------------------------

    def closure(self, cell_ids: Iterable[str]) -> Set[str]:
        seen: Set[str] = set()
        stack = list(cell_ids)
        while stack:
            current = stack.pop()
            if current in seen:
                continue
            seen.add(current)
            stack.extend(self.cell(current).faces())
        return seen

    def closure_vertices(self, cell_id: str) -> Tuple[str, ...]:
        return tuple(sorted(c for c in self.closure([cell_id]) if self.cell(c).dim == 0))

    def anchor(self, cell_id: str) -> str:
        """Least vertex of the closure; fibers over an open cell are read there."""
        vertices = self.closure_vertices(cell_id)
        if not vertices:
            raise ComplexError("cell has no vertices", entity=cell_id)
        return vertices[0]

    def subcomplex(self, cell_ids: Iterable[str]) -> "CellComplex":
        members = self.closure(cell_ids)
        tags = {c: t for c, t in self.strata if c in members}
        return CellComplex.build((self.cell(c) for c in members), tags)

    def is_subcomplex(self, cell_ids: Iterable[str]) -> bool:
        ids = set(cell_ids)
        return self.closure(ids) == ids

    # -- graph structure ------------------------------------------------------

    def graph(self) -> nx.MultiGraph:
        graph = nx.MultiGraph()
        graph.add_nodes_from(self.vertices)
        for edge in self.edges:
            u, v = self.endpoints(edge)
            graph.add_edge(u, v, key=edge)
        return graph

    def components(self) -> Tuple[Tuple[str, ...], ...]:
        """Vertex sets of connected components, each sorted, ordered by least vertex."""
        cached = self.__dict__.get("_components")
        if cached is None:
            graph = self.graph()
            cached = tuple(sorted(tuple(sorted(comp)) for comp in nx.connected_components(graph)))
            object.__setattr__(self, "_components", cached)
        return cached

    def component_of(self, vertex: str) -> str:
        """Basepoint (least vertex) of the component containing ``vertex``."""
        cached = self.__dict__.get("_component_of")
        if cached is None:
            cached = {v: comp[0] for comp in self.components() for v in comp}
            object.__setattr__(self, "_component_of", cached)
        try:
            return cached[vertex]
        except KeyError as error:
            raise ComplexError("not a vertex", entity=vertex) from error

    def cell_component(self, cell_id: str) -> str:
        return self.component_of(self.anchor(cell_id))

    @property
    def basepoints(self) -> Tuple[str, ...]:
        return tuple(comp[0] for comp in self.components())

    def path_endpoints(self, path: Path) -> Tuple[str, str]:
        if not path:
            raise ComplexError("empty path has no endpoints")
        start, current = self.oriented_endpoints(path[0])
        for step in path[1:]:
            u, v = self.oriented_endpoints(step)
            if u != current:
                raise ComplexError("path is not contiguous", entity=step[0])
            current = v
        return start, current


def _complex_issues(complex_: CellComplex) -> List[Tuple[str, str]]:
    issues: List[Tuple[str, str]] = []
    index: Dict[str, Cell] = {}
    for cell in complex_.cells:
        if cell.id in index:
            issues.append((cell.id, "duplicate cell id"))
        index[cell.id] = cell
    for cell in complex_.cells:
        if cell.dim < 0:
            issues.append((cell.id, "negative dimension"))
        elif cell.dim == 0 and cell.boundary:
            issues.append((cell.id, "0-cell with a boundary"))
        elif cell.dim == 1:
            if len(cell.boundary) != 2:
                issues.append((cell.id, "1-cell boundary must be an endpoint pair"))
                continue
            for end in cell.boundary:
                if end not in index or index[end].dim != 0:
                    issues.append((cell.id, f"endpoint {end} is not a 0-cell"))
        elif cell.dim == 2:
            walk_ok = True
            for step in cell.boundary:
                if len(step) != 2 or step[1] not in (1, -1):
                    issues.append((cell.id, f"malformed oriented edge {step!r}"))
                    walk_ok = False
                elif step[0] not in index or index[step[0]].dim != 1:
                    issues.append((cell.id, f"walk edge {step[0]} is not a 1-cell"))
                    walk_ok = False
            if walk_ok and cell.boundary:
                ends = []
                for edge, sign in cell.boundary:
                    u, v = index[edge].boundary
                    ends.append((u, v) if sign > 0 else (v, u))
                for (_, prev_end), (next_start, _) in zip(ends, ends[1:] + ends[:1]):
                    if prev_end != next_start:
                        issues.append((cell.id, "boundary walk is not closed"))
                        break
        elif cell.dim >= 3:
            for facet in cell.boundary:
                if facet not in index or index[facet].dim >= cell.dim:
                    issues.append((cell.id, f"facet {facet} is not a lower-dimensional cell"))
    known = set(index)
    for cell_id, _ in complex_.strata:
        if cell_id not in known:
            issues.append((cell_id, "stratum tag on unknown cell"))
    return issues


def validate_complex(complex_: CellComplex) -> ValidationReport:
    issues = tuple(f"{entity}: {message}" for entity, message in _complex_issues(complex_))
    return ValidationReport(subject="complex", issues=issues)


def point(vertex: str = "p") -> CellComplex:
    return CellComplex.build([Cell(vertex, 0)])


def circle(n: int = 1, prefix: str = "") -> CellComplex:
    """Circle subdivided into ``n`` vertices ``v0..`` and edges ``e0..``."""
    cells = [Cell(f"{prefix}v{i}", 0) for i in range(n)]
    cells += [Cell(f"{prefix}e{i}", 1, (f"{prefix}v{i}", f"{prefix}v{(i + 1) % n}")) for i in range(n)]
    return CellComplex.build(cells)


def interval(prefix: str = "") -> CellComplex:
    return CellComplex.build(
        [Cell(f"{prefix}a", 0), Cell(f"{prefix}b", 0), Cell(f"{prefix}s", 1, (f"{prefix}a", f"{prefix}b"))]
    )


def square_disc(prefix: str = "") -> CellComplex:
    """Square with corners q0..q3, sides r0..r3 and interior face D."""
    cells = [Cell(f"{prefix}q{i}", 0) for i in range(4)]
    cells += [Cell(f"{prefix}r{i}", 1, (f"{prefix}q{i}", f"{prefix}q{(i + 1) % 4}")) for i in range(4)]
    cells.append(Cell(f"{prefix}D", 2, tuple((f"{prefix}r{i}", 1) for i in range(4))))
    return CellComplex.build(cells)


def wedge_of_circles(k: int) -> CellComplex:
    cells = [Cell("v", 0)] + [Cell(f"g{i}", 1, ("v", "v")) for i in range(k)]
    return CellComplex.build(cells)


# ---------------------------------------------------------------------------
# Cellular maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CellularMap:
    """Cell images plus an oriented edge-path image for every 1-cell."""

    src: CellComplex
    dst: CellComplex
    cell_images: Tuple[Tuple[str, str], ...]
    edge_paths: Tuple[Tuple[str, Path], ...] = ()

    @classmethod
    def build(
        cls,
        src: CellComplex,
        dst: CellComplex,
        cell_images: Mapping[str, str],
        edge_paths: Optional[Mapping[str, Sequence[OrientedEdge]]] = None,
    ) -> "CellularMap":
        """Fill default edge paths: degenerate for vertex images, one step for edge images."""
        paths: Dict[str, Path] = {
            key: tuple((str(e), int(s)) for e, s in value) for key, value in (edge_paths or {}).items()
        }
        for edge in src.edges:
            if edge in paths or edge not in cell_images:
                continue
            image = cell_images[edge]
            if image not in dst:
                continue
            if dst.cell(image).dim == 0:
                paths[edge] = ()
            elif dst.cell(image).dim == 1:
                u, v = src.endpoints(edge)
                du, dv = dst.endpoints(image)
                iu, iv = cell_images.get(u), cell_images.get(v)
                paths[edge] = ((image, -1),) if (iu, iv) == (dv, du) and du != dv else ((image, 1),)
        return cls(src, dst, tuple(sorted(cell_images.items())), tuple(sorted(paths.items())))

    @property
    def images(self) -> Dict[str, str]:
        cached = self.__dict__.get("_images")
        if cached is None:
            cached = dict(self.cell_images)
            object.__setattr__(self, "_images", cached)
        return cached

    @property
    def paths(self) -> Dict[str, Path]:
        cached = self.__dict__.get("_paths")
        if cached is None:
            cached = dict(self.edge_paths)
            object.__setattr__(self, "_paths", cached)
        return cached

    def image(self, cell_id: str) -> str:
        try:
            return self.images[cell_id]
        except KeyError as error:
            raise MapError("map is undefined on cell", entity=cell_id) from error

    def path(self, edge: str) -> Path:
        try:
            return self.paths[edge]
        except KeyError as error:
            raise MapError("map has no edge-path image", entity=edge) from error

    def image_path(self, path: Path) -> Path:
        result: List[OrientedEdge] = []
        for edge, sign in path:
            step = self.path(edge)
            result.extend(step if sign > 0 else reverse_path(step))
        return tuple(result)


def validate_map(f: CellularMap) -> ValidationReport:
    issues: List[str] = []
    for cell in f.src.cells:
        if cell.id not in f.images:
            issues.append(f"{cell.id}: map is undefined")
            continue
        image = f.images[cell.id]
        if image not in f.dst:
            issues.append(f"{cell.id}: image {image} is not a cell of the target")
            continue
        if f.dst.cell(image).dim > cell.dim:
            issues.append(f"{cell.id}: image {image} has larger dimension")
    for edge in f.src.edges:
        if edge not in f.images or f.images[edge] not in f.dst:
            continue
        if edge not in f.paths:
            issues.append(f"{edge}: missing edge-path image")
            continue
        path = f.paths[edge]
        u, v = f.src.endpoints(edge)
        iu, iv = f.images.get(u), f.images.get(v)
        if not path:
            if iu != iv:
                issues.append(f"{edge}: degenerate path between distinct vertices {iu}, {iv}")
            continue
        try:
            start, end = f.dst.path_endpoints(path)
        except ComplexError as error:
            issues.append(f"{edge}: {error}")
            continue
        if (start, end) != (iu, iv):
            issues.append(f"{edge}: path runs {start}->{end}, expected {iu}->{iv}")
    for cell in f.src.cells_of_dim(2):
        image = f.images.get(cell.id)
        if image is None or image not in f.dst or f.dst.cell(image).dim != 2:
            continue
        try:
            word = reduce_cyclic(f.image_path(cell.boundary))
        except MapError:
            continue
        target = reduce_cyclic(f.dst.cell(image).boundary)
        if not cyclic_match(word, target):
            issues.append(f"{cell.id}: boundary walk does not map onto the boundary of {image}")
    return ValidationReport(subject="cellular-map", issues=tuple(issues))


def cyclic_match(word: Path, target: Path) -> bool:
    if len(word) != len(target):
        return False
    if not word:
        return True
    for candidate in (target, reverse_path(target)):
        for shift in range(len(candidate)):
            if word == candidate[shift:] + candidate[:shift]:
                return True
    return False


def require_map(f: CellularMap) -> CellularMap:
    report = validate_map(f)
    if not report.ok:
        entity = report.issues[0].split(":", 1)[0]
        raise MapError(report.issues[0], entity=entity)
    return f


def identity_map(complex_: CellComplex) -> CellularMap:
    return CellularMap.build(
        complex_,
        complex_,
        {c: c for c in complex_.ids},
        {e: ((e, 1),) for e in complex_.edges},
    )


def inclusion_map(sub: CellComplex, complex_: CellComplex) -> CellularMap:
    missing = [c for c in sub.ids if c not in complex_]
    if missing:
        raise MapError("subcomplex cell missing from ambient complex", entity=missing[0])
    return CellularMap.build(sub, complex_, {c: c for c in sub.ids}, {e: ((e, 1),) for e in sub.edges})


def compose_maps(g: CellularMap, f: CellularMap) -> CellularMap:
    """Return ``g ∘ f``."""
    images = {c: g.image(f.image(c)) for c in f.src.ids}
    paths = {e: g.image_path(f.path(e)) for e in f.src.edges}
    return CellularMap.build(f.src, g.dst, images, paths)


def restrict_map(f: CellularMap, sub: CellComplex) -> CellularMap:
    return CellularMap.build(
        sub,
        f.dst,
        {c: f.image(c) for c in sub.ids},
        {e: f.path(e) for e in sub.edges},
    )


def check_stratum_preserving(f: CellularMap) -> ValidationReport:
    """Every cell's image carries the same stratum tag."""
    issues = []
    for cell_id in f.src.ids:
        image = f.image(cell_id)
        if f.src.tag(cell_id) != f.dst.tag(image):
            issues.append(
                f"{cell_id}: stratum {f.src.tag(cell_id)} mapped to {image} in stratum {f.dst.tag(image)}"
            )
    return ValidationReport(subject="stratum-preserving", issues=tuple(issues))


# ---------------------------------------------------------------------------
# Pushouts and stratified spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Pushout:
    total: CellComplex
    from_m: CellularMap
    from_x: CellularMap


def build_pushout(
    attached: Iterable[str],
    m: CellComplex,
    h: CellularMap,
    x: CellComplex,
    level: Optional[int] = None,
) -> Pushout:
    """Quotient ``M ⊔ X / (a ~ h(a))``.

    A merged class keeps the id of its cell in X, so X is a subcomplex of the
    total. Cells of M∖A keep their ids unless one is already taken in X; such a
    cell is renamed ``<id>#<level>`` (with further ``#`` suffixes until free).
    With no attached cells the total is the disjoint union M ⊔ X.
    """
    a_ids = set(attached)
    if not m.is_subcomplex(a_ids):
        raise ComplexError("attached cells do not form a subcomplex", entity=sorted(m.closure(a_ids) - a_ids)[0])
    for cell_id in sorted(a_ids):
        if cell_id not in h.images:
            raise MapError("attaching map is undefined on cell", entity=cell_id)
        if h.images[cell_id] not in x:
            raise MapError("attaching map leaves the target complex", entity=cell_id)
        if m.cell(cell_id).dim == 1 and cell_id not in h.paths:
            raise MapError("attaching map has no edge-path image", entity=cell_id)
    level = level if level is not None else (max(x.tags.values(), default=0) + 1 if x.cells else 0)

    taken = set(x.ids) | {c for c in m.ids if c not in a_ids}
    renamed: Dict[str, str] = {}
    for cell_id in m.ids:
        if cell_id in a_ids or cell_id not in x:
            continue
        fresh = f"{cell_id}#{level}"
        while fresh in taken:
            fresh += "#"
        taken.add(fresh)
        renamed[cell_id] = fresh

    def name(cell_id: str) -> str:
        return h.images[cell_id] if cell_id in a_ids else renamed.get(cell_id, cell_id)

    new_cells: List[Cell] = list(x.cells)
    tags: Dict[str, int] = {c: x.tag(c) for c in x.ids}
    for cell in m.cells:
        if cell.id in a_ids:
            continue
        if cell.dim == 0:
            boundary: Tuple = ()
        elif cell.dim == 1:
            boundary = tuple(name(v) for v in cell.boundary)
        elif cell.dim == 2:
            walk: List[OrientedEdge] = []
            for edge, sign in cell.boundary:
                if edge in a_ids:
                    step = h.paths[edge]
                    walk.extend(step if sign > 0 else reverse_path(step))
                else:
                    walk.append((name(edge), sign))
            boundary = tuple(walk)
        else:
            boundary = tuple(dict.fromkeys(name(f) for f in cell.boundary))
        new_id = name(cell.id)
        new_cells.append(Cell(new_id, cell.dim, boundary))
        tags[new_id] = level
    total = CellComplex.build(new_cells, tags)
    from_m = CellularMap.build(
        m,
        total,
        {c: name(c) for c in m.ids},
        {e: (h.paths[e] if e in a_ids else ((name(e), 1),)) for e in m.edges},
    )
    from_x = inclusion_map(x, total)
    logger.debug("Pushout level %s: %s cells.", level, len(total.cells))
    return Pushout(total=total, from_m=from_m, from_x=from_x)


@dataclass(frozen=True)
class Layer:
    """An attached pair (M, A) with attaching map h: A -> previous total."""

    m: CellComplex
    a: Tuple[str, ...]
    h: CellularMap

    @property
    def a_complex(self) -> CellComplex:
        return self.m.subcomplex(self.a)

    @property
    def open_cells(self) -> Tuple[str, ...]:
        attached = set(self.a)
        return tuple(c for c in self.m.ids if c not in attached)


@dataclass(frozen=True)
class StratifiedSpace:
    base0: CellComplex
    layers: Tuple[Layer, ...] = ()

    @property
    def depth(self) -> int:
        return len(self.layers) + 1

    def steps(self) -> Tuple[Pushout, ...]:
        cached = self.__dict__.get("_steps")
        if cached is None:
            steps: List[Pushout] = []
            current = self.base0.with_strata({c: 0 for c in self.base0.ids})
            for level, layer in enumerate(self.layers, start=1):
                if set(layer.h.dst.ids) != set(current.ids):
                    raise MapError(
                        "attaching map does not land in the previously assembled complex",
                        entity=f"layer{level}",
                    )
                clash = sorted(c for c in layer.open_cells if c in current)
                if clash:
                    raise ComplexError("cell id of attached space collides with the target", entity=clash[0])
                step = build_pushout(layer.a, layer.m, layer.h, current, level=level)
                steps.append(step)
                current = step.total
            cached = tuple(steps)
            object.__setattr__(self, "_steps", cached)
        return cached

    def totals(self) -> Tuple[CellComplex, ...]:
        """X̄₀, X̄₁, …, X̄ₙ with stratum tags."""
        first = self.base0.with_strata({c: 0 for c in self.base0.ids})
        return (first,) + tuple(step.total for step in self.steps())


def assemble(space: StratifiedSpace) -> CellComplex:
    """Iterated pushout of all layers; the result carries stratum tags."""
    total = space.totals()[-1]
    logger.info("Assembled %s strata: cell counts %s.", space.depth, total.counts())
    return total


# ---------------------------------------------------------------------------
# Fundamental group presentations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Pi1Presentation:
    basepoint: str
    vertices: Tuple[str, ...]
    tree_edges: Tuple[str, ...]
    generators: Tuple[str, ...]
    relators: Tuple[Path, ...]
    tree_paths: Tuple[Tuple[str, Path], ...] = field(default=(), repr=False)

    def tree_path(self, vertex: str) -> Path:
        return dict(self.tree_paths)[vertex]


def pi1(complex_: CellComplex, basepoint: Optional[str] = None) -> Pi1Presentation:
    """Edge-path presentation of the component of ``basepoint`` (default: least vertex)."""
    if not complex_.vertices:
        raise ComplexError("complex has no vertices")
    base = basepoint or complex_.vertices[0]
    graph = complex_.graph()
    component = sorted(nx.node_connected_component(graph, base))
    members = set(component)
    sub = nx.MultiGraph()
    sub.add_nodes_from(component)
    for edge in complex_.edges:
        u, v = complex_.endpoints(edge)
        if u in members:
            sub.add_edge(u, v, key=edge)
    tree = nx.Graph()
    tree.add_nodes_from(component)
    tree_edges: List[str] = []
    for u, v, key in nx.minimum_spanning_edges(sub, algorithm="kruskal", keys=True, data=False):
        tree.add_edge(u, v, key=key)
        tree_edges.append(key)
    paths: Dict[str, Path] = {}
    for vertex in component:
        walk = nx.shortest_path(tree, base, vertex)
        steps: List[OrientedEdge] = []
        for a, b in zip(walk, walk[1:]):
            key = tree[a][b]["key"]
            start, _ = complex_.endpoints(key)
            steps.append((key, 1 if start == a else -1))
        paths[vertex] = tuple(steps)
    in_tree = set(tree_edges)
    component_edges = [e for e in complex_.edges if complex_.endpoints(e)[0] in members]
    generators = tuple(e for e in component_edges if e not in in_tree)
    relators: List[Path] = []
    for cell in complex_.cells_of_dim(2):
        if not cell.boundary:
            continue
        if complex_.endpoints(cell.boundary[0][0])[0] not in members:
            continue
        relators.append(reduce_cyclic(step for step in cell.boundary if step[0] not in in_tree))
    return Pi1Presentation(
        basepoint=base,
        vertices=tuple(component),
        tree_edges=tuple(sorted(tree_edges)),
        generators=generators,
        relators=tuple(relators),
        tree_paths=tuple(sorted(paths.items())),
    )


# ---------------------------------------------------------------------------
# Prisms
# ---------------------------------------------------------------------------


def _at(cell_id: str, end: str) -> str:
    return f"{cell_id}@{end}"


@dataclass(frozen=True)
class Prism:
    complex: CellComplex
    bottom: CellularMap
    top: CellularMap


def prism(complex_: CellComplex) -> Prism:
    """``X × I`` with cells ``c@0``, ``c@1`` and ``c@I``."""
    cells: List[Cell] = []
    tags: Dict[str, int] = {}
    for cell in complex_.cells:
        for end in ("0", "1"):
            if cell.dim == 1:
                boundary: Tuple = tuple(_at(v, end) for v in cell.boundary)
            elif cell.dim == 2:
                boundary = tuple((_at(e, end), s) for e, s in cell.boundary)
            else:
                boundary = tuple(_at(f, end) for f in cell.boundary)
            cells.append(Cell(_at(cell.id, end), cell.dim, boundary))
            tags[_at(cell.id, end)] = complex_.tag(cell.id)
        if cell.dim == 0:
            vertical: Tuple = (_at(cell.id, "0"), _at(cell.id, "1"))
        elif cell.dim == 1:
            u, v = cell.boundary
            vertical = (
                (_at(cell.id, "0"), 1),
                (_at(v, "I"), 1),
                (_at(cell.id, "1"), -1),
                (_at(u, "I"), -1),
            )
        else:
            vertical = (_at(cell.id, "0"), _at(cell.id, "1")) + tuple(_at(f, "I") for f in cell.faces())
        cells.append(Cell(_at(cell.id, "I"), cell.dim + 1, vertical))
        tags[_at(cell.id, "I")] = complex_.tag(cell.id)
    total = CellComplex.build(cells, tags if complex_.is_stratified else None)
    ends = []
    for end in ("0", "1"):
        ends.append(
            CellularMap.build(
                complex_,
                total,
                {c: _at(c, end) for c in complex_.ids},
                {e: ((_at(e, end), 1),) for e in complex_.edges},
            )
        )
    return Prism(complex=total, bottom=ends[0], top=ends[1])


def prism_map(f: CellularMap, src: Prism, dst: Prism) -> CellularMap:
    """``f × id_I`` between prisms."""
    images: Dict[str, str] = {}
    paths: Dict[str, Path] = {}
    for cell_id in f.src.ids:
        target = f.image(cell_id)
        for end in ("0", "1"):
            images[_at(cell_id, end)] = _at(target, end)
        images[_at(cell_id, "I")] = _at(target, "I")
        if f.src.cell(cell_id).dim == 0:
            paths[_at(cell_id, "I")] = ((_at(target, "I"), 1),)
    for edge in f.src.edges:
        for end in ("0", "1"):
            paths[_at(edge, end)] = tuple((_at(e, end), s) for e, s in f.path(edge))
    return CellularMap.build(src.complex, dst.complex, images, paths)


@dataclass(frozen=True)
class StratifiedPrism:
    space: StratifiedSpace
    bottom: "CellularMap"
    top: "CellularMap"
    layer_bottoms: Tuple[CellularMap, ...]
    layer_tops: Tuple[CellularMap, ...]


def prism_space(space: StratifiedSpace) -> StratifiedPrism:
    """Stratified ``X̄ × I``: every attached pair is replaced by its prism."""
    totals = space.totals()
    base = prism(space.base0)
    layers: List[Layer] = []
    layer_bottoms = [base.bottom]
    layer_tops = [base.top]
    for layer, below in zip(space.layers, totals[:-1]):
        m_prism = prism(layer.m)
        a_prism = prism(layer.a_complex)
        below_prism = prism(below)
        h_prism = prism_map(layer.h, a_prism, below_prism)
        a_ids = tuple(sorted(a_prism.complex.ids))
        layers.append(Layer(m=m_prism.complex, a=a_ids, h=h_prism))
        layer_bottoms.append(m_prism.bottom)
        layer_tops.append(m_prism.top)
    new_space = StratifiedSpace(base0=base.complex, layers=tuple(layers))
    total = prism(totals[-1])
    result_total = assemble(new_space)
    bottom = CellularMap.build(totals[-1], result_total, dict(total.bottom.cell_images), dict(total.bottom.edge_paths))
    top = CellularMap.build(totals[-1], result_total, dict(total.top.cell_images), dict(total.top.edge_paths))
    return StratifiedPrism(
        space=new_space,
        bottom=bottom,
        top=top,
        layer_bottoms=tuple(layer_bottoms),
        layer_tops=tuple(layer_tops),
    )


__all__ = [
    "Cell",
    "CellComplex",
    "CellularMap",
    "Layer",
    "OrientedEdge",
    "Path",
    "Pi1Presentation",
    "Prism",
    "Pushout",
    "StratifiedPrism",
    "StratifiedSpace",
    "assemble",
    "build_pushout",
    "check_stratum_preserving",
    "cyclic_match",
    "circle",
    "compose_maps",
    "identity_map",
    "inclusion_map",
    "interval",
    "pi1",
    "point",
    "prism",
    "prism_map",
    "prism_space",
    "reduce_cyclic",
    "reduce_path",
    "require_map",
    "restrict_map",
    "reverse_path",
    "square_disc",
    "validate_complex",
    "validate_map",
    "wedge_of_circles",
]
