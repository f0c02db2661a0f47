"""Small stratified spaces, bundles and maps shared by the tests."""
from __future__ import annotations

from typing import Optional

from stratk.bundle import VBundle, trivial_bundle
from stratk.complex import CellComplex, CellularMap, Layer, StratifiedSpace, circle, interval, prism, square_disc
from stratk.lincat import Mor, StructureCategory, signed_perm_category
from stratk.strata import Homotopy, StratifiedBundle, StratifiedMap, build_stratified

MINUS = Mor.of([[-1]])
PLUS = Mor.of([[1]])


def circle_space(n: int = 1) -> StratifiedSpace:
    return StratifiedSpace(circle(n))


def line_bundle(base: CellComplex, holonomy: int = 1, category: Optional[StructureCategory] = None) -> VBundle:
    """Rank-one bundle whose last edge carries ``holonomy`` and every other edge the identity."""
    category = category or signed_perm_category(1)
    last = base.edges[-1]
    return VBundle.build(base, category, {bp: 1 for bp in base.basepoints}, {last: Mor.of([[holonomy]])})


def circle_line(holonomy: int = 1, n: int = 1, category: Optional[StructureCategory] = None) -> StratifiedBundle:
    space = circle_space(n)
    return build_stratified(space, line_bundle(space.base0, holonomy, category))


def disc_model() -> StratifiedSpace:
    """A one-vertex circle with a square disc attached along one turn of the loop."""
    base = circle(1)
    disc = square_disc()
    images = {"q0": "v0", "q1": "v0", "q2": "v0", "q3": "v0", "r0": "e0", "r1": "v0", "r2": "v0", "r3": "v0"}
    attached = tuple(sorted(images))
    below = StratifiedSpace(base).totals()[-1]
    h = CellularMap.build(disc.subcomplex(attached), below, images, {"r0": (("e0", 1),)})
    return StratifiedSpace(base, (Layer(m=disc, a=attached, h=h),))


def theta_space(base_n: int = 1) -> StratifiedSpace:
    """A circle with an interval attached at both ends; the ends land on v0 and v{last}."""
    base = circle(base_n)
    arc = interval("p")
    images = {"pa": "v0", "pb": f"v{base_n - 1}"}
    h = CellularMap.build(arc.subcomplex(["pa", "pb"]), StratifiedSpace(base).totals()[-1], images)
    return StratifiedSpace(base, (Layer(m=arc, a=("pa", "pb"), h=h),))


def theta_bundle(holonomy: int, base_n: int = 1, sign_b: int = 1) -> StratifiedBundle:
    """Line bundle on the theta space: trivial on the arc, fiber maps 1 at pa and ``sign_b`` at pb."""
    space = theta_space(base_n)
    category = signed_perm_category(1)
    layer0 = line_bundle(space.base0, holonomy, category)
    arc = trivial_bundle(space.layers[0].m, category, 1)
    return build_stratified(space, layer0, [(arc, {"pa": PLUS, "pb": Mor.of([[sign_b]])})])


def degree_two_map() -> StratifiedMap:
    """circle(2) -> circle(1) wrapping twice."""
    src, dst = circle_space(2), circle_space(1)
    images = {"v0": "v0", "v1": "v0", "e0": "e0", "e1": "e0"}
    base_map = CellularMap.build(src.base0, dst.base0, images)
    return StratifiedMap.build(src, dst, images, layer_maps=[base_map])


def rotation_homotopy() -> Homotopy:
    """Homotopy between the two maps circle(2) -> circle(1) that collapse one edge each."""
    src, dst = circle_space(2), circle_space(1)
    total = prism(src.base0).complex
    images = {
        "v0@0": "v0",
        "v1@0": "v0",
        "v0@1": "v0",
        "v1@1": "v0",
        "e0@0": "e0",
        "e1@0": "v0",
        "e0@1": "v0",
        "e1@1": "e0",
        "v0@I": "v0",
        "v1@I": "e0",
        "e0@I": "e0",
        "e1@I": "e0",
    }
    paths = {
        "e0@0": (("e0", 1),),
        "e1@0": (),
        "e0@1": (),
        "e1@1": (("e0", 1),),
        "v0@I": (),
        "v1@I": (("e0", -1),),
    }
    base_map = CellularMap.build(total, dst.base0, images, paths)
    return Homotopy(src, dst, base_map, (base_map,))


__all__ = [
    "MINUS",
    "PLUS",
    "circle_line",
    "circle_space",
    "degree_two_map",
    "disc_model",
    "line_bundle",
    "rotation_homotopy",
    "theta_bundle",
    "theta_space",
]
