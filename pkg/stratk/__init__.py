"""stratk: stratified vector bundles and their Grothendieck groups."""
from importlib.metadata import version

from .bundle import VBundle, classify_bundles, is_isomorphic, pullback_bundle, trivial_bundle
from .complex import Cell, CellComplex, CellularMap, Layer, StratifiedSpace, assemble
from .errors import StratkError
from .ktheory import DEFAULT_RANK_CAP, ClassMonoid, KGroup, enumerate_classes, grothendieck
from .lincat import Mor, StructureCategory, builtin_category
from .strata import (
    StratifiedBundle,
    StratifiedMap,
    build_stratified,
    flatten,
    is_isomorphic_stratified,
    pullback_stratified,
)
from .tangent import PolytopalManifold, build_tangent

__all__ = [
    "DEFAULT_RANK_CAP",
    "Cell",
    "CellComplex",
    "CellularMap",
    "ClassMonoid",
    "KGroup",
    "Layer",
    "Mor",
    "PolytopalManifold",
    "StratifiedBundle",
    "StratifiedMap",
    "StratifiedSpace",
    "StratkError",
    "StructureCategory",
    "VBundle",
    "assemble",
    "build_stratified",
    "build_tangent",
    "builtin_category",
    "classify_bundles",
    "enumerate_classes",
    "flatten",
    "grothendieck",
    "is_isomorphic",
    "is_isomorphic_stratified",
    "pullback_bundle",
    "pullback_stratified",
    "trivial_bundle",
]

try:
    __version__ = version("stratk")
except Exception:  # pragma: no cover - local dev fallback
    __version__ = "0.0.0"
