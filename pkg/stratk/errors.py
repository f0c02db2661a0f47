"""Exception hierarchy shared by every stratk module."""
from __future__ import annotations

from typing import Optional


class StratkError(ValueError):
    """Base error; ``entity`` names the offending cell, morphism or file."""

    def __init__(self, message: str, entity: Optional[str] = None) -> None:
        self.entity = entity
        if entity is not None:
            message = f"{message} [entity: {entity}]"
        super().__init__(message)


class ComposabilityError(StratkError):
    """Matrix shapes do not line up."""


class DomainError(StratkError):
    """A functor or bifunctor was applied outside its domain."""


class PreconditionError(StratkError):
    """An operation was called with inputs violating its precondition."""


class MapError(StratkError):
    """A cellular map is undefined or inconsistent on some cell."""


class ComplexError(StratkError):
    """A cell complex is malformed."""


class UnsupportedCategoryError(StratkError):
    """The structure category cannot be enumerated or is not a groupoid."""


class NaturalityError(StratkError):
    """An attaching V-map fails naturality on some edge."""


class BundleTheoremError(StratkError):
    """A stratified bundle cannot be flattened into a single V-bundle."""


class StratumPreservingError(StratkError):
    """A map sends an open stratum outside the matching open stratum."""


class AmbiguousDecompositionError(StratkError):
    """The layer decomposition of a stratified map is not unique."""


class ConstructionError(StratkError):
    """Tangent family construction hypotheses are violated."""


class IntegrityError(StratkError):
    """A class monoid table is inconsistent."""


class SchemaError(StratkError):
    """A JSON document does not match the stratk schema."""


__all__ = [
    "AmbiguousDecompositionError",
    "BundleTheoremError",
    "ComplexError",
    "ComposabilityError",
    "ConstructionError",
    "DomainError",
    "IntegrityError",
    "MapError",
    "NaturalityError",
    "PreconditionError",
    "SchemaError",
    "StratkError",
    "StratumPreservingError",
    "UnsupportedCategoryError",
]
