"""Reusable spaces, bundles, maps and seeded corpora for tests."""

from .corpora import (  # noqa: F401
    FLATTEN_CORPUS,
    FUNCTORIALITY_CASES,
    HOMOTOPY_CORPUS,
    FunctorialityCase,
    collapse_homotopy,
    invariant_factors,
    random_integer_matrix,
)
from .spaces import (  # noqa: F401
    MINUS,
    PLUS,
    circle_line,
    circle_space,
    degree_two_map,
    disc_model,
    line_bundle,
    rotation_homotopy,
    theta_bundle,
    theta_space,
)

__all__ = [
    "FLATTEN_CORPUS",
    "FUNCTORIALITY_CASES",
    "FunctorialityCase",
    "HOMOTOPY_CORPUS",
    "MINUS",
    "PLUS",
    "circle_line",
    "circle_space",
    "collapse_homotopy",
    "degree_two_map",
    "disc_model",
    "invariant_factors",
    "line_bundle",
    "random_integer_matrix",
    "rotation_homotopy",
    "theta_bundle",
    "theta_space",
]
