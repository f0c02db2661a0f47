"""Functors and bifunctors applied fiberwise to bundles and stratified bundles."""
from __future__ import annotations

import logging
from typing import Dict, List, Optional, Tuple

from .bundle import VBundle
from .errors import PreconditionError
from .lincat import MatrixBifunctor, MatrixFunctor, Mor, StructureCategory, apply_functor
from .strata import StratifiedBundle, build_stratified

logger = logging.getLogger(__name__)


def map_bundle(functor: MatrixFunctor, bundle: VBundle) -> VBundle:
    """Apply ``functor`` to every fiber and label; the base is unchanged."""
    fiber = {bp: functor.obj(dim) for bp, dim in bundle.fiber}
    labels = {edge: apply_functor(functor, label) for edge, label in bundle.labels}
    return VBundle.build(bundle.base, functor.target, fiber, labels)


def map_bundle2(
    bifunctor: MatrixBifunctor,
    left: VBundle,
    right: VBundle,
    category: Optional[StructureCategory] = None,
) -> VBundle:
    """Fiberwise ``bifunctor(left, right)`` over a shared base.

    The result lives in ``category``, by default the category of ``left``.
    """
    if left.base.cells != right.base.cells:
        raise PreconditionError("bundles live over different cell structures")
    right_dims = dict(right.fiber)
    fiber = {bp: bifunctor.obj(dim, right_dims[bp]) for bp, dim in left.fiber}
    labels = {edge: bifunctor(left.label(edge), right.label(edge)) for edge in left.base.edges}
    return VBundle.build(left.base, category or left.category, fiber, labels)


def map_stratified(functor: MatrixFunctor, bundle: StratifiedBundle) -> StratifiedBundle:
    """Apply ``functor`` stratum by stratum, including the attaching fiber maps.

    The glued result is rebuilt, so naturality is verified again.
    """
    layer0 = map_bundle(functor, bundle.layer0)
    layers: List[Tuple[VBundle, Dict[str, Mor]]] = []
    for m_bundle, attach in bundle.layers:
        fiber_maps = {cell: apply_functor(functor, phi) for cell, phi in attach.fiber_maps}
        layers.append((map_bundle(functor, m_bundle), fiber_maps))
    result = build_stratified(bundle.space, layer0, layers)
    logger.info("Applied functor %s to %s strata.", functor.name, bundle.depth)
    return result


def map_stratified2(
    bifunctor: MatrixBifunctor,
    left: StratifiedBundle,
    right: StratifiedBundle,
    category: Optional[StructureCategory] = None,
) -> StratifiedBundle:
    """Layerwise ``bifunctor(left, right)`` with attaching maps ``bifunctor(φ, φ′)``."""
    if left.space != right.space:
        raise PreconditionError("stratified bundles live over different stratified spaces")
    target = category or left.category
    layer0 = map_bundle2(bifunctor, left.layer0, right.layer0, target)
    layers: List[Tuple[VBundle, Dict[str, Mor]]] = []
    for level, ((m_left, attach_left), (m_right, attach_right)) in enumerate(zip(left.layers, right.layers), start=1):
        one_sided = sorted(set(attach_left.maps) ^ set(attach_right.maps))
        if one_sided:
            raise PreconditionError(
                f"layer {level} carries an attaching fiber map on one side only", entity=one_sided[0]
            )
        fiber_maps = {cell: bifunctor(attach_left.maps[cell], attach_right.maps[cell]) for cell in attach_left.maps}
        layers.append((map_bundle2(bifunctor, m_left, m_right, target), fiber_maps))
    result = build_stratified(left.space, layer0, layers)
    logger.info("Applied bifunctor %s to %s strata.", bifunctor.name, left.depth)
    return result


__all__ = ["map_bundle", "map_bundle2", "map_stratified", "map_stratified2"]
