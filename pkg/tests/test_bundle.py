"""Flat bundles over cell complexes: validation, gauges and classification."""
from __future__ import annotations

import pytest

from stratk.bundle import (
    VBundle,
    apply_gauge,
    bundle_invariants,
    classify_bundles,
    compare_bundles,
    is_isomorphic,
    normalize,
    pullback_bundle,
    restrict_bundle,
    trivial_bundle,
    validate_bundle,
)
from stratk.complex import CellularMap, assemble, circle
from stratk.errors import PreconditionError, UnsupportedCategoryError
from stratk.lincat import Mor, Obj, StructureCategory, gl_open_category, identity, signed_perm_category, surj_open_category

from .fixtures import MINUS, disc_model, line_bundle

SP1 = signed_perm_category(1)
SP2 = signed_perm_category(2)


def test_build_fills_identity_labels_and_checks_inputs() -> None:
    bundle = VBundle.build(circle(2), SP1, {"v1": 1})
    assert bundle.label("e0") == identity(1)
    assert bundle.dim_at("v0") == 1
    with pytest.raises(PreconditionError):
        VBundle.build(circle(1), SP1, {})
    with pytest.raises(PreconditionError):
        VBundle.build(circle(1), SP1, {"v0": 1}, {"v0": MINUS})


def test_validate_reports_nontrivial_holonomy_around_a_disc() -> None:
    total = assemble(disc_model())
    assert validate_bundle(trivial_bundle(total, SP1, 1)).ok
    twisted = VBundle.build(total, SP1, {"v0": 1}, {"e0": MINUS})
    report = validate_bundle(twisted)
    assert not report.ok
    assert report.issues[0].startswith("D: holonomy")


def test_validate_reports_labels_outside_the_category() -> None:
    scaled = VBundle.build(circle(1), SP1, {"v0": 1}, {"e0": Mor.of([[2]])})
    report = validate_bundle(scaled)
    assert report.issues == ("e0: label [[2]] is outside signed_perm(1)",)
    with pytest.raises(UnsupportedCategoryError):
        validate_bundle(trivial_bundle(circle(1), surj_open_category(1), 1))


def test_gauge_moves_holonomy_between_edges() -> None:
    base = circle(2)
    left = VBundle.build(base, SP1, {"v0": 1}, {"e0": MINUS})
    right = line_bundle(base, -1)
    gauge = is_isomorphic(left, right)
    assert gauge is not None
    assert apply_gauge(gauge, left).labels == right.labels
    assert normalize(left).label("e0") == identity(1)


def test_mobius_is_not_trivial() -> None:
    base = circle(1)
    assert is_isomorphic(line_bundle(base, -1), trivial_bundle(base, SP1, 1)) is None
    assert is_isomorphic(trivial_bundle(base, SP1, 1), trivial_bundle(base, SP1, 2)) is None


def test_open_category_conjugator_is_solved_linearly() -> None:
    gl2 = gl_open_category(2)
    base = circle(1)
    swap = VBundle.build(base, gl2, {"v0": 2}, {"e0": Mor.of([[0, 1], [1, 0]])})
    flip = VBundle.build(base, gl2, {"v0": 2}, {"e0": Mor.of([[1, 0], [0, -1]])})
    gauge = is_isomorphic(swap, flip)
    assert gauge is not None
    assert apply_gauge(gauge, swap).labels == flip.labels


def test_open_category_separates_no_conjugator_from_giving_up() -> None:
    gl1, gl2 = gl_open_category(1), gl_open_category(2)
    base = circle(1)
    doubling = VBundle.build(base, gl1, {"v0": 1}, {"e0": Mor.of([[2]])})
    tripling = VBundle.build(base, gl1, {"v0": 1}, {"e0": Mor.of([[3]])})
    ruled_out = compare_bundles(doubling, tripling)
    assert not ruled_out.found
    assert not ruled_out.gave_up
    assert ruled_out.reason == "component v0: no conjugator exists"

    shear = VBundle.build(base, gl2, {"v0": 2}, {"e0": Mor.of([[1, 1], [0, 1]])})
    plain = trivial_bundle(base, gl2, 2)
    undecided = compare_bundles(shear, plain)
    assert not undecided.found
    assert undecided.gave_up
    assert is_isomorphic(shear, plain) is None
    assert compare_bundles(plain, plain).found


def test_classify_circle_counts_conjugacy_classes() -> None:
    classes = classify_bundles(circle(1), SP1, 1)
    assert len(classes) == 3
    assert len([c for c in classes if dict(c.fiber)["v0"] == 1]) == 2
    classes = classify_bundles(circle(1), SP2, 2)
    assert [dict(c.fiber)["v0"] for c in classes] == [0, 1, 1, 2, 2, 2, 2, 2]
    assert classes == sorted(classes, key=VBundle.sort_key)


def test_classify_disc_kills_the_loop() -> None:
    total = assemble(disc_model())
    classes = classify_bundles(total, SP1, 1)
    assert [c.label("e0") for c in classes] == [identity(0), identity(1)]


def test_classify_refuses_open_and_non_groupoid_categories() -> None:
    with pytest.raises(UnsupportedCategoryError):
        classify_bundles(circle(1), gl_open_category(1), 1)
    monoid = StructureCategory("mono", (Obj(1),), (identity(1),), is_groupoid=False)
    with pytest.raises(UnsupportedCategoryError):
        classify_bundles(circle(1), monoid, 1)


def test_pullback_along_double_cover_untwists_the_mobius_band() -> None:
    wrap = CellularMap.build(circle(2), circle(1), {"v0": "v0", "v1": "v0", "e0": "e0", "e1": "e0"})
    pulled = pullback_bundle(wrap, line_bundle(circle(1), -1))
    assert pulled.label("e0") == MINUS and pulled.label("e1") == MINUS
    assert is_isomorphic(pulled, trivial_bundle(circle(2), SP1, 1)) is not None


def test_restriction_keeps_labels_on_the_subcomplex() -> None:
    bundle = VBundle.build(circle(2), SP1, {"v0": 1}, {"e0": MINUS})
    restricted = restrict_bundle(bundle, ["e0"])
    assert restricted.base.ids == ("v0", "v1", "e0")
    assert restricted.label("e0") == MINUS


def test_invariants_record_orientation_signs() -> None:
    invariants = bundle_invariants(line_bundle(circle(1), -1))
    assert invariants == {"components": [{"basepoint": "v0", "dim": 1, "orientation": {"e0": -1}}]}
