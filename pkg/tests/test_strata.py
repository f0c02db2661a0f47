"""Stratified bundles: gluing, flattening, pullback and isomorphism search."""
from __future__ import annotations

import pytest

from stratk.bundle import trivial_bundle, validate_bundle
from stratk.complex import validate_map
from stratk.errors import BundleTheoremError, NaturalityError, PreconditionError, StratumPreservingError
from stratk.lincat import gl_open_category, identity, signed_perm_category
from stratk.strata import (
    INCONCLUSIVE_BUDGET,
    INCONCLUSIVE_OPEN,
    ISOMORPHIC,
    NOT_ISOMORPHIC,
    StratifiedMap,
    build_stratified,
    check_homotopy_invariance,
    decompose_map,
    describe_stratified,
    flatten,
    is_isomorphic_stratified,
    pullback_stratified,
    trivial_stratified,
    validate_stratified,
)

from .fixtures import (
    FLATTEN_CORPUS,
    HOMOTOPY_CORPUS,
    MINUS,
    PLUS,
    circle_line,
    circle_space,
    collapse_homotopy,
    degree_two_map,
    disc_model,
    line_bundle,
    rotation_homotopy,
    theta_bundle,
    theta_space,
)

SP1 = signed_perm_category(1)


def _theta_with_maps(pa, pb, category=SP1):
    space = theta_space()
    layer0 = trivial_bundle(space.base0, category, 1)
    arc = trivial_bundle(space.layers[0].m, category, 1)
    return build_stratified(space, layer0, [(arc, {"pa": pa, "pb": pb})])


def test_trivial_stratified_is_valid_and_flattens_to_identities() -> None:
    bundle = trivial_stratified(disc_model(), SP1, 1)
    assert validate_stratified(bundle).ok
    assert bundle.stratum_dims() == {0: (1,), 1: (1,)}
    flat = flatten(bundle)
    assert validate_bundle(flat).ok
    assert all(label == identity(1) for _, label in flat.labels)


def test_flatten_reads_holonomy_of_the_new_loop_from_fiber_maps() -> None:
    flat = flatten(theta_bundle(1, sign_b=-1))
    assert flat.label("ps") == MINUS
    assert flat.label("e0") == PLUS


@pytest.mark.parametrize(
    "make, flattens",
    [(make, flattens) for _, make, flattens in FLATTEN_CORPUS],
    ids=[name for name, _, _ in FLATTEN_CORPUS],
)
def test_flatten_succeeds_exactly_on_groupoid_attached_bundles(make, flattens: bool) -> None:
    bundle = make()
    assert validate_stratified(bundle).ok
    assert bundle.category.is_groupoid == flattens
    if flattens:
        flat = flatten(bundle)
        assert validate_bundle(flat).ok
        assert flat.base == bundle.total
    else:
        with pytest.raises(BundleTheoremError):
            flatten(bundle)


def test_mobius_layer_cannot_be_glued_to_a_trivial_disc() -> None:
    space = disc_model()
    layer0 = line_bundle(space.base0, -1)
    disc = trivial_bundle(space.layers[0].m, SP1, 1)
    maps = {q: PLUS for q in ("q0", "q1", "q2", "q3")}
    with pytest.raises(NaturalityError) as excinfo:
        build_stratified(space, layer0, [(disc, maps)])
    assert excinfo.value.entity == "r0"


def test_gluing_checks_fiber_maps_and_layer_count() -> None:
    space = theta_space()
    layer0 = trivial_bundle(space.base0, SP1, 1)
    arc = trivial_bundle(space.layers[0].m, SP1, 1)
    with pytest.raises(PreconditionError) as excinfo:
        build_stratified(space, layer0, [(arc, {"pa": PLUS})])
    assert excinfo.value.entity == "pb"
    with pytest.raises(PreconditionError):
        build_stratified(space, layer0, [])


def test_isomorphism_search_sees_the_sign_on_the_new_loop() -> None:
    plain = theta_bundle(1, sign_b=1)
    twisted = theta_bundle(1, sign_b=-1)
    assert is_isomorphic_stratified(plain, twisted).status == NOT_ISOMORPHIC
    same_loop = _theta_with_maps(MINUS, PLUS)
    result = is_isomorphic_stratified(twisted, same_loop)
    assert result.status == ISOMORPHIC
    assert len(result.gauges) == 2


def test_isomorphism_search_respects_its_budget() -> None:
    result = is_isomorphic_stratified(theta_bundle(1), theta_bundle(1), budget=1)
    assert result.status == INCONCLUSIVE_BUDGET
    assert result.to_dict()["status"] == INCONCLUSIVE_BUDGET


def test_open_categories_solve_linearly_or_give_up() -> None:
    gl1 = gl_open_category(1)
    trivial = trivial_stratified(disc_model(), gl1, 1)
    assert is_isomorphic_stratified(trivial, trivial).status == ISOMORPHIC
    plain = _theta_with_maps(PLUS, PLUS, gl1)
    twisted = _theta_with_maps(PLUS, MINUS, gl1)
    assert is_isomorphic_stratified(plain, twisted).status == INCONCLUSIVE_OPEN


def test_pullback_along_double_cover() -> None:
    pulled = pullback_stratified(degree_two_map(), circle_line(-1))
    assert pulled.layer0.label("e0") == MINUS
    assert pulled.layer0.label("e1") == MINUS
    assert is_isomorphic_stratified(pulled, circle_line(1, n=2)).found


def test_pullback_refuses_maps_that_leave_a_stratum() -> None:
    space = theta_space()
    collapse = StratifiedMap.build(space, space, {"v0": "v0", "e0": "e0", "ps": "e0"})
    with pytest.raises(StratumPreservingError):
        pullback_stratified(collapse, theta_bundle(1))
    with pytest.raises(PreconditionError):
        pullback_stratified(degree_two_map(), circle_line(-1, n=2))


def test_decomposition_uses_open_edges_to_pick_attached_vertices() -> None:
    space = theta_space()
    identity_like = StratifiedMap.build(space, space, {"v0": "v0", "e0": "e0", "ps": "ps"})
    base_map, arc_map = decompose_map(identity_like)
    assert base_map.images == {"v0": "v0", "e0": "e0"}
    assert arc_map.images == {"pa": "pa", "pb": "pb", "ps": "ps"}


def test_decomposition_of_wrapping_map() -> None:
    wrap = StratifiedMap.build(
        circle_space(2), circle_space(1), {"v0": "v0", "v1": "v0", "e0": "e0", "e1": "e0"}
    )
    (base_map,) = decompose_map(wrap)
    assert base_map.path("e1") == (("e0", 1),)


def test_homotopic_maps_pull_back_isomorphic_bundles() -> None:
    result = check_homotopy_invariance(rotation_homotopy(), circle_line(-1))
    assert result.found


@pytest.mark.parametrize("holonomy", [1, -1])
@pytest.mark.parametrize("n, keep", HOMOTOPY_CORPUS)
def test_collapse_homotopies_pull_back_isomorphic_bundles(n: int, keep: int, holonomy: int) -> None:
    homotopy = collapse_homotopy(n, keep)
    assert validate_map(homotopy.total).ok
    start, finish = homotopy.end(0), homotopy.end(1)
    assert start.total.image(f"e{keep}") == "e0"
    assert finish.total.image(f"e{(keep + 1) % n}") == "e0"
    result = check_homotopy_invariance(homotopy, circle_line(holonomy))
    assert result.found
    assert result.gauges


def test_describe_stratified() -> None:
    assert describe_stratified(theta_bundle(-1)) == {
        "category": "signed_perm(1)",
        "depth": 2,
        "stratum_dims": {"0": [1], "1": [1]},
    }
