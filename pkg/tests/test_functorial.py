"""Fiberwise functors and bifunctors on bundles and stratified bundles."""
from __future__ import annotations

import logging

import pytest

from stratk.bundle import VBundle, trivial_bundle
from stratk.complex import circle
from stratk.errors import PreconditionError
from stratk.functorial import map_bundle, map_bundle2, map_stratified, map_stratified2
from stratk.lincat import (
    DIRECT_SUM,
    HOM,
    TENSOR,
    Mor,
    apply_functor,
    compose,
    determinant_functor,
    dual_functor,
    identity,
    signed_perm_category,
)
from stratk.strata import ISOMORPHIC, build_stratified, is_isomorphic_stratified, pullback_stratified, trivial_stratified

from .fixtures import (
    FUNCTORIALITY_CASES,
    MINUS,
    PLUS,
    FunctorialityCase,
    circle_line,
    degree_two_map,
    disc_model,
    line_bundle,
    theta_bundle,
)

SP1 = signed_perm_category(1)
SP2 = signed_perm_category(2)
SP3 = signed_perm_category(3)


def test_determinant_of_a_swap_is_the_mobius_line() -> None:
    swap = VBundle.build(circle(1), SP2, {"v0": 2}, {"e0": Mor.of([[0, 1], [1, 0]])})
    line = map_bundle(determinant_functor(SP2), swap)
    assert dict(line.fiber) == {"v0": 1}
    assert line.label("e0") == MINUS


def test_hom_of_a_line_with_itself_is_trivial() -> None:
    mobius = line_bundle(circle(1), -1)
    assert map_bundle2(HOM, mobius, mobius).label("e0") == PLUS
    with pytest.raises(PreconditionError):
        map_bundle2(TENSOR, mobius, line_bundle(circle(2), -1))


def test_tensor_square_of_twisted_theta_is_trivial(caplog) -> None:
    twisted = theta_bundle(-1, sign_b=-1)
    with caplog.at_level(logging.INFO, logger="stratk.functorial"):
        square = map_stratified2(TENSOR, twisted, twisted)
    assert "Applied bifunctor tensor to 2 strata." in caplog.text
    assert is_isomorphic_stratified(square, theta_bundle(1)).found


def test_direct_sum_needs_the_target_category_to_hold_the_rank() -> None:
    line = theta_bundle(1)
    doubled = map_stratified2(DIRECT_SUM, line, line, category=SP2)
    assert doubled.stratum_dims() == {0: (2,), 1: (2,)}
    assert doubled.attach(1).fiber_map("pa") == identity(2)
    with pytest.raises(PreconditionError):
        map_stratified2(DIRECT_SUM, line, line)


def test_bifunctor_refuses_different_spaces() -> None:
    with pytest.raises(PreconditionError):
        map_stratified2(TENSOR, circle_line(1), theta_bundle(1))


def test_bifunctor_refuses_fiber_maps_carried_by_one_side_only() -> None:
    space = disc_model()
    plain = trivial_stratified(space, SP1, 1)
    corners = {q: PLUS for q in ("q0", "q1", "q2", "q3")}
    disc = trivial_bundle(space.layers[0].m, SP1, 1)
    with_side = build_stratified(space, trivial_bundle(space.base0, SP1, 1), [(disc, {**corners, "r0": PLUS})])
    with pytest.raises(PreconditionError) as excinfo:
        map_stratified2(TENSOR, plain, with_side)
    assert excinfo.value.entity == "r0"
    assert map_stratified2(TENSOR, with_side, with_side).attach(1).fiber_map("r0") == PLUS


def test_dual_keeps_signed_lines() -> None:
    twisted = theta_bundle(-1, sign_b=-1)
    dual = map_stratified(dual_functor(SP1), twisted)
    assert dual.layer0.labels == twisted.layer0.labels
    assert dual.attach(1).fiber_maps == twisted.attach(1).fiber_maps


def test_determinant_lands_in_a_smaller_category() -> None:
    plane = trivial_stratified(disc_model(), SP2, 2)
    line = map_stratified(determinant_functor(SP2, target=SP1), plane)
    assert line.category.name == "signed_perm(1)"
    assert line.stratum_dims() == {0: (1,), 1: (1,)}


@pytest.mark.parametrize("left, right", [(1, 1), (1, -1), (-1, -1)])
def test_pullback_distributes_over_direct_sum(left: int, right: int) -> None:
    f = degree_two_map()
    y, y_prime = circle_line(left, category=SP2), circle_line(right, category=SP2)
    summed_first = pullback_stratified(f, map_stratified2(DIRECT_SUM, y, y_prime))
    pulled_first = map_stratified2(DIRECT_SUM, pullback_stratified(f, y), pullback_stratified(f, y_prime))
    assert is_isomorphic_stratified(summed_first, pulled_first).status == ISOMORPHIC


@pytest.mark.parametrize("twist", [1, -1])
def test_tensor_distributes_over_direct_sum(twist: int) -> None:
    z = circle_line(twist, category=SP2)
    plane = map_stratified2(DIRECT_SUM, circle_line(1, category=SP2), circle_line(-1, category=SP2))
    left = map_stratified2(TENSOR, plane, z)
    right = map_stratified2(
        DIRECT_SUM,
        map_stratified2(TENSOR, circle_line(1, category=SP2), z),
        map_stratified2(TENSOR, circle_line(-1, category=SP2), z),
    )
    assert is_isomorphic_stratified(left, right).status == ISOMORPHIC


def _witnessed(left, right) -> None:
    result = is_isomorphic_stratified(left, right)
    assert result.status == ISOMORPHIC, result.reason
    assert len(result.gauges) == left.depth


@pytest.mark.parametrize("case", FUNCTORIALITY_CASES, ids=lambda case: f"seed{case.seed}-{case.shape}")
def test_functoriality_on_seeded_instances(case: FunctorialityCase) -> None:
    y, y_prime, z = case.lines
    for functor in (dual_functor(SP2), determinant_functor(SP2)):
        composite = apply_functor(functor, compose(case.g, case.f))
        assert composite == compose(apply_functor(functor, case.g), apply_functor(functor, case.f))

    plane = map_stratified2(DIRECT_SUM, y, y_prime, category=SP2)
    _witnessed(plane, map_stratified2(DIRECT_SUM, y_prime, y, category=SP2))
    _witnessed(
        map_stratified2(TENSOR, plane, z, category=SP2),
        map_stratified2(DIRECT_SUM, map_stratified2(TENSOR, y, z), map_stratified2(TENSOR, y_prime, z), category=SP2),
    )
    if case.shape != "circle":
        return
    _witnessed(
        map_stratified2(DIRECT_SUM, plane, z, category=SP3),
        map_stratified2(DIRECT_SUM, y, map_stratified2(DIRECT_SUM, y_prime, z, category=SP2), category=SP3),
    )
    if case.vertices == 1:
        f = degree_two_map()
        _witnessed(
            pullback_stratified(f, plane),
            map_stratified2(DIRECT_SUM, pullback_stratified(f, y), pullback_stratified(f, y_prime), category=SP2),
        )
