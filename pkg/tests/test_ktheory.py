"""Class monoids, Grothendieck groups, induced homomorphisms and products."""
from __future__ import annotations

import math
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pytest
from sympy import Matrix

from stratk.complex import StratifiedSpace, point
from stratk.errors import IntegrityError, PreconditionError, UnsupportedCategoryError
from stratk.ktheory import (
    OUTSIDE_WINDOW,
    bundle_subtable,
    check_additivity,
    check_hom,
    compose_homs,
    describe_k0,
    enumerate_classes,
    grothendieck,
    grothendieck_from_table,
    identity_hom,
    layer_space,
    pullback_hom,
    restriction_hom,
    ring_product,
    signature,
    smith_form,
    unit,
)
from stratk.lincat import Mor, Obj, StructureCategory, gl_open_category, identity, signed_perm_category

from .fixtures import circle_space, degree_two_map, disc_model, invariant_factors, random_integer_matrix, theta_space

SP1 = signed_perm_category(1)
SP2 = signed_perm_category(2)


def _symmetric(size: int, entries: Dict[Tuple[int, int], int]) -> Dict[Tuple[int, int], int]:
    table = {(0, i): i for i in range(size)}
    table.update({(i, 0): i for i in range(size)})
    for (i, j), k in entries.items():
        table[(i, j)] = table[(j, i)] = k
    return table


def _relation_rows(size: int, table: Dict[Tuple[int, int], object]) -> List[List[int]]:
    rows = []
    for (i, j), k in table.items():
        if i > j or not isinstance(k, int):
            continue
        row = [0] * (size - 1)
        for cls, sign in ((i, 1), (j, 1), (k, -1)):
            if cls:
                row[cls - 1] += sign
        if any(row):
            rows.append(row)
    return rows


def _in_lattice(rows: Sequence[Sequence[int]], vector: Sequence[int]) -> bool:
    before = invariant_factors(rows)
    after = invariant_factors(list(rows) + [list(vector)])
    return len(before) == len(after) and math.prod(before) == math.prod(after)


def _image(group, vector: Sequence[int]):
    total = group.zero
    for n, x in enumerate(vector):
        total = group.add(total, group.scale(int(x), group.class_map[n + 1]))
    return total


# ---------------------------------------------------------------------------
# Group completion of tables
# ---------------------------------------------------------------------------


def test_idempotent_class_dies_in_the_group() -> None:
    group = grothendieck_from_table(3, _symmetric(3, {(1, 1): 1}))
    assert group.presentation == "Z"
    assert group.class_map[1] == (0,)
    assert group.class_map[2] in ((1,), (-1,))


def test_involution_gives_two_torsion() -> None:
    group = grothendieck_from_table(2, _symmetric(2, {(1, 1): 0}))
    assert group.presentation == "Z/2"
    assert group.torsion == (2,)
    assert group.class_map[1] == (1,)
    assert group.add((1,), (1,)) == (0,)
    assert group.scale(3, (1,)) == (1,)


def test_table_without_relations_is_free() -> None:
    table = _symmetric(3, {(1, 1): OUTSIDE_WINDOW, (1, 2): OUTSIDE_WINDOW, (2, 2): OUTSIDE_WINDOW})
    group = grothendieck_from_table(3, table)
    assert group.presentation == "Z^2"
    assert group.class_map == ((0, 0), (1, 0), (0, 1))
    assert group.coordinate_words == ((1, 0), (0, 1))


def test_trivial_monoid_is_the_zero_group() -> None:
    group = grothendieck_from_table(1, {(0, 0): 0})
    assert group.presentation == "0"
    assert group.zero == ()


@pytest.mark.parametrize(
    "table",
    [
        {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 1, (1, 2): 2, (2, 1): 1},
        {(0, 0): 0, (0, 1): 0, (1, 0): 0},
        {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 5},
    ],
    ids=["not-commutative", "zero-not-neutral", "unknown-class"],
)
def test_inconsistent_tables_are_rejected(table) -> None:
    with pytest.raises(IntegrityError):
        grothendieck_from_table(3, table)


@pytest.mark.parametrize("seed", range(8))
def test_random_tables_match_elimination_and_lattice_oracle(seed: int) -> None:
    rng = np.random.default_rng(seed)
    size = int(rng.integers(3, 7))
    entries = {
        (i, j): int(rng.integers(0, size))
        for i in range(1, size)
        for j in range(i, size)
        if rng.random() < 0.5
    }
    table = _symmetric(size, entries)
    group = grothendieck_from_table(size, table)
    rows = _relation_rows(size, table)
    factors = invariant_factors(rows)

    assert group.free_rank == size - 1 - len(factors)
    assert math.prod(group.torsion) == math.prod(factors)
    assert all(d > 1 for d in group.torsion)
    assert check_additivity(group, table).ok

    for _ in range(12):
        left = [int(x) for x in rng.integers(-3, 4, size=size - 1)]
        right = [int(x) for x in rng.integers(-3, 4, size=size - 1)]
        difference = [a - b for a, b in zip(left, right)]
        assert (_image(group, left) == _image(group, right)) == _in_lattice(rows, difference)


@pytest.mark.parametrize("seed", range(200))
def test_smith_form_matches_elimination_oracle(seed: int) -> None:
    rows = random_integer_matrix(seed)
    count = len(rows[0])
    diagonal, basis = smith_form(rows, count)
    factors = [d for d in diagonal if d]
    assert factors == invariant_factors(rows)
    assert all(b % a == 0 for a, b in zip(factors, factors[1:]))
    assert abs(basis.det()) == 1
    transformed = Matrix(rows) * basis
    for k, d in enumerate(diagonal):
        column = [int(v) for v in transformed[:, k]]
        assert all(v % d == 0 for v in column) if d else not any(column)


def test_coprime_torsion_merges_into_one_cyclic_factor() -> None:
    diagonal, basis = smith_form([[2, 0], [0, 3]], 2)
    assert diagonal == [1, 6]
    assert abs(basis.det()) == 1
    group = grothendieck_from_table(4, _symmetric(4, {(1, 1): 0, (2, 2): 3, (2, 3): 0}))
    assert group.torsion == (6,)
    assert group.presentation == "Z/6"


# ---------------------------------------------------------------------------
# Enumeration over spaces
# ---------------------------------------------------------------------------


def test_point_with_two_ranks_is_free_of_rank_one() -> None:
    group = grothendieck(enumerate_classes(StratifiedSpace(point()), SP2, 2))
    assert group.presentation == "Z"
    assert group.class_map[1] in ((1,), (-1,))
    assert group.class_map[2] == group.scale(2, group.class_map[1])


def test_circle_with_sign_lines_only() -> None:
    monoid = enumerate_classes(circle_space(), SP1, 2)
    assert monoid.size == 3
    assert [signature(c) for c in monoid.classes] == [((0,),), ((1,),), ((1,),)]
    assert monoid.classes[1].layer0.label("e0") == identity(1)
    assert monoid.add_table[(1, 1)] == OUTSIDE_WINDOW
    group = grothendieck(monoid)
    assert group.presentation == "Z^2"
    assert group.class_map == ((0, 0), (1, 0), (0, 1))
    assert not group.partial


def test_circle_with_rank_two_planes() -> None:
    monoid = enumerate_classes(circle_space(), SP2, 2)
    assert monoid.size == 8
    group = grothendieck(monoid)
    assert group.presentation == "Z^4"
    assert len(group.relations) == 3
    assert check_additivity(group, monoid.add_table).ok
    trivial_plane, mobius_square = monoid.add_table[(1, 1)], monoid.add_table[(2, 2)]
    assert isinstance(trivial_plane, int) and isinstance(mobius_square, int)
    assert trivial_plane != mobius_square


def test_disc_model_only_the_trivial_line_extends() -> None:
    monoid = enumerate_classes(disc_model(), SP1, 1)
    assert monoid.size == 2
    assert signature(monoid.classes[1]) == ((1,), (1,))
    assert grothendieck(monoid).presentation == "Z"
    assert bundle_subtable(monoid).indices == (0, 1)


def test_theta_space_sees_the_sign_of_each_loop() -> None:
    monoid = enumerate_classes(theta_space(), SP1, 1)
    assert monoid.size == 5
    group = grothendieck(monoid)
    assert group.presentation == "Z^4"
    assert describe_k0(group)["window"] == "within stable window 1"
    assert monoid.to_dict()["window"] == 1


def test_enumeration_budget_marks_the_monoid_partial() -> None:
    monoid = enumerate_classes(theta_space(), SP1, 1, budget=3)
    assert monoid.partial
    assert grothendieck(monoid).partial


def test_enumeration_needs_a_finite_category_with_sums() -> None:
    with pytest.raises(UnsupportedCategoryError):
        enumerate_classes(circle_space(), gl_open_category(1), 1)
    no_sums = StructureCategory(
        "no-sums",
        (Obj(0), Obj(1)),
        (identity(0), identity(1), Mor.of([[-1]])),
        is_groupoid=True,
    )
    with pytest.raises(UnsupportedCategoryError):
        enumerate_classes(circle_space(), no_sums, 1)


# ---------------------------------------------------------------------------
# Homomorphisms and products
# ---------------------------------------------------------------------------


def test_double_cover_sends_both_lines_to_the_trivial_one() -> None:
    f = degree_two_map()
    source = grothendieck(enumerate_classes(f.dst, SP1, 1))
    target = grothendieck(enumerate_classes(f.src, SP1, 1))
    hom = pullback_hom(f, source, target)
    assert hom.matrix == ((1, 1), (0, 0))
    assert hom.apply((0, 1)) == (1, 0)
    assert check_hom(hom).ok
    assert compose_homs(identity_hom(target), hom).images == hom.images
    with pytest.raises(PreconditionError):
        pullback_hom(f, target, source)


def test_restriction_of_theta_classes_to_the_base_circle() -> None:
    space = theta_space()
    source = grothendieck(enumerate_classes(space, SP1, 1))
    target = grothendieck(enumerate_classes(layer_space(space, 0), SP1, 1))
    hom = restriction_hom(source, target, "X0")
    columns = sorted(zip(*hom.matrix))
    assert columns == [(0, 1), (0, 1), (1, 0), (1, 0)]
    assert check_hom(hom).ok
    with pytest.raises(PreconditionError):
        restriction_hom(source, source, "X0")


def test_restriction_outside_the_target_window_is_partial() -> None:
    space = theta_space()
    source = grothendieck(enumerate_classes(space, SP1, 1))
    target = grothendieck(enumerate_classes(layer_space(space, 0), SP1, 0))
    assert target.presentation == "0"
    hom = restriction_hom(source, target, "X0")
    assert hom.partial
    assert "matrix" not in hom.to_dict()
    with pytest.raises(PreconditionError):
        hom.matrix


def test_sign_lines_form_a_group_ring() -> None:
    group = grothendieck(enumerate_classes(circle_space(), SP1, 2))
    one = unit(group)
    mobius = group.class_map[2]
    assert one == (1, 0)
    assert ring_product(group, one, mobius) == mobius
    assert ring_product(group, mobius, mobius) == one
