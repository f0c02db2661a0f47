"""JSON documents: reading, writing and schema errors."""
from __future__ import annotations

import json
from pathlib import Path

import pytest

from stratk.complex import circle
from stratk.errors import SchemaError
from stratk.io import (
    SCHEMA_VERSION,
    as_stratified,
    bundle_to_json,
    category_from_json,
    category_to_json,
    matrix_from_json,
    normalize,
    read_document,
    resolve_category,
    space_from_json,
    space_to_json,
    stamp,
    stratified_from_json,
    stratified_map_from_json,
    stratified_map_to_json,
    stratified_to_json,
    write_report,
)
from stratk.lincat import Mor, Obj, StructureCategory, identity, signed_perm_category

from .fixtures import circle_line, degree_two_map, disc_model, line_bundle, theta_bundle


def _write(path: Path, document: object) -> Path:
    path.write_text(json.dumps(document), encoding="utf-8")
    return path


def test_normalize_sorts_keys_and_ends_with_newline() -> None:
    text = normalize(stamp("space", {"b": 1, "a": [1]}))
    assert text.endswith("}\n")
    assert list(json.loads(text)) == ["a", "b", "kind", "schema"]
    assert json.loads(text)["schema"] == SCHEMA_VERSION


def test_disc_document_matches_the_built_model(data_dir: Path) -> None:
    raw = read_document(data_dir / "disc.json", ("space",))
    space = space_from_json(raw)
    assert space == disc_model()
    assert normalize(space_to_json(space)) == normalize(space_to_json(disc_model()))


def test_bare_complex_reads_as_one_stratum(data_dir: Path) -> None:
    raw = read_document(data_dir / "circle.json")
    space = space_from_json(raw["base0"])
    assert space.depth == 1
    assert space.base0 == circle(1)


def test_stratified_bundle_survives_a_round_trip() -> None:
    bundle = theta_bundle(-1, sign_b=-1)
    document = json.loads(normalize(stratified_to_json(bundle)))
    assert document["kind"] == "stratified_bundle"
    assert stratified_from_json(document) == bundle


def test_bundle_document_is_read_as_a_one_stratum_bundle() -> None:
    document = bundle_to_json(line_bundle(circle(1), -1))
    assert as_stratified(document, "inline") == circle_line(-1)


def test_stratified_map_text_is_stable() -> None:
    f = degree_two_map()
    text = normalize(stratified_map_to_json(f))
    restored = stratified_map_from_json(json.loads(text))
    assert restored.total == f.total
    assert normalize(stratified_map_to_json(restored)) == text


def test_layer_count_mismatch_is_a_schema_error() -> None:
    document = stratified_to_json(theta_bundle(1))
    document["layers"] = []
    with pytest.raises(SchemaError, match="space has 1 layers, document has 0"):
        stratified_from_json(document)


# ---------------------------------------------------------------------------
# Matrices and categories
# ---------------------------------------------------------------------------


def test_matrix_accepts_both_spellings() -> None:
    assert matrix_from_json([[1, 0], [0, -1]]) == Mor.of([[1, 0], [0, -1]])
    f = matrix_from_json({"src": 2, "dst": 1, "rows": [[1, "1/2"]]})
    assert (f.src, f.dst) == (Obj(2), Obj(1))


@pytest.mark.parametrize(
    "raw, message",
    [
        ({"src": 1, "dst": 2, "rows": [[1]]}, "declared 2"),
        ({"rows": [[1]]}, "malformed matrix"),
        ({"src": "two", "rows": []}, "malformed matrix"),
    ],
)
def test_malformed_matrices_are_schema_errors(raw: object, message: str) -> None:
    with pytest.raises(SchemaError, match=message):
        matrix_from_json(raw, "phi")


def test_builtin_category_is_written_by_name() -> None:
    sp2 = signed_perm_category(2)
    assert category_to_json(sp2) == {"builtin": "signed_perm(2)"}
    assert category_from_json("signed_perm(2)") == sp2


def test_custom_category_round_trip() -> None:
    category = StructureCategory(
        "signs",
        (Obj(0), Obj(1)),
        (identity(0), identity(1), Mor.of([[-1]])),
        is_groupoid=True,
        has_sum=False,
    )
    restored = category_from_json(json.loads(json.dumps(category_to_json(category))))
    assert restored.name == "signs"
    assert restored.objects == category.objects
    assert set(restored.morphisms) == set(category.morphisms)
    assert restored.is_groupoid and not restored.has_sum


def test_resolve_category_from_name_or_file(data_dir: Path) -> None:
    assert resolve_category("gl_open(2)").is_open
    assert resolve_category(str(data_dir / "sp2.json")) == signed_perm_category(2)
    with pytest.raises(SchemaError, match="not a builtin category name"):
        resolve_category("no_such_category(3)")


# ---------------------------------------------------------------------------
# Reading documents
# ---------------------------------------------------------------------------


def test_read_rejects_other_schema_versions(tmp_path: Path) -> None:
    path = _write(tmp_path / "old.json", {"schema": "stratk-0", "kind": "space"})
    with pytest.raises(SchemaError, match="unsupported schema version"):
        read_document(path)


def test_read_rejects_unexpected_kind(tmp_path: Path) -> None:
    path = _write(tmp_path / "cat.json", {"schema": SCHEMA_VERSION, "kind": "category", "builtin": "gl_open(1)"})
    with pytest.raises(SchemaError, match="expected a space or stratified_bundle document"):
        read_document(path, ("space", "stratified_bundle"))


def test_read_rejects_non_objects_and_bad_json(tmp_path: Path) -> None:
    with pytest.raises(SchemaError, match="must be a JSON object"):
        read_document(_write(tmp_path / "list.json", [1, 2]))
    broken = tmp_path / "broken.json"
    broken.write_text('{"schema": ', encoding="utf-8")
    with pytest.raises(SchemaError, match="invalid JSON"):
        read_document(broken)
    with pytest.raises(SchemaError, match="cannot read file") as caught:
        read_document(tmp_path / "missing.json")
    assert caught.value.entity == str(tmp_path / "missing.json")


def test_write_report_creates_parent_directories(tmp_path: Path) -> None:
    destination = tmp_path / "out" / "report.json"
    report = stamp("k0", {"presentation": "Z"})
    write_report(report, destination)
    assert destination.read_text(encoding="utf-8") == normalize(report)
