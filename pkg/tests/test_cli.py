"""End-to-end checks of the stratk command line."""
from __future__ import annotations

import json
import os
from pathlib import Path

from stratk.complex import circle
from stratk.io import bundle_to_json, normalize

from .conftest import parse_report, run_stratk
from .fixtures import line_bundle


def _mobius_file(tmp_path: Path) -> Path:
    path = tmp_path / "mobius.json"
    path.write_text(normalize(bundle_to_json(line_bundle(circle(1), -1))), encoding="utf-8")
    return path


def test_validate_category_document(data_dir: Path) -> None:
    result = run_stratk("validate", str(data_dir / "sp2.json"))
    assert result.returncode == 0, result.stderr
    report = parse_report(result.stdout)
    assert report["kind"] == "validation"
    assert report["ok"] is True


def test_assemble_disc_reports_strata_and_euler(data_dir: Path) -> None:
    result = run_stratk("assemble", str(data_dir / "disc.json"))
    assert result.returncode == 0, result.stderr
    report = parse_report(result.stdout)
    assert report["euler"] == 1
    assert report["stratum_counts"] == {"0": [1, 1], "1": [0, 0, 1]}


def test_k0_report_matches_golden(data_dir: Path) -> None:
    result = run_stratk("k0", str(data_dir / "circle.json"), "--category", "signed_perm(1)", "--cap", "2", "--quiet")
    assert result.returncode == 0, result.stderr
    golden_path = Path(__file__).parent / "golden" / "k0_circle_signed_perm1.json"
    golden = json.loads(golden_path.read_text(encoding="utf-8"))
    assert parse_report(result.stdout) == golden


def test_cap_is_read_from_the_environment(data_dir: Path) -> None:
    env = {**os.environ, "STRATK_CAP": "0"}
    result = run_stratk("k0", str(data_dir / "circle.json"), "--category", "signed_perm(1)", env=env)
    assert result.returncode == 0, result.stderr
    report = parse_report(result.stdout)
    assert report["presentation"] == "0"
    assert report["window"] == "within stable window 0"


def test_k0_hom_restricts_disc_classes_to_the_circle(data_dir: Path) -> None:
    result = run_stratk(
        "k0-hom", str(data_dir / "disc.json"), "--category", "signed_perm(1)", "--cap", "1", "--target", "X0"
    )
    assert result.returncode == 0, result.stderr
    report = parse_report(result.stdout)
    assert report["kind"] == "k0_hom"
    assert report["source"] == "Z"
    assert report["target"] == "Z^2"
    assert report["matrix"] == [[1], [0]]
    assert report["ok"] is True


def test_tangent_writes_json_file_and_flatten_refuses_it(data_dir: Path, tmp_path: Path) -> None:
    output = tmp_path / "reports" / "cube_tangent.json"
    result = run_stratk("tangent", str(data_dir / "cube.json"), "--json", str(output))
    assert result.returncode == 0, result.stderr
    assert result.stdout == ""
    document = json.loads(output.read_text(encoding="utf-8"))
    assert document["kind"] == "stratified_bundle"
    assert document["category"] == {"builtin": "surj_open(3)"}
    dims = [sorted(set(document["layer0"]["fiber"].values()))]
    dims += [sorted(set(layer["fiber"].values())) for layer in document["layers"]]
    assert dims == [[0], [1], [2], [3]]

    flattened = run_stratk("flatten", str(output))
    assert flattened.returncode == 1
    assert flattened.stdout == ""


def test_apply_functor_to_a_bundle(tmp_path: Path) -> None:
    result = run_stratk("apply-functor", str(_mobius_file(tmp_path)), "--functor", "dual")
    assert result.returncode == 0, result.stderr
    report = parse_report(result.stdout)
    assert report["kind"] == "bundle"
    assert report["labels"]["e0"]["rows"] == [["-1"]]


def test_check_runs_the_norm_bound_on_bundle_labels(data_dir: Path, tmp_path: Path) -> None:
    mobius = _mobius_file(tmp_path)
    result = run_stratk("check", str(mobius), str(data_dir / "sp2.json"), "--seed", "5")
    assert result.returncode == 0, result.stderr
    report = parse_report(result.stdout)
    subjects = [c["subject"] for c in report["checks"]]
    assert subjects.count(f"{mobius}: norm-bound") == 1
    assert "norm-bound" not in subjects
    assert report["ok"] is True


def test_check_on_a_category_alone_has_no_norm_bound(data_dir: Path) -> None:
    result = run_stratk("check", str(data_dir / "sp2.json"))
    assert result.returncode == 0, result.stderr
    subjects = [c["subject"] for c in parse_report(result.stdout)["checks"]]
    assert not any(s.endswith("norm-bound") for s in subjects)


def test_unknown_functor_is_a_usage_error(tmp_path: Path) -> None:
    result = run_stratk("apply-functor", str(_mobius_file(tmp_path)), "--functor", "exterior")
    assert result.returncode == 2
    assert "unknown functor" in result.stderr


def test_bad_restriction_target_is_a_usage_error(data_dir: Path) -> None:
    result = run_stratk("k0-hom", str(data_dir / "disc.json"), "--category", "signed_perm(1)", "--target", "top")
    assert result.returncode == 2


def test_open_category_cannot_be_enumerated(data_dir: Path) -> None:
    result = run_stratk("k0", str(data_dir / "circle.json"), "--category", "gl_open(1)")
    assert result.returncode == 1
    assert "open" in result.stderr


def test_missing_input_and_wrong_kind(data_dir: Path) -> None:
    missing = run_stratk("validate", str(data_dir / "nowhere.json"))
    assert missing.returncode == 2
    wrong_kind = run_stratk("flatten", str(data_dir / "circle.json"))
    assert wrong_kind.returncode == 2
    assert "expected a stratified_bundle document" in wrong_kind.stderr
