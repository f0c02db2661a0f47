"""stratk Typer CLI."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import typer

from .bundle import bundle_invariants, classify_bundles, describe_bundle, validate_bundle
from .complex import assemble, check_stratum_preserving, validate_complex, validate_map
from .errors import SchemaError, StratkError
from .functorial import map_bundle, map_bundle2, map_stratified, map_stratified2
from .io import (
    Document,
    as_stratified,
    bundle_from_json,
    bundle_to_json,
    category_from_json,
    complex_to_json,
    manifold_from_json,
    read_document,
    resolve_category,
    space_from_json,
    stamp,
    stratified_from_json,
    stratified_map_from_json,
    stratified_to_json,
    write_report,
)
from .ktheory import (
    DEFAULT_RANK_CAP,
    check_additivity,
    check_hom,
    describe_k0,
    enumerate_classes,
    grothendieck,
    layer_space,
    pullback_hom,
    restriction_hom,
)
from .lincat import (
    BIFUNCTORS,
    MatrixFunctor,
    StructureCategory,
    ValidationReport,
    determinant_functor,
    dual_functor,
    identity_functor,
    norm_bound_for,
    tensor_by_functor,
    terminal_functor,
    validate_category,
    validate_functor,
)
from .strata import describe_stratified, flatten, pullback_stratified, validate_stratified
from .tangent import build_tangent, check_circle_projection, validate_manifold


@dataclass(frozen=True)
class RunConfig:
    """Runtime settings for a single stratk invocation."""

    cap: int
    category: str
    seed: int
    json_path: Optional[Path]
    quiet: bool


DEFAULT_CATEGORY = "signed_perm(2)"
DEFAULT_SEED = 0
# None writes reports to stdout; logs always go to stderr.
DEFAULT_JSON_PATH: Optional[Path] = None
_TENSOR_BY = re.compile(r"^\s*tensor_by\s*\(\s*(\d+)\s*\)\s*$")

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)

app = typer.Typer(
    add_completion=False,
    help="Stratified vector bundles over matrix structure categories and their K0 groups.",
)


CAP_OPTION = typer.Option(
    DEFAULT_RANK_CAP,
    "--cap",
    envvar="STRATK_CAP",
    min=0,
    help="Per-stratum rank cap for classification and K0 windows.",
    show_default=True,
)
CATEGORY_OPTION = typer.Option(
    DEFAULT_CATEGORY,
    "--category",
    envvar="STRATK_CATEGORY",
    help="Builtin category name (trivial, signed_perm(N), gl_open(N), surj_open(N)) or a category JSON path.",
    show_default=True,
)
SEED_OPTION = typer.Option(
    DEFAULT_SEED,
    "--seed",
    envvar="STRATK_SEED",
    min=0,
    help="Seed for sampled property checks.",
    show_default=True,
)
JSON_OPTION = typer.Option(
    DEFAULT_JSON_PATH,
    "--json",
    help="Path to write the JSON report (defaults to stdout when omitted).",
    show_default=False,
)
QUIET_OPTION = typer.Option(False, "--quiet", help="Only log warnings and errors.")


def _config(cap: int, category: str, seed: int, json_path: Optional[Path], quiet: bool) -> RunConfig:
    config = RunConfig(
        cap=cap,
        category=category,
        seed=seed,
        json_path=json_path.expanduser().resolve() if json_path else None,
        quiet=quiet,
    )
    if quiet:
        logging.getLogger().setLevel(logging.WARNING)
    return config


def _run(config: RunConfig, action: Callable[[], Document]) -> None:
    """Run one verb: usage problems exit 2, library errors and failed checks exit 1."""
    try:
        report = action()
    except SchemaError as error:
        logger.error("Error: %s", error)
        raise typer.Exit(code=2) from error
    except StratkError as error:
        logger.error("Error: %s", error)
        raise typer.Exit(code=1) from error
    write_report(report, config.json_path)
    if report.get("ok") is False:
        raise typer.Exit(code=1)


def _category(config: RunConfig) -> StructureCategory:
    return resolve_category(config.category)


def _functor(name: str, category: StructureCategory) -> MatrixFunctor:
    match = _TENSOR_BY.match(name)
    if match:
        return tensor_by_functor(category, int(match.group(1)))
    builders: Dict[str, Callable[[StructureCategory], MatrixFunctor]] = {
        "identity": identity_functor,
        "dual": dual_functor,
        "determinant": determinant_functor,
        "terminal": terminal_functor,
    }
    if name not in builders:
        raise SchemaError("unknown functor; use identity, dual, determinant, terminal or tensor_by(k)", entity=name)
    return builders[name](category)


def _report(kind: str, reports: List[ValidationReport], **extra: Any) -> Document:
    return stamp(
        kind,
        {"ok": all(r.ok for r in reports), "checks": [r.to_dict() for r in reports], **extra},
    )


# ---------------------------------------------------------------------------
# Validation and the invariant suite
# ---------------------------------------------------------------------------


def _euler_report(document: Document, where: str) -> ValidationReport:
    """χ(X̄ᵢ) = χ(X̄ᵢ₋₁) + χ(M̄ᵢ) − χ(Āᵢ) for every attaching step."""
    space = space_from_json(document, where)
    totals = space.totals()
    issues = []
    for level, layer in enumerate(space.layers, start=1):
        expected = totals[level - 1].euler() + layer.m.euler() - layer.a_complex.euler()
        if totals[level].euler() != expected:
            issues.append(f"layer{level}: euler characteristic {totals[level].euler()} != {expected}")
    return ValidationReport(subject="euler", issues=tuple(issues))


def _document_reports(document: Document, where: str, config: RunConfig, suite: bool) -> List[ValidationReport]:
    kind = document.get("kind")
    if kind == "category":
        category = category_from_json(document, where)
        reports = [validate_category(category)]
        if suite and not category.is_open:
            reports.append(validate_functor(identity_functor(category)))
            if category.has_object(1):
                reports.append(validate_functor(determinant_functor(category)))
        return reports
    if kind in ("space", "complex"):
        space = space_from_json(document, where)
        reports = [validate_complex(space.base0)]
        reports += [validate_map(layer.h) for layer in space.layers]
        reports.append(validate_complex(assemble(space)))
        if suite:
            reports.append(_euler_report(document, where))
        return reports
    if kind == "bundle":
        return [validate_bundle(bundle_from_json(document, where))]
    if kind == "stratified_bundle":
        bundle = stratified_from_json(document, where)
        return [validate_stratified(bundle)]
    if kind == "stratified_map":
        f = stratified_map_from_json(document, where)
        return [validate_map(f.total), check_stratum_preserving(f.tagged())]
    if kind == "polytope":
        reports = [validate_manifold(manifold_from_json(document, where))]
        if suite:
            reports.append(check_circle_projection(seed=config.seed))
        return reports
    raise SchemaError(f"unknown document kind {kind!r}", entity=where)


@app.command(name="validate")
def validate(
    path: Path = typer.Argument(..., exists=True, dir_okay=False, readable=True),
    cap: int = CAP_OPTION,
    category: str = CATEGORY_OPTION,
    seed: int = SEED_OPTION,
    json_path: Optional[Path] = JSON_OPTION,
    quiet: bool = QUIET_OPTION,
) -> None:
    """Validate a category, space, bundle, stratified bundle, map or polytope document."""
    config = _config(cap, category, seed, json_path, quiet)

    def action() -> Document:
        document = read_document(path)
        return _report("validation", _document_reports(document, str(path), config, suite=False), file=str(path))

    _run(config, action)


@app.command(name="check")
def check(
    paths: List[Path] = typer.Argument(..., exists=True, dir_okay=False, readable=True),
    cap: int = CAP_OPTION,
    category: str = CATEGORY_OPTION,
    seed: int = SEED_OPTION,
    json_path: Optional[Path] = JSON_OPTION,
    quiet: bool = QUIET_OPTION,
) -> None:
    """Run the invariant suite on every input document."""
    config = _config(cap, category, seed, json_path, quiet)

    def action() -> Document:
        reports: List[ValidationReport] = []
        for path in paths:
            document = read_document(path)
            reports += _document_reports(document, str(path), config, suite=True)
            if document.get("kind") in ("space", "complex"):
                group = grothendieck(enumerate_classes(space_from_json(document, str(path)), _category(config), config.cap))
                reports.append(check_additivity(group, group.monoid.add_table))
                reports.append(_divisibility_report(group.torsion))
            if document.get("kind") in ("bundle", "stratified_bundle"):
                reports.append(_norm_report(document, str(path), config.seed))
        logger.info("Ran %s checks over %s documents.", len(reports), len(paths))
        return _report("check", reports, files=[str(p) for p in paths])

    _run(config, action)


def _norm_report(document: Document, where: str, seed: int) -> ValidationReport:
    """Norm bound on every label and attaching fiber map of a bundle document."""
    if document["kind"] == "bundle":
        named = {f"layer0:{edge}": label for edge, label in bundle_from_json(document, where).labels}
    else:
        bundle = stratified_from_json(document, where)
        named = {}
        for level in range(bundle.depth):
            named.update({f"layer{level}:{edge}": label for edge, label in bundle.layer_bundle(level).labels})
        for level in range(1, bundle.depth):
            named.update({f"layer{level}:{cell}:attach": f for cell, f in bundle.attach(level).maps.items()})
    issues: List[str] = []
    for name, f in sorted(named.items()):
        if f.src.dim == 0:
            continue
        outcome = norm_bound_for(f, seed=seed)
        issues += [f"{name}: {violation}" for violation in outcome.violations]
    return ValidationReport(subject=f"{where}: norm-bound", issues=tuple(issues))


def _divisibility_report(torsion: tuple) -> ValidationReport:
    issues = [f"Z/{a} does not divide Z/{b}" for a, b in zip(torsion, torsion[1:]) if b % a]
    return ValidationReport(subject="smith-divisibility", issues=tuple(issues))


# ---------------------------------------------------------------------------
# Construction verbs
# ---------------------------------------------------------------------------


@app.command(name="assemble")
def assemble_command(
    path: Path = typer.Argument(..., exists=True, dir_okay=False, readable=True),
    json_path: Optional[Path] = JSON_OPTION,
    quiet: bool = QUIET_OPTION,
) -> None:
    """Glue the layers of a space and emit the stratum-tagged complex."""
    config = _config(DEFAULT_RANK_CAP, DEFAULT_CATEGORY, DEFAULT_SEED, json_path, quiet)

    def action() -> Document:
        space = space_from_json(read_document(path, ("space", "complex")), str(path))
        total = assemble(space)
        counts = {str(level): list(c) for level, c in total.stratum_counts().items()}
        return stamp("assembled", {**complex_to_json(total), "stratum_counts": counts, "euler": total.euler()})

    _run(config, action)


@app.command(name="classify")
def classify(
    path: Path = typer.Argument(..., exists=True, dir_okay=False, readable=True),
    cap: int = CAP_OPTION,
    category: str = CATEGORY_OPTION,
    json_path: Optional[Path] = JSON_OPTION,
    quiet: bool = QUIET_OPTION,
) -> None:
    """List one bundle per gauge class over the assembled complex."""
    config = _config(cap, category, DEFAULT_SEED, json_path, quiet)

    def action() -> Document:
        space = space_from_json(read_document(path, ("space", "complex")), str(path))
        classes = classify_bundles(assemble(space), _category(config), config.cap)
        entries = [{**describe_bundle(b), **bundle_invariants(b)} for b in classes]
        return stamp("classification", {"category": config.category, "cap": config.cap, "count": len(classes), "classes": entries})

    _run(config, action)


def _binary(name: str, left_path: Path, right_path: Path) -> Document:
    bifunctor = BIFUNCTORS[name]
    left = read_document(left_path, ("bundle", "stratified_bundle"))
    right = read_document(right_path, ("bundle", "stratified_bundle"))
    if left["kind"] == right["kind"] == "bundle":
        return bundle_to_json(map_bundle2(bifunctor, bundle_from_json(left, str(left_path)), bundle_from_json(right, str(right_path))))
    result = map_stratified2(bifunctor, as_stratified(left, str(left_path)), as_stratified(right, str(right_path)))
    return stratified_to_json(result)


@app.command(name="sum")
def sum_command(
    left: Path = typer.Argument(..., exists=True, dir_okay=False, readable=True),
    right: Path = typer.Argument(..., exists=True, dir_okay=False, readable=True),
    json_path: Optional[Path] = JSON_OPTION,
    quiet: bool = QUIET_OPTION,
) -> None:
    """Fiberwise direct sum of two bundles over the same base."""
    config = _config(DEFAULT_RANK_CAP, DEFAULT_CATEGORY, DEFAULT_SEED, json_path, quiet)
    _run(config, lambda: _binary("direct_sum", left, right))


@app.command(name="tensor")
def tensor_command(
    left: Path = typer.Argument(..., exists=True, dir_okay=False, readable=True),
    right: Path = typer.Argument(..., exists=True, dir_okay=False, readable=True),
    json_path: Optional[Path] = JSON_OPTION,
    quiet: bool = QUIET_OPTION,
) -> None:
    """Fiberwise tensor product of two bundles over the same base."""
    config = _config(DEFAULT_RANK_CAP, DEFAULT_CATEGORY, DEFAULT_SEED, json_path, quiet)
    _run(config, lambda: _binary("tensor", left, right))


@app.command(name="apply-functor")
def apply_functor_command(
    path: Path = typer.Argument(..., exists=True, dir_okay=False, readable=True),
    functor: str = typer.Option(..., "--functor", "-f", help="identity, dual, determinant, terminal or tensor_by(k)."),
    json_path: Optional[Path] = JSON_OPTION,
    quiet: bool = QUIET_OPTION,
) -> None:
    """Apply a matrix functor to every fiber, label and attaching map."""
    config = _config(DEFAULT_RANK_CAP, DEFAULT_CATEGORY, DEFAULT_SEED, json_path, quiet)

    def action() -> Document:
        document = read_document(path, ("bundle", "stratified_bundle"))
        if document["kind"] == "bundle":
            bundle = bundle_from_json(document, str(path))
            return bundle_to_json(map_bundle(_functor(functor, bundle.category), bundle))
        stratified = stratified_from_json(document, str(path))
        return stratified_to_json(map_stratified(_functor(functor, stratified.category), stratified))

    _run(config, action)


@app.command(name="pullback")
def pullback(
    map_path: Path = typer.Argument(..., exists=True, dir_okay=False, readable=True),
    bundle_path: Path = typer.Argument(..., exists=True, dir_okay=False, readable=True),
    json_path: Optional[Path] = JSON_OPTION,
    quiet: bool = QUIET_OPTION,
) -> None:
    """Pull a stratified bundle back along a stratum-preserving map."""
    config = _config(DEFAULT_RANK_CAP, DEFAULT_CATEGORY, DEFAULT_SEED, json_path, quiet)

    def action() -> Document:
        f = stratified_map_from_json(read_document(map_path, ("stratified_map",)), str(map_path))
        bundle = as_stratified(read_document(bundle_path, ("bundle", "stratified_bundle")), str(bundle_path))
        return stratified_to_json(pullback_stratified(f, bundle))

    _run(config, action)


@app.command(name="flatten")
def flatten_command(
    path: Path = typer.Argument(..., exists=True, dir_okay=False, readable=True),
    json_path: Optional[Path] = JSON_OPTION,
    quiet: bool = QUIET_OPTION,
) -> None:
    """Glue a stratified bundle with invertible attaching maps into one bundle."""
    config = _config(DEFAULT_RANK_CAP, DEFAULT_CATEGORY, DEFAULT_SEED, json_path, quiet)

    def action() -> Document:
        bundle = stratified_from_json(read_document(path, ("stratified_bundle",)), str(path))
        return bundle_to_json(flatten(bundle))

    _run(config, action)


@app.command(name="tangent")
def tangent(
    path: Path = typer.Argument(..., exists=True, dir_okay=False, readable=True),
    json_path: Optional[Path] = JSON_OPTION,
    quiet: bool = QUIET_OPTION,
) -> None:
    """Emit the stratified tangent bundle of a polytopal manifold."""
    config = _config(DEFAULT_RANK_CAP, DEFAULT_CATEGORY, DEFAULT_SEED, json_path, quiet)

    def action() -> Document:
        manifold = manifold_from_json(read_document(path, ("polytope",)), str(path))
        family = build_tangent(manifold)
        summary = describe_stratified(family.bundle)
        logger.info("Tangent fiber dimensions per stratum: %s", summary["stratum_dims"])
        return stratified_to_json(family.bundle)

    _run(config, action)


# ---------------------------------------------------------------------------
# K-theory verbs
# ---------------------------------------------------------------------------


@app.command(name="k0")
def k0(
    path: Path = typer.Argument(..., exists=True, dir_okay=False, readable=True),
    cap: int = CAP_OPTION,
    category: str = CATEGORY_OPTION,
    json_path: Optional[Path] = JSON_OPTION,
    quiet: bool = QUIET_OPTION,
) -> None:
    """Grothendieck group of stratified bundle classes within the rank window."""
    config = _config(cap, category, DEFAULT_SEED, json_path, quiet)

    def action() -> Document:
        space = space_from_json(read_document(path, ("space", "complex")), str(path))
        group = grothendieck(enumerate_classes(space, _category(config), config.cap))
        if group.partial:
            logger.warning("Class table is partial; relations beyond window %s are not asserted.", config.cap)
        return stamp("k0", {"category": config.category, **describe_k0(group)})

    _run(config, action)


@app.command(name="k0-hom")
def k0_hom(
    path: Path = typer.Argument(..., exists=True, dir_okay=False, readable=True),
    target: str = typer.Option("X0", "--target", help="X0 or a layer index for restrictions of a space."),
    cap: int = CAP_OPTION,
    category: str = CATEGORY_OPTION,
    json_path: Optional[Path] = JSON_OPTION,
    quiet: bool = QUIET_OPTION,
) -> None:
    """Restriction matrix of a space, or the pullback matrix of a stratified map."""
    config = _config(cap, category, DEFAULT_SEED, json_path, quiet)

    def action() -> Document:
        document = read_document(path, ("space", "complex", "stratified_map"))
        structure = _category(config)
        if document["kind"] == "stratified_map":
            f = stratified_map_from_json(document, str(path))
            source = grothendieck(enumerate_classes(f.dst, structure, config.cap))
            goal = grothendieck(enumerate_classes(f.src, structure, config.cap))
            hom = pullback_hom(f, source, goal)
        else:
            if target != "X0" and not target.isdigit():
                raise SchemaError("target must be X0 or a layer index", entity=target)
            level = "X0" if target == "X0" else int(target)
            space = space_from_json(document, str(path))
            source = grothendieck(enumerate_classes(space, structure, config.cap))
            index = 0 if level == "X0" else level
            goal = grothendieck(enumerate_classes(layer_space(space, index), structure, config.cap))
            hom = restriction_hom(source, goal, level)
        additivity = check_hom(hom)
        return stamp("k0_hom", {**hom.to_dict(), "ok": additivity.ok, "checks": [additivity.to_dict()], "window": config.cap})

    _run(config, action)


def main() -> None:
    """Entry point for tooling that expects a callable main."""
    app()
