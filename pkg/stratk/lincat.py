"""Exact rational matrices and finite structure categories.

Objects are canonicalized to one model space per dimension. Morphisms are
immutable ``Mor`` values carrying a tuple-of-tuples of ``Fraction``. Rank,
inverse and determinant go through sympy's ``DomainMatrix`` over QQ.
"""
from __future__ import annotations

import itertools
import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from sympy import Matrix as SymMatrix
from sympy import Rational
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from .errors import ComposabilityError, DomainError, PreconditionError, UnsupportedCategoryError

logger = logging.getLogger(__name__)

Matrix = Tuple[Tuple[Fraction, ...], ...]

NORM_TOLERANCE = 1e-9
_BUILTIN_PATTERN = re.compile(r"^\s*(signed_perm|gl_open|surj_open)\s*\(\s*(\d+)\s*\)\s*$")


def parse_rational(raw: object) -> Fraction:
    """Parse ``"-1/2"``, ``"−3"`` (Unicode minus) or an int into a Fraction."""
    if isinstance(raw, Fraction):
        return raw
    if isinstance(raw, bool):
        raise ValueError(f"not a rational: {raw!r}")
    if isinstance(raw, int):
        return Fraction(raw)
    text = str(raw).strip().replace("−", "-")
    if not text:
        raise ValueError("empty rational literal")
    return Fraction(text)


def format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def as_matrix(rows: Iterable[Iterable[object]]) -> Matrix:
    return tuple(tuple(parse_rational(x) for x in row) for row in rows)


def format_matrix(matrix: Matrix) -> str:
    inner = ",".join("[" + ",".join(format_rational(x) for x in row) + "]" for row in matrix)
    return f"[{inner}]"


@dataclass(frozen=True, order=True)
class Obj:
    """The model vector space of dimension ``dim``."""

    dim: int

    def __post_init__(self) -> None:
        if self.dim < 0:
            raise ValueError(f"object dimension must be >= 0, got {self.dim}")


@dataclass(frozen=True)
class Mor:
    """A matrix morphism ``src -> dst``; ``matrix`` has dst.dim rows."""

    src: Obj
    dst: Obj
    matrix: Matrix

    def __post_init__(self) -> None:
        rows = len(self.matrix)
        if rows != self.dst.dim:
            raise ComposabilityError(
                f"matrix has {rows} rows but target has dimension {self.dst.dim}"
            )
        for row in self.matrix:
            if len(row) != self.src.dim:
                raise ComposabilityError(
                    f"matrix row has {len(row)} entries but source has dimension {self.src.dim}"
                )

    @classmethod
    def of(cls, rows: Iterable[Iterable[object]], src_dim: Optional[int] = None) -> "Mor":
        matrix = as_matrix(rows)
        rows_n = len(matrix)
        cols_n = len(matrix[0]) if matrix else (src_dim or 0)
        if src_dim is not None and matrix and cols_n != src_dim:
            raise ComposabilityError(f"expected {src_dim} columns, got {cols_n}")
        return cls(Obj(cols_n), Obj(rows_n), matrix)

    @property
    def is_square(self) -> bool:
        return self.src.dim == self.dst.dim

    def sort_key(self) -> Tuple[int, int, Matrix]:
        return (self.src.dim, self.dst.dim, self.matrix)

    def __str__(self) -> str:
        return format_matrix(self.matrix) if self.matrix else f"0x{self.src.dim}"


def identity(dim: int) -> Mor:
    rows = tuple(
        tuple(Fraction(1) if i == j else Fraction(0) for j in range(dim)) for i in range(dim)
    )
    return Mor(Obj(dim), Obj(dim), rows)


def zero(dst_dim: int, src_dim: int) -> Mor:
    return Mor(Obj(src_dim), Obj(dst_dim), tuple((Fraction(0),) * src_dim for _ in range(dst_dim)))


def _mat_mul(a: Matrix, b: Matrix, inner: int, cols: int) -> Matrix:
    return tuple(
        tuple(sum((row[k] * b[k][j] for k in range(inner)), Fraction(0)) for j in range(cols))
        for row in a
    )


def compose(g: Mor, f: Mor) -> Mor:
    """Return ``g ∘ f``."""
    if f.dst != g.src:
        raise ComposabilityError(
            f"cannot compose {g} after {f}: {f.dst.dim} != {g.src.dim}"
        )
    return Mor(f.src, g.dst, _mat_mul(g.matrix, f.matrix, f.dst.dim, f.src.dim))


def compose_all(morphisms: Sequence[Mor], dim: int) -> Mor:
    """Compose a path of morphisms applied left to right; identity when empty."""
    result = identity(dim)
    for step in morphisms:
        result = compose(step, result)
    return result


def apply(f: Mor, vector: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    return tuple(sum((row[k] * vector[k] for k in range(f.src.dim)), Fraction(0)) for row in f.matrix)


def transpose(f: Mor) -> Mor:
    rows = tuple(tuple(f.matrix[i][j] for i in range(f.dst.dim)) for j in range(f.src.dim))
    return Mor(f.dst, f.src, rows)


def block_diag(f: Mor, g: Mor) -> Mor:
    rows: List[Tuple[Fraction, ...]] = []
    for row in f.matrix:
        rows.append(tuple(row) + (Fraction(0),) * g.src.dim)
    for row in g.matrix:
        rows.append((Fraction(0),) * f.src.dim + tuple(row))
    return Mor(Obj(f.src.dim + g.src.dim), Obj(f.dst.dim + g.dst.dim), tuple(rows))


def kron(f: Mor, g: Mor) -> Mor:
    rows = tuple(
        tuple(f.matrix[i][j] * g.matrix[k][l] for j in range(f.src.dim) for l in range(g.src.dim))
        for i in range(f.dst.dim)
        for k in range(g.dst.dim)
    )
    return Mor(Obj(f.src.dim * g.src.dim), Obj(f.dst.dim * g.dst.dim), rows)


def scale(f: Mor, factor: Fraction) -> Mor:
    return Mor(f.src, f.dst, tuple(tuple(x * factor for x in row) for row in f.matrix))


def _to_domain(matrix: Matrix, cols: int) -> DomainMatrix:
    sym = SymMatrix(len(matrix), cols, [Rational(x.numerator, x.denominator) for row in matrix for x in row])
    return DomainMatrix.from_Matrix(sym).convert_to(QQ)


def _from_domain(dm: DomainMatrix) -> Matrix:
    sym = dm.to_Matrix()
    return tuple(
        tuple(Fraction(int(sym[i, j].p), int(sym[i, j].q)) for j in range(sym.cols))
        for i in range(sym.rows)
    )


def rank(f: Mor) -> int:
    if f.src.dim == 0 or f.dst.dim == 0:
        return 0
    return int(_to_domain(f.matrix, f.src.dim).rank())


def det(f: Mor) -> Fraction:
    if not f.is_square:
        raise ComposabilityError(f"determinant of non-square morphism {f}")
    if f.src.dim == 0:
        return Fraction(1)
    value = _to_domain(f.matrix, f.src.dim).det()
    sym = QQ.to_sympy(value)
    return Fraction(int(sym.p), int(sym.q))


def is_invertible(f: Mor) -> bool:
    return f.is_square and det(f) != 0


def is_surjective(f: Mor) -> bool:
    return rank(f) == f.dst.dim


def inverse(f: Mor) -> Mor:
    if not is_invertible(f):
        raise PreconditionError(f"morphism {f} is not invertible", entity=str(f))
    if f.src.dim == 0:
        return f
    return Mor(f.dst, f.src, _from_domain(_to_domain(f.matrix, f.src.dim).inv()))


def solve_columns(basis: Mor, targets: Mor) -> Mor:
    """Coordinates ``X`` with ``basis·X = targets``; basis must have full column rank."""
    if basis.dst != targets.dst:
        raise ComposabilityError("basis and targets live in different spaces")
    if rank(basis) != basis.src.dim:
        raise PreconditionError("basis columns are linearly dependent", entity=str(basis))
    if basis.src.dim == 0:
        return zero(0, targets.src.dim)
    gram = compose(transpose(basis), basis)
    coords = compose(inverse(gram), compose(transpose(basis), targets))
    if compose(basis, coords) != targets:
        raise PreconditionError("targets are not in the span of the basis", entity=str(targets))
    return coords


def nullspace(f: Mor) -> List[Tuple[Fraction, ...]]:
    """Basis vectors of the kernel of ``f`` in exact arithmetic."""
    if f.src.dim == 0:
        return []
    if f.dst.dim == 0:
        return [tuple(identity(f.src.dim).matrix[i]) for i in range(f.src.dim)]
    sym = SymMatrix(f.dst.dim, f.src.dim, [Rational(x.numerator, x.denominator) for row in f.matrix for x in row])
    basis = sym.nullspace()
    return [tuple(Fraction(int(v[i].p), int(v[i].q)) for i in range(f.src.dim)) for v in basis]


LinearTerm = Tuple[Mor, Mor]
LinearConstraint = Tuple[Sequence[LinearTerm], Mor]


def solve_matrix_equations(
    constraints: Sequence[LinearConstraint],
    rows: int,
    cols: int,
) -> Optional[Tuple[Mor, List[Mor]]]:
    """Solve ``Σ P·X·Q = C`` for a ``rows × cols`` matrix X.

    Returns a particular solution and a basis of the homogeneous solutions,
    or None when the system is inconsistent.
    """
    size = rows * cols
    if size == 0:
        return zero(rows, cols), []
    equations: List[List[Rational]] = []
    rhs: List[Rational] = []
    for terms, constant in constraints:
        block: Optional[List[List[Fraction]]] = None
        for left, right in terms:
            # vec_row(P·X·Q) = (P ⊗ Q^T)·vec_row(X)
            coefficient = kron(left, transpose(right)).matrix
            if block is None:
                block = [list(r) for r in coefficient]
            else:
                block = [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(block, coefficient)]
        flat_c = [x for row in constant.matrix for x in row]
        for index, row in enumerate(block or []):
            equations.append([Rational(x.numerator, x.denominator) for x in row])
            rhs.append(Rational(flat_c[index].numerator, flat_c[index].denominator))
    if not equations:
        basis = [Mor(Obj(cols), Obj(rows), _unit_matrix(rows, cols, k)) for k in range(size)]
        return zero(rows, cols), basis
    system = SymMatrix(equations)
    target = SymMatrix(len(rhs), 1, rhs)
    try:
        solution, params = system.gauss_jordan_solve(target)
    except ValueError:
        return None
    particular = solution.subs({p: 0 for p in params})
    values = [Fraction(int(particular[k].p), int(particular[k].q)) for k in range(size)]
    base = Mor(Obj(cols), Obj(rows), tuple(tuple(values[i * cols:(i + 1) * cols]) for i in range(rows)))
    basis: List[Mor] = []
    for vector in system.nullspace():
        entries = [Fraction(int(vector[k].p), int(vector[k].q)) for k in range(size)]
        basis.append(Mor(Obj(cols), Obj(rows), tuple(tuple(entries[i * cols:(i + 1) * cols]) for i in range(rows))))
    return base, basis


def _unit_matrix(rows: int, cols: int, position: int) -> Matrix:
    return tuple(
        tuple(Fraction(1) if i * cols + j == position else Fraction(0) for j in range(cols))
        for i in range(rows)
    )


def first_invertible(
    particular: Mor,
    basis: Sequence[Mor],
    det_sign: Optional[int] = None,
    budget: int = 5**6,
) -> Optional[Mor]:
    """Search small integer combinations of ``basis`` added to ``particular``.

    Coefficients range over 0, 1, -1, 2, -2; candidates with a determinant of
    the wrong sign are skipped when ``det_sign`` is given.
    """
    if not particular.is_square:
        return None
    coefficients = (0, 1, -1, 2, -2)
    tried = 0
    for combo in itertools.product(coefficients, repeat=len(basis)):
        tried += 1
        if tried > budget:
            logger.warning("Invertible-solution search stopped after %s candidates.", budget)
            return None
        candidate = particular
        for c, direction in zip(combo, basis):
            if c:
                candidate = Mor(
                    candidate.src,
                    candidate.dst,
                    tuple(
                        tuple(x + c * y for x, y in zip(r1, r2))
                        for r1, r2 in zip(candidate.matrix, direction.matrix)
                    ),
                )
        value = det(candidate)
        if value == 0:
            continue
        if det_sign is not None and (value > 0) != (det_sign > 0):
            continue
        return candidate
    return None


def signed_permutations(dim: int) -> List[Mor]:
    """All signed permutation matrices of size ``dim`` in a deterministic order."""
    result: List[Mor] = []
    for perm in itertools.permutations(range(dim)):
        for signs in itertools.product((1, -1), repeat=dim):
            rows = tuple(
                tuple(Fraction(signs[i]) if perm[i] == j else Fraction(0) for j in range(dim))
                for i in range(dim)
            )
            result.append(Mor(Obj(dim), Obj(dim), rows))
    return sorted(result, key=Mor.sort_key)


# ---------------------------------------------------------------------------
# Structure categories
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a validation pass; ``issues`` is empty when valid."""

    subject: str
    issues: Tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.issues

    def to_dict(self) -> Dict[str, object]:
        return {"subject": self.subject, "ok": self.ok, "issues": list(self.issues)}


# Property checks report the same shape: a subject and the offending entries.
BoolReport = ValidationReport


@dataclass(frozen=True)
class StructureCategory:
    """A subcategory of Vect over QQ.

    Finite categories list their morphisms. Open categories (``member`` set)
    test membership with a predicate up to ``max_dim`` and cannot be
    enumerated; classification refuses them.
    """

    name: str
    objects: Tuple[Obj, ...]
    morphisms: Tuple[Mor, ...] = ()
    is_groupoid: bool = False
    has_sum: bool = False
    has_tensor: bool = False
    member: Optional[Callable[[Mor], bool]] = field(default=None, compare=False, repr=False)

    @property
    def is_open(self) -> bool:
        return self.member is not None

    @property
    def max_dim(self) -> int:
        return max((o.dim for o in self.objects), default=0)

    def has_object(self, dim: int) -> bool:
        return Obj(dim) in self.objects

    def contains(self, f: Mor) -> bool:
        if f.src not in self.objects or f.dst not in self.objects:
            return False
        if self.member is not None:
            return self.member(f)
        return f in self._morphism_set()

    def _morphism_set(self) -> frozenset:
        cached = self.__dict__.get("_mset")
        if cached is None:
            cached = frozenset(self.morphisms)
            object.__setattr__(self, "_mset", cached)
        return cached

    def hom(self, src: int, dst: int) -> List[Mor]:
        if self.is_open:
            raise UnsupportedCategoryError(
                f"open category {self.name} cannot enumerate hom({src},{dst})", entity=self.name
            )
        return [m for m in self.morphisms if m.src.dim == src and m.dst.dim == dst]

    def automorphisms(self, dim: int) -> List[Mor]:
        return [m for m in self.hom(dim, dim) if is_invertible(m)]

    def require_finite(self) -> None:
        if self.is_open:
            raise UnsupportedCategoryError(
                f"category {self.name} is open; exhaustive classification is unsupported",
                entity=self.name,
            )


def trivial_category() -> StructureCategory:
    return StructureCategory(
        name="trivial",
        objects=(Obj(0),),
        morphisms=(identity(0),),
        is_groupoid=True,
        has_sum=True,
        has_tensor=True,
    )


def signed_perm_category(n: int) -> StructureCategory:
    """Signed permutation matrices of every size 0..n."""
    morphisms: List[Mor] = []
    for dim in range(n + 1):
        morphisms.extend(signed_permutations(dim))
    return StructureCategory(
        name=f"signed_perm({n})",
        objects=tuple(Obj(d) for d in range(n + 1)),
        morphisms=tuple(morphisms),
        is_groupoid=True,
        has_sum=True,
        has_tensor=True,
    )


def gl_open_category(n: int) -> StructureCategory:
    return StructureCategory(
        name=f"gl_open({n})",
        objects=tuple(Obj(d) for d in range(n + 1)),
        is_groupoid=True,
        has_sum=True,
        has_tensor=True,
        member=is_invertible,
    )


def surj_open_category(n: int) -> StructureCategory:
    """Surjective rational maps; the structure category of tangent families."""
    return StructureCategory(
        name=f"surj_open({n})",
        objects=tuple(Obj(d) for d in range(n + 1)),
        is_groupoid=False,
        has_sum=True,
        has_tensor=True,
        member=is_surjective,
    )


def builtin_category(name: str) -> StructureCategory:
    """Resolve ``trivial``, ``signed_perm(N)``, ``gl_open(N)`` or ``surj_open(N)``."""
    if name.strip() == "trivial":
        return trivial_category()
    match = _BUILTIN_PATTERN.match(name)
    if not match:
        raise ValueError(f"unknown builtin category '{name}'")
    family, raw_n = match.group(1), int(match.group(2))
    if family == "signed_perm":
        return signed_perm_category(raw_n)
    if family == "gl_open":
        return gl_open_category(raw_n)
    return surj_open_category(raw_n)


def is_builtin_name(name: str) -> bool:
    return name.strip() == "trivial" or bool(_BUILTIN_PATTERN.match(name))


def validate_category(category: StructureCategory) -> ValidationReport:
    """Brute-force closure check of a finite category.

    Sum and tensor closure are required only where the result dimension is
    an object of the category.
    """
    if category.is_open:
        return ValidationReport(subject=category.name)
    issues: List[str] = []
    listed = category._morphism_set()
    for m in category.morphisms:
        if m.src not in category.objects or m.dst not in category.objects:
            issues.append(f"morphism {m} uses an object outside the category")
    for obj in category.objects:
        if identity(obj.dim) not in listed:
            issues.append(f"missing identity on dimension {obj.dim}")
    for g, f in itertools.product(category.morphisms, repeat=2):
        if f.dst != g.src:
            continue
        gf = compose(g, f)
        if gf not in listed:
            issues.append(f"missing composite {gf} = {g}·{f}")
    if category.is_groupoid:
        for m in category.morphisms:
            if not is_invertible(m) or inverse(m) not in listed:
                issues.append(f"missing inverse of {m}")
    if category.has_sum:
        for f, g in itertools.product(category.morphisms, repeat=2):
            if not category.has_object(f.dst.dim + g.dst.dim) or not category.has_object(f.src.dim + g.src.dim):
                continue
            if block_diag(f, g) not in listed:
                issues.append(f"missing block sum {block_diag(f, g)} = {f}(+){g}")
    if category.has_tensor:
        for f, g in itertools.product(category.morphisms, repeat=2):
            if not category.has_object(f.dst.dim * g.dst.dim) or not category.has_object(f.src.dim * g.src.dim):
                continue
            if kron(f, g) not in listed:
                issues.append(f"missing tensor {kron(f, g)} = {f}(x){g}")
    unique = tuple(dict.fromkeys(issues))
    if unique:
        logger.info("Category %s has %s closure issues.", category.name, len(unique))
    return ValidationReport(subject=category.name, issues=unique)


# ---------------------------------------------------------------------------
# Functors and bifunctors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MatrixFunctor:
    """A functor ``source -> target`` given by a closed-form rule or a lookup table."""

    name: str
    source: StructureCategory
    target: StructureCategory
    obj_rule: Callable[[int], int] = field(compare=False, repr=False)
    mor_rule: Callable[[Mor], Mor] = field(compare=False, repr=False)
    table: Optional[Dict[Mor, Mor]] = field(default=None, compare=False, repr=False)

    def obj(self, dim: int) -> int:
        return self.obj_rule(dim)


def apply_functor(functor: MatrixFunctor, f: Mor) -> Mor:
    if not functor.source.contains(f):
        raise DomainError(f"{f} is not in the domain of functor {functor.name}", entity=str(f))
    if functor.table is not None:
        if f not in functor.table:
            raise DomainError(f"functor table {functor.name} has no entry for {f}", entity=str(f))
        return functor.table[f]
    return functor.mor_rule(f)


def validate_functor(functor: MatrixFunctor) -> ValidationReport:
    """Check identities, composition and target membership exhaustively."""
    issues: List[str] = []
    source = functor.source
    if source.is_open:
        return ValidationReport(subject=functor.name)
    for obj in source.objects:
        image = apply_functor(functor, identity(obj.dim))
        if image != identity(functor.obj(obj.dim)):
            issues.append(f"F(id_{obj.dim}) = {image} is not an identity")
    for m in source.morphisms:
        image = apply_functor(functor, m)
        if image.src.dim != functor.obj(m.src.dim) or image.dst.dim != functor.obj(m.dst.dim):
            issues.append(f"F({m}) has the wrong shape")
        elif not functor.target.contains(image):
            issues.append(f"F({m}) = {image} is outside {functor.target.name}")
    for g, f in itertools.product(source.morphisms, repeat=2):
        if f.dst != g.src:
            continue
        lhs = apply_functor(functor, compose(g, f))
        rhs = compose(apply_functor(functor, g), apply_functor(functor, f))
        if lhs != rhs:
            issues.append(f"F({g}·{f}) != F({g})·F({f})")
    return ValidationReport(subject=functor.name, issues=tuple(dict.fromkeys(issues)))


def identity_functor(category: StructureCategory) -> MatrixFunctor:
    return MatrixFunctor("identity", category, category, lambda d: d, lambda f: f)


def dual_functor(category: StructureCategory) -> MatrixFunctor:
    """V -> V*, f -> (f^T)^-1; defined on invertible morphisms."""

    def rule(f: Mor) -> Mor:
        if not is_invertible(f):
            raise DomainError(f"dual functor needs an invertible morphism, got {f}", entity=str(f))
        return inverse(transpose(f))

    return MatrixFunctor("dual", category, category, lambda d: d, rule)


def determinant_functor(category: StructureCategory, target: Optional[StructureCategory] = None) -> MatrixFunctor:
    """Top exterior power: dimension d goes to the line, f to det(f)."""

    def rule(f: Mor) -> Mor:
        if not f.is_square:
            raise DomainError(f"determinant functor needs a square morphism, got {f}", entity=str(f))
        if f.src.dim == 0:
            return identity(1)
        return Mor(Obj(1), Obj(1), ((det(f),),))

    return MatrixFunctor(
        "determinant",
        category,
        target or category,
        lambda d: 1,
        rule,
    )


def tensor_by_functor(category: StructureCategory, k: int, target: Optional[StructureCategory] = None) -> MatrixFunctor:
    """``- ⊗ R^k``: Kronecker product with the identity on dimension k."""
    id_k = identity(k)
    return MatrixFunctor(
        f"tensor_by({k})",
        category,
        target or category,
        lambda d: d * k,
        lambda f: kron(f, id_k),
    )


def terminal_functor(category: StructureCategory) -> MatrixFunctor:
    """Everything to R^0 in the trivial category."""
    return MatrixFunctor("trivial", category, trivial_category(), lambda d: 0, lambda f: identity(0))


def table_functor(
    name: str,
    source: StructureCategory,
    target: StructureCategory,
    obj_map: Dict[int, int],
    table: Dict[Mor, Mor],
) -> MatrixFunctor:
    def obj_rule(dim: int) -> int:
        if dim not in obj_map:
            raise DomainError(f"functor table {name} has no object entry for {dim}", entity=str(dim))
        return obj_map[dim]

    def mor_rule(f: Mor) -> Mor:
        raise DomainError(f"functor table {name} has no entry for {f}", entity=str(f))

    return MatrixFunctor(name, source, target, obj_rule, mor_rule, table=dict(table))


@dataclass(frozen=True)
class MatrixBifunctor:
    name: str
    obj_rule: Callable[[int, int], int] = field(compare=False, repr=False)
    mor_rule: Callable[[Mor, Mor], Mor] = field(compare=False, repr=False)

    def obj(self, a: int, b: int) -> int:
        return self.obj_rule(a, b)

    def __call__(self, f: Mor, g: Mor) -> Mor:
        return self.mor_rule(f, g)


def _hom_rule(f: Mor, g: Mor) -> Mor:
    # vec_row(g·φ·f^-1) = (g ⊗ (f^-1)^T)·vec_row(φ)
    if not is_invertible(f):
        raise DomainError(f"hom bifunctor needs an invertible first argument, got {f}", entity=str(f))
    return kron(g, transpose(inverse(f)))


DIRECT_SUM = MatrixBifunctor("direct_sum", lambda a, b: a + b, block_diag)
TENSOR = MatrixBifunctor("tensor", lambda a, b: a * b, kron)
HOM = MatrixBifunctor("hom", lambda a, b: a * b, _hom_rule)

BIFUNCTORS: Dict[str, MatrixBifunctor] = {b.name: b for b in (DIRECT_SUM, TENSOR, HOM)}


def validate_bifunctor(bifunctor: MatrixBifunctor, left: StructureCategory, right: StructureCategory) -> ValidationReport:
    """Identities and componentwise composition on the finite morphism sets."""
    issues: List[str] = []
    for a, b in itertools.product(left.objects, right.objects):
        image = bifunctor(identity(a.dim), identity(b.dim))
        if image != identity(bifunctor.obj(a.dim, b.dim)):
            issues.append(f"{bifunctor.name}(id_{a.dim}, id_{b.dim}) is not an identity")
    pairs_l = [(g, f) for g, f in itertools.product(left.morphisms, repeat=2) if f.dst == g.src]
    pairs_r = [(g, f) for g, f in itertools.product(right.morphisms, repeat=2) if f.dst == g.src]
    for (g, f), (g2, f2) in itertools.product(pairs_l, pairs_r):
        lhs = bifunctor(compose(g, f), compose(g2, f2))
        rhs = compose(bifunctor(g, g2), bifunctor(f, f2))
        if lhs != rhs:
            issues.append(f"{bifunctor.name} breaks interchange at ({g}·{f}, {g2}·{f2})")
    return ValidationReport(subject=bifunctor.name, issues=tuple(dict.fromkeys(issues)))


# ---------------------------------------------------------------------------
# Norm bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormBoundReport:
    holds: bool
    samples: int
    max_ratio: float
    bound: float
    violations: Tuple[str, ...] = ()

    def to_dict(self) -> Dict[str, object]:
        return {
            "holds": self.holds,
            "samples": self.samples,
            "max_ratio": self.max_ratio,
            "bound": self.bound,
            "violations": list(self.violations),
        }


def _sq_norm(vector: Sequence[Fraction]) -> Fraction:
    return sum((x * x for x in vector), Fraction(0))


def operator_norm(f: Mor, iterations: int = 500, seed: int = 0) -> float:
    """Largest singular value by power iteration on f^T f in float64."""
    if f.src.dim == 0 or f.dst.dim == 0:
        return 0.0
    dense = np.array([[float(x) for x in row] for row in f.matrix], dtype=float)
    gram = dense.T @ dense
    rng = np.random.default_rng(seed)
    vec = rng.standard_normal(f.src.dim)
    vec /= np.linalg.norm(vec)
    estimate = 0.0
    for _ in range(iterations):
        nxt = gram @ vec
        length = float(np.linalg.norm(nxt))
        if length == 0.0:
            return 0.0
        vec = nxt / length
        if abs(length - estimate) <= NORM_TOLERANCE * max(1.0, length):
            estimate = length
            break
        estimate = length
    return math.sqrt(estimate)


def _random_rational_vectors(dim: int, count: int, seed: int) -> Iterator[Tuple[Fraction, ...]]:
    rng = np.random.default_rng(seed)
    produced = 0
    while produced < count:
        nums = rng.integers(-9, 10, size=dim)
        dens = rng.integers(1, 8, size=dim)
        vector = tuple(Fraction(int(n), int(d)) for n, d in zip(nums, dens))
        if any(vector):
            produced += 1
            yield vector


def norm_bound_check(beta: Mor, bound_r: Fraction, f: Mor, samples: int = 100, seed: int = 0) -> NormBoundReport:
    """Check |f(x)| <= sqrt(d)·R·|beta^-1|·|x| on the basis and seeded samples.

    Squared norms of images and inputs are exact; only |beta^-1| is a float
    estimate, compared with tolerance ``NORM_TOLERANCE``.
    """
    if not is_invertible(beta):
        raise PreconditionError("basis matrix is singular", entity=str(beta))
    d = beta.src.dim
    if f.src.dim != d:
        raise ComposabilityError(f"map has source dimension {f.src.dim}, basis has {d}")
    r = parse_rational(bound_r)
    columns = [tuple(beta.matrix[i][j] for i in range(d)) for j in range(d)]
    for index, column in enumerate(columns):
        if _sq_norm(apply(f, column)) > r * r:
            raise PreconditionError(f"|f(b_{index})| exceeds R = {r}", entity=f"b_{index}")
    inv_norm = operator_norm(inverse(beta), seed=seed)
    bound = math.sqrt(d) * float(r) * inv_norm
    bound_sq = d * float(r * r) * inv_norm * inv_norm
    violations: List[str] = []
    max_ratio = 0.0
    checked = 0
    vectors: Iterable[Tuple[Fraction, ...]] = itertools.chain(columns, _random_rational_vectors(d, samples, seed))
    for vector in vectors:
        checked += 1
        image_sq = _sq_norm(apply(f, vector))
        input_sq = _sq_norm(vector)
        if input_sq == 0:
            continue
        ratio_sq = float(image_sq / input_sq)
        max_ratio = max(max_ratio, math.sqrt(ratio_sq))
        if ratio_sq > bound_sq * (1 + NORM_TOLERANCE) + NORM_TOLERANCE:
            violations.append(f"sample {checked - 1}: ratio {math.sqrt(ratio_sq):.12g} > {bound:.12g}")
    if violations:
        logger.warning("Norm bound violated on %s samples.", len(violations))
    return NormBoundReport(
        holds=not violations,
        samples=checked,
        max_ratio=max_ratio,
        bound=bound,
        violations=tuple(violations),
    )


def seeded_basis(dim: int, seed: int = 0) -> Mor:
    """Unit upper-triangular basis matrix with small seeded entries above the diagonal."""
    rng = np.random.default_rng(seed)
    rows = [
        [Fraction(1) if i == j else Fraction(int(rng.integers(-2, 3))) if j > i else Fraction(0) for j in range(dim)]
        for i in range(dim)
    ]
    return Mor(Obj(dim), Obj(dim), tuple(tuple(row) for row in rows))


def norm_bound_for(f: Mor, samples: int = 100, seed: int = 0) -> NormBoundReport:
    """Run ``norm_bound_check`` on a seeded basis with R the largest L1 norm of f(b_j)."""
    beta = seeded_basis(f.src.dim, seed)
    image = compose(f, beta)
    columns = [sum((abs(image.matrix[i][j]) for i in range(f.dst.dim)), Fraction(0)) for j in range(f.src.dim)]
    return norm_bound_check(beta, max(columns, default=Fraction(0)), f, samples=samples, seed=seed)


__all__ = [
    "BIFUNCTORS",
    "BoolReport",
    "DIRECT_SUM",
    "HOM",
    "Matrix",
    "MatrixBifunctor",
    "MatrixFunctor",
    "Mor",
    "NORM_TOLERANCE",
    "NormBoundReport",
    "Obj",
    "StructureCategory",
    "TENSOR",
    "ValidationReport",
    "apply",
    "apply_functor",
    "as_matrix",
    "block_diag",
    "builtin_category",
    "compose",
    "compose_all",
    "det",
    "determinant_functor",
    "dual_functor",
    "format_matrix",
    "first_invertible",
    "format_rational",
    "gl_open_category",
    "identity",
    "identity_functor",
    "inverse",
    "is_builtin_name",
    "is_invertible",
    "is_surjective",
    "kron",
    "norm_bound_check",
    "norm_bound_for",
    "nullspace",
    "operator_norm",
    "parse_rational",
    "rank",
    "scale",
    "seeded_basis",
    "signed_perm_category",
    "solve_matrix_equations",
    "signed_permutations",
    "solve_columns",
    "surj_open_category",
    "table_functor",
    "tensor_by_functor",
    "terminal_functor",
    "transpose",
    "trivial_category",
    "validate_bifunctor",
    "validate_category",
    "validate_functor",
    "zero",
]
