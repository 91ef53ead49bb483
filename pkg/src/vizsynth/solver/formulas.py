"""Solver-internal formula language: NNF trees over propositional atoms,
linear integer atoms, and equalities of uninterpreted terms.

Cardinality / max / min observations are uninterpreted applications; each
canonical application owns a dedicated integer variable, so linear atoms are
pure-integer. Negation exists only at the leaves (integer negations are
rewritten away using integrality).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Union


# Uninterpreted (object-sorted) terms
@dataclass(frozen=True)
class UVar:
    id: int


@dataclass(frozen=True)
class UConst:
    id: int


@dataclass(frozen=True)
class UApp:
    fn: str
    args: tuple["UTerm", ...]


UTerm = Union[UVar, UConst, UApp]


@dataclass(frozen=True)
class PropLit:
    var: int
    positive: bool = True


@dataclass(frozen=True)
class LinAtom:
    """sum(coef * x) op const, over integer variables; coeffs sorted by id."""

    coeffs: tuple[tuple[int, int], ...]
    op: str  # '<=', '>=', '='
    const: int


@dataclass(frozen=True)
class ObjEq:
    lhs: UTerm
    rhs: UTerm
    positive: bool = True


@dataclass(frozen=True)
class FTrue:
    pass


@dataclass(frozen=True)
class FFalse:
    pass


@dataclass(frozen=True)
class FAnd:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class FOr:
    args: tuple["Formula", ...]


Atom = Union[PropLit, LinAtom, ObjEq]
Formula = Union[FTrue, FFalse, FAnd, FOr, Atom]

TRUE_F = FTrue()
FALSE_F = FFalse()


def lin(coeffs: dict[int, int], op: str, const: int) -> Formula:
    """Build a linear atom, folding away trivially decided ones."""
    items = tuple(sorted((v, c) for v, c in coeffs.items() if c != 0))
    if not items:
        ok = {"<=": 0 <= const, ">=": 0 >= const, "=": 0 == const}[op]
        return TRUE_F if ok else FALSE_F
    return LinAtom(items, op, const)


def fand(*fs: Formula) -> Formula:
    flat: list[Formula] = []
    for f in fs:
        if isinstance(f, FTrue):
            continue
        if isinstance(f, FFalse):
            return FALSE_F
        if isinstance(f, FAnd):
            flat.extend(f.args)
        else:
            flat.append(f)
    if not flat:
        return TRUE_F
    if len(flat) == 1:
        return flat[0]
    return FAnd(tuple(flat))


def for_(*fs: Formula) -> Formula:
    flat: list[Formula] = []
    for f in fs:
        if isinstance(f, FFalse):
            continue
        if isinstance(f, FTrue):
            return TRUE_F
        if isinstance(f, FOr):
            flat.extend(f.args)
        else:
            flat.append(f)
    if not flat:
        return FALSE_F
    if len(flat) == 1:
        return flat[0]
    return FOr(tuple(flat))


def neg(f: Formula) -> Formula:
    """Negate into NNF; negated integer atoms use integer complements."""
    if isinstance(f, FTrue):
        return FALSE_F
    if isinstance(f, FFalse):
        return TRUE_F
    if isinstance(f, PropLit):
        return PropLit(f.var, not f.positive)
    if isinstance(f, ObjEq):
        return ObjEq(f.lhs, f.rhs, not f.positive)
    if isinstance(f, LinAtom):
        coeffs = dict(f.coeffs)
        if f.op == "<=":
            return lin(coeffs, ">=", f.const + 1)
        if f.op == ">=":
            return lin(coeffs, "<=", f.const - 1)
        return for_(lin(coeffs, "<=", f.const - 1), lin(coeffs, ">=", f.const + 1))
    if isinstance(f, FAnd):
        return for_(*(neg(a) for a in f.args))
    if isinstance(f, FOr):
        return fand(*(neg(a) for a in f.args))
    raise TypeError(f)


def atoms_of(f: Formula) -> Iterator[Atom]:
    if isinstance(f, (FTrue, FFalse)):
        return
    if isinstance(f, (FAnd, FOr)):
        for a in f.args:
            yield from atoms_of(a)
        return
    yield f


def int_vars_of(f: Formula) -> set[int]:
    out: set[int] = set()
    for a in atoms_of(f):
        if isinstance(a, LinAtom):
            out.update(v for v, _ in a.coeffs)
    return out


def prop_vars_of(f: Formula) -> set[int]:
    return {a.var for a in atoms_of(f) if isinstance(a, PropLit)}


def constants_of(f: Formula) -> set[int]:
    return {a.const for a in atoms_of(f) if isinstance(a, LinAtom)}


class SatResult(Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


class FragmentError(Exception):
    """Raised when a formula leaves the supported decidable fragment."""
