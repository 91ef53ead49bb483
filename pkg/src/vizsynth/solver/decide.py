"""Decision procedures: satisfiability, implication validity, and variable
elimination for the solver fragment.

Branching is plain DPLL-style expansion over disjunctions. Each conjunctive
branch is decided by (1) propositional conflict detection, (2) congruence
closure over uninterpreted-term equalities, which merges the integer
variables of congruent applications, and (3) Fourier-Motzkin elimination
over the remaining linear atoms. The engine only emits difference/bound
atoms with unit coefficients, where rational and integer satisfiability
coincide; anything else is reported Unknown.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Optional

from .formulas import (
    Atom,
    FAnd,
    FFalse,
    FOr,
    FTrue,
    Formula,
    FragmentError,
    LinAtom,
    ObjEq,
    PropLit,
    SatResult,
    TRUE_F,
    UApp,
    UTerm,
    fand,
    for_,
    lin,
    neg,
)

# A linear constraint in <= form: (coeffs dict, bound)
Constraint = tuple[dict[int, int], int]

_COMBINATION_CAP = 4000


def _to_le(atom: LinAtom) -> list[Constraint]:
    coeffs = dict(atom.coeffs)
    if atom.op == "<=":
        return [(coeffs, atom.const)]
    if atom.op == ">=":
        return [({v: -c for v, c in coeffs.items()}, -atom.const)]
    return [
        (dict(coeffs), atom.const),
        ({v: -c for v, c in coeffs.items()}, -atom.const),
    ]


def _unit_coeffs(cs: Iterable[Constraint]) -> bool:
    return all(abs(c) <= 1 for coeffs, _ in cs for c in coeffs.values())


def fm_project(
    constraints: list[Constraint], drop: set[int]
) -> Optional[list[Constraint]]:
    """Eliminate `drop` variables; None when the fragment is exceeded.

    With unit coefficients every combination stays a difference/bound
    constraint with integer bounds, so no integrality tightening is needed.
    """
    if not _unit_coeffs(constraints):
        return None
    work = [({v: c for v, c in coeffs.items() if c != 0}, b) for coeffs, b in constraints]
    for v in sorted(drop):
        uppers, lowers, rest = [], [], []
        for coeffs, b in work:
            c = coeffs.get(v, 0)
            if c == 0:
                rest.append((coeffs, b))
            elif c > 0:
                uppers.append((coeffs, b))
            else:
                lowers.append((coeffs, b))
        if len(uppers) * len(lowers) > _COMBINATION_CAP:
            return None
        for (cu, bu), (cl, bl) in itertools.product(uppers, lowers):
            combined: dict[int, int] = {}
            for k, c in cu.items():
                if k != v:
                    combined[k] = combined.get(k, 0) + c
            for k, c in cl.items():
                if k != v:
                    combined[k] = combined.get(k, 0) + c
            combined = {k: c for k, c in combined.items() if c != 0}
            if any(abs(c) > 1 for c in combined.values()):
                return None
            rest.append((combined, bu + bl))
        work = _dedupe(rest)
    return work


def _dedupe(cs: list[Constraint]) -> list[Constraint]:
    best: dict[tuple[tuple[int, int], ...], int] = {}
    for coeffs, b in cs:
        key = tuple(sorted(coeffs.items()))
        if key not in best or b < best[key]:
            best[key] = b
    return [(dict(k), b) for k, b in sorted(best.items())]


def _conflicting(cs: list[Constraint]) -> bool:
    return any(not coeffs and b < 0 for coeffs, b in cs)


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[UTerm, UTerm] = {}

    def find(self, t: UTerm) -> UTerm:
        self.parent.setdefault(t, t)
        while self.parent[t] != t:
            self.parent[t] = self.parent[self.parent[t]]
            t = self.parent[t]
        return t

    def union(self, a: UTerm, b: UTerm) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def _all_subterms(t: UTerm) -> Iterator[UTerm]:
    yield t
    if isinstance(t, UApp):
        for a in t.args:
            yield from _all_subterms(a)


def _congruence_merge(
    eqs: list[ObjEq], app_vars: dict[UApp, int]
) -> Optional[list[Constraint]]:
    """Close equalities under congruence; return equalities between the
    integer variables of congruent applications, or None on a disequality
    conflict."""
    uf = _UnionFind()
    terms: set[UTerm] = set()
    for e in eqs:
        terms.update(_all_subterms(e.lhs))
        terms.update(_all_subterms(e.rhs))
    for t in app_vars:
        terms.update(_all_subterms(t))
    for e in eqs:
        if e.positive:
            uf.union(e.lhs, e.rhs)
    apps = [t for t in terms if isinstance(t, UApp)]
    changed = True
    while changed:
        changed = False
        for a, b in itertools.combinations(apps, 2):
            if uf.find(a) == uf.find(b):
                continue
            if a.fn == b.fn and len(a.args) == len(b.args):
                if all(uf.find(x) == uf.find(y) for x, y in zip(a.args, b.args)):
                    uf.union(a, b)
                    changed = True
    for e in eqs:
        if not e.positive and uf.find(e.lhs) == uf.find(e.rhs):
            return None
    extra: list[Constraint] = []
    by_class: dict[UTerm, list[int]] = {}
    for app, var in app_vars.items():
        by_class.setdefault(uf.find(app), []).append(var)
    for members in by_class.values():
        members.sort()
        for other in members[1:]:
            extra.append(({members[0]: 1, other: -1}, 0))
            extra.append(({members[0]: -1, other: 1}, 0))
    return extra


def _branches(f: Formula) -> Iterator[list[Atom]]:
    """Enumerate conjunctive branches of an NNF formula lazily, left to
    right, so satisfiable formulas short-circuit on their first branch."""
    if isinstance(f, FTrue):
        yield []
        return
    if isinstance(f, FFalse):
        return
    if isinstance(f, (PropLit, LinAtom, ObjEq)):
        yield [f]
        return
    if isinstance(f, FOr):
        for arg in f.args:
            yield from _branches(arg)
        return
    if isinstance(f, FAnd):

        def go(i: int, acc: list[Atom]) -> Iterator[list[Atom]]:
            if i == len(f.args):
                yield list(acc)
                return
            for part in _branches(f.args[i]):
                yield from go(i + 1, acc + part)

        yield from go(0, [])
        return
    raise TypeError(f)


def _decide_branch(
    atoms: list[Atom], app_vars: Optional[dict[UApp, int]] = None
) -> SatResult:
    props: dict[int, bool] = {}
    eqs: list[ObjEq] = []
    linear: list[Constraint] = []
    for a in atoms:
        if isinstance(a, PropLit):
            if props.get(a.var, a.positive) != a.positive:
                return SatResult.UNSAT
            props[a.var] = a.positive
        elif isinstance(a, ObjEq):
            eqs.append(a)
        else:
            linear.extend(_to_le(a))
    if eqs or app_vars:
        extra = _congruence_merge(eqs, app_vars or {})
        if extra is None:
            return SatResult.UNSAT
        linear.extend(extra)
    vars_ = {v for coeffs, _ in linear for v in coeffs}
    projected = fm_project(linear, vars_)
    if projected is None:
        return SatResult.UNKNOWN
    return SatResult.UNSAT if _conflicting(projected) else SatResult.SAT


def check_sat(f: Formula, app_vars: Optional[dict[UApp, int]] = None) -> SatResult:
    saw_unknown = False
    for branch in _branches(f):
        r = _decide_branch(branch, app_vars)
        if r == SatResult.SAT:
            return SatResult.SAT
        if r == SatResult.UNKNOWN:
            saw_unknown = True
    return SatResult.UNKNOWN if saw_unknown else SatResult.UNSAT


def is_sat(f: Formula, app_vars: Optional[dict[UApp, int]] = None) -> bool:
    """Satisfiability with the pruning-safe policy: Unknown counts as SAT."""
    return check_sat(f, app_vars) != SatResult.UNSAT


def is_valid_implication(
    a: Formula, b: Formula, app_vars: Optional[dict[UApp, int]] = None
) -> bool:
    """a => b; Unknown propagates as not-valid (never accept unsoundly)."""
    return check_sat(fand(a, neg(b)), app_vars) == SatResult.UNSAT


def eliminate(f: Formula, int_vars: set[int], prop_vars: set[int]) -> Formula:
    """Project out variables: Shannon expansion for propositional variables
    (on conjunctions this just drops their literals) and Fourier-Motzkin for
    integer variables. The result is entailed by f and mentions none of the
    given variables."""
    branches = list(_branches(f))
    out: list[Formula] = []
    for branch in branches:
        keep_atoms: list[Formula] = []
        linear: list[Constraint] = []
        props: dict[int, bool] = {}
        conflict = False
        for a in branch:
            if isinstance(a, PropLit):
                if props.get(a.var, a.positive) != a.positive:
                    conflict = True
                    break
                props[a.var] = a.positive
                if a.var not in prop_vars:
                    keep_atoms.append(a)
            elif isinstance(a, ObjEq):
                keep_atoms.append(a)
            else:
                linear.extend(_to_le(a))
        if conflict:
            continue
        projected = fm_project(linear, int_vars & {v for c, _ in linear for v in c})
        if projected is None:
            raise FragmentError("nonlinear or non-unit coefficients in eliminate()")
        if _conflicting(projected):
            continue
        for coeffs, b in projected:
            keep_atoms.append(lin(coeffs, "<=", b))
        out.append(fand(*_dedupe_formulas(keep_atoms)))
    return for_(*out)


def _dedupe_formulas(fs: list[Formula]) -> list[Formula]:
    seen: set[Formula] = set()
    out: list[Formula] = []
    for f in fs:
        if f not in seen:
            seen.add(f)
            out.append(f)
    return out
