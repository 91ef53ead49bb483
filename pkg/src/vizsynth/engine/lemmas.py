"""Synthesis lemmas: reusable (guard, requirement) facts learned from type
conflicts, with refinement-type interpolants as guards.

A lemma (G, R) for an input table D promises: any type below G that is
inhabited by the output of a bounded-depth program over D is compatible
with R. A hole whose goal type sits below G but is incompatible with R can
therefore be pruned without search.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from ..relations import base_compatible, is_compatible, is_subtype
from ..solver import EncodeEnv, encode, craig_interpolant
from ..types import (
    ColumnType,
    EMPTY_ENV,
    Qualifier,
    RefinementType,
    Scalar,
    TableType,
    TypeEnv,
    column_ancestors,
    column_compatible,
    qand,
    FALSE,
    TRUE,
)
from ..rules import _decode_formula  # shared literal decoder
from .config import SynthConfig
from .genreq import gen_req


@dataclass(frozen=True)
class Lemma:
    guard: Scalar
    requirement: Scalar


class LemmaStore:
    """Per-dataset lemma set; order of insertion is preserved."""

    def __init__(self) -> None:
        self.lemmas: list[Lemma] = []
        self._seen: set[Lemma] = set()

    def add(self, lemma: Lemma) -> bool:
        if lemma in self._seen:
            return False
        self._seen.add(lemma)
        self.lemmas.append(lemma)
        return True

    def __len__(self) -> int:
        return len(self.lemmas)

    def __iter__(self):
        return iter(self.lemmas)


def base_type_interpolant(b1: TableType, b2: TableType) -> Optional[TableType]:
    """Single-conflict-column generalization: keep the most general
    supertype of b1's column type that is still incompatible with b2's."""
    conflicts = []
    for col, t1 in b1.schema:
        t2 = b2.get(col)
        if t2 is not None and not column_compatible(t1, t2):
            conflicts.append((col, t1, t2))
    if not conflicts:
        return None
    col, t1, t2 = conflicts[0]
    best = t1
    for anc in column_ancestors(t1):
        if not column_compatible(anc, t2):
            best = anc
        else:
            break
    return TableType(((col, best),))


from functools import lru_cache


@lru_cache(maxsize=16384)
def _type_interpolant_cached(r1: Scalar, r2: Scalar, env: TypeEnv) -> Optional[Scalar]:
    return _type_interpolant(r1, r2, env)


def type_interpolant(
    r1: Scalar, r2: Scalar, env: TypeEnv = EMPTY_ENV
) -> Optional[Scalar]:
    return _type_interpolant_cached(r1, r2, env)


def _type_interpolant(r1: Scalar, r2: Scalar, env: TypeEnv) -> Optional[Scalar]:
    """Generalized cause of the incompatibility of r1 and r2, with r1 on the
    subtype side: r1 <: I and I is incompatible with r2."""
    if is_compatible(env, r1, r2):
        raise ValueError("type_interpolant requires incompatible inputs")
    if not base_compatible(r1.base, r2.base):
        if isinstance(r1.base, TableType) and isinstance(r2.base, TableType):
            base = base_type_interpolant(r1.base, r2.base)
            if base is None:
                return None
            return Scalar(base, TRUE)
        return Scalar(r1.base, TRUE)
    enc = EncodeEnv()
    f1, _ = encode(r1.qual, enc)
    f2, _ = encode(r2.qual, enc)
    try:
        interpolant = craig_interpolant(f1, f2, enc.app_vars())
    except ValueError:
        return None
    if interpolant is None:
        return None
    return Scalar(r1.base, _decode_formula(interpolant, enc))


def lemmas_from_conflicts(
    conflicts: Iterable[tuple[Scalar, Scalar]],
    input_base: TableType,
    cfg: SynthConfig,
) -> list[Lemma]:
    """Build (interpolant guard, GenReq requirement) lemmas from
    (goal, actual) type conflicts at complete nodes."""
    out: list[Lemma] = []
    for goal, actual in conflicts:
        try:
            guard = type_interpolant(goal, actual)
        except ValueError:
            continue
        if guard is None or not isinstance(guard.base, TableType):
            continue
        requirement = gen_req(input_base, guard.base, cfg.max_depth)
        out.append(Lemma(guard, requirement))
    return out


def violates_lemma(hole_goals: Iterable[Scalar], store: LemmaStore) -> bool:
    """True iff some hole goal activates a lemma guard but is incompatible
    with its requirement; such a partial program has no useful completion."""
    for goal in hole_goals:
        for lemma in store:
            if is_subtype(EMPTY_ENV, goal, lemma.guard) and not is_compatible(
                EMPTY_ENV, goal, lemma.requirement
            ):
                return True
    return False


def validate_lemma(
    lemma: Lemma,
    inhabited_types: Iterable[Scalar],
) -> bool:
    """Check the lemma's semantic contract against a sample of types known
    to be inhabited by program outputs over the lemma's dataset."""
    for r in inhabited_types:
        if is_subtype(EMPTY_ENV, r, lemma.guard) and not is_compatible(
            EMPTY_ENV, r, lemma.requirement
        ):
            return False
    return True
