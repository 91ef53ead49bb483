"""Requirement generation for lemmas: the syntactic constraints every
program of bounded depth from a source table type to something compatible
with a destination table type must satisfy.

Operators are abstracted to column-type transformers: count takes any
column to Discrete, mean/sum take a quantitative column to Continuous, and
bin takes a quantitative column to Discrete. Projection-like operators never
change column types, so they cannot contribute to (or evade) a requirement.
"""

from __future__ import annotations

from functools import lru_cache

from ..relations import base_compatible
from ..types import (
    ColumnType,
    Pi,
    QFalse,
    Qualifier,
    Scalar,
    SELF_VAR,
    TableType,
    column_subtype,
    qand,
    qor,
    FALSE,
)

# op -> (admissible input upper bound, output column type)
_COLUMN_OPS: tuple[tuple[str, ColumnType, ColumnType], ...] = (
    ("bin", ColumnType.QUANTITATIVE, ColumnType.DISCRETE),
    ("count", ColumnType.TOP, ColumnType.DISCRETE),
    ("mean", ColumnType.QUANTITATIVE, ColumnType.CONTINUOUS),
    ("sum", ColumnType.QUANTITATIVE, ColumnType.CONTINUOUS),
)


def _transitions(src: TableType) -> list[tuple[str, str, TableType]]:
    """All (op, target column, resulting schema) single steps from src."""
    out = []
    for op, admissible, result in _COLUMN_OPS:
        for col, ctype in src.schema:
            if admissible != ColumnType.TOP and not column_subtype(ctype, admissible):
                continue
            out.append((op, col, src.with_column(col, result)))
    return out


def _op_atom_family(op: str, over: TableType) -> Qualifier:
    """'op could have derived any column of the given schema'."""
    return qor(*(Pi(SELF_VAR, c, op) for c in over.columns()))


@lru_cache(maxsize=4096)
def gen_req(src: TableType, dst: TableType, k: int) -> Scalar:
    """Requirement type {v: dst | req}: every program of depth <= k taking
    src to a type compatible with dst has an output type compatible with it.
    """
    if k < 1:
        raise ValueError("gen_req needs k >= 1")
    base_families = []
    seen = set()
    for op, col, result in _transitions(src):
        if base_compatible(result, dst) and op not in seen:
            seen.add(op)
            base_families.append(_op_atom_family(op, dst))
    req1: Qualifier = qor(*base_families) if base_families else FALSE
    if k == 1:
        return Scalar(dst, req1)
    disjuncts: list[Qualifier] = []
    seen_d = set()
    for op, col, mid in _transitions(src):
        sub = gen_req(mid, dst, k - 1)
        if isinstance(sub.qual, QFalse):
            continue
        d = qand(_op_atom_family(op, mid), sub.qual)
        if d not in seen_d:
            seen_d.add(d)
            disjuncts.append(d)
    req2: Qualifier = qor(*disjuncts) if disjuncts else FALSE
    return Scalar(dst, qor(req1, req2))
