"""Subtyping, compatibility, and intersection of refinement types.

Subtyping of qualifiers is an implication validity query; compatibility is a
satisfiability query on the conjunction (two types are compatible iff they
admit a common subtype). Unknown solver verdicts are resolved in the
direction that never prunes and never accepts unsoundly: compatibility
treats Unknown as satisfiable, subtyping treats it as not-valid.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Optional

from .solver import EncodeEnv, SatResult, check_sat, encode, fand, is_valid_implication
from .types import (
    BaseType,
    ColumnType,
    Func,
    PlotType,
    Qualifier,
    RefinementType,
    Scalar,
    SELF_VAR,
    TableType,
    TypeEnv,
    column_compatible,
    column_meet,
    column_subtype,
    qand,
    rename_var,
)


def base_subtype(b1: BaseType, b2: BaseType) -> bool:
    if isinstance(b1, TableType) and isinstance(b2, TableType):
        for col, want in b2.schema:
            have = b1.get(col)
            if have is None or not column_subtype(have, want):
                return False
        return True
    return b1 == b2


def base_compatible(b1: BaseType, b2: BaseType) -> bool:
    if isinstance(b1, TableType) and isinstance(b2, TableType):
        for col, t1 in b1.schema:
            t2 = b2.get(col)
            if t2 is not None and not column_compatible(t1, t2):
                return False
        return True
    return b1 == b2


def base_intersect(b1: BaseType, b2: BaseType) -> Optional[BaseType]:
    if base_subtype(b1, b2):
        return b1
    if base_subtype(b2, b1):
        return b2
    if isinstance(b1, TableType) and isinstance(b2, TableType):
        schema: dict[str, ColumnType] = {}
        for col, t1 in b1.schema:
            t2 = b2.get(col)
            if t2 is None:
                schema[col] = t1
            else:
                m = column_meet(t1, t2)
                if m is None:
                    return None
                schema[col] = m
        for col, t2 in b2.schema:
            schema.setdefault(col, t2)
        return TableType(tuple(sorted(schema.items())))
    return None


def _encode_env_qualifiers(env: TypeEnv, enc: EncodeEnv):
    """Conjoin the qualifiers of all scalar bindings, with the self-variable
    renamed to the bound variable."""
    parts = []
    for name, r in env.items():
        if isinstance(r, Scalar):
            f, _ = encode(rename_var(r.qual, SELF_VAR, name), enc)
            parts.append(f)
    return fand(*parts)


@lru_cache(maxsize=65536)
def _subtype_cached(env: TypeEnv, r1: RefinementType, r2: RefinementType) -> bool:
    if isinstance(r1, Func) and isinstance(r2, Func):
        return _subtype_cached(env, r2.input, r1.input) and _subtype_cached(
            env, r1.output, r2.output
        )
    if isinstance(r1, Scalar) and isinstance(r2, Scalar):
        if not base_subtype(r1.base, r2.base):
            return False
        enc = EncodeEnv()
        ctx = _encode_env_qualifiers(env, enc)
        f1, _ = encode(r1.qual, enc)
        f2, _ = encode(r2.qual, enc)
        return is_valid_implication(fand(ctx, f1), f2, enc.app_vars())
    return False


def is_subtype(env: TypeEnv, r1: RefinementType, r2: RefinementType) -> bool:
    return _subtype_cached(env, r1, r2)


@lru_cache(maxsize=65536)
def _compatible_cached(env: TypeEnv, r1: RefinementType, r2: RefinementType) -> bool:
    if isinstance(r1, Func) and isinstance(r2, Func):
        return _compatible_cached(env, r1.input, r2.input) and _compatible_cached(
            env, r1.output, r2.output
        )
    if isinstance(r1, Scalar) and isinstance(r2, Scalar):
        if not base_compatible(r1.base, r2.base):
            return False
        enc = EncodeEnv()
        ctx = _encode_env_qualifiers(env, enc)
        f1, _ = encode(r1.qual, enc)
        f2, _ = encode(r2.qual, enc)
        return check_sat(fand(ctx, f1, f2), enc.app_vars()) != SatResult.UNSAT
    return False


def is_compatible(env: TypeEnv, r1: RefinementType, r2: RefinementType) -> bool:
    return _compatible_cached(env, r1, r2)


def intersect(env: TypeEnv, r1: RefinementType, r2: RefinementType) -> RefinementType:
    """Greatest common refinement of two compatible types."""
    if not is_compatible(env, r1, r2):
        raise ValueError("cannot intersect incompatible types")
    assert isinstance(r1, Scalar) and isinstance(r2, Scalar)
    base = base_intersect(r1.base, r2.base)
    if base is None:
        raise ValueError("cannot intersect incompatible base types")
    return Scalar(base, qand(r1.qual, r2.qual))
