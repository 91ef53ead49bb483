"""Encoding of refinement-type qualifiers into the solver formula language.

Syntactic constraints become propositional variables; cardinality, max and
min observations become canonicalized uninterpreted applications, each with
a dedicated integer variable; column sets, filter operators and values are
interned so that the same source term always maps to the same solver symbol
({c1, c2} and {c2, c1} share one constant).
"""

from __future__ import annotations

from typing import Optional, Union

from ..types import (
    AggTerm,
    Card,
    IntLit,
    NumTerm,
    NumVar,
    Pi,
    Provenance,
    QAnd,
    QCmp,
    QFalse,
    QNot,
    QOr,
    QTrue,
    Qualifier,
    SourceRef,
    TFilter,
    TProj,
    TVar,
    TableTerm,
)
from .formulas import (
    FALSE_F,
    Formula,
    TRUE_F,
    UApp,
    UConst,
    UTerm,
    UVar,
    fand,
    for_,
    lin,
    neg,
    PropLit,
)

PiKey = tuple[str, str, tuple]


def _pi_key(p: Pi) -> PiKey:
    prov = p.prov
    if isinstance(prov, SourceRef):
        return (p.var, p.attr, ("src", prov.var, prov.col))
    return (p.var, p.attr, ("op", prov))


class EncodeEnv:
    """Interning environment threaded through encode calls."""

    def __init__(self) -> None:
        self._next = 0
        self.prop_by_pi: dict[PiKey, int] = {}
        self.pi_by_prop: dict[int, Pi] = {}
        self.tablevar_by_name: dict[str, int] = {}
        self.numvar_by_name: dict[str, int] = {}
        self.name_by_numvar: dict[int, str] = {}
        self.obj_by_key: dict[tuple, int] = {}
        self.fn_by_op: dict[str, str] = {}
        self.intvar_by_app: dict[UApp, int] = {}
        self.term_by_intvar: dict[int, NumTerm] = {}

    def _fresh(self) -> int:
        self._next += 1
        return self._next

    def prop(self, p: Pi) -> int:
        key = _pi_key(p)
        if key not in self.prop_by_pi:
            v = self._fresh()
            self.prop_by_pi[key] = v
            self.pi_by_prop[v] = p
        return self.prop_by_pi[key]

    def table_var(self, name: str) -> int:
        if name not in self.tablevar_by_name:
            self.tablevar_by_name[name] = self._fresh()
        return self.tablevar_by_name[name]

    def num_var(self, name: str) -> int:
        if name not in self.numvar_by_name:
            v = self._fresh()
            self.numvar_by_name[name] = v
            self.name_by_numvar[v] = name
        return self.numvar_by_name[name]

    def obj(self, key: tuple) -> int:
        if key not in self.obj_by_key:
            self.obj_by_key[key] = self._fresh()
        return self.obj_by_key[key]

    def filter_fn(self, op: str) -> str:
        if op not in self.fn_by_op:
            self.fn_by_op[op] = f"op{len(self.fn_by_op)}"
        return self.fn_by_op[op]

    def int_var(self, app: UApp, term: NumTerm) -> int:
        if app not in self.intvar_by_app:
            v = self._fresh()
            self.intvar_by_app[app] = v
            self.term_by_intvar[v] = term
        return self.intvar_by_app[app]

    def app_vars(self) -> dict[UApp, int]:
        return self.intvar_by_app


def encode_table_term(t: TableTerm, env: EncodeEnv) -> UTerm:
    if isinstance(t, TVar):
        return UVar(env.table_var(t.name))
    if isinstance(t, TProj):
        base = encode_table_term(t.table, env)
        return UApp("proj", (base, UConst(env.obj(("colset", t.cols)))))
    if isinstance(t, TFilter):
        base = encode_table_term(t.table, env)
        pred = UApp(
            env.filter_fn(t.op),
            (UConst(env.obj(("col", t.col))), UConst(env.obj(("val", t.value)))),
        )
        return UApp("filter", (base, pred))
    raise TypeError(t)


def _encode_num(t: NumTerm, env: EncodeEnv) -> tuple[dict[int, int], int]:
    """Return (coeffs, constant) with the term's value = sum(coeffs) + const."""
    if isinstance(t, IntLit):
        return {}, t.value
    if isinstance(t, NumVar):
        return {env.num_var(t.name): 1}, 0
    if isinstance(t, Card):
        app = UApp("card", (encode_table_term(t.table, env),))
        return {env.int_var(app, t): 1}, 0
    if isinstance(t, AggTerm):
        app = UApp(t.fn, (encode_table_term(t.table, env),))
        return {env.int_var(app, t): 1}, 0
    raise TypeError(t)


def encode(q: Qualifier, env: Optional[EncodeEnv] = None) -> tuple[Formula, EncodeEnv]:
    """Encode a qualifier, threading and returning the environment."""
    env = env if env is not None else EncodeEnv()

    def enc(f: Qualifier) -> Formula:
        if isinstance(f, QTrue):
            return TRUE_F
        if isinstance(f, QFalse):
            return FALSE_F
        if isinstance(f, Pi):
            return PropLit(env.prop(f), True)
        if isinstance(f, QCmp):
            lc, lk = _encode_num(f.lhs, env)
            rc, rk = _encode_num(f.rhs, env)
            coeffs = dict(lc)
            for v, c in rc.items():
                coeffs[v] = coeffs.get(v, 0) - c
            return lin(coeffs, f.op, rk - lk)
        if isinstance(f, QNot):
            return neg(enc(f.arg))
        if isinstance(f, QAnd):
            return fand(*(enc(a) for a in f.args))
        if isinstance(f, QOr):
            return for_(*(enc(a) for a in f.args))
        raise TypeError(f)

    return enc(q), env


def decode_atom(
    f: Formula, env: EncodeEnv
) -> Optional[Qualifier]:
    """Map a solver literal back into the qualifier fragment, or None when it
    is not expressible there (e.g. offsets between two terms)."""
    from ..types import QCmp as TQCmp, QNot as TQNot

    if isinstance(f, PropLit):
        pi = env.pi_by_prop.get(f.var)
        if pi is None:
            return None
        return pi if f.positive else TQNot(pi)
    from .formulas import LinAtom

    if isinstance(f, LinAtom):
        def term_of(v: int) -> Optional[NumTerm]:
            if v in env.term_by_intvar:
                return env.term_by_intvar[v]
            if v in env.name_by_numvar:
                return NumVar(env.name_by_numvar[v])
            return None

        coeffs = dict(f.coeffs)
        if len(coeffs) == 1:
            (v, c), = coeffs.items()
            t = term_of(v)
            if t is None:
                return None
            if c == 1:
                return TQCmp(t, f.op, IntLit(f.const))
            if c == -1:
                flip = {"<=": ">=", ">=": "<=", "=": "="}[f.op]
                return TQCmp(t, flip, IntLit(-f.const))
            return None
        if len(coeffs) == 2 and f.const == 0:
            (v1, c1), (v2, c2) = sorted(coeffs.items())
            if {c1, c2} == {1, -1}:
                pos, nege = (v1, v2) if c1 == 1 else (v2, v1)
                t1, t2 = term_of(pos), term_of(nege)
                if t1 is None or t2 is None:
                    return None
                return TQCmp(t1, f.op, t2)
        return None
    return None
