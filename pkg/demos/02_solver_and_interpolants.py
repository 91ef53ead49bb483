"""The in-tree decision procedures: encoding qualifiers, satisfiability by
congruence closure + Fourier-Motzkin, the forget operator, and
template-based Craig interpolation.

Run from the repository root:  python demos/02_solver_and_interpolants.py
"""

from vizsynth.engine import gen_req, type_interpolant
from vizsynth.rules import forget
from vizsynth.solver import EncodeEnv, SatResult, check_sat, encode, fand
from vizsynth.types import (
    ColumnType,
    IntLit,
    Pi,
    QCmp,
    QNot,
    Scalar,
    format_qualifier,
    normalized_qualifier_str,
    proj,
    qand,
    table_base,
    SELF_VAR,
)

D, C, QL, QT = (
    ColumnType.DISCRETE,
    ColumnType.CONTINUOUS,
    ColumnType.QUALITATIVE,
    ColumnType.QUANTITATIVE,
)

print("== satisfiability over cardinality terms ==")
a = proj(SELF_VAR, ["colA"])
b = proj(SELF_VAR, ["colB"])
conflict = qand(QCmp(a, "<=", b), QCmp(b, "<=", IntLit(20)), QCmp(a, "=", IntLit(30)))
env = EncodeEnv()
f, env = encode(conflict, env)
print(f"  {format_qualifier(conflict)}")
print(f"  -> {check_sat(f, env.app_vars()).value}")

print("\n== forgetting a term is Fourier-Motzkin elimination ==")
q = qand(QCmp(a, "<=", b), QCmp(a, "=", IntLit(30)))
print(f"  forget |Proj(v,{{colA}})| in  {format_qualifier(q)}")
print(f"  = {format_qualifier(forget(q, {a}))}")

print("\n== forgetting a syntactic atom drops its literal ==")
target = Pi(SELF_VAR, "ctgt", "mean")
q2 = qand(QCmp(a, "=", IntLit(30)), QNot(target), Pi(SELF_VAR, "c2", "count"))
print(f"  {format_qualifier(q2)}  minus pi(v.ctgt, mean)")
print(f"  = {format_qualifier(forget(q2, {target}))}")

print("\n== type interpolants generalize a conflict ==")
i = type_interpolant(
    Scalar(table_base({"colA": D, "colB": QL, "colC": C})),
    Scalar(table_base({"colA": QL, "colB": QL, "colC": C})),
)
print(f"  base conflict on colA  ->  {i!r}")

i2 = type_interpolant(
    Scalar(table_base({"colA": D, "colB": D}),
           qand(QCmp(a, "<=", b), QCmp(b, "<=", IntLit(20)))),
    Scalar(table_base({"colA": D}), QCmp(a, "=", IntLit(30))),
)
print(f"  qualifier conflict     ->  {format_qualifier(i2.qual)}")

print("\n== GenReq: what any bounded program must have used ==")
r = gen_req(table_base({"colA": QL}), table_base({"colA": C}), 2)
print(f"  Qualitative -> Continuous within depth 2 requires:")
print(f"  {normalized_qualifier_str(r.qual)}")
