"""Template-based Craig interpolation for the conjunctive fragment.

Candidates are conjunctions of atomic predicates over symbols common to both
input formulas, instantiated with constants drawn from the inputs, and
enumerated by increasing size. Every returned interpolant is re-checked
against all three Craig conditions before being handed back.
"""

from __future__ import annotations

import itertools
from typing import Optional

from .decide import check_sat, is_valid_implication
from .formulas import (
    Formula,
    PropLit,
    SatResult,
    UApp,
    constants_of,
    fand,
    int_vars_of,
    lin,
    prop_vars_of,
)

DEFAULT_MAX_CONJUNCTS = 3


def _candidate_atoms(a: Formula, b: Formula) -> list[Formula]:
    shared_props = sorted(prop_vars_of(a) & prop_vars_of(b))
    shared_ints = sorted(int_vars_of(a) & int_vars_of(b))
    consts = sorted(constants_of(a) | constants_of(b))
    atoms: list[Formula] = []
    for p in shared_props:
        atoms.append(PropLit(p, True))
        atoms.append(PropLit(p, False))
    for v in shared_ints:
        for c in consts:
            for op in ("<=", ">=", "="):
                atoms.append(lin({v: 1}, op, c))
    for v1, v2 in itertools.combinations(shared_ints, 2):
        for op in ("<=", ">=", "="):
            atoms.append(lin({v1: 1, v2: -1}, op, 0))
    return atoms


_CANDIDATE_BUDGET = 20000


def craig_interpolant(
    a: Formula,
    b: Formula,
    app_vars: Optional[dict[UApp, int]] = None,
    max_conjuncts: int = DEFAULT_MAX_CONJUNCTS,
) -> Optional[Formula]:
    """Find I with a => I valid, I & b unsat, symbols(I) shared by a and b.

    Returns None when no template instance works within the size bound (or
    within the deterministic candidate budget).
    """
    if check_sat(fand(a, b), app_vars) != SatResult.UNSAT:
        raise ValueError("craig_interpolant requires a & b to be unsatisfiable")
    atoms = _candidate_atoms(a, b)
    tried = 0
    for size in range(1, max_conjuncts + 1):
        for combo in itertools.combinations(atoms, size):
            tried += 1
            if tried > _CANDIDATE_BUDGET:
                return None
            cand = fand(*combo)
            if not is_valid_implication(a, cand, app_vars):
                continue
            if check_sat(fand(cand, b), app_vars) != SatResult.UNSAT:
                continue
            _assert_craig(a, b, cand, app_vars)
            return cand
    return None


def _assert_craig(
    a: Formula, b: Formula, i: Formula, app_vars: Optional[dict[UApp, int]]
) -> None:
    if not is_valid_implication(a, i, app_vars):
        raise AssertionError("interpolant not implied by A")
    if check_sat(fand(i, b), app_vars) != SatResult.UNSAT:
        raise AssertionError("interpolant consistent with B")
    a_syms = prop_vars_of(a) | int_vars_of(a)
    b_syms = prop_vars_of(b) | int_vars_of(b)
    i_syms = prop_vars_of(i) | int_vars_of(i)
    if not i_syms <= (a_syms & b_syms):
        raise AssertionError("interpolant mentions non-shared symbols")
