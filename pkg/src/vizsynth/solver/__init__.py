from .formulas import (
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
    UApp,
    UConst,
    UVar,
    fand,
    for_,
    lin,
    neg,
)
from .decide import check_sat, eliminate, is_sat, is_valid_implication
from .encode import EncodeEnv, decode_atom, encode
from .interpolate import craig_interpolant

__all__ = [
    "FAnd",
    "FFalse",
    "FOr",
    "FTrue",
    "Formula",
    "FragmentError",
    "LinAtom",
    "ObjEq",
    "PropLit",
    "SatResult",
    "UApp",
    "UConst",
    "UVar",
    "fand",
    "for_",
    "lin",
    "neg",
    "check_sat",
    "eliminate",
    "is_sat",
    "is_valid_implication",
    "EncodeEnv",
    "decode_atom",
    "encode",
    "craig_interpolant",
]
