"""Engine configuration."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

ABLATION_MODES = ("base-only", "syn-only", "table-only", "no-lemma")


@dataclass(frozen=True)
class SynthConfig:
    max_depth: int = 4
    max_results: int = 10
    # operators admissible as mutate ops (binary, quantitative arguments)
    mutate_ops: tuple[str, ...] = ("max", "min", "add", "sub")
    # mutate enumeration is opt-in: derived columns square the plot vocabulary
    enable_mutate: bool = False
    filter_constant_cap: int = 8
    bin_counts: tuple[int, ...] = (5, 10)
    interpolant_bound: int = 3
    max_specs: int = 16
    ablation: Optional[str] = None

    def __post_init__(self) -> None:
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.max_results < 1:
            raise ValueError("max_results must be >= 1")
        if self.ablation is not None and self.ablation not in ABLATION_MODES:
            raise ValueError(f"unknown ablation mode {self.ablation!r}")

    @property
    def use_lemmas(self) -> bool:
        return self.ablation != "no-lemma"


@dataclass
class Counters:
    expansions: int = 0
    worklist_insertions: int = 0
    prunes_by_type: int = 0
    prunes_by_lemma: int = 0
    lemmas_learned: int = 0
    solver_calls: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "expansions": self.expansions,
            "worklist_insertions": self.worklist_insertions,
            "prunes_by_type": self.prunes_by_type,
            "prunes_by_lemma": self.prunes_by_lemma,
            "lemmas_learned": self.lemmas_learned,
            "solver_calls": self.solver_calls,
        }
