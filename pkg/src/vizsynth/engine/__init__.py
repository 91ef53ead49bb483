from .config import Counters, SynthConfig
from .grammar import GrammarContext
from .lemmas import Lemma, LemmaStore, type_interpolant, violates_lemma, base_type_interpolant, lemmas_from_conflicts, validate_lemma
from .genreq import gen_req
from .search import TablePartial, synthesize_goal_plot, synthesize_goal_table, type_incompatible
from .session import ScoredSpec, SessionResult, VisResult, ablate_goal, synthesize_session, synthesize_vis

__all__ = [
    "Counters", "SynthConfig", "GrammarContext", "Lemma", "LemmaStore",
    "type_interpolant", "violates_lemma", "base_type_interpolant",
    "lemmas_from_conflicts", "validate_lemma", "gen_req", "TablePartial",
    "synthesize_goal_plot", "synthesize_goal_table", "type_incompatible",
    "ScoredSpec", "SessionResult", "VisResult", "ablate_goal",
    "synthesize_session", "synthesize_vis",
]
