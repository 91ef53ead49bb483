"""Deterministic keyword parser: a stand-in that maps a natural-language
query plus the dataset to a ranked distribution of refinement-type
specifications, scored by the product of intent and slot confidences.

Keyword lexicons decide intents; slots are filled by fuzzy matching query
tokens against column names (normalized edit distance). Aggregation intents
without a keyword get a data-informed prior: a grouped query over a
quantitative measure column usually needs aggregation for the plot to be
well-formed, so the mean intent is boosted above its negation in that case.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from typing import Optional

from .engine.session import ScoredSpec
from .tables import Table
from .types import (
    ColumnType,
    Pi,
    PlotKind,
    PlotType,
    QNot,
    Qualifier,
    Scalar,
    SourceRef,
    column_subtype,
    qand,
    table_base,
    SELF_VAR,
    INPUT_VAR,
    TRUE,
)

PLOT_KEYWORDS = {
    PlotKind.BAR: ("bar", "bars", "histogram"),
    PlotKind.SCATTER: ("scatter", "point", "points"),
    PlotKind.LINE: ("line", "trend", "over time"),
    PlotKind.AREA: ("area",),
}

MEAN_KEYWORDS = ("average", "mean", "avg")
SUM_KEYWORDS = ("total", "sum")
COUNT_KEYWORDS = ("number of", "count", "how many")
COLOR_KEYWORDS = ("colored by", "colored", "color by", "colour")
GROUP_KEYWORDS = ("segregated", "grouped", "group by", "split by", "separated", "facet")

SIMILARITY_THRESHOLD = 0.55
MAX_SPECS = 16
TOP_SLOT_CANDIDATES = 2

# Priors when no keyword decides an intent.
KIND_PRIORS = {
    PlotKind.BAR: 0.40,
    PlotKind.SCATTER: 0.25,
    PlotKind.LINE: 0.20,
    PlotKind.AREA: 0.15,
}
KEYWORD_CONFIDENCE = 0.9
AGG_DEFAULT_PRIOR = 0.15
MEAN_EVIDENCE_PRIOR = 0.6  # grouped query over a quantitative measure


@dataclass
class IntentPrediction:
    """One property's prediction: a decision with its confidence and, for
    positive slot-bearing intents, ranked column candidates."""

    name: str
    decision: object
    confidence: float
    slots: list[tuple[str, float]] = field(default_factory=list)


def _levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def similarity(a: str, b: str) -> float:
    a, b = a.lower(), b.lower()
    if not a or not b:
        return 0.0
    return 1.0 - _levenshtein(a, b) / max(len(a), len(b))


def _tokens(query: str) -> list[str]:
    return [t for t in re.split(r"[^a-z0-9]+", query.lower()) if t]


def _column_words(col: str) -> list[str]:
    parts = re.split(r"[_\s]+", col)
    words: list[str] = []
    for p in parts:
        words.extend(w.lower() for w in re.findall(r"[A-Za-z][a-z0-9]*|[0-9]+", p))
    return words or [col.lower()]


def column_match_score(query: str, col: str) -> float:
    """Mean, over the column-name words, of the best similarity against any
    query token; multiword columns therefore need every word mentioned."""
    toks = _tokens(query)
    if not toks:
        return 0.0
    scores = []
    for w in _column_words(col):
        scores.append(max(similarity(w, t) for t in toks))
    return sum(scores) / len(scores)


def _mentions(query: str, t: Table) -> list[tuple[str, float]]:
    scored = [(c, column_match_score(query, c)) for c in t.column_names()]
    ranked = [(c, s) for c, s in scored if s >= SIMILARITY_THRESHOLD]
    ranked.sort(key=lambda p: (-p[1], p[0]))
    return ranked


def _contains_any(query: str, keywords: tuple[str, ...]) -> bool:
    q = query.lower()
    return any(re.search(rf"\b{re.escape(k)}\b", q) for k in keywords)


def predict_intents(query: str, t: Table) -> dict[str, IntentPrediction]:
    """Deterministic intent and slot predictions for the six properties."""
    mentions = _mentions(query, t)
    quantitative = [
        (c, s)
        for c, s in mentions
        if column_subtype(t.column_type(c), ColumnType.QUANTITATIVE)
    ]

    out: dict[str, IntentPrediction] = {}
    kind_hit = None
    for kind, kws in PLOT_KEYWORDS.items():
        if _contains_any(query, kws):
            kind_hit = kind
            break
    out["plot-type"] = IntentPrediction(
        "plot-type", kind_hit, KEYWORD_CONFIDENCE if kind_hit else 0.0
    )

    color_kw = _contains_any(query, COLOR_KEYWORDS)
    group_kw = _contains_any(query, GROUP_KEYWORDS)
    grouping_slots = [
        (c, s)
        for c, s in mentions
        if not column_subtype(t.column_type(c), ColumnType.CONTINUOUS)
    ][:TOP_SLOT_CANDIDATES]
    if color_kw:
        out["color"] = IntentPrediction("color", True, 0.8, grouping_slots)
        out["subplot"] = IntentPrediction("subplot", False, 0.8)
    elif group_kw:
        # ambiguous grouping phrase: both readings survive as branches
        out["subplot"] = IntentPrediction("subplot", True, 0.55, grouping_slots)
        out["color"] = IntentPrediction("color", True, 0.45, grouping_slots)
    else:
        out["color"] = IntentPrediction("color", False, 0.8)
        out["subplot"] = IntentPrediction("subplot", False, 0.8)

    grouped = color_kw or group_kw
    for agg, kws in (("mean", MEAN_KEYWORDS), ("sum", SUM_KEYWORDS), ("count", COUNT_KEYWORDS)):
        slots = (quantitative if agg in ("mean", "sum") else mentions)[
            :TOP_SLOT_CANDIDATES
        ]
        if _contains_any(query, kws):
            p = KEYWORD_CONFIDENCE if slots else 0.3
        elif agg == "mean" and grouped and quantitative:
            p = MEAN_EVIDENCE_PRIOR
        else:
            p = AGG_DEFAULT_PRIOR
        out[agg] = IntentPrediction(agg, p > 0, p, slots)
    return out


def score(confidences: list[float]) -> float:
    """Product of intent confidences and slot confidences."""
    p = 1.0
    for c in confidences:
        p *= c
    return max(p, 1e-12)


def heuristic_parse(
    query: str,
    t: Table,
    emit_negative_aggregates: bool = False,
    max_specs: int = MAX_SPECS,
) -> list[ScoredSpec]:
    """Ranked specification distribution for a query over a dataset.

    The spec set is the cross-product of: the plot-kind choice (all kinds
    when no keyword decides), the grouping reading (color vs subplot when
    ambiguous) with its top slot candidates, and a yes/no branch per
    aggregation intent with its top slot candidates; scored by the product
    formula and truncated to the top max_specs.
    """
    if not query.strip():
        raise ValueError("empty query")
    intents = predict_intents(query, t)

    kind_pred = intents["plot-type"]
    if kind_pred.decision is not None:
        kind_branches = [
            (k, KEYWORD_CONFIDENCE if k == kind_pred.decision else (1 - KEYWORD_CONFIDENCE) / 3)
            for k in PlotKind
        ]
    else:
        kind_branches = [(k, KIND_PRIORS[k]) for k in PlotKind]
    kind_branches.sort(key=lambda p: -p[1])

    # grouping readings: (channel or None, slot column or None, confidence)
    group_branches: list[tuple[Optional[str], Optional[str], float]] = []
    for ch in ("subplot", "color"):
        pred = intents[ch]
        if pred.decision and pred.slots:
            for col, s in pred.slots:
                group_branches.append((ch, col, pred.confidence * s))
    none_conf = 1.0
    for ch in ("subplot", "color"):
        pred = intents[ch]
        none_conf *= (1 - pred.confidence) if pred.decision else pred.confidence
    group_branches.append((None, None, max(none_conf, 0.05)))

    agg_branch_lists = []
    for agg in ("mean", "sum", "count"):
        pred = intents[agg]
        branches = []
        if pred.confidence > 0 and pred.slots:
            col, s = pred.slots[0]
            branches.append((agg, col, pred.confidence * s))
        branches.append((agg, None, 1 - pred.confidence))
        agg_branch_lists.append(branches)

    no_signal = (
        kind_pred.decision is None
        and all(not intents[ch].decision for ch in ("color", "subplot"))
        and all(i.confidence <= AGG_DEFAULT_PRIOR for i in (intents["mean"], intents["sum"], intents["count"]))
    )
    if no_signal:
        kind_branches = [(PlotKind.BAR, 1.0)]
        group_branches = [(None, None, 1.0)]
        agg_branch_lists = [[(a, None, 1.0)] for a in ("mean", "sum", "count")]

    specs: list[ScoredSpec] = []
    for (kind, kc), (gch, gcol, gc), mean_b, sum_b, count_b in itertools.product(
        kind_branches, group_branches, *agg_branch_lists
    ):
        confs = [kc, gc, mean_b[2], sum_b[2], count_b[2]]
        plot_atoms: list[Qualifier] = []
        slot_cols: list[str] = []
        if gch is not None and gcol is not None:
            plot_atoms.append(Pi(SELF_VAR, gch, SourceRef(INPUT_VAR, gcol)))
            other = "color" if gch == "subplot" else "subplot"
            plot_atoms.extend(
                QNot(Pi(SELF_VAR, other, SourceRef(INPUT_VAR, c)))
                for c in t.column_names()
            )
            slot_cols.append(gcol)
        table_atoms: list[Qualifier] = []
        for agg, col, _c in (mean_b, sum_b, count_b):
            if col is not None:
                table_atoms.append(Pi(SELF_VAR, col, agg))
                slot_cols.append(col)
            elif emit_negative_aggregates and intents[agg].confidence <= AGG_DEFAULT_PRIOR:
                table_atoms.extend(
                    QNot(Pi(SELF_VAR, c, agg)) for c in t.column_names()
                )
        schema = {c: ColumnType.TOP for c in slot_cols}
        specs.append(
            ScoredSpec(
                Scalar(PlotType(kind), qand(*plot_atoms)),
                Scalar(table_base(schema), qand(*table_atoms)),
                score(confs),
            )
        )
    specs.sort(key=lambda s: (-s.score, _spec_key(s)))
    deduped: list[ScoredSpec] = []
    seen = set()
    for s in specs:
        key = _spec_key(s)
        if key not in seen:
            seen.add(key)
            deduped.append(s)
    return deduped[:max_specs]


def _spec_key(s: ScoredSpec) -> str:
    from .types import canonical_type_json

    return canonical_type_json(s.plot_goal) + canonical_type_json(s.table_goal)
