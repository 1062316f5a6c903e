"""Activity/Entity F1 scoring and the weighted scalar reward.

Responses are mapped to sets of lexicon-listed technical verbs (activities)
and technical nouns (entities); per-example F1s are macro-averaged and the
reward combines them as ``activity + (5.94 / 3.52) * entity``, the weights
coming from the attention baseline's two F1 scores so both terms carry
comparable weight.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from .corpus import Context, tokenize
from .lexicons import DEFAULT_DATA_DIR, LexiconError

ACTIVITIES_FILE = "activities.txt"
ENTITIES_FILE = "entities.txt"

ENTITY_WEIGHT = 5.94 / 3.52


@dataclass(frozen=True)
class ActivityEntityLexicon:
    """Disjoint surface-form sets for activities (verbs) and entities (nouns)."""

    activities: frozenset[str]
    entities: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "activities", frozenset(s.lower() for s in self.activities))
        object.__setattr__(self, "entities", frozenset(s.lower() for s in self.entities))
        if not self.activities or not self.entities:
            raise LexiconError("activity/entity lexicons must be non-empty")
        overlap = self.activities & self.entities
        if overlap:
            raise LexiconError(f"activity/entity lexicons overlap: {sorted(overlap)}")


def _load_terms(path) -> frozenset[str]:
    path = os.fspath(path)
    if not os.path.exists(path):
        raise LexiconError(f"missing lexicon file: {path}")
    terms = set()
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if line and not line.startswith("#"):
                terms.add(line.lower())
    return frozenset(terms)


def load_activity_entity_lexicon(directory=None) -> ActivityEntityLexicon:
    directory = Path(directory) if directory is not None else DEFAULT_DATA_DIR
    return ActivityEntityLexicon(
        activities=_load_terms(directory / ACTIVITIES_FILE),
        entities=_load_terms(directory / ENTITIES_FILE),
    )


def extract(response: Context | str, lex: ActivityEntityLexicon) -> tuple[set[str], set[str]]:
    """Case-folded token membership lookup; duplicates collapse to sets."""
    ctx = tokenize(response) if isinstance(response, str) else response
    surfaces = {t.surface.lower() for t in ctx.tokens}
    return surfaces & lex.activities, surfaces & lex.entities


def f1(pred: set, gold: set) -> float:
    """Set F1 with the degenerate conventions: both empty -> 1.0, exactly one
    empty -> 0.0."""
    if not pred and not gold:
        return 1.0
    if not pred or not gold:
        return 0.0
    hits = len(pred & gold)
    if hits == 0:
        return 0.0
    precision = hits / len(pred)
    recall = hits / len(gold)
    return 2 * precision * recall / (precision + recall)


def corpus_f1(responses, golds, lex: ActivityEntityLexicon) -> tuple[float, float]:
    """Macro-averaged (activity F1, entity F1) over aligned response/gold lists."""
    if len(responses) != len(golds):
        raise ValueError(f"got {len(responses)} responses but {len(golds)} references")
    if not responses:
        raise ValueError("cannot score an empty corpus")
    a_total = 0.0
    e_total = 0.0
    for response, gold in zip(responses, golds):
        pred_a, pred_e = extract(response, lex)
        gold_a, gold_e = extract(gold, lex)
        a_total += f1(pred_a, gold_a)
        e_total += f1(pred_e, gold_e)
    return a_total / len(responses), e_total / len(responses)


def weighted_reward(activity_f1: float, entity_f1: float) -> float:
    """activity F1 + (5.94 / 3.52) * entity F1."""
    if activity_f1 < 0 or entity_f1 < 0:
        raise ValueError("F1 inputs must be non-negative")
    return activity_f1 + ENTITY_WEIGHT * entity_f1


@dataclass(frozen=True)
class RewardReport:
    """Scores for one evaluation: the two F1s and the combined reward."""

    activity_f1: float
    entity_f1: float
    weighted: float
    examples: int

    def render(self) -> str:
        return (
            f"activity_f1\t{self.activity_f1:.6f}\n"
            f"entity_f1\t{self.entity_f1:.6f}\n"
            f"weighted_reward\t{self.weighted:.6f}\n"
            f"examples\t{self.examples}\n"
        )


def score_responses(responses, golds, lex: ActivityEntityLexicon) -> RewardReport:
    a, e = corpus_f1(responses, golds, lex)
    return RewardReport(a, e, weighted_reward(a, e), len(responses))
