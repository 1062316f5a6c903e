"""The 12 atomic semantic-preserving perturbation operations.

Every operation takes a tokenized context, a change budget ``n`` (1-4), and
an explicit ``random.Random`` source, and returns a new context. Positions
are drawn uniformly without replacement from the operation's eligibility
set; when the budget exceeds eligibility, all eligible positions are used.
Boundary markers (``__eou__``/``__eot__``) are never touched.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field

from .corpus import Context, make_token, retag
from .lexicons import Lexicons, MorphologyTable, ParaphraseLexicon, stopword_category_for_tag


class OperationType(enum.IntEnum):
    """Controller vocabulary of perturbations, stable 0-11 encoding."""

    RANDOM_SWAP = 0
    DROPOUT_NOUN = 1
    DROPOUT_ADPOSITION = 2
    DROPOUT_PRONOUN = 3
    DROPOUT_ADVERB = 4
    DROPOUT_VERB = 5
    DROPOUT_DETERMINER = 6
    DROPOUT_OTHER = 7
    PARAPHRASE = 8
    GRAMMAR_NOUN = 9
    GRAMMAR_VERB = 10
    STAMMER = 11

    @property
    def mnemonic(self) -> str:
        return _MNEMONICS[self]

    @classmethod
    def from_mnemonic(cls, text: str) -> "OperationType":
        try:
            return _BY_MNEMONIC[text]
        except KeyError:
            raise ValueError(f"unknown operation mnemonic {text!r}") from None

    @property
    def dropout_category(self) -> str | None:
        return _DROPOUT_CATEGORY.get(self)

    @property
    def grammar_class(self) -> str | None:
        if self is OperationType.GRAMMAR_NOUN:
            return "N"
        if self is OperationType.GRAMMAR_VERB:
            return "V"
        return None


_MNEMONICS = {
    OperationType.RANDOM_SWAP: "R",
    OperationType.DROPOUT_NOUN: "D_n",
    OperationType.DROPOUT_ADPOSITION: "D_adp",
    OperationType.DROPOUT_PRONOUN: "D_p",
    OperationType.DROPOUT_ADVERB: "D_adv",
    OperationType.DROPOUT_VERB: "D_v",
    OperationType.DROPOUT_DETERMINER: "D_det",
    OperationType.DROPOUT_OTHER: "D_o",
    OperationType.PARAPHRASE: "P",
    OperationType.GRAMMAR_NOUN: "G_n",
    OperationType.GRAMMAR_VERB: "G_v",
    OperationType.STAMMER: "S",
}
_BY_MNEMONIC = {m: t for t, m in _MNEMONICS.items()}
_DROPOUT_CATEGORY = {
    OperationType.DROPOUT_NOUN: "noun",
    OperationType.DROPOUT_ADPOSITION: "adposition",
    OperationType.DROPOUT_PRONOUN: "pronoun",
    OperationType.DROPOUT_ADVERB: "adverb",
    OperationType.DROPOUT_VERB: "verb",
    OperationType.DROPOUT_DETERMINER: "determiner",
    OperationType.DROPOUT_OTHER: "other",
}

MIN_CHANGES, MAX_CHANGES = 1, 4


@dataclass(frozen=True)
class EligibilitySet:
    """Token indices where an operation may legally apply."""

    op_type: OperationType
    positions: frozenset[int]

    def __len__(self) -> int:
        return len(self.positions)

    def __iter__(self):
        return iter(sorted(self.positions))


@dataclass
class OpStats:
    """Application counters collected while augmenting a corpus."""

    gates_drawn: dict[str, int] = field(default_factory=dict)
    gates_fired: dict[str, int] = field(default_factory=dict)
    changes_applied: dict[str, int] = field(default_factory=dict)

    def record(self, name: str, fired: bool, applied: int) -> None:
        self.gates_drawn[name] = self.gates_drawn.get(name, 0) + 1
        if fired:
            self.gates_fired[name] = self.gates_fired.get(name, 0) + 1
            self.changes_applied[name] = self.changes_applied.get(name, 0) + applied


def _check_n(n: int) -> None:
    if not MIN_CHANGES <= n <= MAX_CHANGES:
        raise ValueError(f"number of changes must be in {MIN_CHANGES}..{MAX_CHANGES}, got {n}")


def _swap_pair_starts(ctx: Context) -> list[int]:
    markers = ctx.marker_positions
    return [
        i
        for i in range(len(ctx.tokens) - 1)
        if i not in markers and (i + 1) not in markers
    ]


def _dropout_positions(ctx: Context, category: str) -> list[int]:
    markers = ctx.marker_positions
    return [
        i
        for i, tok in enumerate(ctx.tokens)
        if i not in markers and tok.is_stopword and stopword_category_for_tag(tok.tag) == category
    ]


def _stopword_positions(ctx: Context) -> list[int]:
    markers = ctx.marker_positions
    return [i for i, tok in enumerate(ctx.tokens) if i not in markers and tok.is_stopword]


def paraphrase_spans(ctx: Context, lex: ParaphraseLexicon) -> list[tuple[int, int]]:
    """Leftmost-longest non-overlapping (start, length) spans with an entry.

    Fixing the candidate spans deterministically keeps the eligibility count
    well-defined, so exactly min(n, #spans) replacements are made.
    """
    markers = ctx.marker_positions
    surfaces = [t.surface.lower() for t in ctx.tokens]
    spans: list[tuple[int, int]] = []
    i = 0
    n_tok = len(ctx.tokens)
    while i < n_tok:
        if i in markers:
            i += 1
            continue
        matched = 0
        for length in range(min(lex.max_source_len, n_tok - i), 0, -1):
            window = range(i, i + length)
            if any(j in markers for j in window):
                continue
            if tuple(surfaces[i : i + length]) in lex:
                matched = length
                break
        if matched:
            spans.append((i, matched))
            i += matched
        else:
            i += 1
    return spans


def _grammar_positions(ctx: Context, cls_code: str, morph: MorphologyTable) -> list[int]:
    markers = ctx.marker_positions
    return [
        i
        for i, tok in enumerate(ctx.tokens)
        if i not in markers and morph.has_pair(tok.surface, cls_code)
    ]


def eligible_positions(ctx: Context, op_type: OperationType, lexicons: Lexicons | None = None) -> EligibilitySet:
    """Positions where ``op_type`` may apply (pair starts for swaps, span
    starts for paraphrase, token indices otherwise)."""
    category = op_type.dropout_category
    if category is not None:
        positions = _dropout_positions(ctx, category)
    elif op_type is OperationType.RANDOM_SWAP:
        positions = _swap_pair_starts(ctx)
    elif op_type is OperationType.STAMMER:
        positions = ctx.word_positions()
    elif op_type is OperationType.PARAPHRASE:
        if lexicons is None:
            raise ValueError("paraphrase eligibility requires lexicons")
        positions = [start for start, _ in paraphrase_spans(ctx, lexicons.paraphrases)]
    else:
        if lexicons is None:
            raise ValueError("grammar-error eligibility requires lexicons")
        positions = _grammar_positions(ctx, op_type.grammar_class, lexicons.morphology)
    return EligibilitySet(op_type, frozenset(positions))


def _pick(positions: list[int], n: int, rng: random.Random) -> list[int]:
    """min(n, |positions|) distinct positions, uniformly without replacement."""
    k = min(n, len(positions))
    return rng.sample(positions, k) if k else []


def _match_case(template: str, replacement: str) -> str:
    if len(template) > 1 and template.isupper():
        return replacement.upper()
    if template[:1].isupper():
        return replacement[:1].upper() + replacement[1:]
    return replacement


def _random_swap(ctx: Context, n: int, rng: random.Random) -> tuple[Context, int]:
    candidates = _swap_pair_starts(ctx)
    chosen: list[int] = []
    while candidates and len(chosen) < n:
        pick = rng.choice(candidates)
        chosen.append(pick)
        candidates = [c for c in candidates if abs(c - pick) > 1]
    if not chosen:
        return ctx, 0
    tokens = list(ctx.tokens)
    for i in chosen:
        tokens[i], tokens[i + 1] = tokens[i + 1], tokens[i]
    return Context.from_tokens(tokens), len(chosen)


def _stopword_dropout(ctx: Context, category: str, n: int, rng: random.Random) -> tuple[Context, int]:
    chosen = set(_pick(_dropout_positions(ctx, category), n, rng))
    if not chosen:
        return ctx, 0
    tokens = [t for i, t in enumerate(ctx.tokens) if i not in chosen]
    return Context.from_tokens(tokens), len(chosen)


def _paraphrase(
    ctx: Context, n: int, lex: ParaphraseLexicon, rng: random.Random, annotate=None
) -> tuple[Context, int]:
    spans = paraphrase_spans(ctx, lex)
    if not spans:
        return ctx, 0
    k = min(n, len(spans))
    chosen = sorted(rng.sample(spans, k), reverse=True)
    tokens = list(ctx.tokens)
    for start, length in chosen:
        source = tuple(t.surface for t in tokens[start : start + length])
        target = lex.best_target(source)
        new_tokens = []
        for j, word in enumerate(target):
            surface = _match_case(source[0], word) if j == 0 else word
            new_tokens.append(make_token(surface, annotate))
        tokens[start : start + length] = new_tokens
    return Context.from_tokens(tokens), k


def _grammar_error(
    ctx: Context, cls_code: str, n: int, morph: MorphologyTable, rng: random.Random, annotate=None
) -> tuple[Context, int]:
    chosen = _pick(_grammar_positions(ctx, cls_code, morph), n, rng)
    if not chosen:
        return ctx, 0
    tokens = list(ctx.tokens)
    for i in chosen:
        flipped = _match_case(tokens[i].surface, morph.flip(tokens[i].surface, cls_code))
        tokens[i] = make_token(flipped, annotate) if annotate is not None else retag(tokens[i], flipped)
    return Context.from_tokens(tokens), len(chosen)


def _stammer(ctx: Context, n: int, rng: random.Random) -> tuple[Context, int]:
    chosen = _pick(ctx.word_positions(), n, rng)
    if not chosen:
        return ctx, 0
    tokens = list(ctx.tokens)
    for i in sorted(chosen, reverse=True):
        tokens.insert(i + 1, tokens[i])
    return Context.from_tokens(tokens), len(chosen)


def random_swap(ctx: Context, n: int, rng: random.Random) -> Context:
    """Swap up to ``n`` non-overlapping adjacent word pairs."""
    _check_n(n)
    return _random_swap(ctx, n, rng)[0]


def stopword_dropout(ctx: Context, category: str, n: int, rng: random.Random) -> Context:
    """Delete up to ``n`` stopwords of the given dropout category."""
    _check_n(n)
    if category not in _DROPOUT_CATEGORY.values():
        raise ValueError(f"unknown stopword category {category!r}")
    return _stopword_dropout(ctx, category, n, rng)[0]


def paraphrase(ctx: Context, n: int, lex: ParaphraseLexicon, rng: random.Random, annotate=None) -> Context:
    """Replace up to ``n`` covered phrases with their best-scoring targets."""
    _check_n(n)
    return _paraphrase(ctx, n, lex, rng, annotate)[0]


def grammar_error(ctx: Context, cls_code: str, n: int, morph: MorphologyTable, rng: random.Random, annotate=None) -> Context:
    """Flip up to ``n`` tokens to their paired morphological form."""
    _check_n(n)
    return _grammar_error(ctx, cls_code, n, morph, rng, annotate)[0]


def stammer(ctx: Context, n: int, rng: random.Random) -> Context:
    """Duplicate up to ``n`` words in place (word repetition)."""
    _check_n(n)
    return _stammer(ctx, n, rng)[0]


def _dispatch(ctx: Context, op_type: OperationType, n: int, rng: random.Random, lexicons: Lexicons | None) -> tuple[Context, int]:
    category = op_type.dropout_category
    if category is not None:
        return _stopword_dropout(ctx, category, n, rng)
    if op_type is OperationType.RANDOM_SWAP:
        return _random_swap(ctx, n, rng)
    if op_type is OperationType.STAMMER:
        return _stammer(ctx, n, rng)
    if lexicons is None:
        raise ValueError(f"{op_type.name} requires lexicons")
    if op_type is OperationType.PARAPHRASE:
        return _paraphrase(ctx, n, lexicons.paraphrases, rng, annotate=lexicons)
    return _grammar_error(ctx, op_type.grammar_class, n, lexicons.morphology, rng, annotate=lexicons)


def apply_operation(ctx: Context, op, rng: random.Random, lexicons: Lexicons | None = None, stats: OpStats | None = None) -> Context:
    """Apply one gated operation: a single Bernoulli draw per example decides
    whether the typed perturbation runs at all."""
    _check_n(op.n_changes)
    fired = rng.random() < op.probability
    applied = 0
    if fired:
        ctx, applied = _dispatch(ctx, OperationType(op.op_type), op.n_changes, rng, lexicons)
    if stats is not None:
        stats.record(OperationType(op.op_type).mnemonic, fired, applied)
    return ctx


# Coarse operations used by the All-operations manual baseline: Stopword
# Dropout and Grammar Errors without their subdivisions.
COARSE_OPERATIONS = ("random_swap", "stopword_dropout", "paraphrase", "grammar_errors", "stammer")


def coarse_stopword_dropout(ctx: Context, n: int, rng: random.Random) -> Context:
    """Dropout over the union of all 7 category eligibility sets."""
    _check_n(n)
    chosen = set(_pick(_stopword_positions(ctx), n, rng))
    if not chosen:
        return ctx
    return Context.from_tokens(t for i, t in enumerate(ctx.tokens) if i not in chosen)


def coarse_grammar_error(ctx: Context, n: int, morph: MorphologyTable, rng: random.Random, annotate=None) -> Context:
    """Grammar errors over the union of noun and verb pairs.

    Tokens present in both tables flip by their noun pair.
    """
    _check_n(n)
    markers = ctx.marker_positions
    eligible = [
        i
        for i, tok in enumerate(ctx.tokens)
        if i not in markers and (morph.has_pair(tok.surface, "N") or morph.has_pair(tok.surface, "V"))
    ]
    chosen = _pick(eligible, n, rng)
    if not chosen:
        return ctx
    tokens = list(ctx.tokens)
    for i in chosen:
        cls_code = "N" if morph.has_pair(tokens[i].surface, "N") else "V"
        flipped = _match_case(tokens[i].surface, morph.flip(tokens[i].surface, cls_code))
        tokens[i] = make_token(flipped, annotate) if annotate is not None else retag(tokens[i], flipped)
    return Context.from_tokens(tokens)


def apply_coarse_operation(ctx: Context, name: str, n: int, rng: random.Random, lexicons: Lexicons) -> Context:
    if name == "random_swap":
        return random_swap(ctx, n, rng)
    if name == "stopword_dropout":
        return coarse_stopword_dropout(ctx, n, rng)
    if name == "paraphrase":
        return paraphrase(ctx, n, lexicons.paraphrases, rng, annotate=lexicons)
    if name == "grammar_errors":
        return coarse_grammar_error(ctx, n, lexicons.morphology, rng, annotate=lexicons)
    if name == "stammer":
        return stammer(ctx, n, rng)
    raise ValueError(f"unknown coarse operation {name!r}")
