"""Tokenization and dialogue-context handling for pre-tokenized corpus lines.

Lines are Ubuntu-style: whitespace-separated tokens with ``__eou__`` marking
utterance ends and ``__eot__`` marking turn ends.  Tokenization is a pure
whitespace split; POS tags come from lexicon lookup (most-frequent tag), not
from a contextual tagger.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

EOU = "__eou__"
EOT = "__eot__"

UNIVERSAL_TAGS = (
    "NOUN", "VERB", "ADP", "PRON", "ADV", "DET",
    "CONJ", "PRT", "NUM", "X", "PUNCT", "OTHER",
)


@dataclass(frozen=True)
class Token:
    """One surface token with its lexicon-derived annotations."""

    surface: str
    tag: str = "OTHER"
    is_stopword: bool = False

    def __post_init__(self):
        if not self.surface or any(c.isspace() for c in self.surface):
            raise ValueError(f"token surface must be non-empty and whitespace-free: {self.surface!r}")
        if self.tag not in UNIVERSAL_TAGS:
            raise ValueError(f"unknown POS tag {self.tag!r}")

    @property
    def is_marker(self) -> bool:
        return self.surface in (EOU, EOT)


@dataclass(frozen=True)
class Context:
    """An ordered token sequence with utterance/turn boundary positions.

    Boundary markers are stored in ``tokens`` (so the sequence round-trips to
    the input line) and their indices are recorded in the boundary tuples.
    Markers are never eligible for any perturbation.
    """

    tokens: tuple[Token, ...]
    utterance_boundaries: tuple[int, ...] = field(default=())
    turn_boundaries: tuple[int, ...] = field(default=())

    def __post_init__(self):
        for positions in (self.utterance_boundaries, self.turn_boundaries):
            if list(positions) != sorted(set(positions)):
                raise ValueError("boundary positions must be strictly increasing")
            if positions and (positions[0] < 0 or positions[-1] >= len(self.tokens)):
                raise ValueError("boundary position out of range")
        for i in self.utterance_boundaries:
            if self.tokens[i].surface != EOU:
                raise ValueError(f"token {i} is not an {EOU} marker")
        for i in self.turn_boundaries:
            if self.tokens[i].surface != EOT:
                raise ValueError(f"token {i} is not an {EOT} marker")

    @classmethod
    def from_tokens(cls, tokens) -> "Context":
        """Build a Context, deriving boundary positions from marker surfaces."""
        tokens = tuple(tokens)
        eou = tuple(i for i, t in enumerate(tokens) if t.surface == EOU)
        eot = tuple(i for i, t in enumerate(tokens) if t.surface == EOT)
        return cls(tokens, eou, eot)

    @property
    def marker_positions(self) -> frozenset[int]:
        return frozenset(self.utterance_boundaries) | frozenset(self.turn_boundaries)

    def word_positions(self) -> list[int]:
        """Indices of non-marker tokens, in order."""
        markers = self.marker_positions
        return [i for i in range(len(self.tokens)) if i not in markers]

    @property
    def n_words(self) -> int:
        return len(self.tokens) - len(self.marker_positions)

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    def detokenize(self) -> str:
        return " ".join(t.surface for t in self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)


def make_token(surface: str, lexicons=None) -> Token:
    """Annotate one surface form. Markers are tagged X and never stopwords."""
    if surface in (EOU, EOT):
        return Token(surface, "X", False)
    if lexicons is None:
        return Token(surface, "OTHER", False)
    return Token(surface, lexicons.tag(surface), lexicons.is_stopword(surface))


def tokenize(line: str, lexicons=None) -> Context:
    """Whitespace-split a corpus line into an annotated Context.

    Empty/blank lines give an empty Context; that is not an error.
    """
    return Context.from_tokens(make_token(piece, lexicons) for piece in line.split())


def retag(token: Token, surface: str) -> Token:
    """Same annotations, new surface (used by form-flip perturbations)."""
    return replace(token, surface=surface)
