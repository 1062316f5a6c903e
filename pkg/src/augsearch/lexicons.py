"""Lexicon resources backing tagging and the perturbation operations.

File formats (all UTF-8, line-delimited, tab-separated; blank lines and
``#`` comments allowed):

* POS lexicon:   ``surface<TAB>TAG1,TAG2,...``  (first tag = most frequent)
* Stopwords:     ``surface<TAB>TAG``
* Paraphrases:   ``source phrase<TAB>target phrase<TAB>score``
* Morphology:    ``base<TAB>inflected<TAB>{N|V}``
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import UNIVERSAL_TAGS

DEFAULT_DATA_DIR = Path(__file__).parent / "data"

POS_LEXICON_FILE = "pos_lexicon.txt"
STOPWORDS_FILE = "stopwords.txt"
PARAPHRASES_FILE = "paraphrases.txt"
MORPHOLOGY_FILE = "morphology.txt"

# The six named dropout categories; every other stopword tag falls in "other".
TAG_TO_CATEGORY = {
    "NOUN": "noun",
    "ADP": "adposition",
    "PRON": "pronoun",
    "ADV": "adverb",
    "VERB": "verb",
    "DET": "determiner",
}
STOPWORD_CATEGORIES = ("noun", "adposition", "pronoun", "adverb", "verb", "determiner", "other")


class LexiconError(ValueError):
    """Malformed or missing lexicon resource."""


def stopword_category_for_tag(tag: str) -> str:
    return TAG_TO_CATEGORY.get(tag, "other")


def _read_rows(path: str | os.PathLike, n_fields: int):
    """Yield (line_number, fields) for every data line, validating arity."""
    path = os.fspath(path)
    if not os.path.exists(path):
        raise LexiconError(f"missing lexicon file: {path}")
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != n_fields:
                raise LexiconError(f"{path}:{lineno}: expected {n_fields} tab-separated fields, got {len(fields)}")
            yield lineno, [f.strip() for f in fields], path


@dataclass
class ParaphraseLexicon:
    """Scored phrase table: source phrase (1-3 tokens) -> ranked targets."""

    entries: dict[tuple[str, ...], list[tuple[tuple[str, ...], float]]]
    max_source_len: int = 1

    def __post_init__(self):
        for source, targets in self.entries.items():
            if not targets:
                raise LexiconError(f"paraphrase entry {' '.join(source)!r} has no targets")
            for target, score in targets:
                if not math.isfinite(score):
                    raise LexiconError(f"paraphrase entry {' '.join(source)!r} has non-finite score")
                if target == source:
                    raise LexiconError(f"paraphrase entry {' '.join(source)!r} maps to itself")
            targets.sort(key=lambda ts: (-ts[1], ts[0]))
        self.max_source_len = max((len(s) for s in self.entries), default=1)

    @classmethod
    def from_pairs(cls, pairs) -> "ParaphraseLexicon":
        """Build from (source, target, score) string triples (test helper)."""
        entries: dict[tuple[str, ...], list[tuple[tuple[str, ...], float]]] = {}
        for source, target, score in pairs:
            key = tuple(source.lower().split())
            entries.setdefault(key, []).append((tuple(target.lower().split()), float(score)))
        return cls(entries)

    def lookup(self, phrase: tuple[str, ...]):
        return self.entries.get(tuple(w.lower() for w in phrase))

    def best_target(self, phrase: tuple[str, ...]) -> tuple[str, ...]:
        targets = self.lookup(phrase)
        if not targets:
            raise KeyError(phrase)
        return targets[0][0]

    def __contains__(self, phrase) -> bool:
        return self.lookup(tuple(phrase)) is not None

    def __len__(self) -> int:
        return len(self.entries)


# Regular suffix alternations, used when authoring the shipped table and to
# classify listed pairs as regular vs irregular. Runtime flips are strictly
# table-driven so that pair flips stay involutive.
NOUN_SUFFIX_RULES = (("y", "ies"), ("s", "ses"), ("sh", "shes"), ("ch", "ches"), ("", "s"))
VERB_SUFFIX_RULES = (("y", "ies"), ("s", "ses"), ("sh", "shes"), ("ch", "ches"), ("o", "oes"), ("", "s"))


def follows_suffix_rule(base: str, inflected: str, rules) -> bool:
    for strip, add in rules:
        if (strip == "" or base.endswith(strip)) and inflected == base[: len(base) - len(strip)] + add:
            return True
    return False


@dataclass
class MorphologyTable:
    """Bidirectional form pairs for grammar-error flips.

    ``noun_pairs``/``verb_pairs`` map each listed surface to its partner in
    both directions; ``exceptions`` lists the pairs that do not follow the
    default suffix rules (irregulars). Flipping is table lookup only, so a
    double flip always restores the original surface.
    """

    noun_pairs: dict[str, str] = field(default_factory=dict)
    verb_pairs: dict[str, str] = field(default_factory=dict)
    exceptions: tuple[tuple[str, str, str], ...] = ()
    noun_rules: tuple[tuple[str, str], ...] = NOUN_SUFFIX_RULES
    verb_rules: tuple[tuple[str, str], ...] = VERB_SUFFIX_RULES

    @classmethod
    def from_pairs(cls, pairs) -> "MorphologyTable":
        """Build from (base, inflected, "N"|"V") triples."""
        noun: dict[str, str] = {}
        verb: dict[str, str] = {}
        exceptions = []
        for base, inflected, cls_code in pairs:
            base, inflected = base.lower(), inflected.lower()
            if cls_code not in ("N", "V"):
                raise LexiconError(f"morphology class must be N or V, got {cls_code!r}")
            table = noun if cls_code == "N" else verb
            for surface in (base, inflected):
                if surface in table:
                    raise LexiconError(f"duplicate morphology surface {surface!r} in class {cls_code}")
            if base == inflected:
                raise LexiconError(f"morphology pair maps {base!r} to itself")
            table[base] = inflected
            table[inflected] = base
            rules = NOUN_SUFFIX_RULES if cls_code == "N" else VERB_SUFFIX_RULES
            if not follows_suffix_rule(base, inflected, rules):
                exceptions.append((base, inflected, cls_code))
        return cls(noun, verb, tuple(exceptions))

    def pairs_for_class(self, cls_code: str) -> dict[str, str]:
        if cls_code == "N":
            return self.noun_pairs
        if cls_code == "V":
            return self.verb_pairs
        raise ValueError(f"morphology class must be N or V, got {cls_code!r}")

    def has_pair(self, surface: str, cls_code: str) -> bool:
        return surface.lower() in self.pairs_for_class(cls_code)

    def flip(self, surface: str, cls_code: str) -> str:
        """Paired form of ``surface`` (singular<->plural or inflected<->base)."""
        return self.pairs_for_class(cls_code)[surface.lower()]


@dataclass
class Lexicons:
    """All loaded resources, immutable after loading and thread-safe to share."""

    pos: dict[str, tuple[str, ...]]
    stopword_tags: dict[str, str]
    paraphrases: ParaphraseLexicon
    morphology: MorphologyTable

    def tag(self, surface: str) -> str:
        """Most-frequent lexicon tag for the case-folded surface, else OTHER."""
        tags = self.pos.get(surface.lower())
        return tags[0] if tags else "OTHER"

    def is_stopword(self, surface: str) -> bool:
        return surface.lower() in self.stopword_tags

    def stopword_category(self, surface: str) -> str | None:
        tag = self.stopword_tags.get(surface.lower())
        return None if tag is None else stopword_category_for_tag(tag)

    def stopwords_by_category(self) -> dict[str, set[str]]:
        """Partition of the stopword list into the 7 dropout categories."""
        out: dict[str, set[str]] = {c: set() for c in STOPWORD_CATEGORIES}
        for surface, tag in self.stopword_tags.items():
            out[stopword_category_for_tag(tag)].add(surface)
        return out


def _load_pos(path) -> dict[str, tuple[str, ...]]:
    pos: dict[str, tuple[str, ...]] = {}
    for lineno, (surface, tags), fname in _read_rows(path, 2):
        tag_list = tuple(t.strip() for t in tags.split(",") if t.strip())
        if not tag_list:
            raise LexiconError(f"{fname}:{lineno}: no tags for {surface!r}")
        for tag in tag_list:
            if tag not in UNIVERSAL_TAGS:
                raise LexiconError(f"{fname}:{lineno}: unknown tag {tag!r}")
        pos[surface.lower()] = tag_list
    return pos


def _load_stopwords(path) -> dict[str, str]:
    stop: dict[str, str] = {}
    for lineno, (surface, tag), fname in _read_rows(path, 2):
        if tag not in UNIVERSAL_TAGS:
            raise LexiconError(f"{fname}:{lineno}: unknown tag {tag!r}")
        key = surface.lower()
        if key in stop:
            raise LexiconError(f"{fname}:{lineno}: duplicate stopword {surface!r}")
        stop[key] = tag
    return stop


def _load_paraphrases(path) -> ParaphraseLexicon:
    triples = []
    for lineno, (source, target, score), fname in _read_rows(path, 3):
        try:
            value = float(score)
        except ValueError:
            raise LexiconError(f"{fname}:{lineno}: bad score {score!r}") from None
        if not 1 <= len(source.split()) <= 3:
            raise LexiconError(f"{fname}:{lineno}: source phrase must be 1-3 tokens")
        triples.append((source, target, value))
    return ParaphraseLexicon.from_pairs(triples)


def _load_morphology(path) -> MorphologyTable:
    triples = []
    for lineno, (base, inflected, cls_code), fname in _read_rows(path, 3):
        try:
            triples.append((base, inflected, cls_code))
        except LexiconError as exc:
            raise LexiconError(f"{fname}:{lineno}: {exc}") from None
    try:
        return MorphologyTable.from_pairs(triples)
    except LexiconError as exc:
        raise LexiconError(f"{path}: {exc}") from None


def load_lexicons(directory: str | os.PathLike | None = None) -> Lexicons:
    """Load all lexicon resources from a directory (default: bundled data).

    Stopword tags are merged into the POS lexicon as the most-frequent tag so
    a stopword's token tag always matches its dropout category.
    """
    directory = Path(directory) if directory is not None else DEFAULT_DATA_DIR
    pos = _load_pos(directory / POS_LEXICON_FILE)
    stop = _load_stopwords(directory / STOPWORDS_FILE)
    for surface, tag in stop.items():
        existing = pos.get(surface, ())
        if not existing or existing[0] != tag:
            pos[surface] = (tag,) + tuple(t for t in existing if t != tag)
    return Lexicons(
        pos=pos,
        stopword_tags=stop,
        paraphrases=_load_paraphrases(directory / PARAPHRASES_FILE),
        morphology=_load_morphology(directory / MORPHOLOGY_FILE),
    )
