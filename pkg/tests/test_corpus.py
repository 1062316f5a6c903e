import random

import pytest

from augsearch.corpus import Context, Token, make_token, tokenize
from augsearch.lexicons import STOPWORD_CATEGORIES, stopword_category_for_tag

from conftest import TABLE4_ORIGINAL


def test_whitespace_split():
    ctx = tokenize("fresh install of crack")
    assert [t.surface for t in ctx.tokens] == ["fresh", "install", "of", "crack"]
    assert ctx.utterance_boundaries == () and ctx.turn_boundaries == ()


def test_marker_recognition():
    ctx = tokenize("hi __eou__ hello")
    assert ctx.n_words == 2
    assert ctx.utterance_boundaries == (1,)
    assert ctx.tokens[1].is_marker


def test_empty_line_is_empty_context():
    assert len(tokenize("")) == 0
    assert len(tokenize("   ")) == 0


def test_table4_context_counts(table4_context):
    # Hand count of the logged context: 10 tokens before the turn change,
    # 8 in the quoted utterance, 7 and 8 in the last two utterances, plus
    # one __eot__ and two __eou__ markers.
    assert table4_context.n_words == 10 + 8 + 7 + 8
    assert len(table4_context.tokens) == 36
    assert table4_context.utterance_boundaries == (19, 27)
    assert table4_context.turn_boundaries == (10,)


def test_tokenize_is_pure(lexicons):
    a = tokenize(TABLE4_ORIGINAL, lexicons)
    b = tokenize(TABLE4_ORIGINAL, lexicons)
    assert a == b


def test_round_trip_reproduces_normalized_line(lexicons):
    line = "  fresh   install __eou__  of  crack "
    assert tokenize(line, lexicons).detokenize() == "fresh install __eou__ of crack"
    assert tokenize(TABLE4_ORIGINAL, lexicons).detokenize() == TABLE4_ORIGINAL


def test_round_trip_random_lines(lexicons):
    rng = random.Random(5)
    words = ["alpha", "beta", "gamma", "the", "of", "don't", "?", "x1"]
    for _ in range(200):
        pieces = [rng.choice(words + ["__eou__", "__eot__"]) for _ in range(rng.randrange(0, 12))]
        line = " ".join(pieces)
        assert tokenize(line, lexicons).detokenize() == line


def test_token_invariants():
    with pytest.raises(ValueError):
        Token("")
    with pytest.raises(ValueError):
        Token("two words")
    with pytest.raises(ValueError):
        Token("ok", tag="VERBISH")


def test_context_boundary_validation():
    tokens = (make_token("a"), make_token("__eou__"), make_token("b"))
    with pytest.raises(ValueError):
        Context(tokens, utterance_boundaries=(2,))
    with pytest.raises(ValueError):
        Context(tokens, utterance_boundaries=(1, 1))
    ctx = Context.from_tokens(tokens)
    assert ctx.utterance_boundaries == (1,)
    assert ctx.word_positions() == [0, 2]


def test_tag_lookup(lexicons):
    assert lexicons.tag("the") == "DET"
    assert lexicons.tag("The") == "DET"
    assert lexicons.tag("zxqv") == "OTHER"
    # Pinned by the shipped lexicon file: "to" carries the particle tag.
    assert lexicons.tag("to") == "PRT"


def test_stopword_flag_matches_lexicon(lexicons):
    ctx = tokenize("the zxqv don't", lexicons)
    assert [t.is_stopword for t in ctx.tokens] == [True, False, True]
    for token in ctx.tokens:
        assert token.is_stopword == lexicons.is_stopword(token.surface)


def test_markers_are_never_stopwords(lexicons):
    ctx = tokenize("the __eou__ the __eot__ the", lexicons)
    for i in ctx.marker_positions:
        assert not ctx.tokens[i].is_stopword
        assert ctx.tokens[i].tag == "X"


def test_stopword_categories_partition(lexicons):
    by_category = lexicons.stopwords_by_category()
    assert set(by_category) == set(STOPWORD_CATEGORIES)
    union = set()
    total = 0
    for words in by_category.values():
        assert not (union & words)
        union |= words
        total += len(words)
    assert union == set(lexicons.stopword_tags)
    assert total == len(lexicons.stopword_tags)


def test_stopword_tag_agrees_with_category(lexicons):
    # Loader merges stopword tags into the POS lexicon, so a stopword
    # token's tag always places it in its own dropout category.
    for surface, tag in lexicons.stopword_tags.items():
        assert lexicons.tag(surface) == tag
        assert lexicons.stopword_category(surface) == stopword_category_for_tag(tag)
