import pytest

from augsearch.lexicons import (
    DEFAULT_DATA_DIR,
    LexiconError,
    MorphologyTable,
    ParaphraseLexicon,
    load_lexicons,
)


def _write_default_files(directory, **overrides):
    defaults = {
        "pos_lexicon.txt": "the\tDET\n",
        "stopwords.txt": "the\tDET\n",
        "paraphrases.txt": "offer\tdeal\t0.9\n",
        "morphology.txt": "happen\thappens\tV\n",
    }
    defaults.update(overrides)
    for name, text in defaults.items():
        (directory / name).write_text(text, encoding="utf-8")


def test_load_bundled_lexicons():
    lex = load_lexicons(DEFAULT_DATA_DIR)
    assert lex.is_stopword("the")
    assert len(lex.paraphrases) > 10
    assert lex.morphology.has_pair("disks", "N")


def test_missing_file_is_configuration_error(tmp_path):
    with pytest.raises(LexiconError, match="missing lexicon file"):
        load_lexicons(tmp_path)


def test_malformed_line_names_file_and_line(tmp_path):
    _write_default_files(tmp_path, **{"paraphrases.txt": "offer\tdeal\t0.9\nbroken line without tabs\n"})
    with pytest.raises(LexiconError, match=r"paraphrases\.txt:2"):
        load_lexicons(tmp_path)


def test_stopword_entry_gets_category(tmp_path):
    _write_default_files(tmp_path)
    lex = load_lexicons(tmp_path)
    assert lex.stopword_category("the") == "determiner"
    assert lex.stopword_category("unknown") is None


def test_paraphrase_line_parses(tmp_path):
    _write_default_files(tmp_path)
    lex = load_lexicons(tmp_path)
    assert lex.paraphrases.lookup(("offer",)) == [(("deal",), 0.9)]


def test_morphology_line_is_bidirectional(tmp_path):
    _write_default_files(tmp_path)
    morph = load_lexicons(tmp_path).morphology
    assert morph.flip("happen", "V") == "happens"
    assert morph.flip("happens", "V") == "happen"


def test_paraphrase_self_mapping_rejected():
    with pytest.raises(LexiconError, match="itself"):
        ParaphraseLexicon.from_pairs([("offer", "offer", 0.9)])


def test_paraphrase_non_finite_score_rejected():
    with pytest.raises(LexiconError, match="non-finite"):
        ParaphraseLexicon.from_pairs([("offer", "deal", float("nan"))])


def test_paraphrase_best_target_is_highest_scoring():
    lex = ParaphraseLexicon.from_pairs([("offer", "deal", 0.5), ("offer", "proposal", 0.9)])
    assert lex.best_target(("offer",)) == ("proposal",)


def test_morphology_duplicate_surface_rejected():
    with pytest.raises(LexiconError, match="duplicate"):
        MorphologyTable.from_pairs([("happen", "happens", "V"), ("happen", "happened", "V")])


def test_morphology_self_pair_rejected():
    with pytest.raises(LexiconError, match="itself"):
        MorphologyTable.from_pairs([("sheep", "sheep", "N")])


def test_morphology_flip_round_trip_for_all_shipped_pairs():
    morph = load_lexicons(DEFAULT_DATA_DIR).morphology
    for cls_code in ("N", "V"):
        for surface in morph.pairs_for_class(cls_code):
            assert morph.flip(morph.flip(surface, cls_code), cls_code) == surface


def test_irregular_pairs_reported_as_exceptions():
    morph = MorphologyTable.from_pairs([("disk", "disks", "N"), ("child", "children", "N")])
    assert ("child", "children", "N") in morph.exceptions
    assert all(pair[0] != "disk" for pair in morph.exceptions)


def test_stopword_tag_overrides_pos_lexicon(tmp_path):
    _write_default_files(
        tmp_path,
        **{"pos_lexicon.txt": "that\tADP,DET\n", "stopwords.txt": "that\tDET\n"},
    )
    lex = load_lexicons(tmp_path)
    assert lex.tag("that") == "DET"
    assert "ADP" in lex.pos["that"]
