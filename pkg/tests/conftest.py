import pytest

from augsearch.corpus import tokenize
from augsearch.lexicons import load_lexicons
from augsearch.reward import load_activity_entity_lexicon

# The logged troubleshooting context used by the replay tests, in corpus form
# (turn marker between the two speakers, utterance markers within a turn).
TABLE4_ORIGINAL = (
    "fresh install of crack of the day : gdm login __eot__ "
    '" can\'t access ACPI bla bla bla " __eou__ '
    "you don't want to be me ... __eou__ "
    "ah , it happened to you too ?"
)


@pytest.fixture(scope="session")
def lexicons():
    return load_lexicons()


@pytest.fixture(scope="session")
def reward_lexicon():
    return load_activity_entity_lexicon()


@pytest.fixture(scope="session")
def table4_context(lexicons):
    return tokenize(TABLE4_ORIGINAL, lexicons)
