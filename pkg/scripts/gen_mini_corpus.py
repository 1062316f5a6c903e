#!/usr/bin/env python3
"""Regenerate the bundled mini corpus (src/augsearch/data/mini/).

The task is built so that stopword-dropout robustness pays off: every
troubleshooting topic pairs a content keyword with a fixed block of
topic-specific filler stopwords in the training sources, while validation
and test sources use held-out filler. A model that spreads credit over the
filler does worse on the held-out splits than one that concentrates on the
keyword, which is exactly what dropout-augmented training encourages.

Topics are graded (2, 4, or 6 filler words, from one or two dropout
categories) so that mild dropout policies earn partial reward and policies
matching both categories with larger change counts earn the most.
"""

from __future__ import annotations

import random
from pathlib import Path

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "augsearch" / "data" / "mini"

# (keyword, response, [(dropout category, words of filler), ...]).
# Responses carry the activity/entity terms that the reward lexicons score.
TOPIC_SPECS = [
    ("wifi", "you should restart the driver __eou__ then reboot", [("pron", 2)]),
    ("sound", "try to update the driver", [("det", 2)]),
    ("screen", "configure xorg __eou__ then reboot", [("adp", 2)]),
    ("disk", "resize the partition first", [("verb", 2)]),
    ("grub", "install grub from the terminal", [("adv", 2), ("other", 2)]),
    ("kernel", "upgrade the kernel __eou__ then reboot", [("pron", 2), ("adp", 2)]),
    ("package", "purge the package with apt", [("det", 2), ("verb", 2)]),
    ("password", "delete the password file as root", [("adv", 2), ("pron", 2)]),
    ("server", "restart the server __eou__ then mount the disk", [("other", 3), ("det", 3)]),
    ("browser", "remove the browser __eou__ then download it again", [("verb", 3), ("adv", 3)]),
    ("usb", "format the usb __eou__ then flash ubuntu", [("adp", 3), ("other", 3)]),
    ("firewall", "configure the firewall over ssh", [("pron", 3), ("verb", 3)]),
]

# Twelve words per dropout category, consumed cursor-wise by the topics.
POOLS = {
    "pron": ["i", "me", "we", "you", "he", "she", "it", "they", "them", "his", "her", "its"],
    "det": ["a", "an", "the", "this", "that", "these", "those", "all", "any", "both", "each", "some"],
    "adp": ["about", "at", "by", "for", "with", "into", "through", "during", "before", "after", "from", "between"],
    "verb": ["have", "has", "had", "was", "were", "been", "being", "am", "are", "does", "did", "doing"],
    "adv": ["again", "then", "once", "here", "there", "when", "why", "how", "not", "only", "very", "too"],
    "other": ["and", "but", "or", "if", "because", "as", "until", "while", "nor", "than", "to", "up"],
}

# Held-out filler used by the validation and test sources; never appears in
# the training filler pools above.
HELDOUT_FILLER = [
    "my", "myself", "our", "is", "be", "do", "no", "such", "of", "in",
    "on", "under", "over", "now", "just", "so", "down", "off", "what", "which",
]

ADJECTIVES = ["broken", "stuck", "slow", "dead", "frozen", "weird", "blank", "wrong"]

TRAIN_PER_TOPIC = 30
VALID_PER_TOPIC = 8
TEST_PER_TOPIC = 8


def assign_filler() -> list[list[str]]:
    cursors = {cat: 0 for cat in POOLS}
    blocks = []
    for _, _, spec in TOPIC_SPECS:
        words = []
        for cat, count in spec:
            words += POOLS[cat][cursors[cat] : cursors[cat] + count]
            cursors[cat] += count
        blocks.append(words)
    return blocks


def make_source(rng: random.Random, filler: list[str], keyword: str) -> str:
    words = list(filler)
    rng.shuffle(words)
    adjective = rng.choice(ADJECTIVES)
    marker = rng.choice(["__eou__", "__eot__"])
    if len(words) > 2:
        cut = rng.randrange(1, len(words))
        head, tail = " ".join(words[:cut]), " ".join(words[cut:])
        return f"{head} {marker} {tail} {keyword} {adjective} ?"
    return f"{' '.join(words)} {marker} {keyword} {adjective} ?"


def build_split(split: str, per_topic: int, seed: int) -> list[str]:
    blocks = assign_filler()
    lines = []
    for topic_index, (keyword, response, _) in enumerate(TOPIC_SPECS):
        for j in range(per_topic):
            rng = random.Random((seed, split, topic_index, j).__repr__())
            if split == "train":
                filler = blocks[topic_index]
            else:
                filler = rng.sample(HELDOUT_FILLER, len(blocks[topic_index]))
            lines.append(f"{make_source(rng, filler, keyword)}\t{response}")
    return lines


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    for split, per_topic in (("train", TRAIN_PER_TOPIC), ("valid", VALID_PER_TOPIC), ("test", TEST_PER_TOPIC)):
        lines = build_split(split, per_topic, seed=13)
        path = DATA_DIR / f"{split}.txt"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"wrote {path} ({len(lines)} examples)")


if __name__ == "__main__":
    main()
