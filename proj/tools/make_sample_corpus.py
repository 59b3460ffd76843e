#!/usr/bin/env python3
"""Generate the bundled sample text corpus.

The corpus is synthetic: pseudo-words built from syllables, a Zipf-distributed
background vocabulary shared by every class, and a small set of topic words
per class. Output lines are `<label>\t<text>`.

    python3 tools/make_sample_corpus.py --out-dir tests/data
"""

import argparse
import random
from pathlib import Path

TOPICS = ["astronomy", "cooking", "finance", "sailing"]
SYLLABLES = [
    c + v
    for c in "bdfgklmnprstvz"
    for v in ("a", "e", "i", "o", "u", "ai", "ou")
]


def make_words(rng, count, taken):
    words = []
    while len(words) < count:
        w = "".join(rng.choice(SYLLABLES) for _ in range(rng.randint(2, 4)))
        if w not in taken:
            taken.add(w)
            words.append(w)
    return words


def make_document(rng, label, background, weights, topic_words):
    length = rng.randint(20, 60)
    tokens = []
    for _ in range(length):
        r = rng.random()
        if r < 0.18:
            tokens.append(rng.choice(topic_words[label]))
        elif r < 0.22:
            other = rng.choice([t for t in topic_words if t != label])
            tokens.append(rng.choice(topic_words[other]))
        else:
            tokens.append(rng.choices(background, weights)[0])
    return " ".join(tokens)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="tests/data")
    ap.add_argument("--train", type=int, default=2400)
    ap.add_argument("--test", type=int, default=600)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--topic-words", type=int, default=16)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    taken = set()
    background = make_words(rng, 4000, taken)
    weights = [1.0 / (rank + 1) ** 0.9 for rank in range(len(background))]
    topic_words = {t: make_words(rng, args.topic_words, taken) for t in TOPICS}

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, n in (("train", args.train), ("test", args.test)):
        with open(out / f"sample_corpus_{name}.tsv", "w", encoding="utf-8") as f:
            for i in range(n):
                label = TOPICS[i % len(TOPICS)]
                f.write(f"{label}\t{make_document(rng, label, background, weights, topic_words)}\n")


if __name__ == "__main__":
    main()
