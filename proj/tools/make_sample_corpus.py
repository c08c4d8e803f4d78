#!/usr/bin/env python3
"""Regenerate data/sample_corpus.jsonl: templated English, byte-fallback tokens."""
import json
import random
import sys

SUBJECTS = ["the model", "a small parser", "the encoder", "our decoder", "the cache", "each window"]
VERBS = ["reads", "writes", "compresses", "expands", "tracks", "merges"]
OBJECTS = ["the token stream", "a long prompt", "repeated phrases", "the codebook", "every new entry"]
TAILS = ["in one pass.", "without loss.", "as it goes.", "at the same time.", "one step at a time."]


def doc(rng, n_sentences):
    out = []
    for _ in range(n_sentences):
        out.append(" ".join([rng.choice(SUBJECTS), rng.choice(VERBS), rng.choice(OBJECTS), rng.choice(TAILS)]))
        if rng.random() < 0.1:
            out.append("def f(x):\n    return x + %d\n" % rng.randint(0, 9))
    return " ".join(out)


def main(path):
    rng = random.Random(2048)
    with open(path, "w", encoding="utf-8") as f:
        for i in range(40):
            text = doc(rng, rng.randint(20, 80))
            f.write(json.dumps({"id": "sample-%02d" % i, "tokens": list(text.encode("utf-8"))}, separators=(",", ":")))
            f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/sample_corpus.jsonl")
