#!/usr/bin/env python3
"""Regenerate the checked-in fixture datasets.

Deterministic template-based sentences, small vocabulary. Run from the
repository root; overwrites src/genbench/data/*.
"""

from pathlib import Path
from random import Random

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "genbench" / "data"

SUBJECTS = ["a dog", "a cat", "a man", "a woman", "a child", "a bird",
            "two dogs", "a group of people", "an old man", "a young girl"]
VERBS = ["sits", "stands", "walks", "runs", "sleeps", "plays", "waits", "jumps"]
PLACES = ["on the beach", "in the park", "near the river", "on a wooden bench",
          "under a tree", "next to the fence", "in the kitchen", "on the street",
          "by the window", "in the garden"]
EXTRAS = ["", "at sunset", "with a red ball", "during the rain",
          "while holding an umbrella", "in the afternoon"]


def caption(rng: Random) -> str:
    parts = [rng.choice(SUBJECTS), rng.choice(VERBS), rng.choice(PLACES)]
    extra = rng.choice(EXTRAS)
    if extra:
        parts.append(extra)
    return " ".join(" ".join(parts).split())


def headline(sentence: str, rng: Random) -> str:
    words = sentence.split()
    keep = [w for w in words if w not in ("a", "an", "the", "of", "in", "on",
                                          "by", "to", "next", "while", "with")]
    if len(keep) > 4:
        keep = keep[:4]
    return " ".join(keep)


def main():
    DATA_DIR.mkdir(parents=True, exist_ok=True)

    rng = Random(20240601)
    lines = [caption(rng) for _ in range(500)]
    (DATA_DIR / "coco_mini.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

    rng = Random(20240602)
    sources = [caption(rng) for _ in range(200)]
    targets = [headline(s, rng) for s in sources]
    (DATA_DIR / "giga_mini.src").write_text("\n".join(sources) + "\n", encoding="utf-8")
    (DATA_DIR / "giga_mini.tgt").write_text("\n".join(targets) + "\n", encoding="utf-8")
    print(f"wrote 500 + 2x200 lines under {DATA_DIR}")


if __name__ == "__main__":
    main()
