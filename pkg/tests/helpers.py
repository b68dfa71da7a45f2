"""Constructors shared across test modules."""

from __future__ import annotations

import random
from datetime import datetime, timezone

from reqsmell import DeterministicLocalProvider, Label, ValidatedExample
from reqsmell.harness.dataset import DatasetRecord

WORDS = ("certain", "appropriate", "adequate", "some", "several")

_NOUNS = (
    "sensor", "gateway", "display", "battery", "antenna", "logger",
    "actuator", "controller", "modem", "camera",
)
_VERBS = ("report", "store", "transmit", "filter", "archive", "encrypt")


def sentence(rng: random.Random, word: str) -> str:
    """A requirement-shaped sentence containing the given weak word once."""
    return (
        f"The {rng.choice(_NOUNS)} shall {rng.choice(_VERBS)} "
        f"{word} {rng.choice(_NOUNS)} values within "
        f"{rng.randint(1, 900)} ms."
    )


def make_record(i: int, label: Label, rng: random.Random | None = None,
                word: str | None = None) -> DatasetRecord:
    rng = rng or random.Random(i)
    word = word or WORDS[i % len(WORDS)]
    return DatasetRecord(
        id=f"R{i:04d}", text=sentence(rng, word), weak_word=word, label=label
    )


def toy_dataset(n: int, seed: int = 0) -> list[DatasetRecord]:
    """n records, exactly half defect (n must be even), distinct ids."""
    assert n % 2 == 0
    rng = random.Random(seed)
    return [
        make_record(i, Label.DEFECT if i < n // 2 else Label.NOT_DEFECT, rng)
        for i in range(n)
    ]


def make_example(
    i: int,
    label: Label,
    provider: DeterministicLocalProvider,
    text: str | None = None,
    word: str = "certain",
    requirement_id: str | None = None,
    reasoning: str | None = None,
) -> ValidatedExample:
    text = text or sentence(random.Random(i), word)
    return ValidatedExample(
        example_id=f"ex-{i:04d}",
        requirement_id=requirement_id or f"R{i:04d}",
        text=text,
        weak_word=word,
        reasoning=reasoning or f"Explanation {i} for the marked word.",
        label=label,
        embedding=provider.embed(text),
        source="simulated",
        validated_at=datetime(2024, 5, 1, 12, 0, tzinfo=timezone.utc),
    )
