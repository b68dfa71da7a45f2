"""Annotated dataset records and the dedup/undersample preparation step."""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass
from pathlib import Path

from ..detector import WeakWordCatalog, catalog_from_words, detect
from ..model import Finding, Label, Requirement

DATASET_FIELDS = ("id", "text", "weak_word", "label")


@dataclass(frozen=True)
class DatasetRecord:
    """One annotated weak-word instance: requirement text plus gold label."""

    id: str
    text: str
    weak_word: str
    label: Label

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("dataset record id must be non-empty")
        if not detect(self.text, catalog_from_words([self.weak_word])):
            raise ValueError(
                f"record {self.id}: weak word {self.weak_word!r} not detectable in text"
            )


def read_dataset(path: str | Path) -> list[DatasetRecord]:
    """Read records from JSONL (default) or CSV (by .csv extension)."""
    path = Path(path)
    rows: list[dict] = []
    if path.suffix.lower() == ".csv":
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
    else:
        with open(path, encoding="utf-8") as fh:
            rows = [json.loads(line) for line in fh if line.strip()]
    return [
        DatasetRecord(
            id=str(row["id"]),
            text=row["text"],
            weak_word=row["weak_word"],
            label=Label(row["label"]),
        )
        for row in rows
    ]


def finding_for_record(record: DatasetRecord) -> Finding:
    """The record's annotated occurrence as a Finding (first match wins)."""
    requirement = Requirement(id=record.id, text=record.text)
    occurrence = detect(record.text, catalog_from_words([record.weak_word]))[0]
    return Finding(requirement=requirement, occurrence=occurrence)


def write_dataset(records: list[DatasetRecord], path: str | Path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            doc = {"id": r.id, "text": r.text, "weak_word": r.weak_word, "label": r.label.value}
            fh.write(json.dumps(doc, ensure_ascii=False) + "\n")


def _keep_key(record: DatasetRecord, catalog: WeakWordCatalog | None) -> tuple[int, str]:
    if catalog is not None and record.weak_word in catalog:
        return catalog.order_of(record.weak_word), record.weak_word
    return len(catalog) if catalog is not None else 0, record.weak_word


def prepare_dataset(
    records: list[DatasetRecord],
    seed: int,
    catalog: WeakWordCatalog | None = None,
) -> list[DatasetRecord]:
    """Deduplicate per requirement, then undersample toward class balance.

    A requirement appearing with several weak-word instances keeps exactly
    one: a defect instance when it has any (defect is the class we must not
    lose), picked by lowest catalog order then lexicographic weak word.
    Afterwards the not_defect majority is undersampled (seeded, uniform) to
    the defect count; defect records are never dropped. Output is sorted by
    id, so two runs with the same seed are identical.
    """
    by_requirement: dict[str, list[DatasetRecord]] = {}
    for record in records:
        by_requirement.setdefault(record.id, []).append(record)

    kept: list[DatasetRecord] = []
    for instances in by_requirement.values():
        defects = [r for r in instances if r.label is Label.DEFECT]
        candidates = defects if defects else instances
        kept.append(min(candidates, key=lambda r: _keep_key(r, catalog)))

    defect_records = sorted((r for r in kept if r.label is Label.DEFECT), key=lambda r: r.id)
    other_records = sorted((r for r in kept if r.label is Label.NOT_DEFECT), key=lambda r: r.id)
    if len(other_records) > len(defect_records):
        rng = random.Random(seed)
        other_records = rng.sample(other_records, len(defect_records))
    return sorted(defect_records + other_records, key=lambda r: r.id)
