"""Append-only pool of validated examples with balanced shot retrieval.

Records live in memory in append order and, when a path is attached, in a
JSONL file with one record per line. Retrieval is exact (no index): pools
stay small, a few hundred records at most.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .detector import catalog_from_words, detect
from .embeddings import EmbeddingVector, cosine_similarity
from .errors import CorruptRecord, DimensionMismatch, DuplicateExampleId
from .model import Label

SOURCES = ("llm_accepted", "user_corrected", "simulated")


@dataclass(frozen=True)
class ValidatedExample:
    """A human-vetted (requirement, weak word, reasoning, label) record."""

    example_id: str
    requirement_id: str
    text: str
    weak_word: str
    reasoning: str
    label: Label
    embedding: EmbeddingVector
    source: str
    validated_at: datetime

    def __post_init__(self) -> None:
        if not self.example_id:
            raise ValueError("example_id must be non-empty")
        if not self.reasoning.strip():
            raise ValueError(f"example {self.example_id}: reasoning must be non-empty")
        if self.source not in SOURCES:
            raise ValueError(f"example {self.example_id}: unknown source {self.source!r}")
        if not detect(self.text, catalog_from_words([self.weak_word])):
            raise ValueError(
                f"example {self.example_id}: weak word {self.weak_word!r} "
                f"does not occur in its text"
            )


@dataclass(frozen=True)
class RetrievedShot:
    """One retrieved example with its cosine similarity to the target."""

    example: ValidatedExample
    similarity: float


def record_to_json(example: ValidatedExample) -> dict:
    return {
        "example_id": example.example_id,
        "requirement_id": example.requirement_id,
        "text": example.text,
        "weak_word": example.weak_word,
        "reasoning": example.reasoning,
        "label": example.label.value,
        "embedding": list(example.embedding.values),
        "source": example.source,
        "validated_at": example.validated_at.isoformat(),
    }


def record_from_json(doc: dict) -> ValidatedExample:
    embedding = [float(v) for v in doc["embedding"]]
    return ValidatedExample(
        example_id=doc["example_id"],
        requirement_id=doc["requirement_id"],
        text=doc["text"],
        weak_word=doc["weak_word"],
        reasoning=doc["reasoning"],
        label=Label(doc["label"]),
        embedding=EmbeddingVector(tuple(embedding), len(embedding)),
        source=doc["source"],
        validated_at=datetime.fromisoformat(doc["validated_at"]),
    )


class ShotPool:
    """Append-only example store; single writer, concurrent readers."""

    def __init__(self, dim: int | None = None, path: str | Path | None = None):
        self.dim = dim
        self.path = Path(path) if path is not None else None
        self.records: list[ValidatedExample] = []
        self._ids: set[str] = set()
        self._write_lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.records)

    def append_validated(self, example: ValidatedExample) -> None:
        """Add one record, persisting it before returning."""
        with self._write_lock:
            if example.example_id in self._ids:
                raise DuplicateExampleId(f"example id already in pool: {example.example_id}")
            if self.dim is None:
                self.dim = example.embedding.dim
            elif example.embedding.dim != self.dim:
                raise DimensionMismatch(
                    f"example dim {example.embedding.dim} != pool dim {self.dim}"
                )
            if self.path is not None:
                line = json.dumps(record_to_json(example), ensure_ascii=False)
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(line + "\n")
                    fh.flush()
            self.records.append(example)
            self._ids.add(example.example_id)

    def retrieve_balanced(
        self,
        target: EmbeddingVector,
        k: int,
        exclude_requirement_id: str | None = None,
    ) -> list[RetrievedShot]:
        """Up to k/2 most-similar examples per class, most similar last.

        Records sharing the excluded requirement id are skipped entirely so
        a target can never be shown its own gold record. The merged result
        is ordered by ascending similarity, ties by ascending example_id.
        """
        if k % 2 != 0 or k < 0:
            raise ValueError(f"k must be a non-negative even integer, got {k}")
        if k == 0 or not self.records:
            return []
        if target.dim != self.dim:
            raise DimensionMismatch(f"target dim {target.dim} != pool dim {self.dim}")
        per_class: dict[Label, list[tuple[float, ValidatedExample]]] = {
            Label.DEFECT: [],
            Label.NOT_DEFECT: [],
        }
        for record in self.records:
            if record.requirement_id == exclude_requirement_id:
                continue
            sim = cosine_similarity(target, record.embedding)
            per_class[record.label].append((sim, record))
        picked: list[RetrievedShot] = []
        for scored in per_class.values():
            scored.sort(key=lambda pair: (-pair[0], pair[1].example_id))
            picked.extend(
                RetrievedShot(example=r, similarity=s) for s, r in scored[: k // 2]
            )
        picked.sort(key=lambda shot: (shot.similarity, shot.example.example_id))
        return picked

    def stats(self) -> dict:
        counts = {Label.DEFECT: 0, Label.NOT_DEFECT: 0}
        for record in self.records:
            counts[record.label] += 1
        return {
            "total": len(self.records),
            "per_label": {label.value: n for label, n in counts.items()},
            "dim": self.dim,
        }

    def snapshot(self) -> "ShotPool":
        """Detached in-memory copy; later appends to self are not visible."""
        copy = ShotPool(dim=self.dim)
        copy.records = list(self.records)
        copy._ids = set(self._ids)
        return copy


def pool_stats(pool: ShotPool) -> dict:
    return pool.stats()


def load_pool(path: str | Path, expected_dim: int | None = None) -> ShotPool:
    """Load a JSONL pool file; an absent file yields an empty pool."""
    path = Path(path)
    pool = ShotPool(dim=expected_dim, path=path)
    if not path.exists():
        return pool
    with open(path, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                raise CorruptRecord(line_number, "blank line")
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorruptRecord(line_number, f"invalid JSON ({exc.msg})") from None
            try:
                record = record_from_json(doc)
            except DimensionMismatch:
                raise
            except (KeyError, TypeError, ValueError) as exc:
                raise CorruptRecord(line_number, str(exc)) from None
            persist_path, pool.path = pool.path, None
            try:
                pool.append_validated(record)
            except DuplicateExampleId as exc:
                raise CorruptRecord(line_number, str(exc)) from None
            finally:
                pool.path = persist_path
    return pool


def utc_now() -> datetime:
    return datetime.now(timezone.utc)
