"""Weak-word detection against a configurable catalog.

Matching is whole-token and case-insensitive: the text is split into tokens
at whitespace/punctuation boundaries (hyphens stay token-internal, so
"certain" never matches inside "ascertain" and "user-friendly" is one
token). Multi-word catalog entries match contiguous token runs separated by
whitespace only. Overlaps resolve longest-match-first, then catalog order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DuplicateEntry, EmptyCatalog
from .model import Finding, Requirement, WeakWordOccurrence, normalize_text

_TOKEN = re.compile(r"\w+(?:-\w+)*")


@dataclass(frozen=True)
class WeakWordCatalog:
    """Ordered list of normalized weak words/phrases."""

    entries: tuple[str, ...]
    source_path: str | None = None
    _order: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.entries:
            raise EmptyCatalog("catalog has no entries")
        seen: dict[str, int] = {}
        for i, entry in enumerate(self.entries):
            if not entry:
                raise ValueError(f"catalog entry {i} is empty")
            if entry != normalize_text(entry):
                raise ValueError(f"catalog entry {entry!r} is not normalized")
            if entry in seen:
                raise DuplicateEntry(f"duplicate catalog entry: {entry!r}")
            seen[entry] = i
        object.__setattr__(self, "_order", seen)

    def order_of(self, entry: str) -> int:
        """Position of an entry in the catalog (used for tie-breaking)."""
        return self._order[entry]

    def __contains__(self, entry: str) -> bool:
        return entry in self._order

    def __len__(self) -> int:
        return len(self.entries)


def catalog_from_words(words: list[str] | tuple[str, ...], source_path: str | None = None) -> WeakWordCatalog:
    """Build a catalog from raw words, normalizing each one."""
    return WeakWordCatalog(tuple(normalize_text(w) for w in words), source_path)


def load_catalog(path: str | Path) -> WeakWordCatalog:
    """Load a catalog file: one entry per line, '#' comments and blanks skipped.

    Duplicate entries (after normalization) are rejected so a typo like
    "Certain " next to "certain" cannot silently shadow an entry.
    """
    path = Path(path)
    entries: list[str] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            entry = normalize_text(line)
            if entry in seen:
                raise DuplicateEntry(f"duplicate catalog entry: {entry!r} ({path})")
            seen.add(entry)
            entries.append(entry)
    if not entries:
        raise EmptyCatalog(f"no entries in catalog file {path}")
    return WeakWordCatalog(tuple(entries), str(path))


def detect(text: str, catalog: WeakWordCatalog) -> list[WeakWordOccurrence]:
    """Find all catalog occurrences in text, ascending and non-overlapping."""
    tokens = [(m.start(), m.end()) for m in _TOKEN.finditer(text)]
    token_norms = [normalize_text(text[s:e]) for s, e in tokens]
    entry_words = [(entry, entry.split(" ")) for entry in catalog.entries]

    occurrences: list[WeakWordOccurrence] = []
    i = 0
    while i < len(tokens):
        best: tuple[int, int, str] | None = None  # (-end, catalog order, entry)
        for entry, words in entry_words:
            j = i + len(words)
            if j > len(tokens):
                continue
            if token_norms[i : j] != words:
                continue
            start, end = tokens[i][0], tokens[j - 1][1]
            # Rejects multi-word runs with punctuation in the gaps: the
            # surface must normalize back to the entry itself.
            if normalize_text(text[start:end]) != entry:
                continue
            key = (-end, catalog.order_of(entry), entry)
            if best is None or key < best:
                best = key
        if best is None:
            i += 1
            continue
        end, entry = -best[0], best[2]
        start = tokens[i][0]
        occurrences.append(
            WeakWordOccurrence(
                surface=text[start:end], catalog_entry=entry, start=start, end=end
            )
        )
        while i < len(tokens) and tokens[i][0] < end:
            i += 1
    return occurrences


def extract_findings(requirement: Requirement, catalog: WeakWordCatalog) -> list[Finding]:
    """One Finding per detected occurrence, in ascending span order."""
    return [
        Finding(requirement=requirement, occurrence=occ)
        for occ in detect(requirement.text, catalog)
    ]
