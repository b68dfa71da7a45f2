"""Core domain types: requirements, weak-word occurrences, findings, labels.

Everything here is an immutable value object; all text handling funnels
through :func:`normalize_text` so that matching, dedup, and catalog lookup
agree on one normal form.
"""

from __future__ import annotations

import enum
import re
import unicodedata
from dataclasses import dataclass

from .errors import UnknownLabel

_WS_RUN = re.compile(r"\s+")


def normalize_text(s: str) -> str:
    """Unicode NFC, lowercased, whitespace runs collapsed, trimmed."""
    return _WS_RUN.sub(" ", unicodedata.normalize("NFC", s).lower()).strip()


class Label(str, enum.Enum):
    """Binary verdict for a weak-word occurrence; DEFECT is the positive class."""

    DEFECT = "defect"
    NOT_DEFECT = "not_defect"

    def __str__(self) -> str:
        return self.value


_LABEL_TOKENS = {
    "defect": Label.DEFECT,
    "not defect": Label.NOT_DEFECT,
    "not_defect": Label.NOT_DEFECT,
    "no defect": Label.NOT_DEFECT,
}


def parse_label(token: str) -> Label:
    """Map a label token to a Label, case-insensitively and trimmed.

    Raises UnknownLabel for anything outside the accepted token set.
    """
    key = _WS_RUN.sub(" ", token.strip().lower())
    try:
        return _LABEL_TOKENS[key]
    except KeyError:
        raise UnknownLabel(f"not a label token: {token!r}") from None


@dataclass(frozen=True)
class Requirement:
    """One natural-language requirement."""

    id: str
    text: str

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("requirement id must be non-empty")
        if not self.text.strip():
            raise ValueError(f"requirement {self.id}: text must be non-empty")


@dataclass(frozen=True)
class WeakWordOccurrence:
    """A matched weak word: the exact surface, its catalog form, and its span.

    Offsets are 0-based character offsets into the requirement text,
    end-exclusive.
    """

    surface: str
    catalog_entry: str
    start: int
    end: int

    def __post_init__(self) -> None:
        if not (0 <= self.start < self.end):
            raise ValueError(f"invalid span [{self.start}, {self.end})")
        if normalize_text(self.surface) != self.catalog_entry:
            raise ValueError(
                f"surface {self.surface!r} does not normalize to catalog entry "
                f"{self.catalog_entry!r}"
            )


@dataclass(frozen=True)
class Finding:
    """The classification input: a requirement plus one weak-word occurrence."""

    requirement: Requirement
    occurrence: WeakWordOccurrence

    def __post_init__(self) -> None:
        text = self.requirement.text
        occ = self.occurrence
        if occ.end > len(text):
            raise ValueError(f"span end {occ.end} beyond text length {len(text)}")
        if text[occ.start : occ.end] != occ.surface:
            raise ValueError(
                f"text[{occ.start}:{occ.end}] is {text[occ.start:occ.end]!r}, "
                f"not the recorded surface {occ.surface!r}"
            )


@dataclass(frozen=True)
class Prediction:
    """A parsed backend verdict: label plus the reasoning sentence behind it.

    ``reasoning`` may be empty in non-CoT mode; ``raw_output`` keeps the
    verbatim backend text for audit.
    """

    label: Label
    reasoning: str
    raw_output: str
