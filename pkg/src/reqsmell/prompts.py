"""Prompt assembly and output parsing.

The output grammar is two strict lines ("Reasoning: ..." then "Label: ...",
label-only without CoT), parsed tolerantly: markdown fences, emphasis
around the prefixes, and trailing punctuation on the label token are all
accepted. Parts of the prompt that other modules rely on (the «…» weak-word
marker, the "Requirement ID:" / "Weak word:" key lines, the example-block
delimiter) are module constants.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import MissingLabel, MissingReasoning
from .model import Finding, Label, Prediction, parse_label
from .detector import catalog_from_words, detect
from .pool import RetrievedShot, ValidatedExample

MARK_OPEN = "«"  # «
MARK_CLOSE = "»"  # »
EXAMPLE_DELIMITER = "### Example"
REASONING_PREFIX = "Reasoning:"
LABEL_PREFIX = "Label:"

LABEL_WORDS = {Label.DEFECT: "defect", Label.NOT_DEFECT: "not defect"}

_TASK_TEXT = (
    "You are reviewing natural-language requirements for quality problems "
    "caused by weak words.\n"
    "A weak word is a vague term (such as \"certain\" or \"appropriate\") whose "
    "meaning is not pinned down by the word itself; whether it causes a real "
    "problem depends on the requirement around it.\n"
    "You will be given one requirement and one weak word occurring in it, "
    f"marked inline with {MARK_OPEN}...{MARK_CLOSE}. Decide whether the marked "
    "weak word makes the requirement ambiguous. Answer \"defect\" if it does, "
    "\"not defect\" if the surrounding context makes the meaning clear."
)

_COT_FORMAT = (
    "Respond with exactly two lines:\n"
    f"{REASONING_PREFIX} <one sentence explaining your decision>\n"
    f"{LABEL_PREFIX} <defect or not defect>"
)

_PLAIN_FORMAT = (
    "Respond with exactly one line:\n"
    f"{LABEL_PREFIX} <defect or not defect>"
)

FORMAT_REMINDER = (
    "Remember: answer using the exact line format "
    f"\"{LABEL_PREFIX} defect\" or \"{LABEL_PREFIX} not defect\"."
)


@dataclass(frozen=True)
class PromptBundle:
    """An assembled prompt plus provenance about the shots inside it."""

    system_text: str
    user_text: str
    shot_blocks: tuple[str, ...]
    cot: bool
    k_used: int


def mark_span(text: str, start: int, end: int) -> str:
    return f"{text[:start]}{MARK_OPEN}{text[start:end]}{MARK_CLOSE}{text[end:]}"


def _mark_first(text: str, weak_word: str) -> str:
    occurrences = detect(text, catalog_from_words([weak_word]))
    if not occurrences:
        return text
    occ = occurrences[0]
    return mark_span(text, occ.start, occ.end)


def render_instance(requirement_id: str, marked_text: str, weak_word: str) -> str:
    """The shared input structure for shots and the target instance."""
    return (
        f"Requirement ID: {requirement_id}\n"
        f"Weak word: {weak_word}\n"
        f"Requirement: {marked_text}"
    )


def render_answer(reasoning: str, label: Label, cot: bool) -> str:
    """The expected output shape; parse_output inverts this exactly."""
    line = f"{LABEL_PREFIX} {LABEL_WORDS[label]}"
    if cot:
        return f"{REASONING_PREFIX} {reasoning}\n{line}"
    return line


def render_shot(example: ValidatedExample, cot: bool) -> str:
    """One example as an input-output pair, weak word marked like the target."""
    instance = render_instance(
        example.requirement_id, _mark_first(example.text, example.weak_word), example.weak_word
    )
    return f"{instance}\n{render_answer(example.reasoning, example.label, cot)}"


def build_prompt(finding: Finding, shots: list[RetrievedShot], cot: bool) -> PromptBundle:
    """Assemble system and user texts for one finding.

    ``shots`` must already be in retrieval order (ascending similarity), so
    the most similar example ends up last, closest to the new instance.
    """
    blocks = tuple(render_shot(shot.example, cot) for shot in shots)
    parts = [_TASK_TEXT, _COT_FORMAT if cot else _PLAIN_FORMAT]
    for block in blocks:
        parts.append(f"{EXAMPLE_DELIMITER}\n{block}")
    occ = finding.occurrence
    user_text = render_instance(
        finding.requirement.id,
        mark_span(finding.requirement.text, occ.start, occ.end),
        occ.catalog_entry,
    )
    return PromptBundle(
        system_text="\n\n".join(parts),
        user_text=user_text,
        shot_blocks=blocks,
        cot=cot,
        k_used=len(blocks),
    )


_FENCE = re.compile(r"^\s*```")
_LABEL_LINE = re.compile(r"^\s*[*_#>\s]*label[*_]*\s*:\s*(.*)$", re.IGNORECASE)
_REASONING_LINE = re.compile(r"^\s*[*_#>\s]*reasoning[*_]*\s*:\s*(.*)$", re.IGNORECASE)


def parse_output(raw: str, cot: bool) -> Prediction:
    """Parse backend output into a Prediction.

    Raises MissingLabel when no label line exists, MissingReasoning when CoT
    output lacks a reasoning sentence, and UnknownLabel for a label token
    outside the grammar.
    """
    lines = [line for line in raw.splitlines() if not _FENCE.match(line)]
    label_at: int | None = None
    label_token = ""
    for i, line in enumerate(lines):
        m = _LABEL_LINE.match(line)
        if m:
            label_at, label_token = i, m.group(1)
    if label_at is None:
        raise MissingLabel(f"no {LABEL_PREFIX!r} line in output: {raw!r}")
    label = parse_label(label_token.strip().strip("*_`\"'").rstrip(".!").strip())

    reasoning = ""
    for i, line in enumerate(lines[:label_at]):
        m = _REASONING_LINE.match(line)
        if m:
            tail = lines[i + 1 : label_at]
            reasoning = "\n".join([m.group(1), *tail]).strip()
            break
    if cot and not reasoning:
        raise MissingReasoning(f"no {REASONING_PREFIX!r} line in CoT output: {raw!r}")
    return Prediction(label=label, reasoning=reasoning, raw_output=raw)
