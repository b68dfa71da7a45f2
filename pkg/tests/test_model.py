import pytest

from reqsmell import Label, normalize_text, parse_label
from reqsmell.errors import UnknownLabel
from reqsmell.model import Finding, Prediction, Requirement, WeakWordOccurrence


def test_normalize_collapses_case_and_whitespace():
    assert normalize_text("  The  System\tSHALL   ") == "the system shall"


def test_normalize_applies_nfc():
    # e + combining acute == precomposed é after NFC
    assert normalize_text("café") == normalize_text("café")


def test_normalize_is_idempotent():
    for s in ["Certain", "  a  b  ", "MiXeD\n\twords", "café"]:
        once = normalize_text(s)
        assert normalize_text(once) == once


def test_label_values_are_wire_stable():
    assert Label.DEFECT.value == "defect"
    assert Label.NOT_DEFECT.value == "not_defect"
    assert str(Label.DEFECT) == "defect"


@pytest.mark.parametrize(
    "token,expected",
    [
        ("defect", Label.DEFECT),
        ("Defect", Label.DEFECT),
        ("DEFECT", Label.DEFECT),
        ("not defect", Label.NOT_DEFECT),
        ("Not Defect", Label.NOT_DEFECT),
        ("not_defect", Label.NOT_DEFECT),
        ("no defect", Label.NOT_DEFECT),
        ("  not   defect  ", Label.NOT_DEFECT),
    ],
)
def test_parse_label_accepted_tokens(token, expected):
    assert parse_label(token) is expected


@pytest.mark.parametrize("token", ["defective", "yes", "", "ambiguous", "notdefect"])
def test_parse_label_rejects_unknown_tokens(token):
    with pytest.raises(UnknownLabel):
        parse_label(token)


def test_requirement_rejects_empty_fields():
    with pytest.raises(ValueError):
        Requirement(id="", text="something")
    with pytest.raises(ValueError):
        Requirement(id="R1", text="   ")


def test_occurrence_surface_must_normalize_to_entry():
    occ = WeakWordOccurrence(surface="Certain", catalog_entry="certain", start=0, end=7)
    assert occ.catalog_entry == "certain"
    with pytest.raises(ValueError):
        WeakWordOccurrence(surface="various", catalog_entry="certain", start=0, end=7)
    with pytest.raises(ValueError):
        WeakWordOccurrence(surface="certain", catalog_entry="certain", start=5, end=5)


def test_finding_checks_span_against_text():
    req = Requirement(id="R1", text="Use certain values.")
    occ = WeakWordOccurrence(surface="certain", catalog_entry="certain", start=4, end=11)
    finding = Finding(requirement=req, occurrence=occ)
    assert finding.requirement.text[occ.start : occ.end] == "certain"

    shifted = WeakWordOccurrence(surface="certain", catalog_entry="certain", start=5, end=12)
    with pytest.raises(ValueError):
        Finding(requirement=req, occurrence=shifted)
    beyond = WeakWordOccurrence(surface="certain", catalog_entry="certain", start=30, end=37)
    with pytest.raises(ValueError):
        Finding(requirement=req, occurrence=beyond)


def test_prediction_allows_empty_reasoning_for_plain_mode():
    p = Prediction(label=Label.DEFECT, reasoning="", raw_output="Label: defect")
    assert p.reasoning == ""
