import pytest
from hypothesis import given, strategies as st

from fuzzsem.groundtruth import OutcomeLabel, duration_histogram, label_outcome, read_manifest, write_manifest
from fuzzsem.ingest import parse_lines


def _doc(*events):
    """events: (elapsed_ms, content) pairs starting at 10:00:00.000."""
    base = 36_000_000
    lines = []
    for off, content in events:
        ts = base + off
        h, rem = divmod(ts, 3_600_000)
        m, rem = divmod(rem, 60_000)
        s, ms = divmod(rem, 1000)
        lines.append(f"{h:02d}:{m:02d}:{s:02d}.{ms:03d} [RRC ] Info {content}")
    return parse_lines(lines)


def test_keyword_found():
    doc = _doc((0, "start"), (12_400, "Rx rrcConnectionSetupComplete rnti=0x46"))
    lab = label_outcome(doc)
    assert lab == OutcomeLabel(1, matched_at_ms=36_012_400, duration_s=12)


def test_keyword_absent():
    assert label_outcome(_doc((0, "start"), (5000, "rrcConnectionSetup"))) == OutcomeLabel(0)


def test_keyword_past_timeout():
    doc = _doc((0, "start"), (700_000, "rrcConnectionSetupComplete"))
    assert label_outcome(doc, timeout_s=600).label == 0
    assert label_outcome(doc, timeout_s=800).label == 1


def test_keyword_is_case_sensitive_substring():
    doc = _doc((0, "xxrrcConnectionSetupCompletexx"), (1000, "rrcconnectionsetupcomplete"))
    assert label_outcome(doc).duration_s == 0
    assert label_outcome(_doc((0, "RRCCONNECTIONSETUPCOMPLETE"))).label == 0


def test_first_match_wins():
    doc = _doc((0, "a"), (3000, "rrcConnectionSetupComplete"), (9000, "rrcConnectionSetupComplete"))
    assert label_outcome(doc).duration_s == 3


def test_label_argument_validation():
    doc = _doc((0, "a"))
    with pytest.raises(ValueError):
        label_outcome(doc, keyword="")
    with pytest.raises(ValueError):
        label_outcome(doc, timeout_s=0)


def test_outcome_invariants():
    with pytest.raises(ValueError):
        OutcomeLabel(1)
    with pytest.raises(ValueError):
        OutcomeLabel(0, matched_at_ms=5, duration_s=0)


@given(st.integers(0, 900_000), st.floats(1, 1000), st.floats(0, 1000))
def test_timeout_monotone(offset, t1, extra):
    doc = _doc((0, "a"), (offset, "rrcConnectionSetupComplete"))
    if label_outcome(doc, timeout_s=t1).label == 1:
        assert label_outcome(doc, timeout_s=t1 + extra).label == 1


def test_histogram_examples():
    labs = [OutcomeLabel(1, 0, 12), OutcomeLabel(1, 0, 12), OutcomeLabel(1, 0, 15), OutcomeLabel(0)]
    assert duration_histogram(labs, 5) == {(10, 15): 2, (15, 20): 1}
    assert duration_histogram([OutcomeLabel(0)] * 3, 5) == {}
    assert duration_histogram([OutcomeLabel(1, 0, 0)], 1) == {(0, 1): 1}
    with pytest.raises(ValueError):
        duration_histogram(labs, 0)


def test_manifest_round_trip(tmp_path):
    rows = [("a.log", OutcomeLabel(1, 5, 3)), ("b.log", OutcomeLabel(0))]
    write_manifest(tmp_path / "labels.csv", rows)
    assert (tmp_path / "labels.csv").read_text().splitlines()[0] == "source_path,label,duration_s"
    assert read_manifest(tmp_path / "labels.csv") == {"a.log": (1, 3), "b.log": (0, None)}
