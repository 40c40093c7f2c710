import string

import pytest
from hypothesis import given, strategies as st

from fuzzsem import ingest
from fuzzsem.ingest import EmptyDocument, Level, LogRecord, group_records, normalize_content, parse_line

RLC_LINE = "17:52:25.246 [RLC ] Info DRB1 Tx SDU"
PHY_LINE = "17:52:26.094 [PHY1] Info [05788] PDSCH: l_crb=1, harq=0, ..."


def test_parse_rlc_line():
    rec = parse_line(RLC_LINE)
    assert rec == LogRecord(timestamp_ms=64_345_246, layer="RLC", level=Level.INFO, content="DRB1 Tx SDU")


def test_parse_phy_line():
    rec = parse_line(PHY_LINE)
    assert rec.timestamp_ms == 64_346_094
    assert rec.layer == "PHY1"
    assert rec.level is Level.INFO
    assert rec.subframe == 5788
    assert rec.channel == "PDSCH"
    assert rec.content == "l_crb=1, harq=0, ..."


def test_parse_full_phy_example():
    line = (
        "17:52:26.094 [PHY1] Info [05788] PDSCH: l_crb=1, harq=0, snr= 22.1 dB, CW0: tbs=55, "
        "mcs=22, rv=0, crc=OK, it=1, dec_time=12 us"
    )
    rec = parse_line(line)
    assert rec.channel == "PDSCH"
    assert rec.content.endswith("dec_time=12 us")


@pytest.mark.parametrize(
    "line",
    ["", "   ", "             0000: 40 01 0a 1b", "==== srsENB started ====", "25:00:00.000 [RLC ] Info x"],
)
def test_non_records_are_skipped(line):
    assert parse_line(line) is None


def test_level_is_case_insensitive_and_unknown_maps_to_info():
    assert parse_line("00:00:01.000 [MAC ] ERROR boom").level is Level.ERROR
    assert parse_line("00:00:01.000 [MAC ] warning boom").level is Level.WARNING
    before = ingest.unknown_level_count
    rec = parse_line("00:00:01.000 [MAC ] Verbose boom")
    assert rec.level is Level.INFO
    assert ingest.unknown_level_count == before + 1


@pytest.mark.parametrize(
    "raw, expected",
    [("l_crb=1, harq=0", "l crb 1 harq 0"), ("DRB1 Tx SDU", "DRB1 Tx SDU"), ("***", ""), ("  a--B  ", "a B")],
)
def test_normalize_examples(raw, expected):
    assert normalize_content(raw) == expected


@given(st.text())
def test_normalize_idempotent_and_alphabet(text):
    once = normalize_content(text)
    assert normalize_content(once) == once
    assert all(tok and tok.isascii() and tok.isalnum() for tok in once.split(" ")) or once == ""
    assert "  " not in once and once == once.strip()


def _rec(ts, content="x"):
    return LogRecord(timestamp_ms=ts, layer="RLC", level=Level.INFO, content=content)


def test_group_same_timestamp():
    groups = group_records([_rec(64_345_246, "a=1"), _rec(64_345_246, "b")])
    assert len(groups) == 1
    assert groups[0].elapsed_s == 0
    assert groups[0].text == "a 1 b"
    assert groups[0].n_records == 2


def test_group_midnight_wrap():
    first = ((23 * 60 + 59) * 60 + 59) * 1000 + 900
    groups = group_records([_rec(first), _rec(200)])
    assert [g.elapsed_s for g in groups] == [0, 0]


def test_group_floor_seconds():
    groups = group_records([_rec(1_000), _rec(6_400)])
    assert [g.elapsed_s for g in groups] == [0, 5]


def test_group_per_second_mode():
    groups = group_records([_rec(1_100), _rec(1_900), _rec(2_050)], per_second=True)
    assert [g.n_records for g in groups] == [2, 1]
    assert [g.elapsed_s for g in groups] == [0, 0]


def test_group_requires_records():
    with pytest.raises(ValueError):
        group_records([])


records_st = st.lists(
    st.builds(
        _rec,
        st.integers(0, ingest.MS_PER_DAY - 1),
        st.text(alphabet=string.printable, min_size=1).filter(lambda s: s.strip()),
    ),
    min_size=1,
    max_size=40,
)


@given(records_st)
def test_group_completeness_and_order(records):
    # keep runs shorter than a day, as the wrap rule assumes
    base = records[0].timestamp_ms
    records = [_rec((base + (r.timestamp_ms - base) % 3_600_000) % ingest.MS_PER_DAY, r.content) for r in records]
    groups = group_records(records)
    assert sum(g.n_records for g in groups) == len(records)
    assert len({g.timestamp_ms for g in groups}) == len(groups)
    el = [g.elapsed_s for g in groups]
    assert el == sorted(el) and el[0] == 0


layer_st = st.text(alphabet=string.ascii_uppercase + string.digits, min_size=1, max_size=4)
content_st = st.text(alphabet=string.ascii_letters + string.digits + " =,.:_-()", min_size=1, max_size=60).map(
    str.strip
).filter(lambda s: s and not s.startswith("["))


@given(
    st.integers(0, ingest.MS_PER_DAY - 1),
    layer_st,
    st.sampled_from(list(Level)),
    content_st,
    st.one_of(st.none(), st.tuples(st.integers(0, 99999), st.sampled_from(["PDSCH", "PUSCH", "PUCCH"]))),
)
def test_round_trip(ts, layer, level, content, phy):
    sub, chan = phy if phy else (None, None)
    rec = LogRecord(ts, layer, level, content, sub, chan)
    assert parse_line(rec.to_line()) == rec


def test_parse_file_distinct_and_shared(tmp_path):
    f = tmp_path / "a.log"
    f.write_text(RLC_LINE + "\n" + PHY_LINE + "\n")
    doc = ingest.parse_file(f)
    assert (len(doc.records), len(doc.groups)) == (2, 2)
    assert doc.source_path == str(f)

    f.write_text(RLC_LINE + "\n" + "17:52:25.246 [MAC ] Debug other\n")
    doc = ingest.parse_file(f)
    assert (len(doc.records), len(doc.groups)) == (2, 1)


def test_continuation_lines_attach_to_previous(tmp_path):
    f = tmp_path / "hex.log"
    f.write_text("banner line first\n" + RLC_LINE + "\n             0000: 40 01 0a\n\n" + PHY_LINE + "\n")
    doc = ingest.parse_file(f)
    assert len(doc.records) == 2
    assert doc.records[0].content == "DRB1 Tx SDU 0000: 40 01 0a"
    assert doc.groups[0].text == "DRB1 Tx SDU 0000 40 01 0a"


def test_binary_garbage_is_empty_document(tmp_path):
    f = tmp_path / "junk.bin"
    f.write_bytes(bytes(range(256)) * 8)
    with pytest.raises(EmptyDocument):
        ingest.parse_file(f)


def test_invalid_utf8_is_lossy(tmp_path):
    f = tmp_path / "bad.log"
    f.write_bytes(b"17:52:25.246 [RLC ] Info caf\xe9 \xff ok\n")
    doc = ingest.parse_file(f)
    assert doc.groups[0].text == "caf ok"


def test_exclude_drops_records_from_groups_only():
    lines = [RLC_LINE, "17:52:27.000 [RRC ] Info rrcConnectionSetupComplete", "17:52:28.000 [RLC ] Info tail"]
    doc = ingest.parse_lines(lines, exclude="rrcConnectionSetupComplete")
    assert len(doc.records) == 3
    assert [g.text for g in doc.groups] == ["DRB1 Tx SDU", "tail"]
    assert [g.elapsed_s for g in doc.groups] == [0, 2]
