"""Corpus parsing, serialization round-trips, the kern subset, and table output."""

import json
from fractions import Fraction

import pytest

from melic.corpus import (
    Corpus,
    CorpusError,
    CorpusMeta,
    KernError,
    Melody,
    NoteEvent,
    SchemaError,
    parse_canonical,
    parse_kern_subset,
    serialize_canonical,
    write_table,
)

CANONICAL = {
    "corpus_id": "demo",
    "type": "Folk",
    "region": "nowhere",
    "composer_birth_year": None,
    "melodies": [
        {
            "id": "m1",
            "key": 7,
            "notes": [
                {"pitch": 60, "onset": "0/1", "duration": "1/2"},
                {"pitch": None, "onset": "1/2", "duration": "1/4"},
                {"pitch": 62, "onset": "3/4", "duration": "3/4"},
            ],
        }
    ],
}


def test_parse_canonical_basic():
    corpus = parse_canonical(json.dumps(CANONICAL))
    assert corpus.meta.corpus_id == "demo"
    m = corpus.melodies[0]
    assert m.key_annotation == 7
    assert m.events[0].duration == Fraction(1, 2)
    assert m.events[1].is_rest
    assert m.events[2].onset == Fraction(3, 4)


def test_round_trip():
    corpus = parse_canonical(json.dumps(CANONICAL))
    again = parse_canonical(serialize_canonical(corpus))
    assert again == corpus


def test_parse_accepts_bytes():
    corpus = parse_canonical(json.dumps(CANONICAL).encode("utf-8"))
    assert corpus.meta.corpus_id == "demo"


def test_malformed_json_reports_position():
    with pytest.raises(CorpusError, match=r"line \d+, column \d+"):
        parse_canonical('{"corpus_id": "x",')


def test_missing_field():
    bad = dict(CANONICAL)
    del bad["melodies"]
    with pytest.raises(CorpusError, match="melodies"):
        parse_canonical(json.dumps(bad))


def test_bad_rational():
    bad = json.loads(json.dumps(CANONICAL))
    bad["melodies"][0]["notes"][0]["onset"] = "1/0"
    with pytest.raises(CorpusError, match="rational"):
        parse_canonical(json.dumps(bad))


def test_float_pitch_rejected():
    bad = json.loads(json.dumps(CANONICAL))
    bad["melodies"][0]["notes"][0]["pitch"] = 60.5
    with pytest.raises(CorpusError, match="pitch"):
        parse_canonical(json.dumps(bad))


def test_unknown_corpus_type():
    with pytest.raises(CorpusError, match="type"):
        CorpusMeta(corpus_id="x", type="Pop")


def test_melody_invariants():
    with pytest.raises(CorpusError, match="non-rest"):
        Melody(id="r", events=(NoteEvent(None, Fraction(0), Fraction(1)),))
    with pytest.raises(CorpusError, match="positive"):
        Melody(id="d", events=(NoteEvent(60, Fraction(0), Fraction(0)),))
    with pytest.raises(CorpusError, match="nondecreasing"):
        Melody(
            id="o",
            events=(
                NoteEvent(60, Fraction(1), Fraction(1)),
                NoteEvent(62, Fraction(0), Fraction(1)),
            ),
        )
    with pytest.raises(CorpusError, match="chroma"):
        Melody(id="k", events=(NoteEvent(60, Fraction(0), Fraction(1)),), key_annotation=12)


def test_corpus_invariants():
    meta = CorpusMeta(corpus_id="c", type="Art")
    m = Melody(id="m", events=(NoteEvent(60, Fraction(0), Fraction(1)),))
    with pytest.raises(CorpusError, match="empty"):
        Corpus(meta=meta, melodies=())
    with pytest.raises(CorpusError, match="unique"):
        Corpus(meta=meta, melodies=(m, m))


# --- kern subset ------------------------------------------------------------

def test_kern_pitches():
    m = parse_kern_subset("4c 4cc 4C 4CC 4b 4B")
    assert [e.pitch for e in m.events] == [60, 72, 48, 36, 71, 59]


def test_kern_accidentals():
    m = parse_kern_subset("4c# 4c## 4d- 4e--")
    assert [e.pitch for e in m.events] == [61, 62, 61, 62]


def test_kern_durations_and_dots():
    m = parse_kern_subset("4c 8c 2c 4.c 4..c 1c")
    assert [e.duration for e in m.events] == [
        Fraction(1),
        Fraction(1, 2),
        Fraction(2),
        Fraction(3, 2),
        Fraction(7, 4),
        Fraction(4),
    ]
    # onsets are running sums of durations
    assert m.events[2].onset == Fraction(3, 2)


def test_kern_rests_and_barlines():
    m = parse_kern_subset("4c =1 4r 4d ==")
    assert [e.pitch for e in m.events] == [60, None, 62]
    assert m.events[2].onset == Fraction(2)


def test_kern_ties_merge():
    m = parse_kern_subset("[2c 4c] 4d")
    assert [e.pitch for e in m.events] == [60, 62]
    assert m.events[0].duration == Fraction(3)
    assert m.events[1].onset == Fraction(3)


def test_kern_tie_across_pitches_rejected():
    with pytest.raises(KernError, match="tie"):
        parse_kern_subset("[2c 4d]")


def test_kern_unclosed_tie_rejected():
    with pytest.raises(KernError, match="tie"):
        parse_kern_subset("[2c 4c")


def test_kern_unknown_token_rejected():
    with pytest.raises(KernError, match="unsupported"):
        parse_kern_subset("4c 4q")


def test_kern_multiple_spines_rejected():
    with pytest.raises(KernError, match="spine"):
        parse_kern_subset("4c\t4e")


# --- table output -----------------------------------------------------------

def test_write_table_csv():
    rows = [{"id": "a", "x": 0.123456789, "y": None}, {"id": "b", "x": 2.0, "y": 3}]
    out = write_table(rows, "csv").decode()
    assert out.splitlines() == ["id,x,y", "a,0.123457,", "b,2.0,3"]


def test_write_table_json_round_trips():
    rows = [{"id": "a", "x": 1.5}]
    assert json.loads(write_table(rows, "json")) == rows


def test_write_table_empty_with_schema():
    assert write_table([], "csv", schema=["id", "x"]).decode() == "id,x\n"


def test_write_table_schema_mismatch():
    with pytest.raises(SchemaError):
        write_table([{"a": 1}, {"b": 2}], "csv")


def test_write_table_unknown_format():
    with pytest.raises(ValueError):
        write_table([], "xml")
