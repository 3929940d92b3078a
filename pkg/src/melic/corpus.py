"""Corpus ingestion (canonical JSON format + minimal kern subset) and table output.

Durations and onsets are exact rationals throughout; the Duration viewpoint's
alphabet depends on exact equality, so floats are never used for time values.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

CORPUS_TYPES = ("Folk", "Art", "Child", "Teaching")


class CorpusError(Exception):
    """Malformed corpus input."""


class KernError(CorpusError):
    """Unsupported or malformed kern-style token."""


class SchemaError(Exception):
    """Rows passed to write_table do not share one schema."""


@dataclass(frozen=True)
class NoteEvent:
    """A single note or rest. pitch is a MIDI semitone (69 = A4), None marks a rest."""

    pitch: int | None
    onset: Fraction
    duration: Fraction

    @property
    def is_rest(self) -> bool:
        return self.pitch is None


@dataclass(frozen=True)
class CorpusMeta:
    corpus_id: str
    type: str
    region: str = ""
    composer_birth_year: int | None = None

    def __post_init__(self):
        if self.type not in CORPUS_TYPES:
            raise CorpusError(
                f"corpus {self.corpus_id!r}: type must be one of {CORPUS_TYPES}, got {self.type!r}"
            )


@dataclass(frozen=True)
class Melody:
    id: str
    events: tuple[NoteEvent, ...]
    key_annotation: int | None = None
    meta: CorpusMeta | None = None

    def __post_init__(self):
        if not any(not e.is_rest for e in self.events):
            raise CorpusError(f"melody {self.id!r}: needs at least one non-rest event")
        prev = None
        for e in self.events:
            if e.duration <= 0:
                raise CorpusError(f"melody {self.id!r}: duration must be positive")
            if prev is not None and e.onset < prev:
                raise CorpusError(f"melody {self.id!r}: onsets must be nondecreasing")
            prev = e.onset
        if self.key_annotation is not None and not 0 <= self.key_annotation < 12:
            raise CorpusError(f"melody {self.id!r}: key annotation must be a chroma class 0-11")


@dataclass(frozen=True)
class Corpus:
    meta: CorpusMeta
    melodies: tuple[Melody, ...]

    def __post_init__(self):
        if not self.melodies:
            raise CorpusError(f"corpus {self.meta.corpus_id!r}: empty")
        ids = [m.id for m in self.melodies]
        if len(set(ids)) != len(ids):
            raise CorpusError(f"corpus {self.meta.corpus_id!r}: melody ids must be unique")


def _parse_rational(s, where: str) -> Fraction:
    if not isinstance(s, str):
        raise CorpusError(f"{where}: rational must be a 'p/q' string, got {s!r}")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise CorpusError(f"{where}: bad rational {s!r} ({exc})") from exc


def parse_canonical(data: bytes | str) -> Corpus:
    """Parse the canonical utf-8 JSON corpus format."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"malformed corpus file at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        meta = CorpusMeta(
            corpus_id=obj["corpus_id"],
            type=obj["type"],
            region=obj.get("region", ""),
            composer_birth_year=obj.get("composer_birth_year"),
        )
        melodies = []
        for mel in obj["melodies"]:
            mid = mel["id"]
            events = []
            for note in mel["notes"]:
                pitch = note["pitch"]
                if pitch is not None and not isinstance(pitch, int):
                    raise CorpusError(f"melody {mid!r}: pitch must be an integer or null")
                events.append(
                    NoteEvent(
                        pitch=pitch,
                        onset=_parse_rational(note["onset"], f"melody {mid!r} onset"),
                        duration=_parse_rational(note["duration"], f"melody {mid!r} duration"),
                    )
                )
            melodies.append(Melody(id=mid, events=tuple(events), key_annotation=mel.get("key"), meta=meta))
    except KeyError as exc:
        raise CorpusError(f"missing required field {exc.args[0]!r}") from exc
    return Corpus(meta=meta, melodies=tuple(melodies))


def serialize_canonical(corpus: Corpus) -> str:
    """Serialize to the canonical format; parse_canonical(serialize(c)) round-trips."""
    obj = {
        "corpus_id": corpus.meta.corpus_id,
        "type": corpus.meta.type,
        "region": corpus.meta.region,
        "composer_birth_year": corpus.meta.composer_birth_year,
        "melodies": [
            {
                "id": m.id,
                "key": m.key_annotation,
                "notes": [
                    {
                        "pitch": e.pitch,
                        "onset": f"{e.onset.numerator}/{e.onset.denominator}",
                        "duration": f"{e.duration.numerator}/{e.duration.denominator}",
                    }
                    for e in m.events
                ],
            }
            for m in corpus.melodies
        ],
    }
    return json.dumps(obj, indent=1)


# --- kern-style subset -----------------------------------------------------

_KERN_TOKEN = re.compile(
    r"^(?P<open>\[)?(?P<dur>\d+)(?P<dots>\.*)(?P<body>[a-gA-G]+|r)(?P<acc>[#-]*)(?P<close>\])?$"
)

_LETTER_BASE = {"c": 0, "d": 2, "e": 4, "f": 5, "g": 7, "a": 9, "b": 11}


def _kern_pitch(body: str, acc: str) -> int:
    letters = set(body)
    if len(letters) != 1:
        raise KernError(f"unsupported construct: mixed pitch letters in token body {body!r}")
    ch = body[0]
    base = _LETTER_BASE[ch.lower()]
    n = len(body)
    if ch.islower():
        midi = 60 + 12 * (n - 1) + base
    else:
        midi = 48 - 12 * (n - 1) + base
    midi += acc.count("#") - acc.count("-")
    return midi


def _kern_duration(dur: str, dots: str) -> Fraction:
    d = int(dur)
    if d <= 0:
        raise KernError(f"unsupported duration digit {dur!r}")
    base = Fraction(4, d)
    # each dot adds half the previous value
    return base * (2 - Fraction(1, 2 ** len(dots)))


def parse_kern_subset(text: str, melody_id: str = "kern", meta: CorpusMeta | None = None) -> Melody:
    """Parse a single-spine monophonic kern-style melody.

    Supported: duration digit(s) + optional dots + pitch letters (with octave
    doubling and #/- accidentals) or `r` for rest; `=`-prefixed bar lines are
    skipped; `[`/`]` tie markers merge notes. Anything else errors loudly.
    """
    if "\t" in text:
        raise KernError("unsupported construct: multiple spines")
    events: list[NoteEvent] = []
    onset = Fraction(0)
    tie_pitch: int | None = None
    tie_dur = Fraction(0)
    tie_onset = Fraction(0)
    in_tie = False
    for raw in text.split():
        if raw.startswith("=") or raw.startswith("*") or raw.startswith("!"):
            continue
        m = _KERN_TOKEN.match(raw)
        if m is None:
            raise KernError(f"unsupported construct: token {raw!r}")
        dur = _kern_duration(m.group("dur"), m.group("dots"))
        body = m.group("body")
        is_rest = body == "r"
        pitch = None if is_rest else _kern_pitch(body, m.group("acc"))
        if m.group("open"):
            if in_tie:
                raise KernError(f"unsupported construct: nested tie at {raw!r}")
            if is_rest:
                raise KernError("unsupported construct: tied rest")
            in_tie = True
            tie_pitch, tie_dur, tie_onset = pitch, dur, onset
        elif in_tie:
            if is_rest or pitch != tie_pitch:
                raise KernError(f"unsupported construct: tie across different pitches at {raw!r}")
            tie_dur += dur
            if m.group("close"):
                events.append(NoteEvent(pitch=tie_pitch, onset=tie_onset, duration=tie_dur))
                in_tie = False
        else:
            if m.group("close"):
                raise KernError(f"unsupported construct: unmatched tie close at {raw!r}")
            events.append(NoteEvent(pitch=pitch, onset=onset, duration=dur))
        onset += dur
    if in_tie:
        raise KernError("unsupported construct: unclosed tie")
    return Melody(id=melody_id, events=tuple(events), meta=meta)


# --- table output ----------------------------------------------------------

def _fmt_value(v):
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return float(f"{v:.6g}")
    return v


def write_table(records: list[dict], format: str = "csv", schema: list[str] | None = None) -> bytes:
    """Serialize homogeneous rows; floats use 6 significant digits, row order kept.

    schema is only needed to emit a header for an empty record list.
    """
    if format not in ("csv", "json"):
        raise ValueError(f"unknown format {format!r}")
    if records:
        schema = list(records[0].keys())
        for r in records:
            if list(r.keys()) != schema:
                raise SchemaError(f"row schema {list(r.keys())} != {schema}")
    elif schema is None:
        schema = []
    if format == "json":
        rows = [{k: _fmt_value(r[k]) for k in schema} for r in records]
        return (json.dumps(rows, indent=1) + "\n").encode("utf-8")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if schema:
        writer.writerow(schema)
        for r in records:
            writer.writerow(["" if (v := _fmt_value(r[k])) is None else v for k in schema])
    return buf.getvalue().encode("utf-8")
