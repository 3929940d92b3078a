"""End-to-end CLI behaviour: outputs, error handling, determinism."""

import csv
import io
import json

import numpy as np
import pytest

from melic.cli import main
from melic.corpus import serialize_canonical

from conftest import corpus_of, melody_from_pitches


@pytest.fixture
def corpus_file(tmp_path):
    rng = np.random.default_rng(0)
    mels = [
        melody_from_pitches(
            f"m{i:02d}",
            list(60 + np.cumsum(rng.integers(-4, 5, 25))),
            [[1, "1/2", 2][int(d)] for d in rng.integers(0, 3, 25)],
        )
        for i in range(15)
    ]
    path = tmp_path / "fixture.json"
    path.write_text(serialize_canonical(corpus_of(mels)))
    return path


def run(args, out_path):
    rc = main([*args, "--out", str(out_path)])
    return rc, out_path.read_bytes()


def rows_of(data):
    return list(csv.DictReader(io.StringIO(data.decode())))


def test_entropy_command(tmp_path, corpus_file):
    rc, data = run(["entropy", "--viewpoint", "chroma", str(corpus_file)], tmp_path / "o.csv")
    assert rc == 0
    rows = rows_of(data)
    assert len(rows) == 15
    assert {"id", "A", "H"} <= set(rows[0])
    for r in rows:
        assert 0.0 <= float(r["H"]) <= np.log2(int(r["A"])) + 1e-9


def test_gini_command_json(tmp_path, corpus_file):
    rc, data = run(
        ["gini", "--viewpoint", "duration", "--format", "json", str(corpus_file)],
        tmp_path / "o.json",
    )
    assert rc == 0
    rows = json.loads(data)
    assert all(0.0 <= r["G"] < 1.0 for r in rows)


def test_viewpoints_command(tmp_path, corpus_file):
    rc, data = run(["viewpoints", "--kind", "mint", str(corpus_file)], tmp_path / "o.csv")
    assert rc == 0
    rows = rows_of(data)
    assert len(rows[0]["symbols"].split()) == 24


def test_repetition_command(tmp_path, corpus_file):
    rc, data = run(["repetition", "--viewpoint", "chroma", str(corpus_file)], tmp_path / "o.csv")
    assert rc == 0
    for r in rows_of(data):
        assert int(r["L_NR"]) <= int(r["L"])
        assert 0.0 <= float(r["fraction"]) < 1.0


def test_totalinfo_command(tmp_path, corpus_file):
    rc, data = run(["totalinfo", str(corpus_file)], tmp_path / "o.csv")
    assert rc == 0
    for r in rows_of(data):
        assert float(r["T"]) == pytest.approx(float(r["H_joint"]) * int(r["L_NR"]), rel=1e-4)


def test_mi_requires_seed(corpus_file):
    with pytest.raises(SystemExit):
        main(["mi", str(corpus_file)])


def test_mi_deterministic(tmp_path, corpus_file):
    a = run(["mi", "--seed", "7", str(corpus_file)], tmp_path / "a.csv")[1]
    b = run(["mi", "--seed", "7", str(corpus_file)], tmp_path / "b.csv")[1]
    c = run(["mi", "--seed", "8", str(corpus_file)], tmp_path / "c.csv")[1]
    assert a == b
    assert a != c


def test_ppm_repetition_threads_invariant(tmp_path, corpus_file):
    base = ["ppm-repetition", "--seed", "3", "--n-train", "5", "--shuffle-reps", "3", str(corpus_file)]
    a = run([*base, "--threads", "1"], tmp_path / "a.csv")[1]
    b = run([*base, "--threads", "4"], tmp_path / "b.csv")[1]
    assert a == b
    row = rows_of(a)[0]
    assert {"corpus", "mean_IC", "mean_IC_r", "repetition_bits"} <= set(row)


def test_summary_sorted_and_columns(tmp_path, corpus_file):
    from melic.corpus import Corpus, CorpusMeta

    # second corpus sorting before the fixture alphabetically
    first = Corpus(
        meta=CorpusMeta(corpus_id="aaa", type="Child"),
        melodies=(melody_from_pitches("solo", [60]),),
    )
    p2 = tmp_path / "aaa.json"
    p2.write_text(serialize_canonical(first))
    rc, data = run(["summary", str(p2), str(corpus_file)], tmp_path / "o.csv")
    assert rc == 0
    rows = rows_of(data)
    assert [r["corpus"] for r in rows] == ["aaa", "fixture"]
    solo = rows[0]
    assert float(solo["H_chroma"]) == 0.0
    assert float(solo["mean_length"]) == 1.0
    assert float(solo["mean_L_NR"]) == 1.0
    assert float(solo["mean_T"]) == 0.0


def test_summary_handles_single_note_melodies(tmp_path):
    corpus = corpus_of(
        [melody_from_pitches("good", [60, 62, 64, 65]), melody_from_pitches("lone", [60])]
    )
    p = tmp_path / "c.json"
    p.write_text(serialize_canonical(corpus))
    rc, data = run(["summary", str(p)], tmp_path / "o.csv")
    assert rc == 0
    assert len(rows_of(data)) == 1


def test_directory_input(tmp_path, corpus_file):
    rc, data = run(["entropy", str(corpus_file.parent)], tmp_path / "o.csv")
    assert rc == 0
    assert len(rows_of(data)) == 15


def test_missing_file_exit_code(tmp_path):
    assert main(["entropy", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o.csv")]) == 1


def test_malformed_corpus_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["entropy", str(bad), "--out", str(tmp_path / "o.csv")]) == 1


def make_means_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["corpus_id", "region", "type", "H_chroma", "H_duration", "I_chroma_duration"])
        w.writerows(rows)


def test_null_joint_command(tmp_path):
    means = tmp_path / "means.csv"
    rng = np.random.default_rng(1)
    make_means_csv(
        means,
        [[f"c{i}", f"r{i % 3}", "Folk", 2 + x, 1 + y, 0.1 * z] for i, (x, y, z) in enumerate(rng.random((20, 3)))],
    )
    a = run(["null-joint", "--seed", "5", "--samples", "2000", str(means)], tmp_path / "a.csv")[1]
    b = run(["null-joint", "--seed", "5", "--samples", "2000", str(means)], tmp_path / "b.csv")[1]
    assert a == b
    row = rows_of(a)[0]
    assert float(row["ratio"]) > 0


def test_subsample_corr_command(tmp_path):
    means = tmp_path / "means.csv"
    rng = np.random.default_rng(2)
    make_means_csv(
        means,
        [
            [f"c{i}", f"r{i % 4}", "Folk", h, 4 - h + 0.1 * e, 0.0]
            for i, (h, e) in enumerate(zip(rng.uniform(1, 3, 24), rng.random(24)))
        ],
    )
    args = ["subsample-corr", "--seed", "4", "--max-per-region", "3", "--resamples", "200", str(means)]
    a = run(args, tmp_path / "a.csv")[1]
    b = run(args, tmp_path / "b.csv")[1]
    assert a == b
    row = rows_of(a)[0]
    assert float(row["mean_r"]) < -0.5


def test_similarity_command(tmp_path, corpus_file):
    rc, data = run(
        ["similarity", "--query", str(corpus_file), "--n", "5", str(corpus_file)],
        tmp_path / "o.csv",
    )
    assert rc == 0
    row = rows_of(data)[0]
    assert int(row["n_matches"]) >= 1


def test_genmodel_scale_command(tmp_path):
    intervals = tmp_path / "intervals.csv"
    with open(intervals, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["symbol", "probability"])
        for d in range(-5, 6):
            w.writerow([d, max(0, 6 - abs(d))])
    lengths = tmp_path / "lengths.csv"
    with open(lengths, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["symbol", "probability"])
        w.writerow([30, 1.0])
    args = [
        "genmodel", "scale", "--intervals", str(intervals), "--lengths", str(lengths),
        "--n", "30000", "--seed", "2",
    ]
    a = run([*args, "--threads", "1"], tmp_path / "a.csv")[1]
    b = run([*args, "--threads", "4"], tmp_path / "b.csv")[1]
    assert a == b
    rows = rows_of(a)
    assert sum(int(r["n_samples"]) for r in rows) == 30000
    assert all(0.0 <= float(r["P_below"]) <= 1.0 for r in rows)


def test_genmodel_pitch_command(tmp_path, corpus_file):
    args = [
        "genmodel", "pitch", "--model", "S1", "--grid-a", "4,6", "--grid-l", "20",
        "--grid-o", "2", "--grid-exp", "1", "--n-per-setting", "20", "--seed", "3",
        str(corpus_file),
    ]
    a = run(args, tmp_path / "a.csv")[1]
    b = run(args, tmp_path / "b.csv")[1]
    assert a == b
    row = rows_of(a)[0]
    assert row["model"] == "S1"
    assert float(row["JSD"]) >= 0.0


def test_genmodel_rhythm_command(tmp_path, corpus_file):
    args = [
        "genmodel", "rhythm", "--model", "SI1", "--grid-a", "3,5", "--grid-l", "20",
        "--grid-exp", "1", "--n-per-setting", "20", "--seed", "3", str(corpus_file),
    ]
    a = run(args, tmp_path / "a.csv")[1]
    b = run(args, tmp_path / "b.csv")[1]
    assert a == b
    assert rows_of(a)[0]["model"] == "SI1"
