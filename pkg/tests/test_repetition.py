"""Recursive repeated-substring removal against a brute-force oracle."""

from fractions import Fraction

import numpy as np
import pytest

from melic.repetition import (
    RepetitionError,
    remove_repetition,
    repetition_fraction,
    total_information,
)

from conftest import melody_from_pitches


# --- brute-force oracle -----------------------------------------------------

def _greedy_count(piece, sub):
    count = 0
    i = 0
    while i <= len(piece) - len(sub):
        if piece[i : i + len(sub)] == sub:
            count += 1
            i += len(sub)
        else:
            i += 1
    return count


def _oracle_candidates(pieces, l_min, l_cap):
    cands = {}
    for piece in pieces:
        for length in range(l_min, min(l_cap, len(piece)) + 1):
            for start in range(len(piece) - length + 1):
                sub = piece[start : start + length]
                if sub in cands:
                    continue
                n = sum(_greedy_count(p, sub) for p in pieces)
                if n >= 2:
                    cands[sub] = n
    return cands


def _oracle_remove(piece, sub):
    frags = []
    buf = []
    i = 0
    while i < len(piece):
        if piece[i : i + len(sub)] == sub:
            if buf:
                frags.append(tuple(buf))
                buf = []
            i += len(sub)
        else:
            buf.append(piece[i])
            i += 1
    if buf:
        frags.append(tuple(buf))
    return frags


def oracle_l_nr(seq, l_min=2):
    seq = tuple(seq)
    l_cap = len(seq) // 2
    pieces = [seq]
    while True:
        cands = _oracle_candidates(pieces, l_min, l_cap)
        if not cands:
            break
        best = max(cands, key=lambda s: (cands[s] * len(s), len(s), NegLex(s)))
        nxt = []
        for p in pieces:
            nxt.extend(_oracle_remove(p, best))
        nxt.append(best)
        pieces = nxt
    return sum(len(p) for p in dict.fromkeys(pieces))


class NegLex:
    """Orders tuples in reverse, so max() prefers the lexicographically smaller."""

    def __init__(self, t):
        self.t = t

    def __lt__(self, other):
        return self.t > other.t

    def __eq__(self, other):
        return self.t == other.t


# --- unit cases -------------------------------------------------------------

def test_simple_repeat():
    res = remove_repetition(tuple("abcabc"))
    assert res.l_nr == 3
    assert res.removed_matches == ((("a", "b", "c"), 2),)


def test_runs_collapse():
    assert remove_repetition(tuple("aaaa")).l_nr == 2  # "aa" twice -> piece "aa"
    assert remove_repetition(tuple("aaaaaa")).l_nr == 3


def test_no_repeats():
    res = remove_repetition(tuple("abcde"))
    assert res.l_nr == 5
    assert res.removed_matches == ()


def test_fraction():
    assert repetition_fraction(tuple("abcabc")) == pytest.approx(0.5)
    assert repetition_fraction(tuple("abcde")) == 0.0


def test_score_prefers_count_times_length():
    # "ab" occurs 3 times (score 6) beating "abc" twice (score 6, tie -> longer)
    res = remove_repetition(tuple("abcabcab"))
    assert res.removed_matches[0][0] == ("a", "b", "c")


def test_removed_copy_participates_in_later_rounds():
    # after removing "ab" everywhere, its leftover copy can pair with residue
    seq = tuple("ababx" + "abx")
    res = remove_repetition(seq)
    assert res.l_nr == oracle_l_nr(seq)


def test_match_capped_at_half_length():
    # the length-3 repeat in a 5-symbol string exceeds the floor(L/2) cap... not here:
    seq = tuple("abcab")
    res = remove_repetition(seq)
    assert res.l_nr == 3  # "ab" removed twice


def test_lmin_three_ignores_short_repeats():
    # "aba" occurrences overlap, so nothing of length >= 3 repeats twice
    assert remove_repetition(tuple("ababab"), l_min=3).l_nr == 6
    assert remove_repetition(tuple("abcabc"), l_min=3).l_nr == 3
    assert remove_repetition(tuple("abab"), l_min=3).l_nr == 4


def test_validation():
    with pytest.raises(RepetitionError):
        remove_repetition(tuple("abc"), l_min=1)
    with pytest.raises(RepetitionError):
        remove_repetition(())


def test_matches_oracle_on_random_sequences():
    rng = np.random.default_rng(2)
    for _ in range(300):
        n = int(rng.integers(1, 13))
        a = int(rng.integers(1, 5))
        seq = tuple(int(x) for x in rng.integers(0, a, n))
        assert remove_repetition(seq).l_nr == oracle_l_nr(seq), seq


def test_final_pieces_have_no_repeats():
    rng = np.random.default_rng(3)
    for _ in range(50):
        seq = tuple(int(x) for x in rng.integers(0, 3, 40))
        res = remove_repetition(seq)
        assert not _oracle_candidates(list(res.pieces), 2, len(seq) // 2)


def test_total_information():
    m = melody_from_pitches("t", [60, 62, 60, 62], [1, 2, 1, 2])
    # joint chroma-duration sequence is (0,1),(2,2),(0,1),(2,2): H=1 bit, L_NR=2
    assert total_information(m) == pytest.approx(2.0)
    flat = melody_from_pitches("f", [60] * 6)
    assert total_information(flat) == 0.0
