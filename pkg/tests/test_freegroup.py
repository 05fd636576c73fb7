import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from forge.errors import WordCountExceeded
from forge.freegroup import (Letter, Word, enumerate_words, format_word, parse_word, reduce,
                             runs, word_count, y_seq)
from forge.quotient import WordEvaluator


def slow_reduce(letters):
    """Delete one adjacent inverse pair at a time until none is left."""
    letters = list(letters)
    changed = True
    while changed:
        changed = False
        for i in range(len(letters) - 1):
            (g1, s1), (g2, s2) = letters[i], letters[i + 1]
            if g1 == g2 and s1 == -s2:
                del letters[i:i + 2]
                changed = True
                break
    return tuple(letters)


letters = st.tuples(st.integers(0, 2), st.sampled_from([-1, 1]))
raw_words = st.lists(letters, max_size=14).map(lambda ls: Word(3, tuple(ls)))


def test_reduce_examples():
    x, X = (0, 1), (0, -1)
    assert reduce(Word(1, (x, X))).letters == ()
    assert reduce(Word(1, ())).letters == ()
    a, b, B = (0, 1), (1, 1), (1, -1)
    assert reduce(Word(2, (a, b, B, a))).letters == (a, a)


@given(raw_words)
def test_reduce_matches_slow_oracle(w):
    assert reduce(w).letters == slow_reduce(w.letters)


@given(raw_words)
def test_reduce_idempotent(w):
    r = reduce(w)
    assert reduce(r) == r
    assert r.is_reduced()


@settings(max_examples=50)
@given(raw_words, st.integers(0, 2**32 - 1))
def test_reduce_preserves_evaluation(w, seed):
    rng = np.random.default_rng(seed)
    gens = [rng.permutation(7) for _ in range(3)]
    # the evaluator wants reduced input, so evaluate the raw word by hand
    x = np.arange(7)
    for g, s in reversed(w.letters):
        t = gens[g] if s > 0 else np.argsort(gens[g])
        x = t[x]
    r = reduce(w)
    got = WordEvaluator(3, [r]).evaluate(gens)[0] if len(r) else np.arange(7)
    assert np.array_equal(got, x)


def test_enumerate_small_cases():
    ws = enumerate_words(1, 2)
    assert [format_word(w) for w in ws] == ["G0", "g0", "G0 G0", "g0 g0"]
    assert len(enumerate_words(2, 1)) == 4
    assert len(enumerate_words(2, 2)) == 16


@pytest.mark.parametrize("k,L", [(1, 4), (2, 3), (3, 2), (4, 2)])
def test_enumerate_against_brute_force(k, L):
    ws = enumerate_words(k, L)
    assert len(ws) == word_count(k, L) == len(set(ws))
    assert all(w.is_reduced() and 1 <= len(w) <= L for w in ws)
    assert ws == sorted(ws)
    alphabet = [(g, s) for g in range(k) for s in (-1, 1)]
    brute = set()
    for n in range(1, L + 1):
        for tup in itertools.product(alphabet, repeat=n):
            r = slow_reduce(tup)
            if len(r) == n:
                brute.add(r)
    assert {w.letters for w in ws} == brute


def test_word_count_formula():
    for k in range(1, 5):
        for L in range(0, 5):
            closed = 0 if L == 0 else 2 * k * ((2 * k - 1) ** L - 1) // (2 * k - 2) if k > 1 else 2 * L
            assert word_count(k, L) == closed


def test_enumerate_cap():
    with pytest.raises(WordCountExceeded):
        enumerate_words(4, 8, cap=1000)


def test_y_seq():
    a, b = Letter(0, 1), Letter(1, 1)
    assert y_seq(1, 2).letters == (a, b)
    assert y_seq(2, 2).letters == (a, a, b, b)
    assert y_seq(3, 1).letters == (a, a, a)
    with pytest.raises(ValueError):
        y_seq(0, 2)


@pytest.mark.parametrize("rank", [2, 3, 4])
def test_y_seq_free_independence(rank):
    for n1 in range(1, 6):
        for n2 in range(n1 + 1, 7):
            assert len(y_seq(n1, rank).inverse() * y_seq(n2, rank)) > 0


def test_runs_and_text():
    w = parse_word("g0 g0 G1 g0", 2)
    assert runs(w) == [(0, 1, 2), (1, -1, 1), (0, 1, 1)]
    assert format_word(w) == "g0 g0 G1 g0"
    assert parse_word("e", 2).letters == ()
    with pytest.raises(ValueError):
        parse_word("h1", 2)
    with pytest.raises(ValueError):
        parse_word("g5", 2)


def test_word_order():
    k = 2
    w1 = Word(k, ((0, -1),))
    w2 = Word(k, ((0, 1),))
    w3 = Word(k, ((0, -1), (0, -1)))
    assert sorted([w3, w2, w1]) == [w1, w2, w3]
