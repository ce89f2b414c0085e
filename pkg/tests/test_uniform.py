import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings

from oracles import language, random_automaton
from test_automaton import automata
from unitrace import Automaton, EmptyLanguageError, Rng, build_count_table, draw_uniform_word


def fib():
    return Automaton.build(2, [(0, "a", 0), (0, "b", 1), (1, "c", 0)])


def test_two_loops_uniform():
    t = build_count_table(Automaton.build(1, [(0, "a", 0), (0, "b", 0)]), 2)
    rng = Rng(0)
    counts = Counter(draw_uniform_word(t, 2, rng).ids for _ in range(40_000))
    assert set(counts) == {("a", "a"), ("a", "b"), ("b", "a"), ("b", "b")}
    for c in counts.values():
        assert abs(c / 40_000 - 0.25) < 0.0125


def test_singleton_language():
    t = build_count_table(Automaton.build(2, [(0, "a", 1), (1, "b", 0)]), 4)
    rng = Rng(1)
    assert {draw_uniform_word(t, 4, rng).ids for _ in range(20)} == {("a", "b", "a", "b")}


@pytest.mark.statistical
def test_fibonacci_frequencies():
    a = fib()
    t = build_count_table(a, 4)
    rng = Rng(2)
    counts = Counter(draw_uniform_word(t, 4, rng).ids for _ in range(80_000))
    assert set(counts) == language(a, 4) and len(counts) == 8
    for c in counts.values():
        assert abs(c / 80_000 - 0.125) < 0.006


def test_empty_length_raises():
    t = build_count_table(Automaton.build(2, [(0, "a", 1)], finals=[1]), 3)
    with pytest.raises(EmptyLanguageError, match="no word of length 2"):
        draw_uniform_word(t, 2, Rng(0))


def test_seed_determinism():
    t = build_count_table(fib(), 30)
    assert draw_uniform_word(t, 30, Rng(5)).ids == draw_uniform_word(t, 30, Rng(5)).ids


@settings(max_examples=60, deadline=None)
@given(automata(max_states=6))
def test_tracked_probability_is_reciprocal_count(a):
    t = build_count_table(a, 10)
    rng = Rng(3)
    for n in range(11):
        total = t.count(n)
        if total == 0:
            continue
        for _ in range(5):
            w = draw_uniform_word(t, n, rng, track=True)
            assert w.probability == Fraction(1, total)
            assert len(w) == n and len(w.states) == n + 1
            assert a.run(w.letters) == list(w.states)
            assert w.states[-1] in a.finals


def test_nondeterministic_runs_uniform():
    rng = random.Random(4)
    a = random_automaton(rng, 4, "ab", deterministic=False, density=0.8)
    t = build_count_table(a, 6)
    w = draw_uniform_word(t, 6, Rng(0), track=True)
    assert w.probability == Fraction(1, t.count(6))


def test_rng_spawn_is_reproducible():
    a = [r.below(10**9) for r in Rng(7).spawn(3)]
    b = [r.below(10**9) for r in Rng(7).spawn(3)]
    assert a == b and len(set(a)) == 3


def test_rng_unseeded_records_seed():
    r = Rng()
    assert isinstance(r.seed, int)
    assert Rng(r.seed).below(10**9) == r.below(10**9)
