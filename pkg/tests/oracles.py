"""Reference implementations used only by the tests.

Each oracle recomputes a quantity from first principles without touching the
count tables or samplers under test.
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction
from typing import Iterable, Sequence

from unitrace import Automaton, Letter, ModuleSystem, successors


def language(a: Automaton, n: int) -> set[tuple[str, ...]]:
    """Words of length ``n`` accepted by ``a``, by subset simulation over letter ids."""
    out: set[tuple[str, ...]] = set()
    delta: dict[int, list[tuple[str, int]]] = {}
    for src, letter, dst in a.transitions:
        delta.setdefault(src, []).append((letter.id, dst))

    def grow(prefix: tuple[str, ...], current: frozenset[int]) -> None:
        if len(prefix) == n:
            if current & a.finals:
                out.add(prefix)
            return
        nxt: dict[str, set[int]] = {}
        for q in current:
            for x, d in delta.get(q, ()):
                nxt.setdefault(x, set()).add(d)
        for x, states in nxt.items():
            grow(prefix + (x,), frozenset(states))

    grow((), frozenset({a.initial}))
    return out


def paths(a: Automaton, n: int) -> int:
    """Number of accepting runs of length ``n`` by plain recursion."""
    def walk(q: int, k: int) -> int:
        if k == 0:
            return int(q in a.finals)
        return sum(walk(d, k - 1) for s, _, d in a.transitions if s == q)

    return walk(a.initial, n)


def shuffles(u: Sequence[str], v: Sequence[str]) -> set[tuple[str, ...]]:
    if not u:
        return {tuple(v)}
    if not v:
        return {tuple(u)}
    return {(u[0],) + w for w in shuffles(u[1:], v)} | {(v[0],) + w for w in shuffles(u, v[1:])}


def multinomial(parts: Sequence[int]) -> int:
    out = math.factorial(sum(parts))
    for k in parts:
        out //= math.factorial(k)
    return out


def shuffle_convolution(counts: Sequence[Sequence[int]], n: int) -> int:
    """Sum over length vectors of multinomial times the product of per-factor counts."""
    total = 0
    for head in itertools.product(range(n + 1), repeat=len(counts) - 1):
        rest = n - sum(head)
        if rest < 0:
            continue
        parts = head + (rest,)
        total += multinomial(parts) * math.prod(c[k] for c, k in zip(counts, parts))
    return total


def projection(word: Iterable[str], keep: set[str]) -> tuple[str, ...]:
    return tuple(x for x in word if x in keep)


def sync_language(automata: Sequence[Automaton], alpha: str, n: int) -> set[tuple[str, ...]]:
    """Words over the union alphabet whose projection onto every factor's
    alphabet (which contains ``alpha``) is accepted by that factor."""
    letters = sorted({t.letter.id for a in automata for t in a.transitions})
    keeps = [{t.letter.id for t in a.transitions} | {alpha} for a in automata]
    words: set[tuple[str, ...]] = set()

    def grow(prefix: tuple[str, ...], states: tuple[frozenset[int], ...]) -> None:
        if len(prefix) == n:
            if all(s & a.finals for s, a in zip(states, automata)):
                words.add(prefix)
            return
        for x in letters:
            nxt = []
            for a, keep, current in zip(automata, keeps, states):
                if x not in keep:
                    nxt.append(current)
                    continue
                moved = frozenset(d for s, l, d in a.transitions if s in current and l.id == x)
                if not moved:
                    break
                nxt.append(moved)
            else:
                grow(prefix + (x,), tuple(nxt))

    grow((), tuple(frozenset({a.initial}) for a in automata))
    return words


def detection_probability(system: ModuleSystem, k: int, condition) -> Fraction:
    """Exact chance that a uniform ``k``-step walk visits a state where ``condition`` holds."""
    dist = {system.initial_state(): Fraction(1)}
    hit = Fraction(0)
    for step in range(k + 1):
        alive = {}
        for s, p in dist.items():
            if condition(s):
                hit += p
            else:
                alive[s] = p
        if step == k:
            break
        dist = {}
        for s, p in alive.items():
            moves = successors(system, s)
            if not moves:
                continue
            for _, t in moves:
                dist[t] = dist.get(t, 0) + p / len(moves)
    return hit


def random_automaton(
    rng: random.Random,
    n_states: int,
    letters: Sequence[str],
    density: float = 0.5,
    deterministic: bool = True,
    module_index: int = 0,
    all_final: bool = False,
) -> Automaton:
    """Random automaton; with ``deterministic`` each letter leaves a state at most once."""
    edges = []
    for s in range(n_states):
        for x in letters:
            if rng.random() < density:
                edges.append((s, x, rng.randrange(n_states)))
                if not deterministic and rng.random() < 0.3:
                    edges.append((s, x, rng.randrange(n_states)))
    if all_final:
        finals = range(n_states)
    else:
        finals = [s for s in range(n_states) if rng.random() < 0.5] or [n_states - 1]
    return Automaton.build(n_states, edges, 0, finals, module_index)


def word_automaton(word: str, module_index: int = 0) -> Automaton:
    """Accepts exactly ``word`` (one letter per character)."""
    edges = [(i, x, i + 1) for i, x in enumerate(word)]
    return Automaton.build(len(word) + 1, edges, 0, [len(word)], module_index)


def unique_letter_automaton(
    rng: random.Random, n_states: int, prefix: str, density: float = 0.4, module_index: int = 0
) -> Automaton:
    """Random automaton in which every transition has its own letter, like a flattened module."""
    edges = []
    for s in range(n_states):
        for d in range(n_states):
            if rng.random() < density:
                edges.append((s, f"{prefix}{len(edges)}", d))
    return Automaton.build(n_states, edges, 0, None, module_index)


def sync_module(
    rng: random.Random, n_states: int, prefix: str, alpha: str = "alpha", module_index: int = 0
) -> Automaton:
    """Unique-letter automaton plus exactly one ``alpha`` transition."""
    base = unique_letter_automaton(rng, n_states, prefix, module_index=module_index)
    edges = [(t.src, t.letter.id, t.dst) for t in base.transitions]
    edges.append((rng.randrange(n_states), Letter(alpha, None), rng.randrange(n_states)))
    return Automaton.build(n_states, edges, 0, None, module_index)


def xay(i: int) -> Automaton:
    """p --alpha--> q with an x loop on p and a y loop on q."""
    edges = [(0, f"x{i}", 0), (0, Letter("alpha", None), 1), (1, f"y{i}", 1)]
    return Automaton.build(2, edges, module_index=i)
