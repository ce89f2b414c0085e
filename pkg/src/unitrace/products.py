"""Explicit shuffle and synchronised products, and exhaustive trace enumeration.

These build the global automaton that the on-line samplers avoid. They are
the brute-force generators and the reference oracle for everything else.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .automaton import Automaton, Letter, Transition
from .counting import build_count_table

__all__ = [
    "ProductAutomaton",
    "ProductError",
    "TooManyTraces",
    "build_shuffle_automaton",
    "build_sync_product",
    "enumerate_traces",
    "alpha_transitions",
]


class ProductError(ValueError):
    pass


class TooManyTraces(RuntimeError):
    def __init__(self, count: int, limit: int) -> None:
        super().__init__(f"{count} traces exceed the enumeration limit {limit}")
        self.count = count
        self.limit = limit


@dataclass(frozen=True, eq=False)
class ProductAutomaton:
    base: Automaton
    factor_map: tuple[tuple[int, ...], ...]

    def state_of(self, index: int) -> tuple[int, ...]:
        return self.factor_map[index]


def _check_disjoint(automata: Sequence[Automaton], shared: frozenset[Letter]) -> None:
    owner: dict[Letter, int] = {}
    for i, a in enumerate(automata):
        for x in a.alphabet - shared:
            if x in owner:
                raise ProductError(
                    f"letter {x.id!r} shared by factors {owner[x]} and {i}; alphabets must be disjoint"
                )
            owner[x] = i


def _explore(automata: Sequence[Automaton], alpha: Letter | None) -> ProductAutomaton:
    start = tuple(a.initial for a in automata)
    index = {start: 0}
    order = [start]
    transitions: list[Transition] = []
    queue = deque([start])
    while queue:
        tup = queue.popleft()
        src = index[tup]
        moves: list[tuple[Letter, tuple[int, ...]]] = []
        for i, a in enumerate(automata):
            for letter, dst in a.out[tup[i]]:
                if letter == alpha:
                    continue
                moves.append((letter, tup[:i] + (dst,) + tup[i + 1 :]))
        if alpha is not None:
            targets = [a.step(q, alpha) for a, q in zip(automata, tup)]
            if all(t is not None for t in targets):
                moves.append((alpha, tuple(targets)))
        for letter, nxt in moves:
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
                queue.append(nxt)
            transitions.append(Transition(src, letter, index[nxt]))
    finals = frozenset(
        i for i, tup in enumerate(order) if all(q in a.finals for a, q in zip(automata, tup))
    )
    alphabet = frozenset().union(*(a.alphabet for a in automata))
    base = Automaton(len(order), 0, finals, tuple(transitions), alphabet)
    return ProductAutomaton(base, tuple(order))


def build_shuffle_automaton(automata: Sequence[Automaton]) -> ProductAutomaton:
    """Shuffling automaton: a letter of factor ``i`` advances component ``i`` only.

    Only tuples reachable from the initial tuple are materialised.
    """
    if not automata:
        raise ProductError("need at least one factor")
    _check_disjoint(automata, frozenset())
    return _explore(automata, None)


def alpha_transitions(a: Automaton, alpha: Letter) -> list[Transition]:
    return [t for t in a.transitions if t.letter == alpha]


def build_sync_product(automata: Sequence[Automaton], alpha: Letter) -> ProductAutomaton:
    """Synchronised product with ``{alpha}`` as synchronisation set."""
    if not automata:
        raise ProductError("need at least one factor")
    for i, a in enumerate(automata):
        k = len(alpha_transitions(a, alpha))
        if k != 1:
            raise ProductError(
                f"factor {i} has {k} {alpha.id!r} transitions; exactly one is required"
            )
    _check_disjoint(automata, frozenset({alpha}))
    return _explore(automata, alpha)


def enumerate_traces(
    p: ProductAutomaton | Automaton, n: int, limit: int = 10**6
) -> list[tuple[Letter, ...]]:
    """All accepted words of length ``n``, sorted by letter ids, no duplicates."""
    a = p.base if isinstance(p, ProductAutomaton) else p
    table = build_count_table(a, n)
    count = table.count(n)
    if count > limit:
        raise TooManyTraces(count, limit)
    words: set[tuple[Letter, ...]] = set()
    stack: list[tuple[int, tuple[Letter, ...]]] = [(a.initial, ())]
    while stack:
        state, prefix = stack.pop()
        if len(prefix) == n:
            if state in a.finals:
                words.add(prefix)
            continue
        live = table.g[n - len(prefix) - 1]
        for letter, dst in a.out[state]:
            if live[dst]:
                stack.append((dst, prefix + (letter,)))
    return sorted(words, key=lambda w: tuple(x.id for x in w))
