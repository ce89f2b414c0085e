"""Uniform random words of a fixed length via the recursive method."""

from __future__ import annotations

import random
import secrets
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .automaton import Letter
from .counting import CountTable, EmptyLanguageError

__all__ = ["Rng", "TraceWord", "draw_uniform_word", "word_probability"]


class Rng:
    """Seeded random stream. Same seed and call sequence, same outputs."""

    def __init__(self, seed: int | None = None) -> None:
        if seed is None:
            seed = secrets.randbits(63)
        self.seed = int(seed)
        self._random = random.Random(self.seed)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)``; exact for arbitrarily large ``n``."""
        return self._random.randrange(n)

    def random(self) -> float:
        return self._random.random()

    def choices(self, population: Sequence[Any], weights: Sequence[float], k: int) -> list[Any]:
        return self._random.choices(population, weights=weights, k=k)

    def sample(self, population: Sequence[Any], k: int) -> list[Any]:
        return self._random.sample(population, k)

    def spawn(self, count: int) -> list["Rng"]:
        """Independent child streams derived from this stream's seed."""
        children = np.random.SeedSequence(self.seed).spawn(count)
        return [Rng(int(c.generate_state(2, np.uint32).view(np.uint64)[0] >> 1)) for c in children]

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed})"


@dataclass(frozen=True)
class TraceWord:
    """A word together with the states visited while reading it.

    ``probability`` is the exact probability with which the sampler produced
    this word, when the sampler tracks it.
    """

    letters: tuple[Letter, ...]
    states: tuple[Any, ...]
    probability: Fraction | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(x.id for x in self.letters)

    def display(self) -> str:
        return " ".join(x.display for x in self.letters)


def draw_uniform_word(t: CountTable, n: int, rng: Rng, track: bool = False) -> TraceWord:
    """Draw a word of length ``n`` with probability exactly ``1/ℓ(n)``.

    One uniform integer below ``ℓ(n)`` is drawn and the word is unranked from
    it: at each step the remaining rank is compared against the cumulative
    completion counts ``g[m-1][s']`` of the successors, so the successor
    ``s'`` is taken with probability ``g[m-1][s'] / g[m][s]``.
    """
    if not 0 <= n <= t.horizon:
        raise IndexError(f"length {n} outside table horizon 0..{t.horizon}")
    a = t.automaton
    g = t.g
    state = a.initial
    total = g[n][state]
    if total == 0:
        raise EmptyLanguageError(f"no word of length {n}")
    rank = rng.below(total)
    out = a.out
    letters = []
    states = [state]
    for m in range(n, 0, -1):
        row = g[m - 1]
        for letter, dst in out[state]:
            w = row[dst]
            if rank < w:
                break
            rank -= w
        letters.append(letter)
        state = dst
        states.append(state)
    probability = word_probability(t, states) if track else None
    return TraceWord(tuple(letters), tuple(states), probability)


def word_probability(t: CountTable, states: Sequence[int]) -> Fraction:
    """Product of the branch ratios ``g[m-1][s'] / g[m][s]`` along a state path."""
    n = len(states) - 1
    p = Fraction(1)
    for i in range(n):
        m = n - i
        p *= Fraction(t.g[m - 1][states[i + 1]], t.g[m][states[i]])
    return p
