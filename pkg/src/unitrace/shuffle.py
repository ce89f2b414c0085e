"""Uniform traces of unsynchronised module systems without building the product.

A trace of length ``n`` is produced in three steps: pick how many letters
each module contributes, draw each module's word uniformly, then interleave
the words uniformly.
"""

from __future__ import annotations

import bisect
import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .automaton import Automaton, Letter
from .counting import (
    AsymptoticParams,
    CountTable,
    EmptyLanguageError,
    build_count_table,
    default_ladder,
    estimate_asymptotics,
)
from .uniform import Rng, TraceWord, draw_uniform_word

__all__ = [
    "EXACT",
    "ASYMPTOTIC",
    "AUTO",
    "LengthVector",
    "ShuffleSampler",
    "resolve_mode",
    "sample_length_vector",
    "shuffle_words",
    "sample_shuffle_trace",
    "length_vector_distribution",
]

EXACT = "exact"
ASYMPTOTIC = "asymptotic"
AUTO = "auto"

AUTO_MAX_STATES = 10_000
AUTO_MAX_LENGTH = 512
# Below this length the asymptotic sampler uses exact probabilities instead.
SMALL_N = 16
_MAX_REJECTIONS = 10_000


def resolve_mode(mode: str, total_states: int, n: int) -> str:
    if mode == AUTO:
        if total_states <= AUTO_MAX_STATES and n <= AUTO_MAX_LENGTH:
            return EXACT
        return ASYMPTOTIC
    if mode not in (EXACT, ASYMPTOTIC):
        raise ValueError(f"unknown mode {mode!r}")
    return mode


@dataclass(frozen=True)
class LengthVector:
    parts: tuple[int, ...]
    total: int
    probability: Fraction | None = field(default=None, compare=False)
    warning: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if sum(self.parts) != self.total:
            raise ValueError(f"parts {self.parts} do not sum to {self.total}")


class ShuffleSampler:
    """Per-module count tables (and growth estimates) for one family of languages.

    ``horizon`` bounds the trace lengths that can be sampled. In exact mode the
    shuffled counts ``ℓ(m)`` for every ``m <= horizon`` are available through
    :meth:`total`.
    """

    def __init__(
        self,
        automata: Sequence[Automaton],
        horizon: int,
        mode: str = AUTO,
        ladder: Sequence[int] | None = None,
    ) -> None:
        if not automata:
            raise ValueError("need at least one module")
        self.automata = list(automata)
        self.horizon = horizon
        self.mode = resolve_mode(mode, sum(a.n_states for a in automata), horizon)
        self.tables: list[CountTable] = [build_count_table(a, horizon) for a in self.automata]
        self.ell = [t.counts for t in self.tables]
        self._suffix: list[list[int]] | None = None
        self._cumulative: dict[tuple[int, int], list[int]] = {}
        self.params: list[AsymptoticParams | None] = []
        self.warnings: list[str] = []
        if self.mode == ASYMPTOTIC:
            ladder = list(ladder) if ladder else default_ladder(horizon)
            for i, a in enumerate(self.automata):
                try:
                    p = estimate_asymptotics(a, ladder)
                except EmptyLanguageError as exc:
                    self.params.append(None)
                    self.warnings.append(f"module {i}: {exc}")
                    continue
                self.params.append(p)
                if not p.certified:
                    self.warnings.append(f"module {i}: {p.warning}")

    @property
    def r(self) -> int:
        return len(self.automata)

    def _suffix_counts(self) -> list[list[int]]:
        """``R[j][m]``: shuffled word counts of modules ``j..r-1`` at length ``m``."""
        if self._suffix is None:
            upto = self.horizon if self.mode == EXACT else min(self.horizon, SMALL_N - 1)
            comb = math.comb
            suffix = [self.ell[-1][: upto + 1]]
            for j in range(self.r - 2, -1, -1):
                own, rest = self.ell[j], suffix[0]
                suffix.insert(
                    0,
                    [
                        sum(comb(m, k) * own[k] * rest[m - k] for k in range(m + 1))
                        for m in range(upto + 1)
                    ],
                )
            self._suffix = suffix
        return self._suffix

    def total(self, n: int) -> int:
        """Exact number of shuffled words of length ``n``."""
        suffix = self._suffix_counts()
        if n >= len(suffix[0]):
            raise IndexError(f"exact counts available up to length {len(suffix[0]) - 1}")
        return suffix[0][n]

    def _exact_for(self, n: int) -> bool:
        return self.mode == EXACT or n < SMALL_N

    def _branch_weights(self, j: int, m: int) -> list[int]:
        key = (j, m)
        if key not in self._cumulative:
            own, rest = self.ell[j], self._suffix_counts()[j + 1]
            acc, running = [], 0
            for k in range(m + 1):
                running += math.comb(m, k) * own[k] * rest[m - k]
                acc.append(running)
            self._cumulative[key] = acc
        return self._cumulative[key]

    def __repr__(self) -> str:
        return f"ShuffleSampler(r={self.r}, horizon={self.horizon}, mode={self.mode!r})"


def sample_length_vector(s: ShuffleSampler, n: int, rng: Rng, track: bool = False) -> LengthVector:
    """Draw how many letters each module contributes to a length-``n`` trace.

    Exact: ``(n_1..n_r)`` with probability ``multinomial * prod ℓ_i(n_i) / ℓ(n)``,
    one coordinate at a time from its conditional marginal. Asymptotic: ``n``
    independent module picks with probability ``omega_i / sum(omega)``.
    """
    if n > s.horizon:
        raise IndexError(f"length {n} beyond sampler horizon {s.horizon}")
    if s._exact_for(n):
        total = s.total(n)
        if total == 0:
            raise EmptyLanguageError(f"no shuffled word of length {n}")
        parts = []
        m = n
        probability = Fraction(1) if track else None
        for j in range(s.r - 1):
            acc = s._branch_weights(j, m)
            k = bisect.bisect_right(acc, rng.below(acc[-1]))
            if probability is not None:
                prev = acc[k - 1] if k else 0
                probability *= Fraction(acc[k] - prev, acc[-1])
            parts.append(k)
            m -= k
        parts.append(m)
        return LengthVector(tuple(parts), n, probability)
    weights = [p.omega if p is not None else 0.0 for p in s.params]
    if not any(weights):
        raise EmptyLanguageError("no module has an infinite language")
    warning = "; ".join(s.warnings) or None
    for _ in range(_MAX_REJECTIONS):
        counts = Counter(rng.choices(range(s.r), weights, n))
        parts = tuple(counts.get(i, 0) for i in range(s.r))
        if all(s.ell[i][k] for i, k in enumerate(parts)):
            return LengthVector(parts, n, None, warning)
    raise EmptyLanguageError(f"could not find a length vector with nonzero counts for n={n}")


def _interleave(
    lengths: Sequence[int], rng: Rng, track: bool = False
) -> tuple[list[int], Fraction | None]:
    """Source index of each output position, and (if tracked) the probability of this order."""
    remaining = list(lengths)
    n = sum(remaining)
    order = []
    num = den = 1
    while n > 0:
        u = rng.below(n)
        i = 0
        while u >= remaining[i]:
            u -= remaining[i]
            i += 1
        if track:
            num *= remaining[i]
            den *= n
        order.append(i)
        remaining[i] -= 1
        n -= 1
    return order, Fraction(num, den) if track else None


def shuffle_words(ws: Sequence[Sequence[Letter]], rng: Rng) -> tuple[Letter, ...]:
    """Uniform interleaving of the words: repeatedly take the next letter of
    word ``i`` with probability ``n_i / n`` over the letters still left."""
    order, _ = _interleave([len(w) for w in ws], rng)
    pos = [0] * len(ws)
    out = []
    for i in order:
        out.append(ws[i][pos[i]])
        pos[i] += 1
    return tuple(out)


def sample_shuffle_trace(s: ShuffleSampler, n: int, rng: Rng, track: bool = False) -> TraceWord:
    lv = sample_length_vector(s, n, rng, track=track)
    words = [draw_uniform_word(t, k, rng, track=track) for t, k in zip(s.tables, lv.parts)]
    order, p_order = _interleave(lv.parts, rng, track=track)
    current = [w.states[0] for w in words]
    pos = [0] * s.r
    letters = []
    states = [tuple(current)]
    for i in order:
        w = words[i]
        letters.append(w.letters[pos[i]])
        pos[i] += 1
        current[i] = w.states[pos[i]]
        states.append(tuple(current))
    probability = None
    if track and lv.probability is not None:
        probability = lv.probability * p_order
        for w in words:
            probability *= w.probability
    return TraceWord(tuple(letters), tuple(states), probability)


def length_vector_distribution(s: ShuffleSampler, n: int, mode: str) -> dict[tuple[int, ...], float]:
    """Probability of every length vector under ``mode``, by enumeration (small ``r`` and ``n``)."""
    if mode == EXACT:
        total = s.total(n)
    else:
        omegas = [p.omega if p is not None else 0.0 for p in s.params]
        scale = sum(omegas)
        probs = [w / scale for w in omegas]
    out = {}
    for head in itertools.product(range(n + 1), repeat=s.r - 1):
        rest = n - sum(head)
        if rest < 0:
            continue
        parts = head + (rest,)
        multinomial = math.factorial(n)
        for k in parts:
            multinomial //= math.factorial(k)
        if mode == EXACT:
            weight = multinomial * math.prod(s.ell[i][k] for i, k in enumerate(parts))
            out[parts] = float(Fraction(weight, total))
        else:
            out[parts] = multinomial * math.prod(p**k for p, k in zip(probs, parts))
    return out
