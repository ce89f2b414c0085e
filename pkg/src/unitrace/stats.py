"""Goodness-of-fit checks of a sampler against an enumerated support."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

from scipy.special import gammaincc

__all__ = [
    "Histogram",
    "ChiSquareResult",
    "IllegalTraceError",
    "chi_square_uniform",
    "tv_distance",
    "ALPHA",
    "bonferroni",
]

# Per-suite significance level; split across cells with :func:`bonferroni`.
ALPHA = 0.001


def bonferroni(cells: int, alpha: float = ALPHA) -> float:
    return alpha / max(cells, 1)


class IllegalTraceError(AssertionError):
    """A sampled word lies outside the language it was drawn from."""


@dataclass
class Histogram:
    counts: Counter = field(default_factory=Counter)
    total: int = 0

    @classmethod
    def of(cls, samples: Iterable[Hashable]) -> "Histogram":
        counts = Counter(samples)
        return cls(counts, sum(counts.values()))

    def add(self, word: Hashable) -> None:
        self.counts[word] += 1
        self.total += 1

    def __add__(self, other: "Histogram") -> "Histogram":
        return Histogram(self.counts + other.counts, self.total + other.total)


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    df: int
    p_value: float


def _check_support(h: Histogram, support: Sequence[Hashable]) -> set:
    allowed = set(support)
    if len(allowed) != len(support):
        raise ValueError("support contains duplicates")
    for word in h.counts:
        if word not in allowed:
            raise IllegalTraceError(f"sampled word {word!r} is not in the support")
    return allowed


def chi_square_uniform(h: Histogram, support: Sequence[Hashable]) -> ChiSquareResult:
    """Pearson test of ``h`` against the uniform law on ``support``."""
    _check_support(h, support)
    k = len(support)
    if h.total < 5 * k:
        raise ValueError(f"{h.total} samples is too few for {k} cells (need {5 * k})")
    expected = h.total / k
    stat = sum((h.counts.get(w, 0) - expected) ** 2 for w in support) / expected
    df = k - 1
    p = float(gammaincc(df / 2, stat / 2)) if df > 0 else 1.0
    return ChiSquareResult(stat, df, p)


def tv_distance(h: Histogram, support: Sequence[Hashable]) -> float:
    _check_support(h, support)
    if h.total == 0:
        raise ValueError("empty histogram")
    u = 1 / len(support)
    return 0.5 * sum(abs(h.counts.get(w, 0) / h.total - u) for w in support)
