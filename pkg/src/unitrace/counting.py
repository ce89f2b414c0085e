"""Exact word counting and dominant growth estimation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import mpmath

from .automaton import Automaton, check_growth_conditions

__all__ = [
    "CountTable",
    "AsymptoticParams",
    "EmptyLanguageError",
    "build_count_table",
    "count_words",
    "estimate_asymptotics",
    "default_ladder",
]

# 128-bit mantissa for ratio and power evaluation of huge integer counts.
_PRECISION_BITS = 128


class EmptyLanguageError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CountTable:
    """``g[i][s]``: number of length-``i`` words leading from ``s`` to a final state."""

    automaton: Automaton
    horizon: int
    g: tuple[tuple[int, ...], ...]

    def count(self, n: int) -> int:
        return count_words(self, n)

    @property
    def counts(self) -> list[int]:
        """``ℓ(0..horizon)`` for the initial state."""
        s0 = self.automaton.initial
        return [row[s0] for row in self.g]


def build_count_table(a: Automaton, n: int) -> CountTable:
    if n < 0:
        raise ValueError(f"horizon must be nonnegative, got {n}")
    succ = [[d for _, d in edges] for edges in a.out]
    row = tuple(1 if s in a.finals else 0 for s in range(a.n_states))
    rows = [row]
    for _ in range(n):
        prev = row
        row = tuple(sum(prev[d] for d in ds) for ds in succ)
        rows.append(row)
    return CountTable(a, n, tuple(rows))


def count_words(t: CountTable, n: int) -> int:
    if not 0 <= n <= t.horizon:
        raise IndexError(f"length {n} outside table horizon 0..{t.horizon}")
    return t.g[n][t.automaton.initial]


def default_ladder(n: int, cap: int = 512) -> list[int]:
    """Horizons ``{n, 2n, 4n}`` capped at ``cap``; always at least two rungs."""
    rungs = sorted({min(k, cap) for k in (n, 2 * n, 4 * n) if k > 0})
    if len(rungs) < 2:
        top = rungs[-1] if rungs else 2
        rungs = [max(1, top // 2), top]
    return rungs


@dataclass(frozen=True)
class AsymptoticParams:
    omega: float
    c_const: float
    fit_horizon: int
    relative_residual: float
    certified: bool
    residuals: tuple[tuple[int, float], ...] = ()
    warning: str | None = field(default=None, compare=False)

    def approx(self, k: int) -> float:
        return self.c_const * self.omega**k


def _residual(c: mpmath.mpf, omega: mpmath.mpf, n: int, exact: int) -> float:
    if exact == 0:
        return float("inf")
    return float(abs(c * omega**n / exact - 1))


def estimate_asymptotics(
    a: Automaton,
    ladder: Sequence[int],
    table: CountTable | None = None,
) -> AsymptoticParams:
    """Estimate ``(C, omega)`` with ``ℓ(n) ~ C * omega**n`` from exact counts.

    ``omega`` is the ratio of consecutive counts at the top of the ladder and
    ``C`` is back-solved there. Residuals ``|C omega**k / ℓ(k) - 1|`` are
    reported for every rung; the headline residual is at the second rung
    from the top.
    """
    ladder = sorted(set(ladder))
    if not ladder or ladder[0] < 0:
        raise ValueError(f"bad ladder {ladder!r}")
    top = ladder[-1]
    # A periodic language may vanish at top+1; look a few lengths further.
    reach = top + max(2, a.n_states + 1)
    if table is None or table.horizon < reach:
        table = build_count_table(a, reach)
    ell = table.counts
    if ell[top] == 0:
        raise EmptyLanguageError(f"empty language at length {top}")
    diagnostics = check_growth_conditions(a)
    if diagnostics.spectral_radius == 0:
        raise EmptyLanguageError(f"finite language: {diagnostics.warning}")
    with mpmath.workprec(_PRECISION_BITS):
        step = next((d for d in range(1, reach - top + 1) if ell[top + d] > 0), None)
        if step is None:
            raise EmptyLanguageError(f"finite language: no words beyond length {top}")
        omega = mpmath.root(mpmath.mpf(ell[top + step]) / ell[top], step)
        c = mpmath.mpf(ell[top]) / omega**top
        residuals = tuple((k, _residual(c, omega, k, ell[k])) for k in ladder)
    headline = residuals[-2][1] if len(residuals) > 1 else 0.0
    warning = diagnostics.warning
    if not diagnostics.certified and warning is None:
        warning = "growth conditions not certified"
    return AsymptoticParams(
        omega=float(omega),
        c_const=float(c),
        fit_horizon=top,
        relative_residual=headline,
        certified=diagnostics.certified,
        residuals=residuals,
        warning=warning,
    )
