"""Uniform traces of module systems synchronised on a single letter ``alpha``.

Every module has exactly one ``alpha`` transition ``q1 -alpha-> q2``. Cutting
it splits the module language into four ``alpha``-free parts:

* begin   (B): initial state to ``q1``
* central (C): ``q2`` to ``q1``
* ending  (E): ``q2`` to a final state
* never   (T): initial state to a final state

so that ``S_i = B_i (alpha C_i)* alpha E_i  ∪  T_i``. A global trace with ``m``
synchronisations is ``w_0 alpha w_1 ... alpha w_m`` where ``w_0`` is a shuffle
of the B's, the middle segments shuffles of the C's and ``w_m`` a shuffle of
the E's; ``m = 0`` traces are shuffles of the T's.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .automaton import Automaton, Letter
from .counting import EmptyLanguageError
from .products import alpha_transitions
from .shuffle import ASYMPTOTIC, EXACT, ShuffleSampler, resolve_mode, sample_shuffle_trace
from .uniform import Rng, TraceWord

__all__ = [
    "SyncError",
    "Sublanguages",
    "SyncSkeleton",
    "SyncCountTables",
    "extract_sublanguages",
    "build_sync_count_tables",
    "sample_sync_skeleton",
    "sample_composition",
    "sample_sync_trace",
]

_MAX_RETRIES = 1000


class SyncError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Sublanguages:
    source: Automaton
    alpha: Letter
    before: int
    after: int
    begin: Automaton
    central: Automaton
    ending: Automaton
    never: Automaton


def extract_sublanguages(a: Automaton, alpha: Letter) -> Sublanguages:
    edges = alpha_transitions(a, alpha)
    if len(edges) != 1:
        raise SyncError(
            f"module has {len(edges)} {alpha.id!r} transitions; exactly one is supported"
        )
    q1, _, q2 = edges[0]
    drop = (alpha,)
    return Sublanguages(
        source=a,
        alpha=alpha,
        before=q1,
        after=q2,
        begin=a.rerooted(a.initial, {q1}, drop),
        central=a.rerooted(q2, {q1}, drop),
        ending=a.rerooted(q2, a.finals, drop),
        never=a.rerooted(a.initial, a.finals, drop),
    )


@dataclass(frozen=True)
class SyncSkeleton:
    m: int
    segment_lengths: tuple[int, ...]
    probability: Fraction | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.m < 0 or any(k < 0 for k in self.segment_lengths):
            raise ValueError(f"negative entry in skeleton {self}")
        if len(self.segment_lengths) != self.m + 1:
            raise ValueError(f"{self.m} synchronisations need {self.m + 1} segments")

    @property
    def length(self) -> int:
        return self.m + sum(self.segment_lengths)


@dataclass(frozen=True)
class _Growth:
    """Shuffled family growth ``C * omega**k`` as logs; ``None`` means empty."""

    log_c: float | None
    omega: float

    @property
    def empty(self) -> bool:
        return self.log_c is None


def _family_growth(sampler: ShuffleSampler) -> _Growth:
    if any(p is None for p in sampler.params):
        return _Growth(None, 0.0)
    log_c = sum(math.log(p.c_const) for p in sampler.params)
    return _Growth(log_c, sum(p.omega for p in sampler.params))


def _convolve(x: Sequence[int], y: Sequence[int], upto: int) -> list[int]:
    return [sum(x[k] * y[q - k] for k in range(q + 1)) for q in range(upto + 1)]


def _log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _log_compositions(total: int, parts: int) -> float:
    """log of the number of weak compositions of ``total`` into ``parts`` parts."""
    if parts == 0:
        return 0.0 if total == 0 else -math.inf
    return _log_binom(total + parts - 1, parts - 1)


class SyncCountTables:
    """Counts (exact) or growth estimates (asymptotic) for traces of one length ``n``.

    Exact mode holds ``b, c, e, t`` (shuffled family counts), the convolution
    powers ``c^{*q}`` and ``s(n, m)`` as integers. Asymptotic mode holds the
    same quantities as natural logarithms.
    """

    def __init__(self, subs: Sequence[Sublanguages], n: int, mode: str) -> None:
        if not subs:
            raise SyncError("need at least one module")
        alphas = {s.alpha for s in subs}
        if len(alphas) != 1:
            raise SyncError(f"modules disagree on the synchronisation letter: {sorted(alphas)}")
        self.subs = list(subs)
        self.alpha = subs[0].alpha
        self.n = n
        self.mode = resolve_mode(mode, sum(s.source.n_states for s in subs), n)
        fam = self.mode

        def sampler(attr: str) -> ShuffleSampler:
            return ShuffleSampler([getattr(s, attr) for s in subs], n, fam)

        self.begin = sampler("begin")
        self.central = sampler("central")
        self.ending = sampler("ending")
        self.never = sampler("never")
        self.warnings = [
            f"{name} family, {w}"
            for name, fam in (("begin", self.begin), ("central", self.central),
                              ("ending", self.ending), ("never", self.never))
            for w in fam.warnings
        ]
        self._owner = {}
        for i, s in enumerate(subs):
            for x in s.source.alphabet:
                if x != self.alpha:
                    self._owner[x] = i
        if self.mode == EXACT:
            self._build_exact()
        else:
            self._build_asymptotic()

    # exact ---------------------------------------------------------------

    def _build_exact(self) -> None:
        n = self.n
        self.b = [self.begin.total(k) for k in range(n + 1)]
        self.c = [self.central.total(k) for k in range(n + 1)]
        self.e = [self.ending.total(k) for k in range(n + 1)]
        self.t = [self.never.total(k) for k in range(n + 1)]
        # powers[q][Q]: sequences of q central words with total length Q.
        powers = [[1] + [0] * n]
        for _ in range(1, max(n, 1)):
            prev = powers[-1]
            if not any(prev):
                powers.append([0] * (n + 1))
                continue
            powers.append(_convolve(prev, self.c, n))
        self.powers = powers
        self.be = _convolve(self.b, self.e, n)
        s_nm = [self.t[n]]
        for m in range(1, n + 1):
            p = powers[m - 1]
            s_nm.append(sum(self.be[k] * p[n - m - k] for k in range(n - m + 1)))
        self.s_nm = s_nm
        self.s_total = sum(s_nm)

    def s(self, m: int, i0: int | None = None, im: int | None = None) -> int:
        """``s(n, m)``, or ``s(n, m, i0, im)`` when both segment lengths are given (exact mode)."""
        if self.mode != EXACT:
            raise SyncError("exact counts require exact mode")
        if i0 is None:
            return self.s_nm[m]
        if m == 0:
            raise ValueError("segment lengths are only defined for m > 0")
        q = self.n - m - i0 - im
        if q < 0:
            return 0
        return self.b[i0] * self.e[im] * self.powers[m - 1][q]

    # asymptotic ----------------------------------------------------------

    def _build_asymptotic(self) -> None:
        n = self.n
        self.growth = {
            "b": _family_growth(self.begin),
            "c": _family_growth(self.central),
            "e": _family_growth(self.ending),
            "t": _family_growth(self.never),
        }
        gb, gc, ge, gt = (self.growth[k] for k in "bcet")
        log_s = np.full(n + 1, -np.inf)
        if not gt.empty:
            log_s[0] = gt.log_c + n * math.log(gt.omega)
        self._log_g = None
        if not (gb.empty or ge.empty):
            lb, le = math.log(gb.omega), math.log(ge.omega)
            # log sum_{i0+im=K} omega_b^i0 omega_e^im
            self._log_g = np.array(
                [np.logaddexp.reduce(np.arange(k + 1) * lb + (k - np.arange(k + 1)) * le) for k in range(n + 1)]
            )
            for m in range(1, n + 1):
                terms = self._log_terms(m)
                log_s[m] = np.logaddexp.reduce(terms)
        self.log_s_nm = log_s

    def _log_terms(self, m: int) -> np.ndarray:
        """log weight of each middle length ``Q = 0..n-m`` for ``m`` synchronisations."""
        gb, gc, ge = self.growth["b"], self.growth["c"], self.growth["e"]
        span = self.n - m
        terms = np.full(span + 1, -np.inf)
        q = m - 1
        for Q in range(span + 1):
            if q == 0:
                if Q:
                    continue
                mid = 0.0
            else:
                if gc.empty:
                    continue
                mid = q * gc.log_c + Q * math.log(gc.omega) + _log_compositions(Q, q)
            terms[Q] = gb.log_c + ge.log_c + mid + self._log_g[span - Q]
        return terms

    def __repr__(self) -> str:
        return f"SyncCountTables(r={len(self.subs)}, n={self.n}, mode={self.mode!r})"


def build_sync_count_tables(subs: Sequence[Sublanguages], n: int, mode: str = EXACT) -> SyncCountTables:
    return SyncCountTables(subs, n, mode)


def _pick(weights: Sequence[int], rng: Rng) -> tuple[int, int, int]:
    """Index drawn proportionally to nonnegative integer ``weights``; also returns (weight, total)."""
    acc = []
    running = 0
    for w in weights:
        running += w
        acc.append(running)
    if running == 0:
        raise EmptyLanguageError("all weights are zero")
    k = bisect.bisect_right(acc, rng.below(running))
    return k, weights[k], running


def _pick_log(log_weights: np.ndarray, rng: Rng) -> int:
    w = np.exp(log_weights - np.max(log_weights))
    return rng.choices(range(len(w)), w.tolist(), 1)[0]


def sample_composition(total: int, parts: int, rng: Rng) -> tuple[int, ...]:
    """Uniform weak composition of ``total`` into ``parts`` nonnegative parts.

    Picks ``parts - 1`` distinct cut points among ``1 .. total + parts - 1``
    and returns the gaps between consecutive cuts.
    """
    if total < 0 or parts < 0:
        raise ValueError(f"bad composition request Q={total}, q={parts}")
    if parts == 0:
        if total:
            raise ValueError(f"cannot split {total} into zero parts")
        return ()
    cuts = sorted(rng.sample(range(1, total + parts), parts - 1))
    out = []
    prev = 0
    for j in cuts:
        out.append(j - prev - 1)
        prev = j
    out.append(total + parts - 1 - prev)
    return tuple(out)


def sample_sync_skeleton(
    t: SyncCountTables, n: int, rng: Rng, track: bool = False
) -> SyncSkeleton:
    """Draw the number of synchronisations and the length of every segment."""
    if n != t.n:
        raise ValueError(f"tables were built for length {t.n}, not {n}")
    if t.mode == EXACT:
        return _exact_skeleton(t, rng, track)
    return _asymptotic_skeleton(t, rng)


def _exact_skeleton(t: SyncCountTables, rng: Rng, track: bool) -> SyncSkeleton:
    n = t.n
    if t.s_total == 0:
        raise EmptyLanguageError(f"no synchronised trace of length {n}")
    m, w, total = _pick(t.s_nm, rng)
    p = Fraction(w, total) if track else None
    if m == 0:
        return SyncSkeleton(0, (n,), p)
    # (i0, im) in two stages: K = i0 + im, then i0 given K.
    power = t.powers[m - 1]
    span = n - m
    k, w, total = _pick([t.be[k] * power[span - k] for k in range(span + 1)], rng)
    if p is not None:
        p *= Fraction(w, total)
    i0, w, total = _pick([t.b[i] * t.e[k - i] for i in range(k + 1)], rng)
    if p is not None:
        p *= Fraction(w, total)
    im = k - i0
    middle = []
    remaining = span - k
    for q in range(m - 1, 1, -1):
        rest = t.powers[q - 1]
        i, w, total = _pick([t.c[i] * rest[remaining - i] for i in range(remaining + 1)], rng)
        if p is not None:
            p *= Fraction(w, total)
        middle.append(i)
        remaining -= i
    if m >= 2:
        middle.append(remaining)
    return SyncSkeleton(m, (i0, *middle, im), p)


def _asymptotic_skeleton(t: SyncCountTables, rng: Rng) -> SyncSkeleton:
    n = t.n
    if np.all(np.isneginf(t.log_s_nm)):
        raise EmptyLanguageError(f"no synchronised trace of length {n}")
    m = _pick_log(t.log_s_nm, rng)
    if m == 0:
        return SyncSkeleton(0, (n,))
    span = n - m
    middle_total = _pick_log(t._log_terms(m), rng)
    k = span - middle_total
    lb = math.log(t.growth["b"].omega)
    le = math.log(t.growth["e"].omega)
    i = np.arange(k + 1)
    i0 = _pick_log(i * lb + (k - i) * le, rng)
    middle = sample_composition(middle_total, m - 1, rng)
    return SyncSkeleton(m, (i0, *middle, k - i0))


def sample_sync_trace(t: SyncCountTables, n: int, rng: Rng, track: bool = False) -> TraceWord:
    """Uniform (exact mode) or near-uniform (asymptotic mode) synchronised trace of length ``n``."""
    for _ in range(_MAX_RETRIES):
        skeleton = sample_sync_skeleton(t, n, rng, track=track)
        try:
            return _fill(t, skeleton, rng, track)
        except EmptyLanguageError:
            # Asymptotic skeletons can ask for a segment length with no words.
            if t.mode == EXACT:
                raise
    raise EmptyLanguageError(
        f"no realisable skeleton found for length {n} after {_MAX_RETRIES} tries; "
        "the growth estimates are unreliable here (see the tables' warnings), use exact mode"
    )


def _fill(t: SyncCountTables, skeleton: SyncSkeleton, rng: Rng, track: bool) -> TraceWord:
    m, lengths = skeleton.m, skeleton.segment_lengths
    if m == 0:
        families = [t.never]
    else:
        families = [t.begin] + [t.central] * (m - 1) + [t.ending]
    letters: list[Letter] = []
    probability = skeleton.probability
    for idx, (family, k) in enumerate(zip(families, lengths)):
        if idx:
            letters.append(t.alpha)
        word = sample_shuffle_trace(family, k, rng, track=track)
        letters.extend(word.letters)
        if probability is not None:
            probability *= word.probability
    states = _replay(t, letters)
    return TraceWord(tuple(letters), tuple(states), probability)


def _replay(t: SyncCountTables, letters: Sequence[Letter]) -> list[tuple[int, ...]]:
    automata = [s.source for s in t.subs]
    current = [a.initial for a in automata]
    states = [tuple(current)]
    for x in letters:
        if x == t.alpha:
            movers = range(len(automata))
        else:
            movers = (t._owner[x],)
        for i in movers:
            nxt = automata[i].step(current[i], x)
            if nxt is None:
                raise SyncError(f"letter {x.id!r} not enabled in module {i}")
            current[i] = nxt
        states.append(tuple(current))
    return states
