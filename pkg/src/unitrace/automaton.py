"""Letter-labelled finite automata.

States are dense integers ``0..n_states-1``. Transitions are stored as a flat
tuple of ``(src, letter, dst)`` triples, with per-state adjacency computed on
demand. Automata are treated as immutable once built.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import networkx as nx
import numpy as np

__all__ = [
    "Letter",
    "Transition",
    "Automaton",
    "Violation",
    "GrowthDiagnostics",
    "validate_automaton",
    "check_growth_conditions",
    "format_automaton",
    "parse_automaton",
    "AutomatonFormatError",
]


@dataclass(frozen=True, order=True)
class Letter:
    """A transition label.

    Identity (equality, hashing, ordering) is the ``id`` alone. ``module_index``
    is ``None`` for the shared synchronisation letter.
    """

    id: str
    module_index: int | None = field(default=0, compare=False)
    display: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if not self.display:
            object.__setattr__(self, "display", self.id)

    def __str__(self) -> str:
        return self.display


class Transition(NamedTuple):
    src: int
    letter: Letter
    dst: int


@dataclass(frozen=True)
class Automaton:
    n_states: int
    initial: int
    finals: frozenset[int]
    transitions: tuple[Transition, ...]
    alphabet: frozenset[Letter] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "finals", frozenset(self.finals))
        object.__setattr__(
            self, "transitions", tuple(Transition(*t) for t in self.transitions)
        )
        if not self.alphabet:
            object.__setattr__(
                self, "alphabet", frozenset(t.letter for t in self.transitions)
            )
        else:
            object.__setattr__(self, "alphabet", frozenset(self.alphabet))

    @classmethod
    def build(
        cls,
        n_states: int,
        edges: Iterable[tuple[int, str | Letter, int]],
        initial: int = 0,
        finals: Iterable[int] | None = None,
        module_index: int | None = 0,
    ) -> "Automaton":
        """Convenience constructor; string labels become letters, finals default to all states."""
        transitions = []
        for src, label, dst in edges:
            letter = label if isinstance(label, Letter) else Letter(label, module_index)
            transitions.append(Transition(src, letter, dst))
        if finals is None:
            finals = range(n_states)
        return cls(n_states, initial, frozenset(finals), tuple(transitions))

    @cached_property
    def out(self) -> tuple[tuple[tuple[Letter, int], ...], ...]:
        """Per-state outgoing ``(letter, dst)`` pairs, in transition order."""
        adj: list[list[tuple[Letter, int]]] = [[] for _ in range(self.n_states)]
        for src, letter, dst in self.transitions:
            if 0 <= src < self.n_states:
                adj[src].append((letter, dst))
        return tuple(tuple(a) for a in adj)

    @cached_property
    def delta(self) -> dict[tuple[int, Letter], int]:
        return {(t.src, t.letter): t.dst for t in self.transitions}

    def step(self, state: int, letter: Letter) -> int | None:
        return self.delta.get((state, letter))

    def accepts(self, word: Sequence[Letter]) -> bool:
        state: int | None = self.initial
        for letter in word:
            state = self.step(state, letter)
            if state is None:
                return False
        return state in self.finals

    def run(self, word: Sequence[Letter]) -> list[int]:
        """States visited while reading ``word``; raises ``ValueError`` if it blocks."""
        states = [self.initial]
        for letter in word:
            nxt = self.step(states[-1], letter)
            if nxt is None:
                raise ValueError(f"no {letter.id!r} transition from state {states[-1]}")
            states.append(nxt)
        return states

    def reachable(self, start: int | None = None) -> list[int]:
        start = self.initial if start is None else start
        seen = {start}
        order = [start]
        queue = deque([start])
        while queue:
            s = queue.popleft()
            for _, d in self.out[s]:
                if d not in seen:
                    seen.add(d)
                    order.append(d)
                    queue.append(d)
        return order

    def rerooted(
        self,
        initial: int,
        finals: Iterable[int],
        drop: Iterable[Letter] = (),
    ) -> "Automaton":
        """Copy with a new initial state and final set, minus transitions on ``drop``; unreachable states pruned."""
        dropped = set(drop)
        kept = tuple(t for t in self.transitions if t.letter not in dropped)
        alphabet = self.alphabet - dropped
        return Automaton(self.n_states, initial, frozenset(finals), kept, alphabet).pruned()

    def pruned(self) -> "Automaton":
        """Drop states unreachable from the initial state, renumbering in BFS order."""
        order = self.reachable()
        if len(order) == self.n_states and order == list(range(self.n_states)):
            return self
        index = {s: i for i, s in enumerate(order)}
        transitions = tuple(
            Transition(index[t.src], t.letter, index[t.dst])
            for t in self.transitions
            if t.src in index
        )
        finals = frozenset(index[f] for f in self.finals if f in index)
        return Automaton(len(order), 0, finals, transitions, self.alphabet)

    def relabelled(self, mapping: dict[Letter, Letter]) -> "Automaton":
        transitions = tuple(
            Transition(t.src, mapping.get(t.letter, t.letter), t.dst) for t in self.transitions
        )
        alphabet = frozenset(mapping.get(x, x) for x in self.alphabet)
        return Automaton(self.n_states, self.initial, self.finals, transitions, alphabet)


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


def validate_automaton(a: Automaton, distinct_letters: bool = True) -> list[Violation]:
    """Structural violations of ``a``; empty when valid.

    With ``distinct_letters`` (the module encoding, one letter per transition)
    any letter carried by two transitions is a ``duplicate letter``. Without it
    only per-(state, letter) determinism is required, as in product automata.
    """
    report: list[Violation] = []
    n = a.n_states
    if n < 1:
        report.append(Violation("empty", "automaton has no states"))
    if not 0 <= a.initial < n:
        report.append(Violation("dangling state", f"initial state {a.initial}"))
    for f in sorted(a.finals):
        if not 0 <= f < n:
            report.append(Violation("dangling state", f"final state {f}"))
    by_letter: dict[Letter, list[Transition]] = {}
    for t in a.transitions:
        for end in (t.src, t.dst):
            if not 0 <= end < n:
                report.append(
                    Violation("dangling state", f"{t.src} {t.letter.id} {t.dst} references {end}")
                )
        if t.letter not in a.alphabet:
            report.append(Violation("unknown letter", f"{t.letter.id} not in alphabet"))
        by_letter.setdefault(t.letter, []).append(t)
    for letter, ts in by_letter.items():
        if distinct_letters:
            if len(ts) > 1:
                report.append(
                    Violation("duplicate letter", f"{letter.id} labels {len(ts)} transitions")
                )
            continue
        targets: dict[int, set[int]] = {}
        for t in ts:
            targets.setdefault(t.src, set()).add(t.dst)
        for src, dsts in targets.items():
            if len(dsts) > 1:
                report.append(
                    Violation(
                        "letter determinism",
                        f"{letter.id} leads from {src} to {sorted(dsts)}",
                    )
                )
    return report


@dataclass(frozen=True)
class GrowthDiagnostics:
    strongly_connected: bool
    aperiodic: bool
    unique_dominant_scc: bool
    spectral_radius: float = 0.0
    warning: str | None = None

    @property
    def certified(self) -> bool:
        """Whether a single dominant term ``C * omega**n`` is guaranteed."""
        return self.unique_dominant_scc and self.aperiodic and self.spectral_radius > 0


def _spectral_radius(matrix: np.ndarray) -> float:
    if matrix.shape[0] <= 2000:
        return float(max(abs(np.linalg.eigvals(matrix))))
    from scipy.sparse import csr_matrix
    from scipy.sparse.linalg import eigs

    vals = eigs(csr_matrix(matrix), k=1, which="LM", return_eigenvectors=False)
    return float(abs(vals[0]))


def _trimmed_graph(a: Automaton) -> nx.MultiDiGraph:
    """Transition multigraph restricted to states both accessible and co-accessible."""
    g = nx.MultiDiGraph()
    g.add_nodes_from(range(a.n_states))
    g.add_edges_from((t.src, t.dst) for t in a.transitions)
    live = nx.descendants(g, a.initial) | {a.initial}
    coreach: set[int] = set()
    for f in a.finals:
        if f in live:
            coreach |= nx.ancestors(g, f) | {f}
    return g.subgraph(live & coreach).copy()


def _period(g: nx.MultiDiGraph, nodes: set[int]) -> int:
    """gcd of cycle lengths of a strongly connected component (0 if acyclic)."""
    root = next(iter(nodes))
    level = {root: 0}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in g.successors(u):
            if v in nodes and v not in level:
                level[v] = level[u] + 1
                queue.append(v)
    period = 0
    for u in nodes:
        for v in g.successors(u):
            if v in nodes:
                period = math.gcd(period, level[u] + 1 - level[v])
    return period


def check_growth_conditions(a: Automaton) -> GrowthDiagnostics:
    """Strong connectivity, aperiodicity and dominant-component uniqueness of ``a``.

    Only the trimmed part of the automaton (reachable and able to reach a
    final state) contributes to word counts, so the analysis runs there.
    """
    if not a.transitions:
        return GrowthDiagnostics(
            a.n_states == 1, False, False, 0.0, "degenerate: ℓ(n)=0 for n≥1"
        )
    g = _trimmed_graph(a)
    if g.number_of_nodes() == 0:
        return GrowthDiagnostics(False, False, False, 0.0, "empty language")
    sccs = [set(c) for c in nx.strongly_connected_components(g)]
    radii = []
    for comp in sccs:
        nodes = sorted(comp)
        pos = {s: i for i, s in enumerate(nodes)}
        m = np.zeros((len(nodes), len(nodes)))
        for u, v in g.subgraph(nodes).edges():
            m[pos[u], pos[v]] += 1
        radii.append(_spectral_radius(m) if m.any() else 0.0)
    top = max(radii)
    strongly_connected = len(sccs) == 1
    if top == 0.0:
        return GrowthDiagnostics(
            strongly_connected, False, False, 0.0, "finite language: no cycles"
        )
    dominant = [i for i, r in enumerate(radii) if abs(r - top) <= 1e-9 * top]
    unique = len(dominant) == 1
    period = _period(g, sccs[dominant[0]]) if unique else 0
    aperiodic = period == 1
    warning = None
    if not unique:
        warning = f"{len(dominant)} strongly connected components share the dominant growth rate"
    elif not aperiodic:
        warning = f"dominant component is periodic (cycle gcd {period})"
    return GrowthDiagnostics(strongly_connected, aperiodic, unique, top, warning)


class AutomatonFormatError(ValueError):
    pass


def format_automaton(a: Automaton) -> str:
    lines = [
        f"states {a.n_states}",
        f"initial {a.initial}",
        "finals" + "".join(f" {f}" for f in sorted(a.finals)),
    ]
    used = {t.letter for t in a.transitions}
    if a.alphabet != used:
        lines.append("alphabet" + "".join(f" {x.id}" for x in sorted(a.alphabet)))
    lines.extend(f"{t.src} {t.letter.id} {t.dst}" for t in a.transitions)
    return "\n".join(lines) + "\n"


def parse_automaton(text: str, module_index: int | None = 0) -> Automaton:
    """Inverse of :func:`format_automaton`. Lines starting with ``#`` are ignored."""
    header: dict[str, list[str]] = {}
    transitions: list[Transition] = []
    letters: dict[str, Letter] = {}

    def letter(name: str) -> Letter:
        if name not in letters:
            letters[name] = Letter(name, module_index)
        return letters[name]

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        key = parts[0]
        if key in ("states", "initial", "finals", "alphabet"):
            if key in header:
                raise AutomatonFormatError(f"line {lineno}: repeated {key!r} header")
            header[key] = parts[1:]
            continue
        if len(parts) != 3:
            raise AutomatonFormatError(f"line {lineno}: expected 'src LETTER dst', got {line!r}")
        try:
            src, dst = int(parts[0]), int(parts[2])
        except ValueError:
            raise AutomatonFormatError(f"line {lineno}: non-integer state in {line!r}") from None
        transitions.append(Transition(src, letter(parts[1]), dst))
    for key in ("states", "initial"):
        if key not in header or len(header[key]) != 1:
            raise AutomatonFormatError(f"missing or malformed {key!r} header")
    try:
        n_states = int(header["states"][0])
        initial = int(header["initial"][0])
        finals = frozenset(int(x) for x in header.get("finals", []))
    except ValueError as exc:
        raise AutomatonFormatError(str(exc)) from None
    alphabet = frozenset(letter(x) for x in header.get("alphabet", []))
    alphabet |= {t.letter for t in transitions}
    return Automaton(n_states, initial, finals, tuple(transitions), alphabet)
