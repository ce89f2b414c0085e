"""Isotropic random walks and the (epsilon, delta) detection-probability estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .modules import GlobalState, ModuleSystem, parse_expression, successors
from .uniform import Rng

__all__ = [
    "Verdict",
    "EstimationParams",
    "WalkResult",
    "Estimate",
    "random_walk",
    "gaa_estimate",
    "iterated_estimate",
    "sample_size",
]

Path = Sequence[GlobalState]


@dataclass(frozen=True)
class Verdict:
    """Decides whether a finite path exposes an error.

    ``monotone`` declares that a detecting path keeps detecting under every
    extension.
    """

    predicate: Callable[[Path], bool]
    monotone: bool = False
    description: str = ""

    def __call__(self, path: Path) -> bool:
        return bool(self.predicate(path))

    @classmethod
    def when(cls, system: ModuleSystem, condition: str) -> "Verdict":
        """Fires once any state on the path satisfies ``condition`` (guard syntax)."""
        test = system.compile(parse_expression(condition, system))
        return cls(lambda path: any(test(s) for s in path), True, f"detect when {condition}")

    @classmethod
    def always(cls) -> "Verdict":
        return cls(lambda path: True, True, "always")


def sample_size(epsilon: float, delta: float) -> int:
    """Walks needed so the mean is within ``epsilon`` with probability ``1 - delta``
    (Hoeffding): ``ceil(ln(2/delta) / (2 epsilon**2))``."""
    if not 0 < epsilon < 1 or not 0 < delta < 1:
        raise ValueError(f"epsilon and delta must lie in (0, 1), got {epsilon}, {delta}")
    return math.ceil(math.log(2 / delta) / (2 * epsilon**2))


@dataclass(frozen=True)
class EstimationParams:
    epsilon: float
    delta: float
    k: int

    def __post_init__(self) -> None:
        sample_size(self.epsilon, self.delta)
        if self.k < 0:
            raise ValueError(f"walk depth must be nonnegative, got {self.k}")

    @property
    def n_samples(self) -> int:
        return sample_size(self.epsilon, self.delta)


@dataclass(frozen=True)
class WalkResult:
    detected: int
    path: tuple[GlobalState, ...]
    actions: tuple[str, ...]
    deadlocked: bool


@dataclass(frozen=True)
class Estimate:
    value: float
    hits: int
    n_samples: int
    k: int
    seed: int | None = field(default=None, compare=False)


def random_walk(system: ModuleSystem, k: int, verdict: Verdict, rng: Rng) -> WalkResult:
    """Walk up to ``k`` steps choosing uniformly among the successor moves.

    A deadlock ends the walk early; the truncated path is still judged.
    """
    if k < 0:
        raise ValueError(f"walk depth must be nonnegative, got {k}")
    state = system.initial_state()
    path = [state]
    actions = []
    deadlocked = False
    for _ in range(k):
        moves = successors(system, state)
        if not moves:
            deadlocked = True
            break
        what, state = moves[rng.below(len(moves))]
        actions.append(what)
        path.append(state)
    return WalkResult(int(verdict(path)), tuple(path), tuple(actions), deadlocked)


def gaa_estimate(
    system: ModuleSystem,
    k: int,
    verdict: Verdict,
    params: EstimationParams,
    rng: Rng,
) -> Estimate:
    """Mean detection over ``params.n_samples`` independent depth-``k`` walks."""
    n = params.n_samples
    hits = sum(random_walk(system, k, verdict, rng).detected for _ in range(n))
    return Estimate(hits / n, hits, n, k, rng.seed)


def iterated_estimate(
    system: ModuleSystem,
    verdict: Verdict,
    epsilon: float,
    delta: float,
    depths: Sequence[int],
    rng: Rng,
    stop_when_stable: bool = True,
) -> list[Estimate]:
    """Estimates at increasing depths, approaching the unbounded detection probability.

    With a monotone verdict the true values are nondecreasing in depth. With
    ``stop_when_stable`` the sweep ends once two consecutive estimates differ by
    less than ``epsilon``.
    """
    out: list[Estimate] = []
    for k in sorted(depths):
        est = gaa_estimate(system, k, verdict, EstimationParams(epsilon, delta, k), rng)
        out.append(est)
        if stop_when_stable and len(out) > 1 and abs(out[-1].value - out[-2].value) < epsilon:
            break
    return out
