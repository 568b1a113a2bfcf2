"""Contract every system under test implements, plus the shared result types.

The search algorithms only ever see this surface: they submit a full seed
path and get back the 4-tuple (log-likelihood, event flag, miss distance,
terminal flag). Evaluation cost accounting lives here so every algorithm is
budgeted identically.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass

from .environment import SeedPath


@dataclass(frozen=True)
class EvalResult:
    """Outcome of one full SUT evaluation.

    ``logp`` is the natural-log likelihood of the disturbance path, ``event``
    flags a failure, ``miss`` is the transformed distance to failure
    (non-positive iff an event occurred), and ``terminal`` is always true for
    a fully evaluated episode.
    """

    logp: float
    event: bool
    miss: float
    terminal: bool


@dataclass(frozen=True)
class EpisodeRecord:
    """One completed episode: seeds, likelihood, miss distance, event, reward.

    ``index`` is the 1-based evaluation number within a run. ``logp`` is None
    for episodes that were not drawn from the environment distribution (route
    database sampling), in which case ``seeds`` holds the route index.
    """

    index: int
    seeds: tuple[int, ...]
    logp: float | None
    miss: float
    event: bool
    reward: float


class SutSimulation(abc.ABC):
    """Abstract simulation wrapper around a system under test.

    Concrete simulations implement ``initialize`` plus the four subroutines
    ``transition``, ``miss_distance``, ``is_event`` and ``is_terminal``;
    ``evaluate`` composes them and meters evaluations. A simulation instance
    is single-threaded; distinct instances share no state.
    """

    def __init__(self) -> None:
        self._evaluations = 0

    @property
    def evaluations(self) -> int:
        """Monotone count of ``evaluate``/``evaluate_plan`` calls (the budget)."""
        return self._evaluations

    def evaluate(self, path: SeedPath) -> EvalResult:
        """Run the SUT on the simulation state a seed path determines.

        Increments the evaluation counter by exactly one per call. The result
        is a pure function of the path: identical paths yield identical
        results within a process. ``initialize`` does not reset the counter;
        it is cumulative across an experiment.
        """
        if len(path) == 0:
            raise ValueError("empty seed path: no flight plan can be built")
        self._evaluations += 1
        logp = self.transition(path)
        return EvalResult(
            logp=logp,
            event=self.is_event(),
            miss=self.miss_distance(),
            terminal=self.is_terminal(),
        )

    @abc.abstractmethod
    def initialize(self) -> None:
        """Reset the simulation and the SUT to the freshly constructed state."""

    @abc.abstractmethod
    def transition(self, path: SeedPath) -> float:
        """Advance the simulation through ``path``, run the SUT, return log p."""

    @abc.abstractmethod
    def miss_distance(self) -> float:
        """Miss distance of the last evaluated episode."""

    @abc.abstractmethod
    def is_event(self) -> bool:
        """Whether the last evaluated episode was a failure event."""

    @abc.abstractmethod
    def is_terminal(self) -> bool:
        """Whether the simulation is in a terminal state."""
