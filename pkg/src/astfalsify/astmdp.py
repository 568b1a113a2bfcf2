"""The falsification MDP over seed actions, with both reward modes.

States are seed prefixes; an action appends one seed. Nothing is evaluated
until an episode reaches full depth, at which point the SUT runs once and the
whole return arrives as a single terminal reward (intermediate rewards are
zero). The standard per-step reward split is kept as an optional mode.
"""

from __future__ import annotations

from dataclasses import dataclass

from .blackbox import EvalResult, SutSimulation
from .environment import SeedPath


@dataclass(frozen=True)
class RewardConfig:
    """Reward mode and constants.

    ``event_bonus`` defaults to 100 in episodic mode (a multiplicative bonus)
    and 0 in standard mode (an additive terminal reward).
    """

    mode: str = "episodic"
    event_bonus: float | None = None
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if self.mode not in ("standard", "episodic"):
            raise ValueError("mode must be 'standard' or 'episodic'")
        if self.event_bonus is None:
            bonus = 100.0 if self.mode == "episodic" else 0.0
            object.__setattr__(self, "event_bonus", bonus)
        if self.event_bonus < 0.0:
            raise ValueError("event_bonus must be non-negative")
        if not (0.0 < self.gamma <= 1.0):
            raise ValueError("gamma must lie in (0, 1]")


@dataclass(frozen=True)
class AstState:
    """A search state: the seed prefix that deterministically recreates it."""

    path: SeedPath

    @property
    def depth(self) -> int:
        return len(self.path)


def step(state: AstState, seed: int, d_max: int) -> AstState:
    """Append ``seed`` to the state. No SUT evaluation happens here and the
    intermediate reward is zero by construction."""
    if state.depth >= d_max:
        raise ValueError(f"cannot step past maximum depth {d_max}")
    return AstState(state.path.append(seed))


def reward_standard(p_log: float, e: bool, d: float, tau: bool, cfg: RewardConfig) -> float:
    """Per-step reward split: event bonus at a terminal event, negative miss
    distance at a terminal non-event, log-likelihood otherwise."""
    if tau and e:
        return cfg.event_bonus
    if tau and not e:
        return -d
    return p_log


def reward_episodic(p_log: float, e: bool, d: float, tau: bool, cfg: RewardConfig) -> float:
    """End-of-episode reward split: (log p - d) scaled by the event bonus at a
    terminal event, log p - d at a terminal non-event, zero otherwise."""
    if tau and e:
        return (p_log - d) * cfg.event_bonus
    if tau and not e:
        return p_log - d
    return 0.0


class AstMdp:
    """Binds a SUT, a depth limit and a reward config into one search problem.

    The SUT owns its environment distribution, so evaluation needs nothing
    beyond the state. One MDP drives one SUT instance; use separate instances
    for concurrent searches.
    """

    def __init__(
        self,
        sut: SutSimulation,
        d_max: int = 12,
        reward: RewardConfig | None = None,
        origin: tuple[float, float] = (0.0, 0.0),
    ) -> None:
        if d_max < 1:
            raise ValueError("d_max must be at least 1")
        self.sut = sut
        self.d_max = int(d_max)
        self.reward = reward if reward is not None else RewardConfig()
        self.origin = (float(origin[0]), float(origin[1]))

    def initial_state(self) -> AstState:
        return AstState(SeedPath((), self.origin))

    def step(self, state: AstState, seed: int) -> AstState:
        return step(state, seed, self.d_max)

    def evaluate_terminal(self, state: AstState) -> EvalResult:
        """Evaluate a full-depth state through the SUT (one counted call)."""
        if state.depth != self.d_max:
            raise ValueError(
                f"terminal evaluation requires depth {self.d_max}, got {state.depth}"
            )
        return self.sut.evaluate(state.path)

    def terminal_reward(self, result: EvalResult) -> float:
        fn = reward_episodic if self.reward.mode == "episodic" else reward_standard
        return fn(result.logp, result.event, result.miss, result.terminal, self.reward)
