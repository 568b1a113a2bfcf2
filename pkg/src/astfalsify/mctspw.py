"""Monte Carlo tree search with progressive widening over seed actions.

The action space is the full 64-bit seed range, so nodes widen progressively:
a node with N visits may hold at most k * N^alpha actions. Each action leads
to a single deterministic child state (a seed fully determines the next
state), cached on first expansion. Rollouts defer the SUT call to the end of
the episode and feed the best known action once, midway through the rollout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .astmdp import AstMdp, AstState
from .blackbox import EpisodeRecord


@dataclass(frozen=True)
class SearchConfig:
    episodes: int = 5000
    d_max: int = 12
    exploration_c: float = 10.0
    pw_k: float = 10.0
    pw_alpha: float = 0.3
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if self.episodes <= 0:
            raise ValueError("episodes must be positive")
        if self.d_max < 1:
            raise ValueError("d_max must be at least 1")
        if not (0.0 < self.pw_alpha < 1.0):
            raise ValueError("pw_alpha must lie in (0, 1)")
        if self.pw_k < 1.0:
            raise ValueError("pw_k must be at least 1")
        if not (0.0 < self.gamma <= 1.0):
            raise ValueError("gamma must lie in (0, 1]")


@dataclass
class ActionNode:
    """Per-(state, action) statistics plus the cached deterministic child.

    ``visits`` starts at 1 on creation (counting the in-flight visit, so UCB
    never divides by zero); the first backup fills that visit instead of
    incrementing, and afterwards Q is exactly the mean of backed-up returns.
    """

    seed: int
    visits: int = 1
    q_value: float = 0.0
    child: tuple[AstState, float] | None = None
    child_visits: int = 0
    _awaiting_first_backup: bool = True

    def record(self, q: float) -> None:
        if self._awaiting_first_backup:
            self._awaiting_first_backup = False
        else:
            self.visits += 1
        self.q_value += (q - self.q_value) / self.visits


@dataclass
class StateNode:
    visits: int = 0
    children: dict[int, ActionNode] = field(default_factory=dict)


class BestActionStore:
    """Best action per depth, scored by total episodic return."""

    def __init__(self) -> None:
        self._best: dict[int, tuple[int, float]] = {}

    def update(self, seeds: tuple[int, ...], episode_return: float) -> None:
        for depth, seed in enumerate(seeds):
            held = self._best.get(depth)
            if held is None or episode_return > held[1]:
                self._best[depth] = (seed, episode_return)

    def lookup(self, depth: int) -> int | None:
        held = self._best.get(depth)
        return None if held is None else held[0]

    def snapshot(self) -> dict[int, tuple[int, float]]:
        return dict(self._best)


@dataclass
class SearchStats:
    widenings: int = 0
    feeds_used: int = 0
    terminal_reevaluations: int = 0


@dataclass
class SearchResult:
    best_root_seed: int | None
    records: list[EpisodeRecord]
    tree: dict[tuple[int, ...], StateNode]
    store: BestActionStore
    stats: SearchStats


def draw_seed(rng: np.random.Generator) -> int:
    """Fresh uniform 64-bit action seed."""
    return int(rng.integers(0, 2**64, dtype=np.uint64))


def ucb_score(q: float, state_visits: int, action_visits: int, exploration_c: float) -> float:
    return q + exploration_c * math.sqrt(math.log(state_visits) / action_visits)


def select_action(
    node: StateNode, cfg: SearchConfig, rng: np.random.Generator
) -> tuple[ActionNode, bool]:
    """Widen with a fresh random action while |A(s)| <= k N(s)^alpha, returning
    the new action immediately; otherwise return the UCB argmax. Ties break
    toward the lowest seed value for deterministic replay."""
    if node.visits < 1:
        raise ValueError("select_action requires a visited node")
    if len(node.children) <= cfg.pw_k * node.visits**cfg.pw_alpha:
        seed = draw_seed(rng)
        while seed in node.children:
            seed = draw_seed(rng)
        action = ActionNode(seed)
        node.children[seed] = action
        return action, True

    best: ActionNode | None = None
    best_score = -math.inf
    for seed in node.children:
        action = node.children[seed]
        score = ucb_score(action.q_value, node.visits, action.visits, cfg.exploration_c)
        if best is None or score > best_score or (score == best_score and seed < best.seed):
            best = action
            best_score = score
    assert best is not None
    return best, False


def deterministic_step(action: ActionNode, parent: AstState, mdp: AstMdp) -> tuple[AstState, float]:
    """Generate-and-cache the single child of (state, action); intermediate
    reward is always zero. Later calls return the cached pair unchanged."""
    if action.child is None:
        action.child = (mdp.step(parent, action.seed), 0.0)
        action.child_visits = 1
    else:
        action.child_visits += 1
    return action.child


def update_best_action(store: BestActionStore, episode: EpisodeRecord) -> None:
    """Fold a finished episode into the per-depth best-action store."""
    store.update(episode.seeds, episode.reward)


def search(
    s0: AstState,
    cfg: SearchConfig,
    mdp: AstMdp,
    rng: np.random.Generator,
    record_sink=None,
) -> SearchResult:
    """Run ``cfg.episodes`` search iterations from the empty-path root.

    Every iteration performs exactly one SUT evaluation: either a rollout from
    the newly expanded leaf, or a re-evaluation when selection reaches a
    full-depth state already in the tree. Returns the root action with the
    highest Q plus one record per evaluation.
    """
    if s0.depth != 0:
        raise ValueError("search must start from the empty-path root state")

    tree: dict[tuple[int, ...], StateNode] = {}
    store = BestActionStore()
    stats = SearchStats()
    records: list[EpisodeRecord] = []

    def evaluate_episode(state: AstState) -> float:
        result = mdp.evaluate_terminal(state)
        reward = mdp.terminal_reward(result)
        record = EpisodeRecord(
            index=mdp.sut.evaluations,
            seeds=state.path.seeds,
            logp=result.logp,
            miss=result.miss,
            event=result.event,
            reward=reward,
        )
        records.append(record)
        if record_sink is not None:
            record_sink(record)
        update_best_action(store, record)
        return reward

    feed_remaining = cfg.d_max // 2

    def rollout(state: AstState, remaining: int) -> float:
        if remaining == 0:
            return evaluate_episode(state)
        seed: int | None = None
        if remaining == feed_remaining:
            seed = store.lookup(state.depth)
            if seed is not None:
                stats.feeds_used += 1
        if seed is None:
            seed = draw_seed(rng)
        nxt = mdp.step(state, seed)
        return 0.0 + cfg.gamma * rollout(nxt, remaining - 1)

    def simulate(state: AstState, remaining: int) -> float:
        if remaining == 0:
            # Full-depth states are re-evaluated rather than scored zero so
            # that every iteration costs exactly one SUT call and exploited
            # failure paths keep their value estimates honest.
            stats.terminal_reevaluations += 1
            return evaluate_episode(state)
        key = state.path.seeds
        node = tree.get(key)
        if node is None:
            tree[key] = StateNode()
            return rollout(state, remaining)
        node.visits += 1
        action, created = select_action(node, cfg, rng)
        if created:
            stats.widenings += 1
        child_state, r = deterministic_step(action, state, mdp)
        q = r + cfg.gamma * simulate(child_state, remaining - 1)
        action.record(q)
        return q

    for _ in range(cfg.episodes):
        simulate(s0, cfg.d_max)

    root = tree.get(s0.path.seeds)
    best_seed: int | None = None
    best_q = -math.inf
    if root is not None:
        for seed, action in root.children.items():
            if action.q_value > best_q or (action.q_value == best_q and (best_seed is None or seed < best_seed)):
                best_seed = seed
                best_q = action.q_value
    return SearchResult(best_seed, records, tree, store, stats)
