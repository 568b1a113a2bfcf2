"""Baseline search strategies: direct Monte Carlo, the cross-entropy method,
and uniform sampling over a route database.

All baselines consume the same SUT evaluation budget accounting as the tree
search: one counted evaluation per episode. Cross-entropy episodes stay
replayable because the proposal only biases *which* seed paths get evaluated
(sampling-importance-resampling in seed space); every evaluated path is an
ordinary seed path under the true environment distribution.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .astmdp import AstMdp, AstState
from .blackbox import EpisodeRecord
from .environment import EnvDistribution, FlightPlan, log_density, sample_disturbance
from .mctspw import draw_seed
from .trajsut import TrajectorySut

#: Candidate paths drawn per evaluated path when resampling toward the proposal.
CEM_POOL_FACTOR = 10


class CemProposalCollapse(RuntimeError):
    """Raised when every elite importance weight underflows to zero."""


def _default_proposal() -> EnvDistribution:
    # True distribution except the waypoint distance is pulled toward short
    # legs (mu = 1 nmi, sigma = 3 nmi) to make failures less rare.
    base = EnvDistribution()
    return EnvDistribution(
        mu=(base.mu[0], 1.0, base.mu[2], base.mu[3]),
        sigma=(base.sigma[0], 3.0, base.sigma[2], base.sigma[3]),
    )


@dataclass(frozen=True)
class CemConfig:
    population: int = 100
    elite_count: int = 10
    iterations: int = 50
    proposal: EnvDistribution = field(default_factory=_default_proposal)
    sigma_floor: float = 1.0e-3

    def __post_init__(self) -> None:
        if self.population < 1 or self.iterations < 1:
            raise ValueError("population and iterations must be positive")
        if not (1 <= self.elite_count <= self.population):
            raise ValueError("elite_count must lie in [1, population]")
        if self.sigma_floor <= 0.0:
            raise ValueError("sigma_floor must be positive")

    @property
    def total_budget(self) -> int:
        return self.population * self.iterations


def fit_cem_budget(base: CemConfig, episodes: int) -> CemConfig:
    """Largest population <= base.population that divides ``episodes`` exactly,
    so population * iterations equals the requested budget."""
    if episodes < 1:
        raise ValueError("episodes must be positive")
    population = min(base.population, episodes)
    while episodes % population != 0:
        population -= 1
    return CemConfig(
        population=population,
        elite_count=min(base.elite_count, population),
        iterations=episodes // population,
        proposal=base.proposal,
        sigma_floor=base.sigma_floor,
    )


@dataclass(frozen=True)
class Route:
    name: str
    waypoints: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        wps = tuple((float(x), float(y)) for x, y in self.waypoints)
        if len(wps) < 2:
            raise ValueError(f"route {self.name!r} needs at least two waypoints")
        object.__setattr__(self, "waypoints", wps)

    def plan(self) -> FlightPlan:
        return FlightPlan(origin=self.waypoints[0], waypoints=self.waypoints[1:])


@dataclass(frozen=True)
class RouteDatabase:
    routes: tuple[Route, ...]

    def __post_init__(self) -> None:
        if not self.routes:
            raise ValueError("route database must hold at least one route")


def load_route_db(path: str | Path) -> RouteDatabase:
    """Read ``{"routes": [{"name": ..., "waypoints": [[x, y], ...]}]}``."""
    data = json.loads(Path(path).read_text())
    routes = tuple(
        Route(name=entry["name"], waypoints=tuple(map(tuple, entry["waypoints"])))
        for entry in data["routes"]
    )
    return RouteDatabase(routes)


def save_route_db(db: RouteDatabase, path: str | Path) -> None:
    payload = {
        "routes": [
            {"name": r.name, "waypoints": [[x, y] for x, y in r.waypoints]}
            for r in db.routes
        ]
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def generate_route_db(
    n_routes: int = 200, seed: int = 20240601, min_leg: float = 25.0, max_leg: float = 60.0
) -> RouteDatabase:
    """Synthetic route fixture with guaranteed-feasible fly-by geometry.

    Legs of 25-60 nmi with heading changes of at most 90 degrees leave every
    turn its full anticipation distance at the default predictor config, so
    the fixture produces no arc-length discrepancies.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    routes = []
    for i in range(n_routes):
        n_wp = int(rng.integers(4, 9))
        x = float(rng.uniform(-100.0, 100.0))
        y = float(rng.uniform(-100.0, 100.0))
        heading = float(rng.uniform(0.0, 360.0))
        pts = [(x, y)]
        for _ in range(n_wp - 1):
            heading += float(rng.uniform(-90.0, 90.0))
            length = float(rng.uniform(min_leg, max_leg))
            x += length * math.sin(math.radians(heading))
            y += length * math.cos(math.radians(heading))
            pts.append((x, y))
        routes.append(Route(name=f"ROUTE{i:03d}", waypoints=tuple(pts)))
    return RouteDatabase(tuple(routes))


def direct_monte_carlo(
    s0: AstState, n: int, depth: int, mdp: AstMdp, rng: np.random.Generator
) -> list[EpisodeRecord]:
    """``n`` independent uniform-seed rollouts, no action feeding, one SUT
    evaluation each."""
    if n < 0:
        raise ValueError("episode count must be non-negative")
    if depth != mdp.d_max:
        raise ValueError(f"rollout depth {depth} must match the MDP depth {mdp.d_max}")
    records: list[EpisodeRecord] = []
    for _ in range(n):
        mdp.sut.initialize()
        state = s0
        for _ in range(depth):
            state = mdp.step(state, draw_seed(rng))
        result = mdp.evaluate_terminal(state)
        records.append(
            EpisodeRecord(
                index=mdp.sut.evaluations,
                seeds=state.path.seeds,
                logp=result.logp,
                miss=result.miss,
                event=result.event,
                reward=mdp.terminal_reward(result),
            )
        )
    return records


def _path_log_densities(
    seeds: tuple[int, ...], true_dist: EnvDistribution, proposal: EnvDistribution
) -> tuple[float, float]:
    """(log f, log g) of one seed path's disturbances under the true and
    proposal distributions. Densities are evaluated on the unclamped draws."""
    logf = 0.0
    logg = 0.0
    for s in seeds:
        w = sample_disturbance(s, true_dist)
        logf += log_density(w, true_dist)
        logg += log_density(w, proposal)
    return logf, logg


def _refit_proposal(
    elite_seed_paths: list[tuple[int, ...]],
    weights: list[float],
    true_dist: EnvDistribution,
    sigma_floor: float,
) -> EnvDistribution:
    """Likelihood-ratio-weighted Gaussian MLE over the elites' raw draws.

    Each episode contributes all of its per-waypoint draws with its own
    episode-level weight; sigma is floored to keep the proposal proper.
    """
    sums = np.zeros(4)
    total = 0.0
    draws_per_episode = len(elite_seed_paths[0])
    for seeds, w in zip(elite_seed_paths, weights):
        for s in seeds:
            sums += w * np.asarray(sample_disturbance(s, true_dist).raw)
        total += w * draws_per_episode
    mean = sums / total
    sq = np.zeros(4)
    for seeds, w in zip(elite_seed_paths, weights):
        for s in seeds:
            dev = np.asarray(sample_disturbance(s, true_dist).raw) - mean
            sq += w * dev * dev
    sigma = np.sqrt(sq / total)
    sigma = np.maximum(sigma, sigma_floor)
    return EnvDistribution(mu=tuple(mean), sigma=tuple(sigma))


def cem_search(
    cfg: CemConfig, mdp: AstMdp, rng: np.random.Generator
) -> tuple[list[EpisodeRecord], EnvDistribution]:
    """Cross-entropy search: per iteration, resample a population of seed
    paths toward the current proposal, evaluate each once, then refit the
    proposal to the lowest-miss elites by likelihood-ratio-weighted MLE.

    Recorded log-likelihoods are always the true-distribution values.
    Raises :class:`CemProposalCollapse` when every elite weight underflows.
    """
    true_dist = mdp.sut.dist
    proposal = cfg.proposal
    records: list[EpisodeRecord] = []

    for _ in range(cfg.iterations):
        pool_size = cfg.population * CEM_POOL_FACTOR
        pool_seeds = rng.integers(0, 2**64, size=(pool_size, mdp.d_max), dtype=np.uint64)
        pool_paths = [tuple(int(s) for s in row) for row in pool_seeds]

        log_ratio = np.empty(pool_size)
        logf_pool = np.empty(pool_size)
        logg_pool = np.empty(pool_size)
        for i, seeds in enumerate(pool_paths):
            logf, logg = _path_log_densities(seeds, true_dist, proposal)
            logf_pool[i] = logf
            logg_pool[i] = logg
            log_ratio[i] = logg - logf
        shifted = np.exp(log_ratio - log_ratio.max())
        probs = shifted / shifted.sum()
        chosen = rng.choice(pool_size, size=cfg.population, replace=True, p=probs)

        population: list[tuple[EpisodeRecord, float]] = []  # (record, log g)
        for idx in chosen:
            seeds = pool_paths[int(idx)]
            state = mdp.initial_state()
            for s in seeds:
                state = mdp.step(state, s)
            result = mdp.evaluate_terminal(state)
            record = EpisodeRecord(
                index=mdp.sut.evaluations,
                seeds=seeds,
                logp=result.logp,
                miss=result.miss,
                event=result.event,
                reward=mdp.terminal_reward(result),
            )
            records.append(record)
            population.append((record, float(logg_pool[int(idx)])))

        elites = sorted(population, key=lambda item: item[0].miss)[: cfg.elite_count]
        weights = [math.exp(rec.logp - logg) for rec, logg in elites]
        if all(w == 0.0 for w in weights):
            raise CemProposalCollapse(
                "all elite likelihood ratios underflowed; the proposal has collapsed"
            )
        proposal = _refit_proposal(
            [rec.seeds for rec, _ in elites], weights, true_dist, cfg.sigma_floor
        )

    return records, proposal


def navdb_sample(
    db: RouteDatabase, n: int, sut: TrajectorySut, rng: np.random.Generator
) -> list[EpisodeRecord]:
    """Evaluate ``n`` routes drawn uniformly with replacement.

    Routes are not environment samples, so ``logp`` is absent; the record's
    seeds column holds the route index so runs can be replayed.
    """
    if n < 0:
        raise ValueError("episode count must be non-negative")
    records: list[EpisodeRecord] = []
    for _ in range(n):
        idx = int(rng.integers(0, len(db.routes)))
        miss, event = sut.evaluate_plan(db.routes[idx].plan())
        records.append(
            EpisodeRecord(
                index=sut.evaluations,
                seeds=(idx,),
                logp=None,
                miss=miss,
                event=event,
                reward=0.0,
            )
        )
    return records
