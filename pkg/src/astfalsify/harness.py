"""Experiment orchestration, metrics, and CSV export/replay.

One run = one algorithm, one master seed, one shared SUT evaluation budget.
Every episode is exportable as a CSV row and every exported run can be
replayed bit-for-bit: seed paths are re-evaluated under the true environment
distribution, route-database rows (empty logp) against the route database.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .astmdp import AstMdp, RewardConfig
from .baselines import (
    CemConfig,
    RouteDatabase,
    cem_search,
    direct_monte_carlo,
    fit_cem_budget,
    generate_route_db,
    navdb_sample,
)
from .blackbox import EpisodeRecord
from .environment import EnvDistribution, SeedPath
from .mctspw import SearchConfig, search
from .trajsut import DefectConfig, TrajectorySut

ALGORITHMS = ("mcts", "mc", "cem", "navdb")

CSV_HEADER = "episode,event,miss,logp,reward,seeds"

HISTOGRAM_BINS = 50


@dataclass(frozen=True)
class Metrics:
    """Aggregate run statistics: failure count, first-failure episode, miss
    distance moments, and (when an MC reference is supplied) the relative
    mean failure log-likelihood."""

    n_events: int
    first_failure: int | None
    mean_miss: float
    std_miss: float
    min_miss: float
    rel_log: float | None = None


@dataclass
class ExperimentConfig:
    search: SearchConfig = field(default_factory=SearchConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    env: EnvDistribution = field(default_factory=EnvDistribution)
    defect: DefectConfig = field(default_factory=DefectConfig)
    cem: CemConfig | None = None
    navdb: RouteDatabase | None = None
    origin: tuple[float, float] = (0.0, 0.0)


def rel_log(
    failure_logps_alg: list[float], failure_logps_mc: list[float]
) -> float | None:
    """Ratio of mean failure log-likelihoods, algorithm over direct MC.

    Absent when either list is empty or the MC mean is zero. Computed
    verbatim on the raw means; report the means alongside when interpreting.
    """
    if not failure_logps_alg or not failure_logps_mc:
        return None
    mc_mean = sum(failure_logps_mc) / len(failure_logps_mc)
    if mc_mean == 0.0:
        return None
    alg_mean = sum(failure_logps_alg) / len(failure_logps_alg)
    return alg_mean / mc_mean


def failure_logps(records: list[EpisodeRecord]) -> list[float]:
    return [r.logp for r in records if r.event and r.logp is not None]


def compute_metrics(
    records: list[EpisodeRecord], mc_failure_logps: list[float] | None = None
) -> Metrics:
    if not records:
        raise ValueError("cannot compute metrics of an empty run")
    misses = [r.miss for r in records]
    events = [r for r in records if r.event]
    first = min((r.index for r in events), default=None)
    return Metrics(
        n_events=len(events),
        first_failure=first,
        mean_miss=sum(misses) / len(misses),
        std_miss=statistics.pstdev(misses) if len(misses) > 1 else 0.0,
        min_miss=min(misses),
        rel_log=rel_log(failure_logps(records), mc_failure_logps)
        if mc_failure_logps is not None
        else None,
    )


_default_navdb_cache: RouteDatabase | None = None


def default_navdb() -> RouteDatabase:
    """The synthetic feasible-geometry route fixture (deterministic)."""
    global _default_navdb_cache
    if _default_navdb_cache is None:
        _default_navdb_cache = generate_route_db()
    return _default_navdb_cache


def run_experiment(
    algo: str, config: ExperimentConfig, master_seed: int
) -> tuple[list[EpisodeRecord], Metrics]:
    """Dispatch one algorithm over the shared episode budget.

    The master seed seeds a single generator from which the algorithm draws
    every action seed, so a run is fully determined by (algo, config, seed).
    """
    if algo not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algo!r}; expected one of {ALGORITHMS}")
    rng = np.random.Generator(np.random.PCG64(master_seed))
    sut = TrajectorySut(config.env, config.defect)
    mdp = AstMdp(sut, config.search.d_max, config.reward, config.origin)
    episodes = config.search.episodes

    if algo == "mcts":
        records = search(mdp.initial_state(), config.search, mdp, rng).records
    elif algo == "mc":
        records = direct_monte_carlo(
            mdp.initial_state(), episodes, config.search.d_max, mdp, rng
        )
    elif algo == "cem":
        cem_cfg = fit_cem_budget(config.cem if config.cem is not None else CemConfig(), episodes)
        records, _ = cem_search(cem_cfg, mdp, rng)
    else:
        db = config.navdb if config.navdb is not None else default_navdb()
        records = navdb_sample(db, episodes, sut, rng)

    return records, compute_metrics(records)


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def export_records(records: list[EpisodeRecord], path: str | Path) -> None:
    """Write one CSV row per episode; seeds are semicolon-joined integers."""
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            ",".join(
                (
                    str(r.index),
                    "true" if r.event else "false",
                    _fmt(r.miss),
                    "" if r.logp is None else _fmt(r.logp),
                    _fmt(r.reward),
                    ";".join(str(s) for s in r.seeds),
                )
            )
        )
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"failed to write records to {path}: {exc}") from exc


def import_records(path: str | Path) -> list[EpisodeRecord]:
    """Inverse of :func:`export_records`."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"failed to read records from {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path} is not a records CSV (bad or missing header)")
    records = []
    for ln in lines[1:]:
        idx, event, miss, logp, reward, seeds = ln.split(",")
        records.append(
            EpisodeRecord(
                index=int(idx),
                seeds=tuple(int(s) for s in seeds.split(";")) if seeds else (),
                logp=None if logp == "" else float(logp),
                miss=float(miss),
                event=event == "true",
                reward=float(reward),
            )
        )
    return records


def _write_series(path: Path, header: str, rows: list[tuple]) -> None:
    lines = [header]
    for row in rows:
        lines.append(",".join(str(v) if isinstance(v, int) else _fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _histogram(values: list[float], bins: int = HISTOGRAM_BINS) -> list[tuple[float, float, int]]:
    if not values:
        return []
    lo, hi = min(values), max(values)
    if lo == hi:
        return [(lo, hi, len(values))]
    counts, edges = np.histogram(np.asarray(values), bins=bins, range=(lo, hi))
    return [
        (float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(len(counts))
    ]


def export_plot_data(records: list[EpisodeRecord], out_dir: str | Path) -> None:
    """Write the per-episode series (running mean/min miss, cumulative events)
    and the histograms of negated miss and failure-only log-likelihood."""
    if not records:
        raise ValueError("cannot export plot data for an empty run")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    running_mean: list[tuple] = []
    running_min: list[tuple] = []
    cumulative: list[tuple] = []
    total = 0.0
    best = math.inf
    events = 0
    for i, r in enumerate(records, start=1):
        total += r.miss
        best = min(best, r.miss)
        events += int(r.event)
        running_mean.append((r.index, total / i))
        running_min.append((r.index, best))
        cumulative.append((r.index, events))

    try:
        _write_series(out / "running_mean_miss.csv", "episode,value", running_mean)
        _write_series(out / "running_min_miss.csv", "episode,value", running_min)
        _write_series(out / "cumulative_events.csv", "episode,value", cumulative)
        _write_series(
            out / "hist_neg_miss.csv",
            "bin_left,bin_right,count",
            _histogram([-r.miss for r in records]),
        )
        _write_series(
            out / "hist_failure_logp.csv",
            "bin_left,bin_right,count",
            _histogram(failure_logps(records)),
        )
    except OSError as exc:
        raise OSError(f"failed to write plot data under {out}: {exc}") from exc


@dataclass(frozen=True)
class ReplayMismatch:
    index: int
    field: str
    recorded: float | bool
    replayed: float | bool


@dataclass(frozen=True)
class ReplayRow:
    index: int
    miss: float
    event: bool
    logp: float | None


def replay(
    records_path: str | Path,
    env: EnvDistribution | None = None,
    defect: DefectConfig | None = None,
    origin: tuple[float, float] = (0.0, 0.0),
    navdb: RouteDatabase | None = None,
) -> tuple[list[ReplayRow], list[ReplayMismatch]]:
    """Re-evaluate every exported episode and compare miss/event.

    Seed-path rows rebuild the path at ``origin``; rows without a logp are
    route-database episodes and need ``navdb``. Returns the replayed results
    plus any mismatches (nondeterminism or edited records).
    """
    records = import_records(records_path)
    sut = TrajectorySut(env, defect)
    rows: list[ReplayRow] = []
    mismatches: list[ReplayMismatch] = []

    for r in records:
        if r.logp is None:
            if navdb is None:
                raise ValueError(
                    f"episode {r.index} is a route-database record; a route database is required"
                )
            route_idx = r.seeds[0]
            if not (0 <= route_idx < len(navdb.routes)):
                raise ValueError(f"episode {r.index}: route index {route_idx} out of range")
            miss, event = sut.evaluate_plan(navdb.routes[route_idx].plan())
            logp = None
        else:
            result = sut.evaluate(SeedPath(r.seeds, origin))
            miss, event, logp = result.miss, result.event, result.logp
        rows.append(ReplayRow(index=r.index, miss=miss, event=event, logp=logp))
        if event != r.event:
            mismatches.append(ReplayMismatch(r.index, "event", r.event, event))
        if not math.isclose(miss, r.miss, rel_tol=1e-8, abs_tol=1e-6):
            mismatches.append(ReplayMismatch(r.index, "miss", r.miss, miss))
    return rows, mismatches
