"""Command-line interface: run an experiment, replay an exported run.

Exit codes: 0 on success, 2 when a replay finds mismatches, 1 on error.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import json
from pathlib import Path

import click
import numpy as np

from .baselines import load_route_db
from .environment import EnvDistribution, SeedPath, load_env_config
from .harness import (
    ALGORITHMS,
    ExperimentConfig,
    Metrics,
    default_navdb,
    export_plot_data,
    export_records,
    replay as replay_records,
    run_experiment,
)
from .mctspw import SearchConfig
from .trajsut import DefectConfig, TrajectorySut, serialize_packet


def _load_configs(env_file, navdb_file, depth, episodes, defect_on, origin=None):
    if env_file is not None:
        try:
            env, file_origin = load_env_config(env_file)
        except (OSError, ValueError, KeyError) as exc:
            raise click.ClickException(f"cannot load environment config: {exc}")
        origin = file_origin if origin is None else origin
    else:
        env = EnvDistribution()
        origin = (0.0, 0.0) if origin is None else origin
    navdb = None
    if navdb_file is not None:
        try:
            navdb = load_route_db(navdb_file)
        except (OSError, ValueError, KeyError) as exc:
            raise click.ClickException(f"cannot load route database: {exc}")
    return ExperimentConfig(
        search=SearchConfig(episodes=episodes, d_max=depth),
        env=env,
        defect=DefectConfig(enabled=defect_on),
        navdb=navdb,
        origin=origin,
    )


def _metrics_payload(metrics: Metrics) -> dict:
    return dataclasses.asdict(metrics)


def _export_best_packet(records, config: ExperimentConfig, out: Path) -> None:
    best = min(records, key=lambda r: r.miss)
    sut = TrajectorySut(config.env, config.defect)
    if best.logp is None:
        db = config.navdb if config.navdb is not None else default_navdb()
        sut.evaluate_plan(db.routes[best.seeds[0]].plan())
    else:
        sut.evaluate(SeedPath(best.seeds, config.origin))
    (out / "best_packet.txt").write_text(serialize_packet(sut.last_packet))


def _run_one(algo: str, config: ExperimentConfig, master_seed: int, out_dir: Path) -> Metrics:
    records, metrics = run_experiment(algo, config, master_seed)
    out_dir.mkdir(parents=True, exist_ok=True)
    export_records(records, out_dir / "records.csv")
    export_plot_data(records, out_dir)
    (out_dir / "metrics.json").write_text(json.dumps(_metrics_payload(metrics), indent=2) + "\n")
    _export_best_packet(records, config, out_dir)
    return metrics


def _trial_seed(master_seed: int, trial: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=(trial,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _run_trial(args) -> tuple[int, Metrics]:
    algo, config, seed, out_dir = args
    return seed, _run_one(algo, config, seed, Path(out_dir))


@click.group()
def cli() -> None:
    """Seed-space falsification toolkit for the reference trajectory predictor."""


@cli.command()
@click.option("--algo", type=click.Choice(ALGORITHMS), default="mcts", show_default=True)
@click.option("--episodes", type=int, default=5000, show_default=True, help="SUT evaluation budget.")
@click.option("--depth", type=int, default=12, show_default=True, help="Waypoints per episode.")
@click.option("--seed", type=int, default=0, show_default=True, help="Master seed.")
@click.option("--defect", type=click.Choice(["on", "off"]), default="on", show_default=True)
@click.option("--env", "env_file", type=click.Path(dir_okay=False), default=None, help="Environment JSON.")
@click.option("--navdb", "navdb_file", type=click.Path(dir_okay=False), default=None, help="Route database JSON.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="out", show_default=True)
@click.option("--trials", type=int, default=1, show_default=True, help="Independent repetitions (derived seeds).")
def run(algo, episodes, depth, seed, defect, env_file, navdb_file, out_dir, trials) -> int:
    """Run one falsification experiment and export records plus plot data."""
    config = _load_configs(env_file, navdb_file, depth, episodes, defect == "on")
    out = Path(out_dir)
    try:
        if trials <= 1:
            metrics = _run_one(algo, config, seed, out)
            click.echo(f"{algo}: {json.dumps(_metrics_payload(metrics))}")
            return 0
        jobs = [
            (algo, config, _trial_seed(seed, t), str(out / f"trial_{t:02d}"))
            for t in range(trials)
        ]
        results: dict[int, Metrics] = {}
        with concurrent.futures.ProcessPoolExecutor(max_workers=min(trials, 8)) as pool:
            for (trial_seed, metrics), job in zip(pool.map(_run_trial, jobs), jobs):
                results[trial_seed] = metrics
        out.mkdir(parents=True, exist_ok=True)
        lines = ["trial,seed,n_events,first_failure,mean_miss,std_miss,min_miss"]
        for t, job in enumerate(jobs):
            m = results[job[2]]
            ff = "" if m.first_failure is None else str(m.first_failure)
            lines.append(
                f"{t},{job[2]},{m.n_events},{ff},{m.mean_miss:.9g},{m.std_miss:.9g},{m.min_miss:.9g}"
            )
        (out / "trials_summary.csv").write_text("\n".join(lines) + "\n")
        click.echo("\n".join(lines))
        return 0
    except (OSError, ValueError) as exc:
        raise click.ClickException(str(exc))


@cli.command()
@click.option("--records", "records_file", type=click.Path(dir_okay=False), required=True)
@click.option("--defect", type=click.Choice(["on", "off"]), default="on", show_default=True)
@click.option("--env", "env_file", type=click.Path(dir_okay=False), default=None)
@click.option("--navdb", "navdb_file", type=click.Path(dir_okay=False), default=None)
def replay(records_file, defect, env_file, navdb_file) -> int:
    """Re-evaluate an exported run and verify miss/event values match."""
    origin = (0.0, 0.0)
    env = EnvDistribution()
    if env_file is not None:
        try:
            env, origin = load_env_config(env_file)
        except (OSError, ValueError, KeyError) as exc:
            raise click.ClickException(f"cannot load environment config: {exc}")
    navdb = None
    if navdb_file is not None:
        try:
            navdb = load_route_db(navdb_file)
        except (OSError, ValueError, KeyError) as exc:
            raise click.ClickException(f"cannot load route database: {exc}")
    try:
        rows, mismatches = replay_records(
            records_file,
            env=env,
            defect=DefectConfig(enabled=defect == "on"),
            origin=origin,
            navdb=navdb,
        )
    except (OSError, ValueError) as exc:
        raise click.ClickException(str(exc))
    if mismatches:
        for m in mismatches:
            click.echo(
                f"episode {m.index}: {m.field} mismatch (recorded {m.recorded}, replayed {m.replayed})"
            )
        click.echo(f"{len(mismatches)} mismatch(es) across {len(rows)} episodes")
        return 2
    click.echo(f"replayed {len(rows)} episodes, no mismatches")
    return 0


def main(argv=None) -> int:
    """Entry point returning the process exit code."""
    try:
        rv = cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    return int(rv) if rv else 0
