"""Seeded disturbance sampling, Gaussian log-likelihoods, and flight-plan construction.

All geometry lives on a flat local tangent plane measured in nautical miles,
with +y pointing true north, +x pointing east, and bearings read clockwise
from north. Sampling is deterministic: one 64-bit seed fully determines one
disturbance, and a sequence of seeds fully determines a flight plan.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

#: Smallest waypoint displacement magnitude kept after sampling (nmi).
DISTANCE_FLOOR_NMI = 0.01

MAX_SEED = 2**64

#: Named origin airports placed on the local plane (nmi coordinates).
ORIGIN_PRESETS: dict[str, tuple[float, float]] = {
    "KSFO": (0.0, 0.0),
    "KLAX": (193.0, -220.6),
}


@dataclass(frozen=True)
class EnvDistribution:
    """Independent normals over (waypoint bearing, distance, wind direction, wind speed).

    Units are degrees, nautical miles, degrees, and knots respectively.
    ``sigma`` holds standard deviations, not variances.
    """

    mu: tuple[float, float, float, float] = (180.0, 50.0, -88.5, 66.8)
    sigma: tuple[float, float, float, float] = (45.0, 30.0, 39.5, 24.4)

    def __post_init__(self) -> None:
        object.__setattr__(self, "mu", tuple(float(m) for m in self.mu))
        object.__setattr__(self, "sigma", tuple(float(s) for s in self.sigma))
        if len(self.mu) != 4 or len(self.sigma) != 4:
            raise ValueError("mu and sigma must each have four components")
        if not all(math.isfinite(m) for m in self.mu):
            raise ValueError("mu components must be finite")
        if not all(math.isfinite(s) and s > 0.0 for s in self.sigma):
            raise ValueError("sigma components must be strictly positive")


@dataclass(frozen=True)
class Disturbance:
    """One sampled 4-vector of environment disturbances.

    ``wpt_bearing`` and ``wpt_distance`` describe the displacement to the next
    waypoint after clamping; ``raw`` keeps the unclamped draw so that densities
    are evaluated on what was actually sampled. A negative sampled distance
    displaces along the reciprocal bearing with its magnitude kept, so the
    stored distance is always >= DISTANCE_FLOOR_NMI.
    """

    wpt_bearing: float
    wpt_distance: float
    wind_dir: float
    wind_speed: float
    raw: tuple[float, float, float, float] | None = None

    @property
    def sample_vector(self) -> tuple[float, float, float, float]:
        if self.raw is not None:
            return self.raw
        return (self.wpt_bearing, self.wpt_distance, self.wind_dir, self.wind_speed)


@dataclass(frozen=True)
class SeedPath:
    """Ordered action seeds plus a plan origin; uniquely determines a simulation."""

    seeds: tuple[int, ...] = ()
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        seeds = tuple(int(s) for s in self.seeds)
        if any(s < 0 or s >= MAX_SEED for s in seeds):
            raise ValueError("seeds must be unsigned 64-bit integers")
        object.__setattr__(self, "seeds", seeds)
        ox, oy = self.origin
        object.__setattr__(self, "origin", (float(ox), float(oy)))

    def __len__(self) -> int:
        return len(self.seeds)

    def append(self, seed: int) -> "SeedPath":
        return SeedPath(self.seeds + (int(seed),), self.origin)


@dataclass(frozen=True)
class FlightPlan:
    """Origin, sampled waypoints, and per-waypoint winds on the local plane.

    ``winds`` holds one (direction deg, speed kts) pair per waypoint; when
    omitted the plan is calm.
    """

    origin: tuple[float, float]
    waypoints: tuple[tuple[float, float], ...]
    winds: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        origin = (float(self.origin[0]), float(self.origin[1]))
        wps = tuple((float(x), float(y)) for x, y in self.waypoints)
        winds = tuple((float(d), float(s)) for d, s in self.winds)
        if not winds:
            winds = tuple((0.0, 0.0) for _ in wps)
        if len(winds) != len(wps):
            raise ValueError("winds must supply one (dir, speed) pair per waypoint")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "waypoints", wps)
        object.__setattr__(self, "winds", winds)

    def points(self) -> tuple[tuple[float, float], ...]:
        """Full point sequence: origin followed by the waypoints."""
        return (self.origin,) + self.waypoints


@functools.lru_cache(maxsize=1 << 17)
def sample_disturbance(seed: int, dist: EnvDistribution) -> Disturbance:
    """Draw the disturbance determined by ``seed`` under ``dist``.

    Pure function of its arguments: a fresh generator is seeded per call, so
    identical inputs reproduce identical draws within a process.
    """
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    z = rng.standard_normal(4)
    raw = tuple(m + s * float(zi) for m, s, zi in zip(dist.mu, dist.sigma, z))
    bearing, distance, wind_dir, wind_speed = raw
    if distance < 0.0:
        bearing += 180.0
        distance = -distance
    return Disturbance(
        wpt_bearing=bearing % 360.0,
        wpt_distance=max(distance, DISTANCE_FLOOR_NMI),
        wind_dir=wind_dir,
        wind_speed=max(wind_speed, 0.0),
        raw=raw,
    )


def log_density(w: Disturbance, dist: EnvDistribution) -> float:
    """Natural-log density of ``w`` under ``dist``, summed over the four components.

    Evaluated on the unclamped sample when ``w`` carries one.
    """
    total = 0.0
    for x, m, s in zip(w.sample_vector, dist.mu, dist.sigma):
        zscore = (x - m) / s
        total += -math.log(s) - LOG_SQRT_2PI - 0.5 * zscore * zscore
    return total


def path_log_likelihood(path: SeedPath, dist: EnvDistribution) -> float:
    """Sum of per-disturbance log densities along the seed path."""
    if len(path) == 0:
        raise ValueError("cannot compute the likelihood of an empty seed path")
    return sum(log_density(sample_disturbance(s, dist), dist) for s in path.seeds)


def plan_from_disturbances(
    origin: tuple[float, float], disturbances: list[Disturbance] | tuple[Disturbance, ...]
) -> FlightPlan:
    """Chain displacements from ``origin``: each waypoint is the previous point
    moved ``wpt_distance`` along ``wpt_bearing``."""
    x, y = float(origin[0]), float(origin[1])
    waypoints = []
    winds = []
    for w in disturbances:
        b = math.radians(w.wpt_bearing)
        x += w.wpt_distance * math.sin(b)
        y += w.wpt_distance * math.cos(b)
        waypoints.append((x, y))
        winds.append((w.wind_dir, w.wind_speed))
    return FlightPlan((float(origin[0]), float(origin[1])), tuple(waypoints), tuple(winds))


def build_flight_plan(path: SeedPath, dist: EnvDistribution) -> FlightPlan:
    """Materialize the flight plan a seed path determines under ``dist``."""
    if len(path) == 0:
        raise ValueError("cannot build a flight plan from an empty seed path")
    return plan_from_disturbances(
        path.origin, [sample_disturbance(s, dist) for s in path.seeds]
    )


def normalize_degrees(angle: float) -> float:
    """Map any real angle in degrees into [0, 360) for display."""
    a = math.fmod(angle, 360.0)
    if a < 0.0:
        a += 360.0
    return 0.0 if a >= 360.0 else a


def resolve_origin(origin: str | tuple[float, float] | list[float]) -> tuple[float, float]:
    """Turn an origin preset name or coordinate pair into plane coordinates."""
    if isinstance(origin, str):
        try:
            return ORIGIN_PRESETS[origin]
        except KeyError:
            raise ValueError(
                f"unknown origin preset {origin!r}; known: {sorted(ORIGIN_PRESETS)}"
            ) from None
    x, y = origin
    return (float(x), float(y))


def load_env_config(path: str | Path) -> tuple[EnvDistribution, tuple[float, float]]:
    """Load environment parameters from a JSON file.

    Recognized keys: ``mu`` (4 floats), ``sigma`` (4 floats), ``origin``
    (preset name or [x, y] in nmi). Missing keys fall back to the defaults.
    """
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise ValueError(f"environment config {path} must be a JSON object")
    defaults = EnvDistribution()
    dist = EnvDistribution(
        mu=tuple(data.get("mu", defaults.mu)),
        sigma=tuple(data.get("sigma", defaults.sigma)),
    )
    origin = resolve_origin(data.get("origin", "KSFO"))
    return dist, origin
