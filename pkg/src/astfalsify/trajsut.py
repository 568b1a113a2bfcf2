"""Reference lateral trajectory predictor with a switchable arc-length defect.

The predictor turns a flight plan into a lateral packet: straight legs joined
by circular fly-by arcs that cut each interior corner. Turn radius follows the
coordinated-turn relation r = V^2 / (g tan(bank)), with ground speed taken as
airspeed plus the wind component along the inbound leg.

Defect model: when a turn does not fit (the required anticipation distance
exceeds what the legs can provide) the constructed arc sweep is clamped to
fit. A correct predictor reports the clamped arc length. The defective
predictor has two reporting flaws:

* Degenerate-gap misreport: a turn squeezed into a near-duplicate-waypoint
  gap (inbound room under DEGENERATE_GAP_NMI) that reverses the track by more
  than DEGENERATE_SWEEP_DEG reports the length of the *unclamped* sweep, so
  the reported arc overshoots the geometry by an amount that grows with the
  infeasibility.
* Stress leak: the predictor's along-path length bookkeeping degrades with
  every tight turn. Each turn leaks a deterministic error that grows with its
  tightness ratio (required anticipation over available room, saturating per
  turn well below the event threshold) and the accumulated error contaminates
  every subsequent reported arc length. Ordinary trajectories stay far from
  the threshold; a pile-up of tight turns in one trajectory overflows the
  bookkeeping entirely, at which point the reported lengths are off by miles
  rather than feet.

With the defect disabled, reported lengths are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .blackbox import SutSimulation
from .environment import (
    EnvDistribution,
    FlightPlan,
    SeedPath,
    build_flight_plan,
    path_log_likelihood,
)

G_MPS2 = 9.80665
M_PER_NMI = 1852.0
FT_PER_NMI = 6076.12
MPS_PER_KT = 0.514444

MIN_GROUND_SPEED_KTS = 60.0
EVENT_THRESHOLD_FT = 10.0
MISS_SCALE = 100.0
#: Miss distance reported when a trajectory has no arc discrepancy at all.
MISS_SENTINEL = 1.0e6

#: Inbound gaps shorter than this take the predictor's near-duplicate code path.
DEGENERATE_GAP_NMI = 0.10
#: ... and only reversals sharper than this hit the misreporting branch.
DEGENERATE_SWEEP_DEG = 160.0
#: Stress leak: each turn contributes SAT * min(1, (ratio / RATIO_SAT)^4) feet
#: of accumulated reporting error, where ratio is required-anticipation over
#: available outbound room. The per-turn saturation keeps any single turn far
#: below the trip point, so overflowing the bookkeeping needs five or more
#: tight turns in one trajectory; past the trip point the accumulated error
#: blows up by miles.
STRESS_SAT_FT = 1.7
STRESS_RATIO_SAT = 1.6
STRESS_EXPONENT = 8
STRESS_SOFT_NMI = 0.05
STRESS_TRIP_FT = 8.0
STRESS_TRIP_EXTRA_FT = 15000.0

_TURN_EPS_RAD = 1.0e-9
_LEG_EPS_NMI = 1.0e-12

Point = tuple[float, float]


@dataclass(frozen=True)
class DefectConfig:
    """Predictor configuration: defect switch, bank angle (deg), airspeed (kts)."""

    enabled: bool = True
    bank_angle: float = 25.0
    airspeed: float = 450.0

    def __post_init__(self) -> None:
        if not (0.0 < self.bank_angle <= 45.0):
            raise ValueError("bank_angle must lie in (0, 45] degrees")
        if self.airspeed <= 0.0:
            raise ValueError("airspeed must be positive")


@dataclass(frozen=True)
class StraightSegment:
    start: Point
    end: Point


@dataclass(frozen=True)
class ArcSegment:
    """Circular turn arc. Negative ``radius`` marks a left turn; ``reported_beta``
    is the arc length (nmi) the predictor claims for the segment."""

    center: Point
    radius: float
    start: Point
    end: Point
    reported_beta: float


Segment = Union[StraightSegment, ArcSegment]


@dataclass(frozen=True)
class LateralPacket:
    """Ordered, connected sequence of straight segments and turn arcs."""

    segments: tuple[Segment, ...]

    def arcs(self) -> tuple[ArcSegment, ...]:
        return tuple(s for s in self.segments if isinstance(s, ArcSegment))


def turn_radius(ground_speed: float, bank_angle: float) -> float:
    """Coordinated-turn radius in nmi for a ground speed (kts) and bank (deg)."""
    if ground_speed <= 0.0:
        raise ValueError("ground speed must be positive")
    if not (0.0 < bank_angle <= 45.0):
        raise ValueError("bank_angle must lie in (0, 45] degrees")
    v_mps = ground_speed * MPS_PER_KT
    r_m = v_mps * v_mps / (G_MPS2 * math.tan(math.radians(bank_angle)))
    return r_m / M_PER_NMI


def angular_extent(z_s: float, z_e: float, r: float) -> float:
    """Sweep angle (radians, in [0, 2*pi)) from azimuth ``z_s`` to ``z_e``
    in the turn direction given by the sign of ``r``.

    Azimuths are degrees clockwise from north, measured from the arc center.
    Coincident azimuths give zero, not a full circle.
    """
    if r == 0.0:
        raise ValueError("turn radius must be nonzero")
    direction = 1.0 if r > 0.0 else -1.0
    sweep = math.radians((z_e - z_s) * direction)
    a = math.fmod(sweep, math.tau)
    if a < 0.0:
        a += math.tau
    return 0.0 if a >= math.tau else a


def azimuth_deg(origin: Point, target: Point) -> float:
    """Bearing from ``origin`` to ``target``: degrees clockwise from north."""
    a = math.degrees(math.atan2(target[0] - origin[0], target[1] - origin[1]))
    return a % 360.0


def _unit(dx: float, dy: float) -> Point:
    n = math.hypot(dx, dy)
    return (dx / n, dy / n)


def _leg_directions(pts: tuple[Point, ...]) -> list[Point] | None:
    """Unit direction per leg; zero-length legs inherit the nearest real leg's
    direction (backward first, then forward). None when every leg is degenerate."""
    dirs: list[Point | None] = []
    for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
        dx, dy = x1 - x0, y1 - y0
        dirs.append(_unit(dx, dy) if math.hypot(dx, dy) > _LEG_EPS_NMI else None)
    last: Point | None = None
    for i, d in enumerate(dirs):
        if d is None:
            dirs[i] = last
        else:
            last = d
    if last is None:
        return None
    nxt: Point | None = None
    for i in range(len(dirs) - 1, -1, -1):
        if dirs[i] is None:
            dirs[i] = nxt
        else:
            nxt = dirs[i]
    return dirs  # type: ignore[return-value]


def _ground_speed(inbound: Point, wind: tuple[float, float], airspeed: float) -> float:
    wdir, wspeed = wind
    wrad = math.radians(wdir)
    along = wspeed * (math.sin(wrad) * inbound[0] + math.cos(wrad) * inbound[1])
    return max(MIN_GROUND_SPEED_KTS, airspeed + along)


def predict_lateral(plan: FlightPlan, cfg: DefectConfig) -> LateralPacket:
    """Construct the lateral packet for ``plan``.

    Every interior waypoint with a heading change gets a fly-by arc tangent to
    the inbound leg, clamped when the legs are too short for the required
    anticipation distance t = |r| tan(|heading change| / 2). Consecutive
    segments always connect; degenerate zero-length legs are treated as
    near-duplicate waypoints, never as an error.
    """
    pts = plan.points()
    if len(pts) < 2:
        raise ValueError("a flight plan needs at least two points to form a leg")

    dirs = _leg_directions(pts)
    if dirs is None:
        return LateralPacket(())

    segments: list[Segment] = []
    cursor = pts[0]

    def emit_straight(a: Point, b: Point) -> None:
        if math.hypot(b[0] - a[0], b[1] - a[1]) > _LEG_EPS_NMI:
            segments.append(StraightSegment(a, b))

    consumed = 0.0  # inbound-leg length used by the previous turn
    stress_ft = 0.0  # accumulated reporting error (defect on)
    sweep_gate = math.radians(DEGENERATE_SWEEP_DEG)
    last_interior = len(pts) - 2
    for k in range(1, len(pts) - 1):
        u = dirs[k - 1]
        v = dirs[k]
        cross = u[0] * v[1] - u[1] * v[0]
        dot = u[0] * v[0] + u[1] * v[1]
        sweep_full = math.atan2(abs(cross), dot)  # |heading change| in [0, pi]
        if sweep_full < _TURN_EPS_RAD:
            emit_straight(cursor, pts[k])
            cursor = pts[k]
            consumed = 0.0
            continue

        right = cross < 0.0  # clockwise on the east/north plane
        gs = _ground_speed(u, plan.winds[k - 1], cfg.airspeed)
        radius = turn_radius(gs, cfg.bank_angle)
        half = min(sweep_full, math.pi - 1.0e-9) / 2.0
        t_req = radius * math.tan(half)

        leg_in = math.hypot(pts[k][0] - pts[k - 1][0], pts[k][1] - pts[k - 1][1])
        leg_out = math.hypot(pts[k + 1][0] - pts[k][0], pts[k + 1][1] - pts[k][1])
        avail_in = max(leg_in - consumed, 0.0)
        avail_out = leg_out if k == last_interior else leg_out / 2.0
        avail = min(avail_in, avail_out)

        t_cut = min(t_req, avail)
        if t_cut > _LEG_EPS_NMI:
            alpha_built = 2.0 * math.atan(t_cut / radius)
        else:
            t_cut = 0.0
            alpha_built = 0.0

        start = (pts[k][0] - u[0] * t_cut, pts[k][1] - u[1] * t_cut)
        normal = (u[1], -u[0]) if right else (-u[1], u[0])
        center = (start[0] + normal[0] * radius, start[1] + normal[1] * radius)
        z_start = math.atan2(start[0] - center[0], start[1] - center[1])
        z_end = z_start + (alpha_built if right else -alpha_built)
        end = (
            center[0] + radius * math.sin(z_end),
            center[1] + radius * math.cos(z_end),
        )

        if not cfg.enabled:
            beta = radius * alpha_built
        else:
            infeasible = t_req > avail + _LEG_EPS_NMI
            degenerate = (
                infeasible and avail_in < DEGENERATE_GAP_NMI and sweep_full > sweep_gate
            )
            base = radius * (sweep_full if degenerate else alpha_built)
            # Outbound room governs the leak: the constructed arc must end
            # before the next waypoint, and that margin drives the error.
            ratio = t_req / (avail_out + STRESS_SOFT_NMI)
            stress_ft += STRESS_SAT_FT * min(
                1.0, (ratio / STRESS_RATIO_SAT) ** STRESS_EXPONENT
            )
            leak_ft = stress_ft
            if leak_ft > STRESS_TRIP_FT:
                leak_ft += STRESS_TRIP_EXTRA_FT
            beta = base + leak_ft / FT_PER_NMI

        emit_straight(cursor, start)
        segments.append(
            ArcSegment(
                center=center,
                radius=radius if right else -radius,
                start=start,
                end=end,
                reported_beta=beta,
            )
        )
        cursor = end
        consumed = t_cut

    emit_straight(cursor, pts[-1])
    return LateralPacket(tuple(segments))


def arc_discrepancy(packet: LateralPacket) -> float:
    """Largest |reported arc length - geometric arc length| over the packet, in feet.

    The geometric length is alpha * |r| with alpha recovered from the
    center-to-endpoint azimuths. Packets without arcs report zero.
    """
    worst = 0.0
    for arc in packet.arcs():
        z_s = azimuth_deg(arc.center, arc.start)
        z_e = azimuth_deg(arc.center, arc.end)
        alpha = angular_extent(z_s, z_e, arc.radius)
        geometric = alpha * abs(arc.radius)
        worst = max(worst, abs(arc.reported_beta - geometric))
    return worst * FT_PER_NMI


def miss_distance(maxdiff: float, h: float = EVENT_THRESHOLD_FT, rho: float = MISS_SCALE) -> float:
    """Transformed distance to failure: rho * ln(h / maxdiff).

    Non-positive iff the discrepancy reached the threshold. A zero discrepancy
    maps to a large finite sentinel instead of +inf so rewards stay finite.
    """
    if h <= 0.0 or rho <= 0.0:
        raise ValueError("h and rho must be positive")
    if maxdiff <= 0.0:
        return MISS_SENTINEL
    return rho * math.log(h / maxdiff)


def is_event(maxdiff: float, h: float = EVENT_THRESHOLD_FT) -> bool:
    """Failure predicate: discrepancy at or above the threshold.

    The boundary is inclusive so that (miss <= 0) and the event flag agree.
    """
    if h <= 0.0:
        raise ValueError("h must be positive")
    return maxdiff >= h


def arc_polyline_length(arc: ArcSegment, points: int = 10_000) -> float:
    """Brute-force arc length: chord sum of a dense polyline along the arc."""
    z_s = math.radians(azimuth_deg(arc.center, arc.start))
    alpha = angular_extent(
        azimuth_deg(arc.center, arc.start), azimuth_deg(arc.center, arc.end), arc.radius
    )
    direction = 1.0 if arc.radius > 0.0 else -1.0
    r = abs(arc.radius)
    total = 0.0
    prev = arc.start
    for i in range(1, points + 1):
        z = z_s + direction * alpha * i / points
        cur = (arc.center[0] + r * math.sin(z), arc.center[1] + r * math.cos(z))
        total += math.hypot(cur[0] - prev[0], cur[1] - prev[1])
        prev = cur
    return total


class TrajectorySut(SutSimulation):
    """The reference predictor wrapped as a black-box simulation.

    Holds the environment distribution used to materialize seed paths and the
    predictor configuration. ``transition`` builds the flight plan, runs the
    predictor and caches the packet for the other subroutines.
    """

    def __init__(
        self,
        dist: EnvDistribution | None = None,
        defect: DefectConfig | None = None,
        threshold_ft: float = EVENT_THRESHOLD_FT,
        miss_scale: float = MISS_SCALE,
    ) -> None:
        super().__init__()
        self.dist = dist if dist is not None else EnvDistribution()
        self.defect = defect if defect is not None else DefectConfig()
        self.threshold_ft = float(threshold_ft)
        self.miss_scale = float(miss_scale)
        self._last_plan: FlightPlan | None = None
        self._last_packet: LateralPacket | None = None

    @property
    def last_plan(self) -> FlightPlan | None:
        return self._last_plan

    @property
    def last_packet(self) -> LateralPacket | None:
        return self._last_packet

    def initialize(self) -> None:
        self._last_plan = None
        self._last_packet = None

    def transition(self, path: SeedPath) -> float:
        self._last_plan = build_flight_plan(path, self.dist)
        self._last_packet = predict_lateral(self._last_plan, self.defect)
        return path_log_likelihood(path, self.dist)

    def _last_discrepancy(self) -> float:
        if self._last_packet is None:
            raise RuntimeError("no episode has been evaluated yet")
        return arc_discrepancy(self._last_packet)

    def miss_distance(self) -> float:
        return miss_distance(self._last_discrepancy(), self.threshold_ft, self.miss_scale)

    def is_event(self) -> bool:
        return is_event(self._last_discrepancy(), self.threshold_ft)

    def is_terminal(self) -> bool:
        # Episodic formulation: every fully evaluated episode is terminal.
        return True

    def evaluate_plan(self, plan: FlightPlan) -> tuple[float, bool]:
        """Evaluate an explicit flight plan (route-database entry point).

        Metered identically to ``evaluate``; returns (miss, event).
        """
        self._evaluations += 1
        self._last_plan = plan
        self._last_packet = predict_lateral(plan, self.defect)
        return self.miss_distance(), self.is_event()


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def serialize_packet(packet: LateralPacket) -> str:
    """Line-oriented text form: ``S x1 y1 x2 y2`` per straight segment and
    ``A cx cy r sx sy ex ey beta`` per arc, floats with 9 significant digits."""
    lines = []
    for seg in packet.segments:
        if isinstance(seg, StraightSegment):
            lines.append(
                f"S {_fmt(seg.start[0])} {_fmt(seg.start[1])} {_fmt(seg.end[0])} {_fmt(seg.end[1])}"
            )
        else:
            lines.append(
                "A "
                + " ".join(
                    _fmt(v)
                    for v in (
                        seg.center[0],
                        seg.center[1],
                        seg.radius,
                        seg.start[0],
                        seg.start[1],
                        seg.end[0],
                        seg.end[1],
                        seg.reported_beta,
                    )
                )
            )
    return "\n".join(lines) + ("\n" if lines else "")


def parse_packet(text: str) -> LateralPacket:
    """Inverse of :func:`serialize_packet` (up to the 9-digit rounding)."""
    segments: list[Segment] = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        tag, *vals = line.split()
        nums = [float(v) for v in vals]
        if tag == "S":
            if len(nums) != 4:
                raise ValueError(f"malformed straight segment line: {line!r}")
            segments.append(StraightSegment((nums[0], nums[1]), (nums[2], nums[3])))
        elif tag == "A":
            if len(nums) != 8:
                raise ValueError(f"malformed arc segment line: {line!r}")
            segments.append(
                ArcSegment(
                    center=(nums[0], nums[1]),
                    radius=nums[2],
                    start=(nums[3], nums[4]),
                    end=(nums[5], nums[6]),
                    reported_beta=nums[7],
                )
            )
        else:
            raise ValueError(f"unknown segment tag in line: {line!r}")
    return LateralPacket(tuple(segments))
