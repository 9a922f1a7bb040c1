"""Lap-level KPIs.

Every KPI that cannot be computed for a lap is stored as ``None`` with a
reason in `KpiReport.reasons`; a KPI is never silently set to zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import MathChannels
from .errors import NoBrakingEvents, NoCorners, RefTooFar
from .geometry import project
from .model import Lap, ReferenceLine
from .segment import ActivityMask, BrakingEvent, CornerSegment, Segmentation

FULL_THROTTLE_THRESH = 0.95
BRAKE_RATE_FLOOR = 5.0
REF_MAX_DIST_M = 50.0

# Scalar KPI fields in report order.
KPI_NAMES = (
    "v_max",
    "ax_max",
    "ax_min",
    "ay_max",
    "lap_time",
    "throttle_acceptance",
    "coasting_time",
    "brake_aggression",
    "brake_release",
    "braking_quickness",
    "steering_speed",
    "steering_integral",
    "att_vel_pos",
    "att_vel_neg",
    "d_slip_pos",
    "d_slip_neg",
    "lat_dev",
)


@dataclass
class KpiReport:
    v_max: float | None = None
    ax_max: float | None = None
    ax_min: float | None = None
    ay_max: float | None = None
    lap_time: float | None = None
    throttle_acceptance: float | None = None
    coasting_time: float | None = None
    brake_aggression: float | None = None
    brake_release: float | None = None
    braking_quickness: float | None = None
    steering_speed: float | None = None
    steering_integral: float | None = None
    att_vel_pos: float | None = None
    att_vel_neg: float | None = None
    d_slip_pos: float | None = None
    d_slip_neg: float | None = None
    lat_dev: float | None = None
    driver_tag: str = "other"
    track_id: str = ""
    reasons: dict[str, str] = field(default_factory=dict)
    diagnostics: dict[str, float] = field(default_factory=dict)

    def kpis(self) -> dict[str, float | None]:
        return {name: getattr(self, name) for name in KPI_NAMES}

    def absent(self) -> list[str]:
        return [name for name in KPI_NAMES if getattr(self, name) is None]

    def set_absent(self, name: str, reason: str) -> None:
        setattr(self, name, None)
        self.reasons[name] = reason


def throttle_acceptance(
    channels: MathChannels,
    corners: list[CornerSegment],
    ay,
    full_throttle_thresh: float = FULL_THROTTLE_THRESH,
) -> tuple[float, int]:
    """Mean lateral acceleration at the full-throttle point, in percent of the corner peak.

    For each corner the first sample after the apex (and before the next
    corner's entry) with throttle at or above ``full_throttle_thresh`` is
    used. Returns ``(percent, corners_without_full_throttle)``.

    Raises:
        NoCorners: no corners, or no corner reaches full throttle.
    """
    if not corners:
        raise NoCorners("no corners detected")
    thr = np.asarray(channels.throttle_eff)
    ay = np.asarray(ay)
    values = []
    skipped = 0
    for k, c in enumerate(corners):
        stop = corners[k + 1].entry_idx if k + 1 < len(corners) else len(thr)
        hits = np.flatnonzero(thr[c.apex_idx + 1 : stop] >= full_throttle_thresh)
        if not hits.size:
            skipped += 1
            continue
        i = c.apex_idx + 1 + int(hits[0])
        values.append(min(100.0, 100.0 * abs(ay[i]) / c.ay_max))
    if not values:
        raise NoCorners("no corner reaches full throttle after its apex")
    return float(np.mean(values)), skipped


def coasting_time(mask: ActivityMask, dt: float) -> float:
    """Time spent coasting, measured over the ``n - 1`` sample intervals.

    Each interval counts by the mean of its end flags, so a coasting run
    away from the lap edges gives ``dt * samples`` and a lap that coasts
    throughout gives exactly the lap time.
    """
    c = np.asarray(mask.coasting, dtype=np.int64)
    if len(c) < 2:
        return 0.0
    return float(dt * (np.count_nonzero(c) - 0.5 * (c[0] + c[-1])))


def brake_derivative_stats(
    channels: MathChannels,
    mask: ActivityMask | None = None,
    rate_floor: float = BRAKE_RATE_FLOOR,
) -> tuple[float, float]:
    """Mean positive and mean absolute negative brake-pressure rate (bar/s).

    Only samples whose rate magnitude exceeds ``rate_floor`` count. When a
    mask is given, samples must also have the brake applied.
    """
    rate = np.asarray(channels.p_brake_rate)
    active = np.ones(len(rate), dtype=bool) if mask is None else np.asarray(mask.brake_on)
    up = rate[active & (rate > rate_floor)]
    down = rate[active & (rate < -rate_floor)]
    aggression = float(up.mean()) if up.size else 0.0
    release = float(np.abs(down).mean()) if down.size else 0.0
    return aggression, release


def braking_quickness(events: list[BrakingEvent], dt: float) -> float:
    """Mean time from brake application to the first deceleration peak."""
    if not events:
        raise NoBrakingEvents("no braking events detected")
    return float(np.mean([dt * (e.peak_decel_idx - e.start_idx) for e in events]))


def steering_speed(channels: MathChannels) -> float:
    return float(np.mean(np.abs(channels.steer_rate)))


def steering_integral(steer, dt: float) -> float:
    """Rectangle-rule integral of |steering angle| over the lap (rad*s)."""
    return float(np.sum(np.abs(np.asarray(steer, dtype=float))) * dt)


def split_means(values: np.ma.MaskedArray) -> tuple[float, float]:
    """Means of the strictly positive and strictly negative valid samples (0 when none)."""
    v = np.ma.asarray(values)
    data = np.asarray(v.filled(0.0))
    valid = ~np.ma.getmaskarray(v)
    pos = data[valid & (data > 0)]
    neg = data[valid & (data < 0)]
    return (float(pos.mean()) if pos.size else 0.0, float(neg.mean()) if neg.size else 0.0)


def stability_split_averages(channels: MathChannels) -> tuple[float, float, float | None, float | None]:
    att_pos, att_neg = split_means(channels.att_vel)
    if channels.d_slip is None:
        return att_pos, att_neg, None, None
    slip_pos, slip_neg = split_means(channels.d_slip)
    return att_pos, att_neg, slip_pos, slip_neg


def lateral_deviation(lap: Lap, ref: ReferenceLine, max_dist: float = REF_MAX_DIST_M) -> float:
    """Mean unsigned distance from the driven positions to the reference polyline.

    Raises:
        RefTooFar: some sample is further than ``max_dist`` from the reference.
    """
    return _mean_distance(project(lap["x"], lap["y"], ref), max_dist)


def _mean_distance(proj, max_dist: float) -> float:
    worst = int(np.argmax(proj.distance))
    if proj.distance[worst] > max_dist:
        raise RefTooFar(
            f"sample {worst} is {proj.distance[worst]:.1f} m from the reference (limit {max_dist} m)"
        )
    return float(np.mean(proj.distance))


def extrema(lap: Lap) -> tuple[float, float, float, float]:
    """``(v_max, ax_max, ax_min, ay_max)`` with ``ay_max`` the peak of |a_y|."""
    return (
        float(np.max(lap["vx"])),
        float(np.max(lap["ax"])),
        float(np.min(lap["ax"])),
        float(np.max(np.abs(lap["ay"]))),
    )


def compute_report(
    lap: Lap,
    channels: MathChannels,
    segmentation: Segmentation,
    ref: ReferenceLine | None = None,
    cfg=None,
) -> KpiReport:
    """Assemble every KPI of one lap."""
    if cfg is None:
        from .config import EngineConfig

        cfg = EngineConfig()
    rep = KpiReport(driver_tag=lap.driver_tag, track_id=lap.track_id)
    diag = rep.diagnostics
    dt = lap.dt

    rep.v_max, rep.ax_max, rep.ax_min, rep.ay_max = extrema(lap)
    rep.lap_time = lap.lap_time
    diag["samples"] = lap.n
    diag["corners"] = len(segmentation.corners)
    diag["braking_events"] = len(segmentation.braking)

    try:
        rep.throttle_acceptance, skipped = throttle_acceptance(
            channels, segmentation.corners, lap["ay"], cfg.full_throttle_thresh
        )
        diag["corners_without_full_throttle"] = skipped
    except NoCorners as exc:
        rep.set_absent("throttle_acceptance", str(exc))

    rep.coasting_time = coasting_time(segmentation.mask, dt)
    rep.brake_aggression, rep.brake_release = brake_derivative_stats(
        channels, segmentation.mask, cfg.brake_rate_floor_barps
    )
    try:
        rep.braking_quickness = braking_quickness(segmentation.braking, dt)
    except NoBrakingEvents as exc:
        rep.set_absent("braking_quickness", str(exc))

    rep.steering_speed = steering_speed(channels)
    rep.steering_integral = steering_integral(lap["steer"], dt)

    rep.att_vel_pos, rep.att_vel_neg, slip_pos, slip_neg = stability_split_averages(channels)
    n_valid = int(np.ma.count(channels.att_vel))
    diag["att_vel_valid_samples"] = n_valid
    if n_valid == 0:
        reason = f"no samples above the minimum speed of {cfg.v_min_mps} m/s"
        for name in ("att_vel_pos", "att_vel_neg", "d_slip_pos", "d_slip_neg"):
            rep.set_absent(name, reason)
    elif slip_pos is None:
        rep.set_absent("d_slip_pos", "lap has no lateral velocity channel")
        rep.set_absent("d_slip_neg", "lap has no lateral velocity channel")
    else:
        rep.d_slip_pos, rep.d_slip_neg = slip_pos, slip_neg

    if ref is None:
        rep.set_absent("lat_dev", "no reference line given")
    else:
        proj = project(lap["x"], lap["y"], ref)
        try:
            rep.lat_dev = _mean_distance(proj, cfg.ref_max_dist_m)
            diag["lat_dev_signed_mean"] = float(np.mean(proj.lateral))
        except RefTooFar as exc:
            rep.set_absent("lat_dev", str(exc))
    return rep

