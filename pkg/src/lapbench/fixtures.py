"""Published lap-average KPIs of a human race driver and an autonomous software driver.

Both columns come from the same race track; they are encoded as
`KpiReport` objects so that `compare` can be checked against the
published relative differences.
"""

from __future__ import annotations

import numpy as np

from .kpi import KpiReport
from .model import ReferenceLine, VehicleParams, new_lap

TRACK_ID = "monteblanco"

HUMAN_KPIS = {
    "v_max": 61.5,
    "ax_max": 5.0,
    "ax_min": -17.4,
    "ay_max": 16.5,
    "lap_time": 63.03,
    "throttle_acceptance": 75.0,
    "coasting_time": 1.99,
    "brake_aggression": 371.0,
    "brake_release": 38.9,
    "braking_quickness": 0.28,
    "steering_speed": 1.39e-4,
    "steering_integral": 1.93,
    "att_vel_pos": 0.045,
    "att_vel_neg": -0.039,
    "d_slip_pos": 0.014,
    "d_slip_neg": -0.007,
    "lat_dev": 0.88,
}

SOFTWARE_KPIS = {
    "v_max": 58.0,
    "ax_max": 4.7,
    "ax_min": -9.2,
    "ay_max": 13.7,
    "lap_time": 69.98,
    "throttle_acceptance": 33.0,
    "coasting_time": 3.65,
    "brake_aggression": 259.0,
    "brake_release": 10.8,
    "braking_quickness": 0.25,
    "steering_speed": 6.94e-5,
    "steering_integral": 1.74,
    "att_vel_pos": 0.030,
    "att_vel_neg": -0.027,
    "d_slip_pos": 0.004,
    "d_slip_neg": -0.005,
    "lat_dev": 0.30,
}

# Relative difference to the human, percent, as printed (rounded to integers).
PUBLISHED_REL_DIFF = {
    "v_max": -6,
    "ax_max": -6,
    "ax_min": -47,
    "ay_max": -17,
    "lap_time": 11,
    "throttle_acceptance": -56,
    "coasting_time": 83,
    "brake_aggression": -30,
    "brake_release": -72,
    "braking_quickness": -10,
    "steering_speed": -50,
    "steering_integral": -10,
    "att_vel_pos": -33,
    "att_vel_neg": -31,
    "d_slip_pos": -71,
    "d_slip_neg": -29,
    "lat_dev": -66,
}


def human_report() -> KpiReport:
    return KpiReport(**HUMAN_KPIS, driver_tag="human", track_id=TRACK_ID)


def software_report() -> KpiReport:
    return KpiReport(**SOFTWARE_KPIS, driver_tag="software", track_id=TRACK_ID)


def human_fixture_lap(params: VehicleParams | None = None, dt: float = 0.01) -> tuple:
    """Constructed lap whose KPIs reproduce the human column by design.

    Returns ``(lap, reference)``. The channels are not a physical drive;
    each KPI is realized by its own feature so that the values can be
    checked independently:

    * speed stays at 4 m/s (below the validity threshold of the stability
      channels) except for a single 61.5 m/s sample and a 6 m/s window
      in which yaw rate, lateral acceleration and lateral velocity are
      solved so that attitude velocity and delta slip alternate between
      the published positive and negative means;
    * one braking event ramps at 371 bar/s, releases at 38.9 bar/s and
      reaches its deceleration peak 28 samples after the brake is on,
      followed by 199 coasting samples;
    * one left corner peaks at 16.5 m/s^2 and full throttle comes at 75 %
      of that peak;
    * the steering angle drifts linearly so that its mean rate and its
      integral match the published values;
    * positions run parallel to a straight reference line at 0.88 m.
    """
    params = params or VehicleParams()
    h = HUMAN_KPIS
    n = int(round(h["lap_time"] / dt)) + 1
    k = np.arange(n)
    t = k * dt
    vx = np.full(n, 4.0)
    ax = np.zeros(n)
    ay = np.zeros(n)
    yaw = np.zeros(n)
    vy = np.zeros(n)
    thr = np.ones(n)
    p = np.zeros(n)

    vx[100] = h["v_max"]
    ax += h["ax_max"] * np.exp(-(((k - 300) / 10.0) ** 2))

    # Braking: ramp, hold, slow release, then coasting.
    b0, ramp_n, hold_n = 1000, 100, 100
    rise = h["brake_aggression"] * dt
    peak = rise * ramp_n
    p[b0 : b0 + ramp_n + 1] = rise * np.arange(ramp_n + 1)
    p[b0 + ramp_n : b0 + ramp_n + hold_n] = peak
    j = np.arange(n - b0 - ramp_n - hold_n)
    p[b0 + ramp_n + hold_n :] = np.maximum(peak - h["brake_release"] * dt * j, 0.0)
    start = b0 + 1
    ax += h["ax_min"] * np.exp(-(((k - (start + int(round(h["braking_quickness"] / dt)))) / 10.0) ** 2))
    brake_end = int(np.flatnonzero(p > 1.0)[-1])
    coast_n = int(round(h["coasting_time"] / dt))
    thr[start : brake_end + 1 + coast_n] = 0.0

    # Corner: linear rise to the apex, linear decay; full throttle at 75 % of the peak.
    c0, apex = 2400, 2500
    ay[c0 : apex + 1] = np.linspace(0.0, h["ay_max"], apex - c0 + 1)
    decay = np.arange(401)
    ay[apex : apex + 401] = h["ay_max"] * (1.0 - decay / 400.0)
    full = apex + int(round((1.0 - h["throttle_acceptance"] / 100.0) * 400))
    thr[brake_end + 1 + coast_n : full] = 0.3
    yaw[c0 : apex + 401] = ay[c0 : apex + 401] / vx[c0 : apex + 401]

    # Stability window: alternate the positive and negative split targets.
    w = np.arange(3000, 5000)
    vx[w] = 6.0
    pos = (w % 2) == 0
    steer = h["steering_integral"] / (n * dt) + h["steering_speed"] * (t - t[-1] / 2)
    att = np.where(pos, h["att_vel_pos"], h["att_vel_neg"])
    dslip = np.where(pos, h["d_slip_pos"], h["d_slip_neg"])
    r = 2.0 * vx[w] * np.tan((steer[w] - dslip) / 2.0) / params.wheelbase
    yaw[w] = r
    ay[w] = vx[w] * (r - att)
    vy[w] = (params.lr - params.lf) * r / 2.0

    x = 30.0 * t
    lap = new_lap(
        {
            "t": t,
            "s": x,
            "x": x,
            "y": np.full(n, h["lat_dev"]),
            "psi": np.zeros(n),
            "vx": vx,
            "vy": vy,
            "ax": ax,
            "ay": ay,
            "yaw_rate": yaw,
            "steer": steer,
            "throttle": thr,
            "p_brake_f": 0.6 * p,
            "p_brake_r": 0.4 * p,
        },
        "human",
        TRACK_ID,
    )
    xs = np.arange(-10.0, x[-1] + 11.0, 1.0)
    ref = ReferenceLine(xs - xs[0], xs, np.zeros_like(xs), np.zeros_like(xs), np.zeros_like(xs))
    return lap, ref
