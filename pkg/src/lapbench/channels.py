"""Per-sample math channels derived from raw telemetry."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MissingChannel, SeriesTooShort, WindowTooSmall
from .model import Lap, VehicleParams

DEFAULT_SMOOTH_WINDOW_S = 0.1
DEFAULT_V_MIN = 5.0


def window_samples(window: float, dt: float) -> int:
    """Odd number of taps for a moving average of ``window`` seconds."""
    if not window >= dt - 1e-12:
        raise WindowTooSmall(f"window {window} s is shorter than one sample ({dt} s)")
    n = int(np.floor(window / dt + 1e-9))
    return n if n % 2 else n + 1


def moving_average(x: np.ndarray, n: int) -> np.ndarray:
    """Centered ``n``-tap mean; near the ends the window shrinks symmetrically."""
    x = np.asarray(x, dtype=float)
    size = len(x)
    h = n // 2
    out = np.empty(size)
    if size == 0:
        return out
    # Average deviations from the first value so constant stretches stay exact.
    base = x[0]
    x = x - base
    csum = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(size)
    half = np.minimum(np.minimum(idx, size - 1 - idx), h)
    lo, hi = idx - half, idx + half + 1
    interior = half == h
    # Full windows via convolution (better rounding than cumsum differences).
    if size >= n:
        out[h : size - h] = np.convolve(x, np.ones(n), mode="valid") / n
    edge = ~interior
    out[edge] = (csum[hi[edge]] - csum[lo[edge]]) / (2 * half[edge] + 1)
    return out + base


def smooth(signal, window: float = DEFAULT_SMOOTH_WINDOW_S, dt: float = 0.01) -> np.ndarray:
    """Centered moving average over ``window`` seconds.

    The tap count is ``floor(window/dt)``, bumped to the next odd number.
    """
    return moving_average(signal, window_samples(window, dt))


def derivative(signal, dt: float) -> np.ndarray:
    """Central differences inside, one-sided first-order differences at both ends."""
    x = np.asarray(signal, dtype=float)
    if len(x) < 2:
        raise SeriesTooShort("derivative needs at least 2 samples")
    return np.gradient(x, dt, edge_order=1)


def steering_smoothness(steer, window: float = DEFAULT_SMOOTH_WINDOW_S, dt: float = 0.01) -> np.ndarray:
    """Absolute gap between raw and smoothed steering angle (rad)."""
    steer = np.asarray(steer, dtype=float)
    return np.abs(steer - smooth(steer, window, dt))


def attitude_velocity(yaw_rate, ay, vx, v_min: float = DEFAULT_V_MIN) -> np.ma.MaskedArray:
    """Measured yaw rate minus the path-curvature yaw rate ``ay/vx``.

    Positive values point at oversteer. Samples with ``vx < v_min`` are masked.
    """
    yaw_rate, ay, vx = (np.asarray(a, dtype=float) for a in (yaw_rate, ay, vx))
    invalid = vx < v_min
    safe_vx = np.where(invalid, 1.0, vx)
    val = np.where(invalid, 0.0, yaw_rate - ay / safe_vx)
    return np.ma.MaskedArray(val, mask=invalid)


def slip_angles(steer, vx, vy, yaw_rate, params: VehicleParams, v_min: float = DEFAULT_V_MIN):
    """Axle slip angles from a single-track model and their difference.

    Returns masked arrays ``(alpha_f, alpha_r, d_slip)``; ``d_slip`` is
    positive for understeer.
    """
    steer, vx, vy, yaw_rate = (np.asarray(a, dtype=float) for a in (steer, vx, vy, yaw_rate))
    invalid = vx < v_min
    safe_vx = np.where(invalid, 1.0, vx)
    alpha_f = steer - np.arctan((vy + params.lf * yaw_rate) / safe_vx)
    alpha_r = -np.arctan((vy - params.lr * yaw_rate) / safe_vx)
    d_slip = alpha_f - alpha_r
    masked = [np.ma.MaskedArray(np.where(invalid, 0.0, a), mask=invalid) for a in (alpha_f, alpha_r, d_slip)]
    return tuple(masked)


def artificial_throttle(f_long_req, params: VehicleParams) -> np.ndarray:
    """Throttle equivalent of a longitudinal force request, clamped to [0, 1]."""
    return np.clip(np.asarray(f_long_req, dtype=float) / params.f_long_max, 0.0, 1.0)


@dataclass(frozen=True)
class MathChannels:
    steer_smooth: np.ndarray
    k_ss: np.ndarray
    steer_rate: np.ndarray
    p_brake_total: np.ndarray
    p_brake_rate: np.ndarray
    att_vel: np.ma.MaskedArray
    alpha_f: np.ma.MaskedArray | None
    alpha_r: np.ma.MaskedArray | None
    d_slip: np.ma.MaskedArray | None
    throttle_eff: np.ndarray
    throttle_source: str = "measured"


def compute_all(
    lap: Lap,
    params: VehicleParams | None = None,
    *,
    smooth_window_s: float = DEFAULT_SMOOTH_WINDOW_S,
    v_min_mps: float = DEFAULT_V_MIN,
    use_artificial_throttle: bool = True,
) -> MathChannels:
    """Compute every math channel of a lap.

    The artificial throttle replaces the pedal signal when the lap has a
    force-request channel and ``use_artificial_throttle`` is set, or when it
    has no pedal signal at all. Slip-angle channels are ``None`` when the
    lap carries no lateral velocity.
    """
    params = params or VehicleParams()
    dt = lap.dt
    steer = lap["steer"]
    steer_s = smooth(steer, smooth_window_s, dt)
    p_total = lap["p_brake_f"] + lap["p_brake_r"]

    has_force = "f_long_req" in lap
    if has_force and (use_artificial_throttle or "throttle" not in lap):
        throttle_eff = artificial_throttle(lap["f_long_req"], params)
        source = "artificial"
    elif "throttle" in lap:
        throttle_eff = np.asarray(lap["throttle"])
        source = "measured"
    else:
        raise MissingChannel(f"lap tagged '{lap.driver_tag}' has neither throttle nor f_long_req")

    if "vy" in lap:
        alpha_f, alpha_r, d_slip = slip_angles(steer, lap["vx"], lap["vy"], lap["yaw_rate"], params, v_min_mps)
    else:
        alpha_f = alpha_r = d_slip = None

    return MathChannels(
        steer_smooth=steer_s,
        k_ss=np.abs(steer - steer_s),
        steer_rate=derivative(steer, dt),
        p_brake_total=p_total,
        p_brake_rate=derivative(p_total, dt),
        att_vel=attitude_velocity(lap["yaw_rate"], lap["ay"], lap["vx"], v_min_mps),
        alpha_f=alpha_f,
        alpha_r=alpha_r,
        d_slip=d_slip,
        throttle_eff=throttle_eff,
        throttle_source=source,
    )
