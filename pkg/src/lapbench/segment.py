"""Corner, braking-event and pedal-activity segmentation of a lap."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import DEFAULT_SMOOTH_WINDOW_S, MathChannels, smooth
from .model import Lap

AY_CORNER_THRESH = 3.0
CORNER_MIN_DUR_S = 0.5
BRAKE_ON_THRESH_BAR = 1.0
THROTTLE_ON_THRESH = 0.05
MIN_BRAKE_SAMPLES = 3


@dataclass(frozen=True)
class CornerSegment:
    entry_idx: int
    apex_idx: int
    exit_idx: int
    direction: str
    ay_max: float


@dataclass(frozen=True)
class BrakingEvent:
    start_idx: int
    peak_decel_idx: int
    end_idx: int
    p_max: float


@dataclass(frozen=True)
class ActivityMask:
    throttle_on: np.ndarray
    brake_on: np.ndarray
    coasting: np.ndarray


@dataclass(frozen=True)
class Segmentation:
    corners: list[CornerSegment]
    braking: list[BrakingEvent]
    mask: ActivityMask


def _runs(flag: np.ndarray) -> list[tuple[int, int]]:
    """Inclusive (start, end) index pairs of True runs."""
    edges = np.diff(np.concatenate([[0], flag.astype(np.int8), [0]]))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    return list(zip(starts.tolist(), ends.tolist()))


def detect_corners(
    lap: Lap,
    channels: MathChannels | None = None,
    ay_thresh: float = AY_CORNER_THRESH,
    min_dur: float = CORNER_MIN_DUR_S,
    smooth_window_s: float = DEFAULT_SMOOTH_WINDOW_S,
) -> list[CornerSegment]:
    """Find runs where smoothed |a_y| stays above ``ay_thresh`` for at least ``min_dur``.

    Left and right runs are separate corners even when they touch. The apex
    is the first sample of maximum raw |a_y| in the run.
    """
    ay = np.asarray(lap["ay"])
    ay_s = smooth(ay, smooth_window_s, lap.dt)
    corners = []
    for sign, direction in ((1.0, "left"), (-1.0, "right")):
        for a, b in _runs(sign * ay_s > ay_thresh):
            if (b - a + 1) * lap.dt < min_dur - 1e-9:
                continue
            apex = a + int(np.argmax(np.abs(ay[a : b + 1])))
            corners.append(CornerSegment(a, apex, b, direction, float(abs(ay[apex]))))
    corners.sort(key=lambda c: c.entry_idx)
    return corners


def _first_local_min(x: np.ndarray, start: int, end: int) -> int:
    """First local minimum of ``x`` in ``[start, end]``; plateaus resolve to their first index."""
    i = start
    while i <= end:
        j = i
        while j + 1 < len(x) and x[j + 1] == x[i]:
            j += 1
        left_ok = i == 0 or x[i - 1] > x[i]
        right_ok = j + 1 >= len(x) or x[j + 1] > x[i]
        if left_ok and right_ok:
            return i
        i = j + 1
    return start + int(np.argmin(x[start : end + 1]))


def detect_braking(
    lap: Lap,
    channels: MathChannels,
    p_thresh: float = BRAKE_ON_THRESH_BAR,
    smooth_window_s: float = DEFAULT_SMOOTH_WINDOW_S,
) -> list[BrakingEvent]:
    """Braking events between rising and falling crossings of ``p_thresh``.

    An event needs a sample at or below the threshold right before it, so
    braking already in progress at the first sample is not reported.
    """
    p = channels.p_brake_total
    ax_s = smooth(lap["ax"], smooth_window_s, lap.dt)
    events = []
    for a, b in _runs(p > p_thresh):
        if a == 0 or b - a + 1 < MIN_BRAKE_SAMPLES:
            continue
        peak = _first_local_min(ax_s, a, b)
        events.append(BrakingEvent(a, peak, b, float(np.max(p[a : b + 1]))))
    return events


def activity_mask(
    channels: MathChannels,
    throttle_thresh: float = THROTTLE_ON_THRESH,
    p_thresh: float = BRAKE_ON_THRESH_BAR,
) -> ActivityMask:
    throttle_on = np.asarray(channels.throttle_eff) > throttle_thresh
    brake_on = np.asarray(channels.p_brake_total) > p_thresh
    return ActivityMask(throttle_on, brake_on, ~throttle_on & ~brake_on)


def segment_lap(lap: Lap, channels: MathChannels, cfg=None) -> Segmentation:
    """Run all detectors with thresholds from an `EngineConfig` (defaults when ``None``)."""
    if cfg is None:
        from .config import EngineConfig

        cfg = EngineConfig()
    return Segmentation(
        corners=detect_corners(lap, channels, cfg.ay_corner_thresh_mps2, cfg.corner_min_dur_s, cfg.smooth_window_s),
        braking=detect_braking(lap, channels, cfg.brake_on_thresh_bar, cfg.smooth_window_s),
        mask=activity_mask(channels, cfg.throttle_on_thresh, cfg.brake_on_thresh_bar),
    )
