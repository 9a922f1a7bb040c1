"""Metrics that only make sense for autonomous laps.

Tracking deviation against the planned trajectory, an oscillation index
for signals handed along the plan/control/actuate chain, and simple
sensor-quality estimates. None of these enter driver comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import smooth
from .errors import CutoffAboveNyquist, RefTooFar, SeriesTooShort
from .geometry import interp_on_segment, project
from .model import Lap, ReferenceLine, wrap_angle

DEFAULT_CUTOFF_HZ = 2.0
NOISE_WINDOW_S = 0.05
MIN_QUALITY_SAMPLES = 100


@dataclass(frozen=True)
class TrackingDeviation:
    lateral: np.ndarray  # signed, positive left of the target (m)
    heading: np.ndarray  # wrapped to (-pi, pi] (rad)
    velocity: np.ndarray  # vx - v_ref (m/s)
    lateral_mean: float
    heading_mean: float
    velocity_mean: float

    def to_dict(self) -> dict:
        return {
            "lateral_mean_m": self.lateral_mean,
            "heading_mean_rad": self.heading_mean,
            "velocity_mean_mps": self.velocity_mean,
        }


def tracking_deviation(lap: Lap, target: ReferenceLine, max_dist: float = 50.0) -> TrackingDeviation:
    """Position, heading and speed error against the target trajectory.

    Target heading and speed are interpolated linearly at the projected
    arc length; the means are of absolute values.
    """
    proj = project(lap["x"], lap["y"], target)
    worst = int(np.argmax(proj.distance))
    if proj.distance[worst] > max_dist:
        raise RefTooFar(f"sample {worst} is {proj.distance[worst]:.1f} m from the target")
    _, _, _, psi_v, v_v = target.vertices()
    psi_ref = interp_on_segment(np.unwrap(psi_v), proj)
    v_ref = interp_on_segment(v_v, proj)
    heading = wrap_angle(np.asarray(lap["psi"]) - psi_ref)
    velocity = np.asarray(lap["vx"]) - v_ref
    return TrackingDeviation(
        lateral=proj.lateral,
        heading=heading,
        velocity=velocity,
        lateral_mean=float(np.mean(proj.distance)),
        heading_mean=float(np.mean(np.abs(heading))),
        velocity_mean=float(np.mean(np.abs(velocity))),
    )


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(x))))


def oscillation_index(signal, dt: float, cutoff: float = DEFAULT_CUTOFF_HZ) -> float:
    """Share of a signal's variation that lives above ``cutoff``.

    RMS of the residual after a ``1/cutoff`` second moving average, divided
    by the RMS about the mean. Constant signals give 0.
    """
    if cutoff >= 0.5 / dt:
        raise CutoffAboveNyquist(f"cutoff {cutoff} Hz is not below Nyquist ({0.5 / dt} Hz)")
    x = np.asarray(signal, dtype=float)
    spread = _rms(x - x.mean())
    if spread == 0:
        return 0.0
    return _rms(x - smooth(x, 1.0 / cutoff, dt)) / spread


@dataclass(frozen=True)
class SignalQuality:
    noise_rms: float
    drift_rate: float

    def to_dict(self) -> dict:
        return {"noise_rms": self.noise_rms, "drift_rate": self.drift_rate}


def signal_quality(signal, dt: float) -> SignalQuality:
    """High-frequency noise level and linear drift rate of a signal."""
    x = np.asarray(signal, dtype=float)
    if len(x) < MIN_QUALITY_SAMPLES:
        raise SeriesTooShort(f"signal quality needs at least {MIN_QUALITY_SAMPLES} samples")
    noise = _rms(x - smooth(x, NOISE_WINDOW_S, dt))
    t = np.arange(len(x)) * dt
    slope = np.polyfit(t - t.mean(), x, 1)[0]
    return SignalQuality(noise_rms=noise, drift_rate=float(slope))
