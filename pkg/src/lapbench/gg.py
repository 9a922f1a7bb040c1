"""g-g diagram point clouds and polar acceleration envelopes."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO

import numpy as np

from .model import Lap

DEFAULT_BINS = 72


def gg_points(lap: Lap) -> np.ndarray:
    """``(n, 2)`` array of ``(a_y, a_x)`` pairs, one per sample."""
    return np.column_stack([lap["ay"], lap["ax"]])


@dataclass(frozen=True)
class GgEnvelope:
    """Per-sector maximum radius in the (a_y, a_x) plane.

    Sector ``k`` covers angles ``[k, k+1) * 2*pi/n`` measured with
    ``atan2(a_x, a_y)``. Empty sectors hold NaN in ``radius`` and
    ``angle_at_max``.
    """

    radius: np.ndarray
    count: np.ndarray
    angle_at_max: np.ndarray

    @property
    def n_bins(self) -> int:
        return len(self.radius)

    @property
    def width(self) -> float:
        return 2 * np.pi / self.n_bins

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.n_bins) + 0.5) * self.width

    @property
    def filled(self) -> np.ndarray:
        return self.count > 0


def bin_index(angle, n_bins: int) -> np.ndarray:
    theta = np.mod(np.asarray(angle, dtype=float), 2 * np.pi)
    return np.minimum((theta / (2 * np.pi / n_bins)).astype(np.int64), n_bins - 1)


def gg_envelope(points, n_bins: int = DEFAULT_BINS) -> GgEnvelope:
    if n_bins < 4:
        raise ValueError("n_bins must be >= 4")
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    ay, ax = pts[:, 0], pts[:, 1]
    theta = np.mod(np.arctan2(ax, ay), 2 * np.pi)
    r = np.hypot(ay, ax)
    idx = bin_index(theta, n_bins)

    count = np.bincount(idx, minlength=n_bins)
    radius = np.full(n_bins, np.nan)
    angle = np.full(n_bins, np.nan)
    if len(r):
        # Sort by (bin, radius desc, angle) so the pick is order independent.
        order = np.lexsort((theta, -r, idx))
        first = np.ones(len(order), dtype=bool)
        first[1:] = idx[order][1:] != idx[order][:-1]
        top = order[first]
        radius[idx[top]] = r[top]
        angle[idx[top]] = theta[top]
    return GgEnvelope(radius=radius, count=count, angle_at_max=angle)


def write_points_csv(points, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["ay_mps2", "ax_mps2"])
    for ay, ax in np.asarray(points, dtype=float):
        writer.writerow([repr(float(ay)), repr(float(ax))])


def write_envelope_csv(env: GgEnvelope, stream: IO[str]) -> None:
    """One row per sector; the angle is the sector center, empty sectors leave the radius blank."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["angle_rad", "radius_mps2", "count"])
    for center, rad, cnt in zip(env.centers, env.radius, env.count):
        writer.writerow([repr(float(center)), "" if cnt == 0 else repr(float(rad)), int(cnt)])
