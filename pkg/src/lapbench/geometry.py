"""Exact point-to-polyline projection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .model import ReferenceLine


@dataclass(frozen=True)
class Projection:
    distance: np.ndarray  # unsigned perpendicular distance (m)
    lateral: np.ndarray  # signed, positive left of the reference direction (m)
    segment: np.ndarray  # index of the winning segment
    frac: np.ndarray  # position along that segment, 0..1
    s: np.ndarray  # projected arc length (m)


def project(px, py, ref: ReferenceLine) -> Projection:
    """Project points onto the nearest segment of ``ref``.

    The nearest vertex bounds the answer, so only segments touching a vertex
    within ``d_vertex + longest_segment`` are examined. Ties go to the
    segment with the lower arc length.
    """
    px = np.atleast_1d(np.asarray(px, dtype=float))
    py = np.atleast_1d(np.asarray(py, dtype=float))
    vs, vx, vy, _, _ = ref.vertices()
    n_seg = len(vx) - 1
    ex, ey = np.diff(vx), np.diff(vy)
    seg_len = np.hypot(ex, ey)

    tree = cKDTree(np.column_stack([vx, vy]))
    pts = np.column_stack([px, py])
    d_vert, _ = tree.query(pts)
    radius = d_vert + seg_len.max() * (1 + 1e-12) + 1e-12
    hits = tree.query_ball_point(pts, radius)

    counts = np.fromiter((len(h) for h in hits), dtype=np.int64, count=len(hits))
    cand_v = np.fromiter((v for h in hits for v in h), dtype=np.int64, count=int(counts.sum()))
    cand_p = np.repeat(np.arange(len(px)), counts)
    # Each vertex touches the segment ending and the segment starting at it.
    seg = np.concatenate([cand_v - 1, cand_v])
    pid = np.concatenate([cand_p, cand_p])
    ok = (seg >= 0) & (seg < n_seg)
    seg, pid = seg[ok], pid[ok]

    wx, wy = px[pid] - vx[seg], py[pid] - vy[seg]
    frac = np.clip((wx * ex[seg] + wy * ey[seg]) / seg_len[seg] ** 2, 0.0, 1.0)
    dist = np.hypot(wx - frac * ex[seg], wy - frac * ey[seg])

    order = np.lexsort((seg, dist, pid))
    first = np.ones(len(order), dtype=bool)
    first[1:] = pid[order][1:] != pid[order][:-1]
    best = order[first]

    seg_b, frac_b, dist_b = seg[best], frac[best], dist[best]
    cross = ex[seg_b] * wy[best] - ey[seg_b] * wx[best]
    sign = np.where(cross < 0, -1.0, 1.0)
    s_proj = vs[seg_b] + frac_b * seg_len[seg_b]
    return Projection(dist_b, sign * dist_b, seg_b, frac_b, s_proj)


def interp_on_segment(values: np.ndarray, proj: Projection) -> np.ndarray:
    """Linear interpolation of per-vertex ``values`` at projected positions."""
    return values[proj.segment] + proj.frac * (values[proj.segment + 1] - values[proj.segment])

