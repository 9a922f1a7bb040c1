"""Synthetic telemetry with known ground truth.

Tracks are built from straights, constant-radius arcs and clothoids
(linear curvature transitions). A quasi-steady point-mass speed profile is
solved on an arc-length grid under a circular or diamond g-g limit, then
sampled in time. The output is kinematically exact: ``yaw_rate = v*kappa``,
``a_y = v**2 * kappa``, ``v_y = 0`` unless a sideslip profile is injected,
and every sample satisfies the g-g limit.

Pedal channels follow the driver profile: brake pressure ramps at a fixed
slope at the start of each deceleration phase, a coasting gap follows the
brake release, and full throttle comes back after the apex once |a_y|
has dropped to a chosen fraction of the corner peak.
"""

from __future__ import annotations

import json
import math
from collections.abc import Callable, Mapping
from dataclasses import asdict, dataclass, field
from typing import Union

import numpy as np

from .errors import InfeasibleProfile, OpenTrackWhenClosedRequired
from .model import Lap, ReferenceLine, VehicleParams, new_lap

CLOSURE_TOL_M = 1e-6
GG_SLACK = 1e-6
_GL_X, _GL_W = np.polynomial.legendre.leggauss(32)


# -- track description -------------------------------------------------------


@dataclass(frozen=True)
class Straight:
    length: float


@dataclass(frozen=True)
class Arc:
    radius: float
    angle: float
    direction: str = "left"

    @property
    def length(self) -> float:
        return self.radius * self.angle

    @property
    def curvature(self) -> float:
        return (1.0 if self.direction == "left" else -1.0) / self.radius


@dataclass(frozen=True)
class Clothoid:
    """Curvature changes linearly from ``k_start`` to ``k_end`` (signed, 1/m, left positive)."""

    length: float
    k_start: float
    k_end: float


Segment = Union[Straight, Arc, Clothoid]


@dataclass(frozen=True)
class TrackSpec:
    segments: tuple
    closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ValueError("track needs at least one segment")
        for seg in self.segments:
            if isinstance(seg, Arc):
                if not (seg.radius > 0 and seg.angle > 0) or seg.direction not in ("left", "right"):
                    raise ValueError(f"invalid arc {seg}")
            elif not seg.length > 0:
                raise ValueError(f"segment length must be > 0: {seg}")

    @property
    def length(self) -> float:
        return float(sum(seg.length for seg in self.segments))

    @classmethod
    def from_json(cls, data) -> TrackSpec:
        """Accept a JSON list of segments or ``{"closed": bool, "segments": [...]}``.

        A bare list is treated as closed when its end meets its start.
        """
        if isinstance(data, (str, bytes)):
            data = json.loads(data)
        closed = None
        if isinstance(data, Mapping):
            closed = data.get("closed")
            data = data["segments"]
        segments = []
        for item in data:
            kind = item["type"]
            if kind == "straight":
                segments.append(Straight(float(item["length"])))
            elif kind == "arc":
                segments.append(Arc(float(item["radius"]), float(item["angle"]), item.get("direction", "left")))
            elif kind == "clothoid":
                segments.append(Clothoid(float(item["length"]), float(item["k_start"]), float(item["k_end"])))
            else:
                raise ValueError(f"unknown segment type '{kind}'")
        if closed is None:
            geo = TrackGeometry(cls(segments, closed=False))
            closed = geo.closure_gap() <= CLOSURE_TOL_M
        return cls(segments, closed=bool(closed))

    def to_json(self) -> dict:
        segs = []
        for seg in self.segments:
            kind = {Straight: "straight", Arc: "arc", Clothoid: "clothoid"}[type(seg)]
            segs.append({"type": kind, **asdict(seg)})
        return {"closed": self.closed, "segments": segs}


def oval(straight: float, radius: float, transition: float = 0.0, direction: str = "left") -> TrackSpec:
    """Closed oval: two straights joined by 180 degree turns with optional clothoid entries/exits."""
    k = (1.0 if direction == "left" else -1.0) / radius
    arc_angle = math.pi - transition / radius
    if arc_angle <= 0:
        raise ValueError("transition too long for this radius")
    turn: list = []
    if transition > 0:
        turn.append(Clothoid(transition, 0.0, k))
    turn.append(Arc(radius, arc_angle, direction))
    if transition > 0:
        turn.append(Clothoid(transition, k, 0.0))
    return TrackSpec([Straight(straight), *turn, Straight(straight), *turn], closed=True)


class TrackGeometry:
    """Exact pose and curvature along a `TrackSpec` as functions of arc length."""

    def __init__(self, track: TrackSpec):
        self.track = track
        self.lengths = np.array([seg.length for seg in track.segments])
        self.starts = np.concatenate([[0.0], np.cumsum(self.lengths)[:-1]])
        self.length = float(np.sum(self.lengths))
        poses = [(0.0, 0.0, 0.0)]
        for seg in track.segments:
            x0, y0, p0 = poses[-1]
            lx, ly, lp = self._local(seg, np.array([seg.length]))
            poses.append(self._to_global(x0, y0, p0, lx[0], ly[0], lp[0]))
        self.poses = poses

    @staticmethod
    def _local(seg, u):
        """Pose relative to the segment's start frame at distance ``u``."""
        u = np.asarray(u, dtype=float)
        if isinstance(seg, Straight):
            return u, np.zeros_like(u), np.zeros_like(u)
        if isinstance(seg, Arc):
            k = seg.curvature
            th = k * u
            return np.sin(th) / k, (1.0 - np.cos(th)) / k, th
        c = (seg.k_end - seg.k_start) / seg.length
        th = seg.k_start * u + 0.5 * c * u**2
        # Gauss-Legendre on [0, u] for each u.
        q = 0.5 * u[:, None] * (1.0 + _GL_X[None, :])
        tq = seg.k_start * q + 0.5 * c * q**2
        lx = 0.5 * u * (np.cos(tq) @ _GL_W)
        ly = 0.5 * u * (np.sin(tq) @ _GL_W)
        return lx, ly, th

    @staticmethod
    def _curvature(seg, u):
        u = np.asarray(u, dtype=float)
        if isinstance(seg, Straight):
            return np.zeros_like(u)
        if isinstance(seg, Arc):
            return np.full_like(u, seg.curvature)
        return seg.k_start + (seg.k_end - seg.k_start) * u / seg.length

    @staticmethod
    def _to_global(x0, y0, p0, lx, ly, lp):
        c, s = np.cos(p0), np.sin(p0)
        return x0 + c * lx - s * ly, y0 + s * lx + c * ly, p0 + lp

    def closure_gap(self) -> float:
        x, y, _ = self.poses[-1]
        return float(math.hypot(x, y))

    def segment_of(self, s) -> np.ndarray:
        return np.clip(np.searchsorted(self.starts, s, side="right") - 1, 0, len(self.lengths) - 1)

    def evaluate(self, s):
        """``(x, y, psi, kappa)`` at arc lengths ``s`` (``psi`` is not wrapped)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if self.track.closed:
            s = np.mod(s, self.length)
        seg_idx = self.segment_of(s)
        x, y, psi, kappa = (np.empty_like(s) for _ in range(4))
        for j in np.unique(seg_idx):
            sel = seg_idx == j
            seg = self.track.segments[j]
            u = s[sel] - self.starts[j]
            lx, ly, lp = self._local(seg, u)
            x0, y0, p0 = self.poses[j]
            x[sel], y[sel], psi[sel] = self._to_global(x0, y0, p0, lx, ly, lp)
            kappa[sel] = self._curvature(seg, u)
        return x, y, psi, kappa


def build_reference(track: TrackSpec, resolution: float = 1.0) -> ReferenceLine:
    """Centerline polyline with points at most ``resolution`` apart and exact headings.

    Raises:
        OpenTrackWhenClosedRequired: the track is marked closed but its end
            does not meet its start.
    """
    geo = TrackGeometry(track)
    if track.closed and geo.closure_gap() > CLOSURE_TOL_M:
        raise OpenTrackWhenClosedRequired(f"track marked closed but ends {geo.closure_gap():.3g} m from its start")
    n = max(1, int(math.ceil(geo.length / resolution - 1e-9)))
    s = np.linspace(0.0, geo.length, n + 1)
    if track.closed:
        s = s[:-1]
    x, y, psi, _ = geo.evaluate(s) if not track.closed else geo.evaluate(np.minimum(s, geo.length))
    return ReferenceLine(s, x, y, psi, np.zeros_like(s), closed=track.closed)


# -- driver profile and speed solver ----------------------------------------


@dataclass(frozen=True)
class DriverProfile:
    ax_max: float = 4.7
    ax_min: float = -9.2
    ay_max: float = 13.7
    gg_shape: str = "circle"
    full_throttle_at_frac: float = 0.75
    coast_gap_s: float = 0.0
    brake_ramp_barps: float = 400.0
    brake_peak_bar: float = 300.0
    brake_release_barps: float = 200.0
    part_throttle: float = 0.3
    v_max: float = 90.0

    def validate(self, curved: bool = True) -> None:
        if not self.ax_max > 0 > self.ax_min:
            raise InfeasibleProfile("need ax_max > 0 > ax_min")
        if curved and not self.ay_max > 0:
            raise InfeasibleProfile("ay_max must be > 0 on a track with curves")
        if self.gg_shape not in ("circle", "diamond"):
            raise InfeasibleProfile(f"unknown g-g shape '{self.gg_shape}'")
        if not 0.0 <= self.full_throttle_at_frac <= 1.0:
            raise InfeasibleProfile("full_throttle_at_frac must be within [0, 1]")
        if not (self.brake_ramp_barps > 0 and self.brake_peak_bar > 0 and self.brake_release_barps > 0):
            raise InfeasibleProfile("brake ramp, peak and release must be > 0")
        if self.coast_gap_s < 0 or not 0 < self.part_throttle < 1 or not self.v_max > 0:
            raise InfeasibleProfile("invalid coast gap, part throttle or v_max")

    def gg_usage(self, ax, ay) -> np.ndarray:
        """Fraction of the g-g limit used (1 on the boundary)."""
        ax = np.asarray(ax, dtype=float)
        lim = np.where(ax >= 0, self.ax_max, -self.ax_min)
        ux, uy = np.abs(ax) / lim, np.abs(np.asarray(ay, dtype=float)) / self.ay_max
        if self.gg_shape == "circle":
            return np.hypot(ux, uy)
        return ux + uy

    @classmethod
    def from_dict(cls, data: Mapping) -> DriverProfile:
        return cls(**{k: (float(v) if k != "gg_shape" else v) for k, v in data.items()})


def _long_limit(v2: float, kappa: float, ds: float, a_lim: float, ay_lim: float, shape: str) -> float:
    """Largest |a| over a step of length ``ds`` that keeps the faster end inside the g-g limit.

    ``v2`` is the squared speed at the slower end; the faster end has
    ``v2 + 2*a*ds`` and lateral acceleration ``(v2 + 2*a*ds) * kappa``.
    """
    b = kappa / ay_lim if kappa else 0.0
    if b * v2 >= 1.0:
        return 0.0
    if shape == "diamond":
        return (1.0 - b * v2) / (1.0 / a_lim + 2.0 * b * ds)
    qa = 1.0 / a_lim**2 + 4.0 * b * b * ds * ds
    qb = 4.0 * b * b * v2 * ds
    qc = b * b * v2 * v2 - 1.0
    return -2.0 * qc / (qb + math.sqrt(qb * qb - 4.0 * qa * qc))


@dataclass(frozen=True)
class SpeedProfile:
    s: np.ndarray  # node arc length, 0..L
    v: np.ndarray  # node speed
    a: np.ndarray  # constant acceleration of each step
    t: np.ndarray  # node time from lap start
    kappa_step: np.ndarray  # conservative |kappa| used for each step

    @property
    def lap_time(self) -> float:
        return float(self.t[-1])


def _grid(geo: TrackGeometry, resolution: float):
    s_nodes, k_step = [0.0], []
    for j, seg in enumerate(geo.track.segments):
        n = max(1, int(math.ceil(seg.length / resolution - 1e-9)))
        u = np.linspace(0.0, seg.length, n + 1)
        k = np.abs(geo._curvature(seg, u))
        k_step.extend(np.maximum(k[:-1], k[1:]).tolist())
        s_nodes.extend((geo.starts[j] + u[1:]).tolist())
    s = np.array(s_nodes)
    s[-1] = geo.length
    return s, np.array(k_step)


def solve_speed(track: TrackSpec, profile: DriverProfile, resolution: float = 0.5, v_start: float | None = None) -> SpeedProfile:
    """Forward/backward quasi-steady speed profile.

    Closed tracks get the periodic flying-lap solution (three laps solved,
    the middle one kept). Open tracks start at ``v_start`` (default 10 m/s)
    and may end at any speed.
    """
    geo = TrackGeometry(track)
    s, k_step = _grid(geo, resolution)
    curved = bool(np.any(k_step > 0))
    profile.validate(curved)
    ds = np.diff(s)
    laps = 3 if track.closed else 1
    ds_all = np.tile(ds, laps)
    k_all = np.tile(k_step, laps)
    m = len(ds_all)

    with np.errstate(divide="ignore", invalid="ignore"):
        cap_step = np.where(k_all > 0, np.sqrt(profile.ay_max / k_all), np.inf)
    cap = np.full(m + 1, profile.v_max)
    cap[:-1] = np.minimum(cap[:-1], cap_step)
    cap[1:] = np.minimum(cap[1:], cap_step)

    shape, ay = profile.gg_shape, profile.ay_max
    fwd = np.empty(m + 1)
    fwd[0] = min(cap[0], 10.0 if v_start is None else v_start)
    for k in range(m):
        v2 = fwd[k] ** 2
        a = _long_limit(v2, k_all[k], ds_all[k], profile.ax_max, ay, shape)
        fwd[k + 1] = min(cap[k + 1], math.sqrt(v2 + 2.0 * a * ds_all[k]))
    bwd = np.empty(m + 1)
    bwd[m] = cap[m] if track.closed else fwd[m]
    for k in range(m - 1, -1, -1):
        v2 = bwd[k + 1] ** 2
        d = _long_limit(v2, k_all[k], ds_all[k], -profile.ax_min, ay, shape)
        bwd[k] = min(cap[k], math.sqrt(v2 + 2.0 * d * ds_all[k]))
    v = np.minimum(fwd, bwd)

    n = len(ds)
    if track.closed:
        v = v[n : 2 * n + 1].copy()
        if abs(v[-1] - v[0]) > 1e-9 * max(1.0, v[0]):
            raise InfeasibleProfile("speed profile did not converge to a periodic lap")
        v[-1] = v[0]
    if np.any(v <= 0):
        raise InfeasibleProfile("vehicle comes to a stop on this track")
    a = (v[1:] ** 2 - v[:-1] ** 2) / (2.0 * ds)
    t = np.concatenate([[0.0], np.cumsum(2.0 * ds / (v[1:] + v[:-1]))])
    return SpeedProfile(s=s, v=v, a=a, t=t, kappa_step=k_step)


# -- time-domain synthesis ---------------------------------------------------


@dataclass
class GroundTruth:
    lap_duration: float
    n_laps: int
    lap_starts: list[float]
    coasting_time: list[float]
    coast_gaps: list[float]
    throttle_acceptance: float
    full_throttle_corners: int
    brake_ramp_barps: float
    brake_phases: int
    ay_max: float
    ax_max: float
    ax_min: float
    v_max: float
    gg_shape: str
    profile: dict = field(default_factory=dict)
    target: ReferenceLine | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("target")
        return d


def _runs(flag: np.ndarray) -> list[tuple[int, int]]:
    edges = np.diff(np.concatenate([[0], flag.astype(np.int8), [0]]))
    return list(zip(np.flatnonzero(edges == 1).tolist(), (np.flatnonzero(edges == -1) - 1).tolist()))


def simulate_session(
    track: TrackSpec,
    profile: DriverProfile,
    params: VehicleParams | None = None,
    rate: float = 100.0,
    n_laps: int = 1,
    *,
    resolution: float = 0.5,
    driver_tag: str = "software",
    noise_sigma: Mapping[str, float] | None = None,
    seed: int = 0,
    vy_fn: Callable[[np.ndarray], np.ndarray] | None = None,
) -> tuple[dict[str, np.ndarray], GroundTruth]:
    """Generate ``n_laps`` consecutive laps as one uniformly sampled series.

    Lap distance ``s`` restarts at 0 on every lap. ``vy_fn`` maps sample
    times to an injected lateral velocity; ``noise_sigma`` adds seeded
    Gaussian noise to the named channels after everything else is built.
    A ``f_long_req`` channel is emitted for ``driver_tag == "software"``.
    """
    params = params or VehicleParams()
    if n_laps < 1:
        raise ValueError("n_laps must be >= 1")
    if not track.closed and n_laps > 1:
        raise ValueError("multi-lap sessions need a closed track")
    geo = TrackGeometry(track)
    if track.closed and geo.closure_gap() > CLOSURE_TOL_M:
        raise OpenTrackWhenClosedRequired("track marked closed does not close")
    sp = solve_speed(track, profile, resolution)
    L, T = geo.length, sp.lap_time

    # Nodes of the whole session.
    n_steps = len(sp.a)
    s_nodes = np.concatenate([sp.s[:-1] + i * L for i in range(n_laps)] + [[n_laps * L]])
    t_nodes = np.concatenate([sp.t[:-1] + i * T for i in range(n_laps)] + [[n_laps * T]])
    v_nodes = np.concatenate([np.tile(sp.v[:-1], n_laps), [sp.v[-1]]])
    a_steps = np.tile(sp.a, n_laps)

    dt = 1.0 / rate
    n_samples = int(math.ceil(n_laps * T * rate - 1e-9))
    t = np.arange(n_samples) * dt
    k = np.clip(np.searchsorted(t_nodes, t, side="right") - 1, 0, len(a_steps) - 1)
    u = t - t_nodes[k]
    vx = v_nodes[k] + a_steps[k] * u
    s_sess = s_nodes[k] + v_nodes[k] * u + 0.5 * a_steps[k] * u * u
    lap_idx = np.minimum((k // n_steps), n_laps - 1)
    s_lap = np.clip(s_sess - lap_idx * L, 0.0, L)
    x, y, psi, kappa = geo.evaluate(np.minimum(s_lap, L * (1 - 1e-15)) if track.closed else s_lap)
    ax = a_steps[k].copy()
    ay = vx * vx * kappa
    yaw_rate = vx * kappa
    steer = np.arctan(params.lf * kappa) + np.arctan(params.lr * kappa)
    vy = np.zeros_like(t) if vy_fn is None else np.asarray(vy_fn(t), dtype=float)

    # Deceleration phases, in continuous time.
    phases = []
    for a0, b0 in _runs(a_steps < -1e-9):
        phases.append((t_nodes[a0], t_nodes[b0 + 1]))
    p_total = np.zeros_like(t)
    throttle = np.ones_like(t)
    gaps, gap_laps = [], []
    accept_corners = 0
    for j, (tb, te) in enumerate(phases):
        kb = int(np.searchsorted(t, tb - 1e-12))
        if kb >= n_samples:
            continue
        tb_s = t[kb]
        on = (t >= tb_s) & (t <= te)
        p = np.minimum.reduce(
            [
                profile.brake_ramp_barps * (t - tb_s),
                np.full_like(t, profile.brake_peak_bar),
                profile.brake_release_barps * (te - t),
            ]
        )
        p_total[on] = np.maximum(p[on], 0.0)

        next_tb = phases[j + 1][0] if j + 1 < len(phases) else np.inf
        window = np.flatnonzero((t >= te) & (t < next_tb))
        t_full = np.inf
        if window.size:
            peak_rel = int(np.argmax(np.abs(ay[window])))
            peak = abs(ay[window[peak_rel]])
            after = window[peak_rel + 1 :]
            hit = np.flatnonzero(np.abs(ay[after]) <= profile.full_throttle_at_frac * peak)
            if hit.size and peak > 0:
                t_full = t[after[hit[0]]]
                accept_corners += 1
        gap = min(profile.coast_gap_s, max(0.0, t_full - te))
        end_zero = te + gap
        throttle[(t > tb_s) & (t < end_zero)] = 0.0
        part = (t >= end_zero) & (t < min(t_full, next_tb))
        throttle[part] = profile.part_throttle
        if gap > 0:
            gaps.append(gap)
            gap_laps.append(int(min(te // T, n_laps - 1)))

    channels = {
        "t": t,
        "s": s_lap,
        "x": x,
        "y": y,
        "psi": psi,
        "vx": vx,
        "vy": vy,
        "ax": ax,
        "ay": ay,
        "yaw_rate": yaw_rate,
        "steer": steer,
        "throttle": throttle,
        "p_brake_f": 0.6 * p_total,
        "p_brake_r": 0.4 * p_total,
    }
    if driver_tag == "software":
        channels["f_long_req"] = np.where(
            throttle > 0, throttle * params.f_long_max, -p_total / params.p_brake_max * params.f_long_max
        )

    if noise_sigma:
        rng = np.random.default_rng(seed)
        for name in sorted(noise_sigma):
            if name not in channels or name == "t":
                raise ValueError(f"cannot add noise to channel '{name}'")
            channels[name] = channels[name] + rng.normal(0.0, noise_sigma[name], n_samples)
        channels["throttle"] = np.clip(channels["throttle"], 0.0, 1.0)
        for name in ("p_brake_f", "p_brake_r"):
            channels[name] = np.maximum(channels[name], 0.0)

    coast_per_lap = [0.0] * n_laps
    for g, lap in zip(gaps, gap_laps):
        coast_per_lap[lap] += g

    ref_s = sp.s[:-1] if track.closed else sp.s
    rx, ry, rpsi, _ = geo.evaluate(ref_s)
    target = ReferenceLine(ref_s, rx, ry, rpsi, sp.v[: len(ref_s)], closed=track.closed)
    truth = GroundTruth(
        lap_duration=T,
        n_laps=n_laps,
        lap_starts=[i * T for i in range(n_laps)],
        coasting_time=coast_per_lap,
        coast_gaps=gaps,
        throttle_acceptance=100.0 * profile.full_throttle_at_frac,
        full_throttle_corners=accept_corners,
        brake_ramp_barps=profile.brake_ramp_barps,
        brake_phases=len(phases),
        ay_max=float(np.max(np.abs(ay))),
        ax_max=float(np.max(ax)),
        ax_min=float(np.min(ax)),
        v_max=float(np.max(vx)),
        gg_shape=profile.gg_shape,
        profile=asdict(profile),
        target=target,
    )
    return channels, truth


def simulate_lap(
    track: TrackSpec,
    profile: DriverProfile,
    params: VehicleParams | None = None,
    rate: float = 100.0,
    *,
    track_id: str = "synthetic",
    driver_tag: str = "software",
    **kwargs,
) -> tuple[Lap, GroundTruth]:
    """One flying lap as a validated `Lap` plus its ground truth."""
    channels, truth = simulate_session(track, profile, params, rate, 1, driver_tag=driver_tag, **kwargs)
    return new_lap(channels, driver_tag, track_id), truth


def load_track(path) -> TrackSpec:
    with open(path, encoding="utf-8") as fh:
        return TrackSpec.from_json(json.load(fh))


def load_profile(path) -> DriverProfile:
    with open(path, encoding="utf-8") as fh:
        return DriverProfile.from_dict(json.load(fh))
