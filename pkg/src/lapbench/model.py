"""Core telemetry data types.

Sign convention is ISO 8855: a left turn gives positive steering angle,
positive yaw rate and positive lateral acceleration. Units are SI except
brake pressure (bar) and throttle (normalized 0..1).
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, fields
from types import MappingProxyType

import numpy as np

from .errors import ChannelRangeError, EmptySeries, NonFiniteValue, NonUniformSampling

# Channel names used internally, in canonical CSV column order.
CHANNELS = (
    "t",
    "s",
    "x",
    "y",
    "psi",
    "vx",
    "vy",
    "ax",
    "ay",
    "yaw_rate",
    "steer",
    "throttle",
    "p_brake_f",
    "p_brake_r",
    "f_long_req",
)
OPTIONAL_CHANNELS = ("vy", "throttle", "f_long_req")
REQUIRED_CHANNELS = tuple(c for c in CHANNELS if c not in OPTIONAL_CHANNELS)

UNIFORM_TOL_S = 1e-9


def wrap_angle(a):
    """Wrap angles to (-pi, pi]."""
    w = np.pi - np.mod(np.pi - np.asarray(a, dtype=float), 2 * np.pi)
    return float(w) if np.ndim(w) == 0 else w


@dataclass(frozen=True)
class TelemetrySample:
    """One row of telemetry. Optional channels are ``None`` when not logged."""

    t: float
    s: float
    x: float
    y: float
    psi: float
    vx: float
    ax: float
    ay: float
    yaw_rate: float
    steer: float
    p_brake_f: float
    p_brake_r: float
    vy: float | None = None
    throttle: float | None = None
    f_long_req: float | None = None


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Lap:
    """Uniformly sampled telemetry of one lap, stored column-wise.

    Use `new_lap` to build one; it validates the sampling grid and channels.
    Channels are read with ``lap["vx"]``; absent optional channels raise
    ``KeyError`` (check with ``"vy" in lap``).
    """

    channels: Mapping[str, np.ndarray]
    dt: float
    lap_time: float
    driver_tag: str = "other"
    track_id: str = ""
    out_lap: bool = False
    index: int = 0

    def __getitem__(self, name: str) -> np.ndarray:
        return self.channels[name]

    def __contains__(self, name: str) -> bool:
        return name in self.channels

    def __len__(self) -> int:
        return len(self.channels["t"])

    def get(self, name: str) -> np.ndarray | None:
        return self.channels.get(name)

    @property
    def n(self) -> int:
        return len(self)

    @property
    def duration(self) -> float:
        """Time covered when each sample stands for one ``dt`` interval (``n * dt``)."""
        return self.n * self.dt

    def sample(self, i: int) -> TelemetrySample:
        kw = {name: float(arr[i]) for name, arr in self.channels.items()}
        return TelemetrySample(**kw)

    def samples(self) -> Iterator[TelemetrySample]:
        for i in range(self.n):
            yield self.sample(i)


def _columns_from_samples(samples: Sequence[TelemetrySample]) -> dict[str, np.ndarray]:
    cols: dict[str, np.ndarray] = {}
    for f in fields(TelemetrySample):
        values = [getattr(smp, f.name) for smp in samples]
        if all(v is None for v in values):
            if f.name in OPTIONAL_CHANNELS:
                continue
        cols[f.name] = np.array([np.nan if v is None else v for v in values], dtype=float)
    return cols


def validate_channels(cols: Mapping[str, np.ndarray]) -> None:
    """Check presence, finiteness and physical ranges of channel arrays."""
    n = len(cols["t"])
    for name, arr in cols.items():
        if len(arr) != n:
            raise ValueError(f"channel '{name}' has length {len(arr)}, expected {n}")
        bad = np.flatnonzero(~np.isfinite(arr))
        if bad.size:
            raise NonFiniteValue(name, int(bad[0]))
    if "throttle" in cols:
        thr = cols["throttle"]
        bad = np.flatnonzero((thr < 0.0) | (thr > 1.0))
        if bad.size:
            raise ChannelRangeError("throttle", int(bad[0]), float(thr[bad[0]]))
    for name in ("p_brake_f", "p_brake_r"):
        if name in cols:
            bad = np.flatnonzero(cols[name] < 0.0)
            if bad.size:
                raise ChannelRangeError(name, int(bad[0]), float(cols[name][bad[0]]))


def uniform_dt(t: np.ndarray) -> float:
    """Return the sampling interval of ``t``, raising if spacing is not uniform."""
    n = len(t)
    if n < 2:
        raise EmptySeries("need at least 2 samples")
    dt = (t[-1] - t[0]) / (n - 1)
    if not dt > 0:
        raise NonUniformSampling(float(t[-1] - t[0]), float(dt), 0)
    gaps = np.diff(t)
    dev = np.abs(gaps - dt)
    # Equal deviations (e.g. one long gap skews dt) report the longer interval.
    worst = int(np.lexsort((-gaps, -np.round(dev, 12)))[0])
    if dev[worst] > UNIFORM_TOL_S:
        raise NonUniformSampling(float(t[worst + 1] - t[worst]), float(dt), worst)
    return float(dt)


def new_lap(
    samples: Sequence[TelemetrySample] | Mapping[str, Sequence[float]],
    driver_tag: str = "other",
    track_id: str = "",
    *,
    out_lap: bool = False,
    index: int = 0,
) -> Lap:
    """Build a validated `Lap` from samples or from a mapping of channel arrays.

    Raises:
        EmptySeries: fewer than 2 samples.
        NonUniformSampling: spacing deviates from dt by more than 1e-9 s.
        NonFiniteValue: NaN/Inf in any channel.
        MissingRequiredColumn: a required channel is absent.
    """
    from .errors import MissingRequiredColumn

    if isinstance(samples, Mapping):
        cols = {k: np.asarray(v, dtype=float) for k, v in samples.items() if k in CHANNELS}
    else:
        if len(samples) == 0:
            raise EmptySeries("no samples")
        cols = _columns_from_samples(samples)
    if "t" not in cols or len(cols["t"]) == 0:
        raise EmptySeries("no samples")
    for name in REQUIRED_CHANNELS:
        if name not in cols:
            raise MissingRequiredColumn(name)
    validate_channels(cols)
    dt = uniform_dt(cols["t"])
    s = cols["s"]
    back = np.flatnonzero(np.diff(s) < 0)
    if back.size:
        raise ValueError(f"lap distance decreases at index {int(back[0]) + 1}")
    n = len(cols["t"])
    return Lap(
        channels=MappingProxyType({k: _readonly(v) for k, v in cols.items()}),
        dt=dt,
        lap_time=(n - 1) * dt,
        driver_tag=driver_tag,
        track_id=track_id,
        out_lap=out_lap,
        index=index,
    )


@dataclass(frozen=True)
class ReferenceLine:
    """Arc-length parameterized polyline with heading and target speed.

    For a closed line the last point connects back to the first; the
    closing segment is not repeated in the arrays.
    """

    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    psi: np.ndarray
    v: np.ndarray
    closed: bool = False

    def __post_init__(self):
        for name in ("s", "x", "y", "psi", "v"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        n = len(self.s)
        if n < 2:
            raise ValueError("reference line needs at least 2 points")
        if any(len(getattr(self, k)) != n for k in ("x", "y", "psi", "v")):
            raise ValueError("reference arrays must have equal length")
        if not np.all(np.isfinite(np.stack([self.s, self.x, self.y, self.psi, self.v]))):
            raise ValueError("reference line contains non-finite values")
        if not np.all(np.diff(self.s) > 0):
            raise ValueError("reference arc length must be strictly increasing")
        seg = np.hypot(np.diff(self.x), np.diff(self.y))
        if np.any(seg == 0):
            raise ValueError("consecutive reference points must be distinct")

    @classmethod
    def from_points(cls, points, closed: bool = False) -> ReferenceLine:
        """Build from rows of ``(s_ref, x, y, psi_ref, v_ref)``."""
        p = np.asarray(points, dtype=float)
        return cls(p[:, 0], p[:, 1], p[:, 2], p[:, 3], p[:, 4], closed=closed)

    def __len__(self) -> int:
        return len(self.s)

    @property
    def closing_length(self) -> float:
        if not self.closed:
            return 0.0
        return float(np.hypot(self.x[0] - self.x[-1], self.y[0] - self.y[-1]))

    @property
    def length(self) -> float:
        """Total polyline length including the closing segment."""
        return float(self.s[-1] - self.s[0]) + self.closing_length

    def vertices(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Vertex arrays (s, x, y, psi, v) with the closing vertex appended when closed."""
        if not self.closed:
            return self.s, self.x, self.y, self.psi, self.v
        s_end = self.s[-1] + self.closing_length
        psi_end = self.psi[-1] + wrap_angle(self.psi[0] - self.psi[-1])
        return (
            np.append(self.s, s_end),
            np.append(self.x, self.x[0]),
            np.append(self.y, self.y[0]),
            np.append(self.psi, psi_end),
            np.append(self.v, self.v[0]),
        )


@dataclass(frozen=True)
class VehicleParams:
    lf: float = 1.6
    lr: float = 1.4
    f_long_max: float = 8000.0
    p_brake_max: float = 150.0

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"VehicleParams.{f.name} must be > 0")

    @property
    def wheelbase(self) -> float:
        return self.lf + self.lr
