"""Telemetry CSV parsing, resampling onto a uniform grid, and lap splitting."""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from .errors import (
    EmptySeries,
    MissingRequiredColumn,
    NoLapBoundaryFound,
    NonMonotonicTime,
    SamplingGap,
    SpanTooShort,
    UnparsableCell,
)
from .model import CHANNELS, OPTIONAL_CHANNELS, Lap, ReferenceLine, new_lap

DEFAULT_RATE_HZ = 100.0
MAX_GAP_S = 0.2

# Internal channel name -> canonical CSV column.
CSV_COLUMNS = {
    "t": "t_s",
    "s": "s_m",
    "x": "x_m",
    "y": "y_m",
    "psi": "psi_rad",
    "vx": "vx_mps",
    "vy": "vy_mps",
    "ax": "ax_mps2",
    "ay": "ay_mps2",
    "yaw_rate": "yawrate_radps",
    "steer": "steer_rad",
    "throttle": "throttle",
    "p_brake_f": "p_brake_f_bar",
    "p_brake_r": "p_brake_r_bar",
    "f_long_req": "f_long_req_n",
}
CANONICAL_TO_CHANNEL = {v: k for k, v in CSV_COLUMNS.items()}

REF_COLUMNS = ("s_m", "x_m", "y_m", "psi_rad", "v_ref_mps")


@dataclass
class IngestDiagnostics:
    interpolated: dict[str, int] = field(default_factory=dict)
    clipped: dict[str, int] = field(default_factory=dict)
    dropped_rows: int = 0
    sample_rate_hz: float = 0.0

    def to_dict(self) -> dict:
        return {
            "interpolated": dict(self.interpolated),
            "clipped": dict(self.clipped),
            "dropped_rows": self.dropped_rows,
            "sample_rate_hz": self.sample_rate_hz,
        }


@dataclass(frozen=True)
class RawSeries:
    """Parsed channels on the logger's own (possibly irregular) time base."""

    t: np.ndarray
    columns: Mapping[str, np.ndarray]
    source: str = ""
    diagnostics: IngestDiagnostics = field(default_factory=IngestDiagnostics)

    def __len__(self) -> int:
        return len(self.t)


def load_schema(path) -> dict[str, str]:
    """Read a schema mapping file: JSON object ``{canonical_column: file_header}``."""
    with open(path, encoding="utf-8") as fh:
        schema = json.load(fh)
    unknown = set(schema) - set(CANONICAL_TO_CHANNEL)
    if unknown:
        raise ValueError(f"unknown canonical column(s) in schema: {sorted(unknown)}")
    return schema


def _text_stream(stream) -> IO[str]:
    if isinstance(stream, (bytes, bytearray)):
        return io.StringIO(bytes(stream).decode("utf-8"))
    if isinstance(stream, io.TextIOBase):
        return stream
    return io.TextIOWrapper(stream, encoding="utf-8", newline="")


def parse_csv(stream, schema: Mapping[str, str] | None = None, source: str = "") -> RawSeries:
    """Parse a telemetry CSV into a `RawSeries`.

    ``schema`` maps canonical column names (``t_s``, ``vx_mps`` ...) to the
    headers used in the file; unmapped columns are looked up by their
    canonical name. Columns are matched by header, never by position.
    Repeated timestamps keep the first row. Empty cells become NaN and are
    bridged later by `resample` when the hole is short enough.

    The throttle column may be missing only when ``f_long_req_n`` is present
    (autonomous logs without a pedal signal).
    """
    schema = dict(schema or {})
    reader = csv.reader(_text_stream(stream))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise EmptySeries("empty CSV file") from None
    col_index = {h: i for i, h in enumerate(header)}

    wanted: dict[str, int] = {}
    for name in CHANNELS:
        canonical = CSV_COLUMNS[name]
        file_header = schema.get(canonical, canonical)
        if file_header in col_index:
            wanted[name] = col_index[file_header]
        elif name not in OPTIONAL_CHANNELS:
            raise MissingRequiredColumn(file_header)
    if "throttle" not in wanted and "f_long_req" not in wanted:
        raise MissingRequiredColumn(schema.get("throttle", "throttle"))

    names = list(wanted)
    rows: list[list[float]] = []
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        values = []
        for name in names:
            j = wanted[name]
            cell = row[j].strip() if j < len(row) else ""
            if cell == "":
                if name == "t":
                    raise UnparsableCell(row_no, CSV_COLUMNS[name], cell)
                values.append(np.nan)
                continue
            try:
                values.append(float(cell))
            except ValueError:
                raise UnparsableCell(row_no, header[j], cell) from None
        rows.append(values)
    if not rows:
        raise EmptySeries("CSV has no data rows")

    data = np.array(rows, dtype=float)
    t = data[:, names.index("t")]
    diag = IngestDiagnostics()
    dt_raw = np.diff(t)
    back = np.flatnonzero(dt_raw < 0)
    if back.size:
        raise NonMonotonicTime(int(back[0]) + 3)  # +1 for diff, +1 header, +1 one-based
    keep = np.concatenate([[True], dt_raw > 0])
    diag.dropped_rows = int(np.count_nonzero(~keep))
    data = data[keep]
    t = data[:, names.index("t")]

    columns = {}
    for k, name in enumerate(names):
        if name == "t":
            continue
        col = data[:, k]
        if name == "throttle":
            clipped = np.clip(col, 0.0, 1.0)
        elif name in ("p_brake_f", "p_brake_r"):
            clipped = np.maximum(col, 0.0)
        else:
            clipped = col
        n_clip = int(np.count_nonzero(np.isfinite(col) & (clipped != col)))
        if n_clip:
            diag.clipped[name] = n_clip
        columns[name] = clipped
    if len(t) > 1:
        diag.sample_rate_hz = float(1.0 / np.median(np.diff(t)))
    return RawSeries(t=t, columns=columns, source=source, diagnostics=diag)


def _fill_holes(t: np.ndarray, col: np.ndarray, name: str, max_gap: float) -> tuple[np.ndarray, int]:
    bad = ~np.isfinite(col)
    if not bad.any():
        return col, 0
    good = np.flatnonzero(~bad)
    if good.size < 2:
        raise SamplingGap(f"channel '{name}' has fewer than 2 valid values")
    # Length of each NaN run, measured between the bracketing valid samples.
    edges = np.diff(np.concatenate([[0], bad.astype(np.int8), [0]]))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    for a, b in zip(starts, ends):
        if a == 0 or b == len(col):
            raise SamplingGap(f"channel '{name}' has missing values at the series edge")
        if t[b] - t[a - 1] > max_gap:
            raise SamplingGap(
                f"channel '{name}' missing for {t[b] - t[a - 1]:.3f} s from t={t[a - 1]:.3f} s"
            )
    filled = col.copy()
    filled[bad] = np.interp(t[bad], t[good], col[good])
    return filled, int(starts.size)


def resample(raw: RawSeries, rate: float = DEFAULT_RATE_HZ, max_gap: float = MAX_GAP_S) -> dict[str, np.ndarray]:
    """Linearly interpolate every channel onto ``t0 + k/rate`` without extrapolating.

    Raises:
        SpanTooShort: the series spans less than two sample intervals.
        SamplingGap: consecutive raw timestamps (or a run of empty cells)
            are further apart than ``max_gap`` seconds.
    """
    if not rate > 0:
        raise ValueError("rate must be > 0")
    t = np.asarray(raw.t, dtype=float)
    step = 1.0 / rate
    span = float(t[-1] - t[0]) if len(t) else 0.0
    if len(t) < 2 or span < 2 * step - 1e-12:
        raise SpanTooShort(f"series spans {span:.6g} s, need at least {2 * step:.6g} s")
    gaps = np.diff(t)
    worst = int(np.argmax(gaps))
    if gaps[worst] > max_gap:
        raise SamplingGap(f"time gap of {gaps[worst]:.3f} s after t={t[worst]:.3f} s")

    n = int(np.floor(span * rate + 1e-9)) + 1
    grid = t[0] + np.arange(n) * step
    grid[-1] = min(grid[-1], t[-1])
    out = {"t": grid}
    for name, col in raw.columns.items():
        col, n_holes = _fill_holes(t, np.asarray(col, dtype=float), name, max_gap)
        if n_holes:
            raw.diagnostics.interpolated[name] = raw.diagnostics.interpolated.get(name, 0) + n_holes
        out[name] = np.interp(grid, t, col)
    return out


def series_from_lap(lap: Lap) -> dict[str, np.ndarray]:
    return {k: np.asarray(v) for k, v in lap.channels.items()}


def _crossing_boundaries(x, y, ref: ReferenceLine, radius: float = 10.0) -> np.ndarray:
    x0, y0, psi0 = ref.x[0], ref.y[0], ref.psi[0]
    along = (x - x0) * np.cos(psi0) + (y - y0) * np.sin(psi0)
    near = np.hypot(x - x0, y - y0) <= radius
    idx = np.flatnonzero((along[:-1] < 0) & (along[1:] >= 0) & near[1:]) + 1
    return idx


def split_laps(
    series: Mapping[str, np.ndarray],
    mode: str = "distance",
    ref: ReferenceLine | None = None,
    *,
    track_length: float | None = None,
    edge_tol_m: float = 10.0,
    driver_tag: str = "other",
    track_id: str = "",
) -> list[Lap]:
    """Split a uniform session into laps.

    ``mode="distance"`` starts a new lap wherever ``s`` drops by more than
    half the track length. ``mode="line"`` starts one at each forward
    crossing of the start line of ``ref`` (the normal through its first
    point) within 10 m of that point. Segments before the first and after
    the last boundary are returned with ``out_lap=True`` unless they cover
    the full lap (within ``edge_tol_m`` for distance mode).

    Raises:
        NoLapBoundaryFound: no boundary at all; the single flagged segment
            is attached to the exception.
    """
    cols = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    s = cols["s"]
    n = len(s)
    if mode == "distance":
        length = float(track_length) if track_length else float(np.max(s) - min(0.0, np.min(s)))
        bounds = np.flatnonzero(np.diff(s) < -0.5 * length) + 1
        first_full = s[0] <= edge_tol_m
        last_full = s[-1] >= length - edge_tol_m
    elif mode == "line":
        if ref is None:
            raise ValueError("line-crossing mode needs a reference line")
        x, y = cols["x"], cols["y"]
        bounds = _crossing_boundaries(x, y, ref)
        psi0 = ref.psi[0]
        along = (x - ref.x[0]) * np.cos(psi0) + (y - ref.y[0]) * np.sin(psi0)
        step = float(np.max(np.hypot(np.diff(x), np.diff(y)))) if n > 1 else 0.0
        first_full = 0.0 <= along[0] <= step
        last_full = -step <= along[-1] < 0.0
    else:
        raise ValueError(f"unknown split mode '{mode}'")

    edges = [0, *bounds.tolist(), n]
    laps: list[Lap] = []
    for k, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        if b - a < 2:
            continue
        is_first, is_last = k == 0, k == len(edges) - 2
        out = (is_first and not first_full) or (is_last and not last_full)
        if not bounds.size:
            out = True
        part = {name: col[a:b] for name, col in cols.items()}
        if mode == "line":
            # Logger distance need not reset at the line; use travelled path length.
            steps = np.hypot(np.diff(part["x"]), np.diff(part["y"]))
            part["s"] = np.concatenate([[0.0], np.cumsum(steps)])
        laps.append(new_lap(part, driver_tag, track_id, out_lap=out, index=len(laps)))
    if not bounds.size:
        raise NoLapBoundaryFound("no lap boundary found in series", segments=laps)
    return laps


def write_telemetry_csv(series: Mapping[str, np.ndarray], stream: IO[str]) -> None:
    """Write channels in canonical column order; floats use round-trip repr."""
    names = [c for c in CHANNELS if c in series]
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow([CSV_COLUMNS[c] for c in names])
    arrays = [np.asarray(series[c], dtype=float) for c in names]
    for row in zip(*arrays):
        writer.writerow([repr(float(v)) for v in row])


def read_reference_csv(stream) -> ReferenceLine:
    """Read a reference line CSV (``s_m,x_m,y_m,psi_rad,v_ref_mps``).

    A leading comment line ``# closed=true`` marks a closed line.
    """
    text = _text_stream(stream).read()
    lines = text.splitlines()
    closed = False
    while lines and lines[0].startswith("#"):
        meta = lines.pop(0).lstrip("#").strip().lower().replace(" ", "")
        if meta.startswith("closed="):
            closed = meta.split("=", 1)[1] in ("true", "1", "yes")
    reader = csv.DictReader(lines)
    missing = [c for c in REF_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise MissingRequiredColumn(missing[0])
    pts = []
    for row_no, row in enumerate(reader, start=2):
        try:
            pts.append([float(row[c]) for c in REF_COLUMNS])
        except ValueError:
            bad = next(c for c in REF_COLUMNS if not _is_float(row[c]))
            raise UnparsableCell(row_no, bad, row[bad]) from None
    return ReferenceLine.from_points(pts, closed=closed)


def _is_float(text) -> bool:
    try:
        float(text)
    except (TypeError, ValueError):
        return False
    return True


def write_reference_csv(ref: ReferenceLine, stream: IO[str]) -> None:
    stream.write(f"# closed={'true' if ref.closed else 'false'}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(REF_COLUMNS)
    for row in zip(ref.s, ref.x, ref.y, ref.psi, ref.v):
        writer.writerow([repr(float(v)) for v in row])
