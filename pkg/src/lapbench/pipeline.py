"""End-to-end analysis: telemetry file or lap in, KPI reports out."""

from __future__ import annotations

from pathlib import Path

from .channels import compute_all
from .config import EngineConfig
from .errors import NoLapBoundaryFound
from .ingest import parse_csv, resample, split_laps
from .kpi import KpiReport, compute_report
from .model import Lap, ReferenceLine
from .segment import segment_lap


def analyze_lap(lap: Lap, ref: ReferenceLine | None = None, cfg: EngineConfig | None = None) -> KpiReport:
    """Math channels, segmentation and every KPI of one lap."""
    cfg = cfg or EngineConfig()
    channels = compute_all(
        lap,
        cfg.vehicle,
        smooth_window_s=cfg.smooth_window_s,
        v_min_mps=cfg.v_min_mps,
        use_artificial_throttle=cfg.use_artificial_throttle,
    )
    report = compute_report(lap, channels, segment_lap(lap, channels, cfg), ref, cfg)
    report.diagnostics["throttle_source"] = channels.throttle_source
    report.diagnostics["lap_index"] = lap.index
    return report


def load_laps(
    path,
    cfg: EngineConfig | None = None,
    *,
    ref: ReferenceLine | None = None,
    split: str = "distance",
    driver_tag: str = "other",
    track_id: str = "",
    include_out_laps: bool = False,
) -> list[Lap]:
    """Parse, resample and split a telemetry CSV.

    A series without any lap boundary is treated as a single lap.
    """
    cfg = cfg or EngineConfig()
    path = Path(path)
    with path.open("rb") as fh:
        raw = parse_csv(fh, source=str(path))
    series = resample(raw, cfg.rate_hz, cfg.max_gap_s)
    track_length = ref.length if ref is not None and split == "distance" else None
    try:
        laps = split_laps(series, split, ref, track_length=track_length, driver_tag=driver_tag, track_id=track_id)
    except NoLapBoundaryFound as exc:
        return list(exc.segments)
    if include_out_laps:
        return laps
    return [lap for lap in laps if not lap.out_lap]
