"""Engine configuration: built-in defaults < JSON config file < explicit overrides."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace

from .model import VehicleParams


@dataclass(frozen=True)
class EngineConfig:
    rate_hz: float = 100.0
    max_gap_s: float = 0.2
    # channels
    smooth_window_s: float = 0.1
    v_min_mps: float = 5.0
    use_artificial_throttle: bool = True
    # segmentation
    ay_corner_thresh_mps2: float = 3.0
    corner_min_dur_s: float = 0.5
    brake_on_thresh_bar: float = 1.0
    throttle_on_thresh: float = 0.05
    # kpi
    full_throttle_thresh: float = 0.95
    brake_rate_floor_barps: float = 5.0
    ref_max_dist_m: float = 50.0
    # autonomy / gg
    oscillation_cutoff_hz: float = 2.0
    gg_bins: int = 72
    # vehicle
    lf_m: float = 1.6
    lr_m: float = 1.4
    f_long_max_n: float = 8000.0
    p_brake_max_bar: float = 150.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool):
                continue
            if not value > 0:
                raise ValueError(f"config '{f.name}' must be positive, got {value!r}")
        if self.rate_hz > 1000:
            raise ValueError("rate_hz must be <= 1000")
        if not 0 < self.full_throttle_thresh <= 1:
            raise ValueError("full_throttle_thresh must be in (0, 1]")

    @property
    def vehicle(self) -> VehicleParams:
        return VehicleParams(self.lf_m, self.lr_m, self.f_long_max_n, self.p_brake_max_bar)

    def with_overrides(self, **overrides) -> EngineConfig:
        clean = {k: v for k, v in overrides.items() if v is not None}
        unknown = set(clean) - {f.name for f in fields(self)}
        if unknown:
            raise ValueError(f"unknown config key(s): {sorted(unknown)}")
        return replace(self, **clean)

    @classmethod
    def from_json(cls, path) -> EngineConfig:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return cls().with_overrides(**data)

    def to_dict(self) -> dict:
        return asdict(self)
