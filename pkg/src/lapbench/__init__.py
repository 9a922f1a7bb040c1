"""Race telemetry KPI engine.

Ingests lap telemetry, derives math channels, segments laps into corners
and braking events, computes lap-level KPIs and compares drivers. A
synthetic lap generator with known ground truth serves as the oracle for
the whole chain.
"""

__version__ = "0.1.0"

from .compare import ComparisonReport, compare, relative_difference, render
from .config import EngineConfig
from .kpi import KPI_NAMES, KpiReport
from .model import Lap, ReferenceLine, TelemetrySample, VehicleParams, new_lap
from .pipeline import analyze_lap, load_laps
from .synth import (
    DriverProfile,
    TrackSpec,
    build_reference,
    simulate_lap,
    simulate_session,
)

__all__ = [
    "KPI_NAMES",
    "ComparisonReport",
    "DriverProfile",
    "EngineConfig",
    "KpiReport",
    "Lap",
    "ReferenceLine",
    "TelemetrySample",
    "TrackSpec",
    "VehicleParams",
    "analyze_lap",
    "build_reference",
    "compare",
    "load_laps",
    "new_lap",
    "relative_difference",
    "render",
    "simulate_lap",
    "simulate_session",
]
