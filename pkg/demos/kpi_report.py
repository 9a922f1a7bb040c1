"""Synthesize a three-lap session on the bundled oval and print each lap's KPI table.

Run: python3 demos/kpi_report.py
"""

from lapbench.compare import render
from lapbench.ingest import split_laps
from lapbench.pipeline import analyze_lap
from lapbench.synth import DriverProfile, TrackGeometry, oval, simulate_session

track = oval(400.0, 60.0, 40.0)
profile = DriverProfile(coast_gap_s=2.0, brake_ramp_barps=400.0, full_throttle_at_frac=0.75)
series, truth = simulate_session(track, profile, n_laps=3)

laps = split_laps(series, track_length=TrackGeometry(track).length, driver_tag="software", track_id="oval")
for lap in laps:
    report = analyze_lap(lap, truth.target)
    print(f"lap {lap.index}  (truth: coasting {truth.coasting_time[lap.index]:.2f} s, "
          f"ramp {truth.brake_ramp_barps:.0f} bar/s, acceptance {truth.throttle_acceptance:.0f} %)")
    print(render(report, "text").decode())
