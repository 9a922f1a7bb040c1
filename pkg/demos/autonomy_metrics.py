"""Tracking, oscillation and signal-quality metrics on a noisy synthetic software lap.

Run: python3 demos/autonomy_metrics.py
"""

from lapbench.autonomy import oscillation_index, signal_quality, tracking_deviation
from lapbench.synth import DriverProfile, oval, simulate_lap

track = oval(400.0, 60.0, 40.0)
clean, truth = simulate_lap(track, DriverProfile())
noisy, _ = simulate_lap(track, DriverProfile(), noise_sigma={"steer": 0.002, "vx": 0.3}, seed=1)

for name, lap in (("clean", clean), ("noisy", noisy)):
    dev = tracking_deviation(lap, truth.target)
    print(f"{name}: lateral {dev.lateral_mean * 1e3:.2f} mm, heading {dev.heading_mean:.2e} rad, "
          f"speed {dev.velocity_mean:.3f} m/s")
    for channel in ("steer", "f_long_req"):
        q = signal_quality(lap[channel], lap.dt)
        print(f"  {channel:<11} oscillation {oscillation_index(lap[channel], lap.dt):.3f}  "
              f"noise {q.noise_rms:.2e}  drift {q.drift_rate:+.2e}/s")
