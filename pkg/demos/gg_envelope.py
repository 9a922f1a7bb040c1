"""Contrast circle- and diamond-limited drivers through their g-g envelopes.

Prints the envelope radius every 45 degrees next to the closed-form radius
of each shape, showing which limit a lap actually follows.

Run: python3 demos/gg_envelope.py
"""

import numpy as np

from lapbench.gg import gg_envelope, gg_points
from lapbench.synth import DriverProfile, oval, simulate_lap


def limit_radius(theta, p, shape):
    c, s = np.cos(theta), np.sin(theta)
    ax = p.ax_max if s > 0 else -p.ax_min
    if shape == "circle":
        return 1.0 / np.hypot(c / p.ay_max, s / ax)
    return 1.0 / (abs(c) / p.ay_max + abs(s) / ax)


track = oval(400.0, 60.0, 40.0)
for shape in ("circle", "diamond"):
    profile = DriverProfile(gg_shape=shape)
    lap, _ = simulate_lap(track, profile)
    env = gg_envelope(gg_points(lap), 72)
    print(f"{shape} driver: {int(env.filled.sum())} of {env.n_bins} sectors filled")
    print("  angle   radius   circle  diamond")
    for k in range(0, env.n_bins, 9):
        if not env.filled[k]:
            print(f"  {np.degrees(env.centers[k]):5.1f}   (empty)")
            continue
        th = env.angle_at_max[k]
        print(f"  {np.degrees(th):5.1f}  {env.radius[k]:7.2f}  {limit_radius(th, profile, 'circle'):7.2f}"
              f"  {limit_radius(th, profile, 'diamond'):7.2f}")
