import numpy as np
import pytest

from lapbench.model import new_lap
from lapbench.synth import DriverProfile, TrackGeometry, oval, simulate_session

DT = 0.01


def make_lap(n=200, dt=DT, driver_tag="human", track_id="test", **channels):
    """Lap with benign defaults; keyword arrays (or scalars) override channels."""
    t = np.arange(n) * dt
    base = {
        "t": t,
        "s": 20.0 * t,
        "x": 20.0 * t,
        "y": np.zeros(n),
        "psi": np.zeros(n),
        "vx": np.full(n, 20.0),
        "ax": np.zeros(n),
        "ay": np.zeros(n),
        "yaw_rate": np.zeros(n),
        "steer": np.zeros(n),
        "throttle": np.ones(n),
        "p_brake_f": np.zeros(n),
        "p_brake_r": np.zeros(n),
    }
    for name, value in channels.items():
        if value is None:
            base.pop(name, None)
        else:
            base[name] = np.broadcast_to(np.asarray(value, dtype=float), (n,)).copy()
    return new_lap(base, driver_tag, track_id)


@pytest.fixture(scope="session")
def oval_track():
    return oval(400.0, 60.0, 40.0)


@pytest.fixture(scope="session")
def oval_session(oval_track):
    """Three laps with a 2 s coasting gap, 400 bar/s ramps and full throttle at 75 % of peak a_y."""
    profile = DriverProfile(coast_gap_s=2.0, brake_ramp_barps=400.0, full_throttle_at_frac=0.75)
    series, truth = simulate_session(oval_track, profile, n_laps=3, driver_tag="software")
    return series, truth, TrackGeometry(oval_track).length


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS):
            terminalreporter.write_line(line)
