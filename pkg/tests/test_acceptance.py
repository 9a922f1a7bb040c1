"""Acceptance suite: one PASS/FAIL line per criterion, printed in the terminal summary."""

import time

import numpy as np
from conftest import make_lap
from oracles import dense_distance
from test_gg import closed_form_radius

from lapbench.channels import attitude_velocity, compute_all, slip_angles
from lapbench.compare import compare, render
from lapbench.fixtures import PUBLISHED_REL_DIFF, human_report, software_report
from lapbench.gg import gg_envelope, gg_points
from lapbench.ingest import split_laps
from lapbench.kpi import lateral_deviation, steering_integral, steering_speed
from lapbench.model import ReferenceLine, VehicleParams, new_lap
from lapbench.pipeline import analyze_lap
from lapbench.synth import (
    DriverProfile,
    build_reference,
    oval,
    simulate_lap,
    simulate_session,
)

RESULTS = []
DT = 0.01


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _seventy_second_lap(profile=None, **kw):
    """First 70 s (7001 samples) of one lap on a long oval (lap time just above 70 s)."""
    series, truth = simulate_session(oval(1950, 100, 60), profile or DriverProfile(), **kw)
    assert truth.lap_duration > 70.0
    cols = {k: v[:7001] for k, v in series.items()}
    return new_lap(cols, "software", "oval"), truth


def test_criterion_1_table_relative_differences():
    t0 = time.perf_counter()
    cmp = compare(human_report(), software_report())
    elapsed = time.perf_counter() - t0
    errs = {k: cmp.rel_diff[k] - v for k, v in PUBLISHED_REL_DIFF.items()}
    worst = max(errs, key=lambda k: abs(errs[k]))
    ok = len(errs) == 17 and all(abs(e) <= 1.0 for e in errs.values()) and elapsed < 1.0
    record(1, ok, f"17 entries, worst {worst} off by {errs[worst]:+.2f} pp, {elapsed * 1e3:.1f} ms")


def test_criterion_2_attitude_velocity_zero_on_synth():
    worst, slowest = 0.0, 0.0
    for shape in ("circle", "diamond"):
        t0 = time.perf_counter()
        lap, _ = _seventy_second_lap(DriverProfile(gg_shape=shape))
        att = attitude_velocity(lap["yaw_rate"], lap["ay"], lap["vx"])
        slowest = max(slowest, time.perf_counter() - t0)
        assert lap.n == 7001 and att.count() > 0
        worst = max(worst, float(np.ma.max(np.abs(att))))
    ok = worst <= 1e-6 and slowest < 5.0
    record(2, ok, f"max |att_vel| {worst:.2e} rad/s, 70 s lap in {slowest:.2f} s")


def test_criterion_3_steering_sine_suite():
    worst = 0.0
    for amp, f, periods in [(0.05, 0.25, 3), (0.1, 0.5, 4), (0.3, 1.0, 10), (0.02, 2.0, 25)]:
        n = int(round(periods / f / DT))
        t = np.arange(n) * DT
        steer = amp * np.sin(2 * np.pi * f * t)
        lap = make_lap(n=n, steer=steer)
        integral = steering_integral(steer, DT)
        speed = steering_speed(compute_all(lap))
        worst = max(
            worst,
            abs(integral / (amp * n * DT * 2 / np.pi) - 1),
            abs(speed / (amp * 2 * np.pi * f * 2 / np.pi) - 1),
        )
    record(3, worst <= 0.005, f"worst relative error {worst * 100:.3f} %")


def test_criterion_4_slip_angles_scalar_oracle():
    rng = np.random.default_rng(44)
    n = 100_000
    p = VehicleParams()
    steer, vx = rng.uniform(-0.5, 0.5, n), rng.uniform(0, 90, n)
    vy, r = rng.normal(scale=2, size=n), rng.normal(scale=0.5, size=n)
    af, ar, d = slip_angles(steer, vx, vy, r, p)
    worst = 0.0
    for i in range(n):
        if vx[i] < 5.0:
            assert af.mask[i] and ar.mask[i] and d.mask[i]
            continue
        a_f = steer[i] - np.arctan((vy[i] + p.lf * r[i]) / vx[i])
        a_r = -np.arctan((vy[i] - p.lr * r[i]) / vx[i])
        worst = max(worst, abs(af[i] - a_f), abs(ar[i] - a_r), abs(d[i] - (a_f - a_r)))
    record(4, worst <= 1e-12, f"max deviation {worst:.1e} rad over {n} samples")


def test_criterion_5_segmentation_kpi_end_to_end(oval_session, oval_track):
    series, truth, length = oval_session
    ref = build_reference(oval_track, 1.0)
    laps = split_laps(series, track_length=length, driver_tag="software", track_id="oval")
    coast_err = agg_err = acc_err = 0.0
    ok = len(laps) == 3
    gaps_per_lap = len(truth.coast_gaps) // 3
    for lap in laps:
        rep = analyze_lap(lap, ref)
        c = abs(rep.coasting_time - truth.coasting_time[lap.index])
        coast_err = max(coast_err, c)
        agg_err = max(agg_err, abs(rep.brake_aggression / truth.brake_ramp_barps - 1))
        acc_err = max(acc_err, abs(rep.throttle_acceptance - 75.0))
        ok &= c <= lap.dt * gaps_per_lap + 1e-9
    ok &= agg_err <= 0.02 and acc_err <= 2.0 and gaps_per_lap >= 1
    record(
        5,
        ok,
        f"coasting off by {coast_err:.3f} s ({gaps_per_lap} gaps/lap), "
        f"aggression {agg_err * 100:.2f} %, acceptance {acc_err:.2f} pp",
    )


def test_criterion_6_gg_shape_discrimination():
    worst, cross = {}, {}
    for shape, other in (("circle", "diamond"), ("diamond", "circle")):
        prof = DriverProfile(gg_shape=shape)
        lap, _ = simulate_lap(oval(400, 60, 40), prof)
        env = gg_envelope(gg_points(lap))
        f = env.filled
        th = env.angle_at_max[f]
        worst[shape] = np.max(np.abs(env.radius[f] / closed_form_radius(th, prof) - 1))
        wrong = DriverProfile(gg_shape=other)
        cross[shape] = np.max(np.abs(env.radius[f] / closed_form_radius(th, wrong) - 1))
    ok = all(v <= 0.03 for v in worst.values()) and all(v > 0.03 for v in cross.values())
    record(
        6,
        ok,
        "own shape worst " + ", ".join(f"{k} {v * 100:.2f} %" for k, v in worst.items())
        + "; other shape worst " + ", ".join(f"{k} {v * 100:.1f} %" for k, v in cross.items()),
    )


def test_criterion_7_lateral_deviation_oracle():
    ref = build_reference(oval(400, 60, 40), 2.0)
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(5):
        m = 2000
        idx = rng.integers(0, len(ref), m)
        off = rng.uniform(-4, 4, m)
        px = ref.x[idx] - off * np.sin(ref.psi[idx]) + rng.uniform(-1, 1, m)
        py = ref.y[idx] + off * np.cos(ref.psi[idx]) + rng.uniform(-1, 1, m)
        lap = make_lap(n=m, x=px, y=py, s=np.arange(m))
        worst = max(worst, abs(lateral_deviation(lap, ref) - np.mean(dense_distance(px, py, ref))))

    xs = np.arange(0.0, 501.0, 1.0)
    z = np.zeros_like(xs)
    straight = ReferenceLine(xs, xs, z, z, z)
    lap = make_lap(n=3000, x=np.linspace(5, 495, 3000), y=0.30)
    flat = lateral_deviation(lap, straight)
    ok = worst <= 2e-3 and abs(flat - 0.30) <= 1e-3
    record(7, ok, f"vs 1 mm dense oracle {worst * 1e3:.3f} mm; 0.30 m offset reads {flat:.6f} m")


def test_criterion_8_determinism_and_performance():
    lap, truth = _seventy_second_lap(DriverProfile(coast_gap_s=1.0))
    ref = truth.target
    outputs, times = [], []
    for _ in range(3):
        t0 = time.perf_counter()
        rep = analyze_lap(lap, ref)
        blob = render(rep, "json") + render(rep, "csv")
        times.append(time.perf_counter() - t0)
        outputs.append(blob)
    assert rep.absent() == []
    ok = max(times) < 1.0 and len(set(outputs)) == 1
    record(8, ok, f"70 s lap in {max(times) * 1e3:.0f} ms (worst of 3), identical output: {len(set(outputs)) == 1}")
