import numpy as np
import pytest
from conftest import make_lap
from oracles import dense_distance, interval_coasting

from lapbench.channels import compute_all
from lapbench.errors import NoBrakingEvents, NoCorners, RefTooFar
from lapbench.fixtures import HUMAN_KPIS, human_fixture_lap
from lapbench.ingest import split_laps
from lapbench.kpi import (
    KPI_NAMES,
    brake_derivative_stats,
    braking_quickness,
    coasting_time,
    compute_report,
    extrema,
    lateral_deviation,
    split_means,
    steering_integral,
    steering_speed,
    throttle_acceptance,
)
from lapbench.model import ReferenceLine
from lapbench.pipeline import analyze_lap
from lapbench.segment import ActivityMask, BrakingEvent, CornerSegment, segment_lap
from lapbench.synth import build_reference

DT = 0.01


def _mask(coasting):
    c = np.asarray(coasting, dtype=bool)
    return ActivityMask(~c, np.zeros_like(c), c)


def _corner_lap(full_at):
    """One corner: a_y ramps 0 -> 10 -> 0; throttle hits 1.0 at ``full_at``."""
    n = 401
    ay = np.concatenate([np.linspace(0, 10, 101), np.linspace(10, 0, 201)[1:], np.zeros(100)])
    thr = np.full(n, 0.3)
    thr[full_at:] = 1.0
    thr[:20] = 1.0
    return make_lap(n=n, ay=ay, throttle=thr)


@pytest.mark.parametrize("full_at,expected", [(101, 100.0 - 100.0 / 200), (300, 0.0)])
def test_throttle_acceptance_examples(full_at, expected):
    lap = _corner_lap(full_at)
    ch = compute_all(lap)
    seg = segment_lap(lap, ch)
    value, skipped = throttle_acceptance(ch, seg.corners, lap["ay"])
    assert value == pytest.approx(expected, abs=1e-9) and skipped == 0


def test_throttle_acceptance_at_apex_is_100():
    ch = compute_all(make_lap(n=50, throttle=1.0))
    ay = np.linspace(0, 5, 50)
    corners = [CornerSegment(0, 48, 49, "left", 5.0)]
    ay_plateau = ay.copy()
    ay_plateau[49] = 5.0
    assert throttle_acceptance(ch, corners, ay_plateau)[0] == 100.0


def test_throttle_acceptance_without_corners():
    ch = compute_all(make_lap(n=50))
    with pytest.raises(NoCorners):
        throttle_acceptance(ch, [], np.zeros(50))
    rep = analyze_lap(make_lap(n=50))
    assert rep.throttle_acceptance is None and "corner" in rep.reasons["throttle_acceptance"]


def test_coasting_time_examples():
    assert coasting_time(_mask(np.zeros(100)), DT) == 0.0
    m = np.zeros(1000, dtype=bool)
    m[300:665] = True
    assert coasting_time(_mask(m), DT) == pytest.approx(3.65, abs=1e-12)
    rng = np.random.default_rng(5)
    for _ in range(20):
        r = rng.uniform(size=300) > 0.5
        assert coasting_time(_mask(r), DT) == pytest.approx(interval_coasting(r, DT), abs=1e-12)
    lap = make_lap(n=300, throttle=0.0)
    rep = analyze_lap(lap)
    assert rep.coasting_time == pytest.approx(lap.lap_time, abs=1e-12)


def test_coasting_gap_constructed():
    n = 600
    p = np.zeros(n)
    p[100:200] = 50.0
    thr = np.ones(n)
    thr[100:400] = 0.0  # brake off at 200, throttle back at 400
    rep = analyze_lap(make_lap(n=n, throttle=thr, p_brake_f=p))
    assert abs(rep.coasting_time - 2.0) <= DT


def _ramp(n=200, start=50, rate=400.0, top=100.0):
    t = np.arange(n) * DT
    return np.clip(rate * (t - start * DT), 0, top)


def test_brake_stats_constant_and_ramp():
    ch = compute_all(make_lap(n=100, p_brake_f=20.0))
    assert brake_derivative_stats(ch) == (0.0, 0.0)

    lap = make_lap(n=200, p_brake_f=_ramp())
    ch = compute_all(lap)
    seg = segment_lap(lap, ch)
    agg, rel = brake_derivative_stats(ch, seg.mask)
    # 24 interior samples at 400 bar/s and the corner sample at 200 bar/s.
    assert agg == pytest.approx((24 * 400 + 200) / 25, rel=1e-12)
    assert abs(agg - 400) / 400 <= 0.02 + 1e-12
    assert rel == 0.0


def test_brake_stats_symmetry_and_reversal():
    n = 300
    k = np.arange(n)
    tri = np.clip(100 - np.abs(k - 150) * 2.0, 0, None)
    lap = make_lap(n=n, p_brake_f=tri)
    ch = compute_all(lap)
    agg, rel = brake_derivative_stats(ch, segment_lap(lap, ch).mask)
    assert agg == pytest.approx(rel, rel=0.01)

    skew = np.clip(np.minimum((k - 50) * 4.0, (250 - k) * 1.0), 0, None)
    fwd = compute_all(make_lap(n=n, p_brake_f=skew))
    bwd = compute_all(make_lap(n=n, p_brake_f=skew[::-1]))
    a1, r1 = brake_derivative_stats(fwd)
    a2, r2 = brake_derivative_stats(bwd)
    assert (a1, r1) == pytest.approx((r2, a2), rel=1e-12)


def test_braking_quickness_examples():
    assert braking_quickness([BrakingEvent(10, 10, 20, 5.0)], DT) == 0.0
    assert braking_quickness([BrakingEvent(10, 35, 60, 5.0)], DT) == pytest.approx(0.25)
    events = [BrakingEvent(0, 10, 40, 1.0), BrakingEvent(50, 70, 90, 1.0), BrakingEvent(100, 130, 150, 1.0)]
    assert braking_quickness(events, DT) == pytest.approx(0.2)
    with pytest.raises(NoBrakingEvents):
        braking_quickness([], DT)


def _sine_steer(amp=0.1, f=0.5, periods=4):
    n = int(round(periods / f / DT))
    t = np.arange(n) * DT
    return amp * np.sin(2 * np.pi * f * t), n


def test_steering_speed():
    assert steering_speed(compute_all(make_lap(n=50, steer=0.2))) == 0.0
    steer, n = _sine_steer()
    v1 = steering_speed(compute_all(make_lap(n=n, steer=steer)))
    assert v1 == pytest.approx(0.1 * 2 * np.pi * 0.5 * 2 / np.pi, rel=0.005)
    v2 = steering_speed(compute_all(make_lap(n=n, steer=2 * steer)))
    assert v2 == pytest.approx(2 * v1, rel=1e-12)


def test_steering_integral():
    assert steering_integral(np.zeros(10), DT) == 0.0
    assert steering_integral(np.full(7000, 0.0276), DT) == pytest.approx(1.93, rel=0.002)
    steer, n = _sine_steer(periods=3)
    assert steering_integral(steer, DT) == pytest.approx(0.1 * n * DT * 2 / np.pi, rel=0.005)
    assert steering_integral(-3 * steer, DT) == pytest.approx(3 * steering_integral(steer, DT), rel=1e-12)


def test_split_means():
    assert split_means(np.ma.zeros(10)) == (0.0, 0.0)
    alt = np.ma.array(np.tile([0.045, -0.039], 50))
    assert split_means(alt) == pytest.approx((0.045, -0.039), abs=1e-15)
    rng = np.random.default_rng(9)
    x = np.ma.array(rng.normal(size=500), mask=rng.uniform(size=500) > 0.7)
    pos_sum = pos_n = neg_sum = neg_n = 0
    for v, m in zip(x.data, x.mask):
        if m:
            continue
        if v > 0:
            pos_sum, pos_n = pos_sum + v, pos_n + 1
        elif v < 0:
            neg_sum, neg_n = neg_sum + v, neg_n + 1
    pos, neg = split_means(x)
    assert pos == pytest.approx(pos_sum / pos_n, abs=1e-12) and neg == pytest.approx(neg_sum / neg_n, abs=1e-12)


def _straight_ref(length=200.0, step=1.0):
    xs = np.arange(0.0, length + step, step)
    z = np.zeros_like(xs)
    return ReferenceLine(xs, xs, z, z, z)


def test_lateral_deviation_examples():
    ref = _straight_ref()
    x = np.linspace(5, 195, 300)
    assert lateral_deviation(make_lap(n=300, x=x, y=0.0), ref) == 0.0
    assert lateral_deviation(make_lap(n=300, x=x, y=0.30), ref) == pytest.approx(0.30, abs=1e-12)
    with pytest.raises(RefTooFar):
        lateral_deviation(make_lap(n=300, x=x, y=80.0), ref)


def test_lateral_deviation_dense_oracle(oval_track):
    ref = build_reference(oval_track, 5.0)
    rng = np.random.default_rng(11)
    idx = rng.integers(0, len(ref), 400)
    off = rng.uniform(-3, 3, 400)
    px = ref.x[idx] - off * np.sin(ref.psi[idx]) + rng.uniform(-2, 2, 400)
    py = ref.y[idx] + off * np.cos(ref.psi[idx]) + rng.uniform(-2, 2, 400)
    s = np.arange(400.0)
    lap = make_lap(n=400, x=px, y=py, s=s)
    oracle = dense_distance(px, py, ref)
    assert lateral_deviation(lap, ref) == pytest.approx(np.mean(oracle), abs=2e-3)


def test_lateral_deviation_rigid_motion(oval_track):
    ref = build_reference(oval_track, 4.0)
    rng = np.random.default_rng(12)
    px = ref.x[::7] + rng.uniform(-1, 1, len(ref.x[::7]))
    py = ref.y[::7] + rng.uniform(-1, 1, len(ref.y[::7]))
    n = len(px)
    base = lateral_deviation(make_lap(n=n, x=px, y=py, s=np.arange(n)), ref)
    a, tx, ty = 0.7, 120.0, -40.0
    c, s = np.cos(a), np.sin(a)
    moved_ref = ReferenceLine(ref.s, c * ref.x - s * ref.y + tx, s * ref.x + c * ref.y + ty, ref.psi + a, ref.v, closed=True)
    moved = make_lap(n=n, x=c * px - s * py + tx, y=s * px + c * py + ty, s=np.arange(n))
    assert lateral_deviation(moved, moved_ref) == pytest.approx(base, abs=1e-9)


def test_extrema():
    lap = make_lap(n=20, vx=12.0, ax=-2.0, ay=-3.0)
    assert extrema(lap) == (12.0, -2.0, -2.0, 3.0)
    rng = np.random.default_rng(4)
    vx, ax, ay = rng.uniform(5, 60, 100), rng.normal(size=100), rng.normal(size=100)
    lap = make_lap(n=100, vx=vx, ax=ax, ay=ay)
    assert extrema(lap) == (max(vx), max(ax), min(ax), max(abs(v) for v in ay))


def test_synth_lap_report_matches_truth(oval_session, oval_track):
    series, truth, length = oval_session
    laps = split_laps(series, track_length=length, driver_tag="software", track_id="oval")
    ref = build_reference(oval_track, 1.0)
    for lap in laps:
        rep = analyze_lap(lap, ref)
        assert rep.ay_max == pytest.approx(13.7, rel=1e-9)
        assert rep.ax_max == pytest.approx(truth.ax_max, rel=1e-9)
        assert rep.ax_min == pytest.approx(truth.ax_min, rel=1e-9)
        assert abs(rep.lap_time + lap.dt - truth.lap_duration) <= lap.dt
        assert abs(rep.coasting_time - truth.coasting_time[lap.index]) <= lap.dt * 2
        assert rep.brake_aggression == pytest.approx(truth.brake_ramp_barps, rel=0.02)
        assert rep.throttle_acceptance == pytest.approx(truth.throttle_acceptance, abs=2.0)
        assert abs(rep.att_vel_pos) < 1e-6 and abs(rep.att_vel_neg) < 1e-6
        assert rep.lat_dev < 5e-3


def test_zero_motion_lap():
    lap = make_lap(n=100, vx=0.0, x=0.0, s=0.0, throttle=0.0, vy=0.0)
    rep = analyze_lap(lap, _straight_ref())
    assert (rep.v_max, rep.ax_max, rep.ax_min, rep.ay_max) == (0.0, 0.0, 0.0, 0.0)
    for name in ("throttle_acceptance", "braking_quickness", "att_vel_pos", "att_vel_neg", "d_slip_pos", "d_slip_neg"):
        assert getattr(rep, name) is None and rep.reasons[name]
    assert rep.coasting_time == pytest.approx(rep.lap_time)


def test_human_fixture_lap_reproduces_table_values():
    lap, ref = human_fixture_lap()
    rep = analyze_lap(lap, ref)
    for name in KPI_NAMES:
        assert getattr(rep, name) == pytest.approx(HUMAN_KPIS[name], rel=0.02), name


def test_report_invariants_and_determinism(oval_session):
    series, _, length = oval_session
    lap = split_laps(series, track_length=length)[1]
    ch = compute_all(lap)
    seg = segment_lap(lap, ch)
    a = compute_report(lap, ch, seg)
    b = compute_report(lap, compute_all(lap), segment_lap(lap, compute_all(lap)))
    assert a == b
    assert 0 <= a.throttle_acceptance <= 100
    assert 0 <= a.coasting_time <= a.lap_time
    assert a.brake_aggression >= 0 and a.brake_release >= 0 and a.steering_integral >= 0
    assert a.att_vel_pos >= 0 >= a.att_vel_neg
    assert a.lat_dev is None and "reference" in a.reasons["lat_dev"]
