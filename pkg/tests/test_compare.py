import json

import pytest

from lapbench.compare import (
    TABLE_ROWS,
    compare,
    parse_report,
    relative_difference,
    render,
)
from lapbench.errors import BaselineZero, TrackMismatch
from lapbench.fixtures import PUBLISHED_REL_DIFF, human_report, software_report
from lapbench.kpi import KPI_NAMES, KpiReport


def test_relative_difference_examples():
    assert relative_difference(110.0, 100.0) == pytest.approx(10.0)
    assert relative_difference(-9.2, -17.4) == pytest.approx(100 * (9.2 - 17.4) / 17.4)
    assert relative_difference(5.0, 5.0) == 0.0
    with pytest.raises(BaselineZero):
        relative_difference(1.0, 0.0)


def test_table_fixture_reproduces_published_differences():
    cmp = compare(human_report(), software_report())
    assert set(cmp.rel_diff) == set(PUBLISHED_REL_DIFF) and not cmp.missing
    for name, published in PUBLISHED_REL_DIFF.items():
        assert abs(cmp.rel_diff[name] - published) <= 1.0, name


def test_identical_reports_give_zero_diff():
    cmp = compare(human_report(), human_report())
    assert all(v == 0.0 for v in cmp.rel_diff.values())


def test_sign_convention_compares_magnitudes():
    base = KpiReport(ax_min=-10.0, att_vel_neg=-0.04, track_id="t")
    cand = KpiReport(ax_min=-5.0, att_vel_neg=-0.06, track_id="t")
    cmp = compare(base, cand)
    assert cmp.rel_diff["ax_min"] == pytest.approx(-50.0)
    assert cmp.rel_diff["att_vel_neg"] == pytest.approx(50.0)


def test_absence_propagates_with_reason():
    base = human_report()
    base.set_absent("lat_dev", "no reference line given")
    cand = software_report()
    cand.steering_speed = None
    cmp = compare(base, cand)
    assert "lat_dev" not in cmp.rel_diff and "no reference" in cmp.missing["lat_dev"]
    assert "candidate" in cmp.missing["steering_speed"]
    zero = human_report()
    zero.d_slip_pos = 0.0
    assert "zero" in compare(zero, cand).missing["d_slip_pos"]


def test_track_mismatch():
    other = software_report()
    other.track_id = "elsewhere"
    with pytest.raises(TrackMismatch):
        compare(human_report(), other)


def test_json_round_trip():
    rep = human_report()
    rep.set_absent("lat_dev", "no reference line given")
    rep.diagnostics["corners"] = 7
    back = parse_report(render(rep, "json"))
    assert back == rep
    cmp = compare(human_report(), software_report())
    assert parse_report(render(cmp, "json")) == cmp
    doc = json.loads(render(cmp, "json"))
    assert set(doc) == {"meta", "kpis", "rel_diff", "missing"}
    doc = json.loads(render(rep, "json"))
    assert doc["kpis"]["lat_dev"] == {"value": None, "reason": "no reference line given"}


def test_csv_layout():
    text = render(compare(human_report(), software_report()), "csv").decode()
    lines = text.splitlines()
    assert lines[0] == "kpi,baseline,candidate,rel_diff_pct"
    assert len(lines) == 1 + len(TABLE_ROWS) == 15
    assert lines[2].startswith("ax_max/ax_min,5.0/-17.4,")


def test_text_table_row_order_and_determinism():
    cmp = compare(human_report(), software_report())
    a = render(cmp, "text")
    assert a == render(compare(human_report(), software_report()), "text")
    lines = a.decode().splitlines()
    labels = [label for label, _ in TABLE_ROWS]
    assert [next(lab for lab in labels if ln.startswith(lab)) for ln in lines[2:]] == labels
    assert "+11 %" in lines[2 + labels.index("lap time in s")]
    for fmt in ("json", "csv"):
        assert render(cmp, fmt) == render(cmp, fmt)
    with pytest.raises(ValueError):
        render(cmp, "xml")


def test_kpi_names_cover_table_rows():
    assert sorted(n for _, names in TABLE_ROWS for n in names) == sorted(KPI_NAMES)
