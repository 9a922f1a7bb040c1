"""Two-driver comparison reports and their serialization (JSON, CSV, text table)."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from .errors import BaselineZero, TrackMismatch
from .kpi import KPI_NAMES, KpiReport

# (label, kpi fields) in table order; two fields render as one "a/ b" cell.
TABLE_ROWS = (
    ("max. velocity in m/s", ("v_max",)),
    ("max./min. long. acceleration in m/s^2", ("ax_max", "ax_min")),
    ("max. lat. acceleration in m/s^2", ("ay_max",)),
    ("lap time in s", ("lap_time",)),
    ("throttle acceptance in %", ("throttle_acceptance",)),
    ("coasting time in s", ("coasting_time",)),
    ("brake pressure aggression in bar/s", ("brake_aggression",)),
    ("brake release smoothness in bar/s", ("brake_release",)),
    ("braking quickness in s", ("braking_quickness",)),
    ("steering speed in rad/s", ("steering_speed",)),
    ("steering integral in rad s", ("steering_integral",)),
    ("attitude velocity in rad/s (>0/<0)", ("att_vel_pos", "att_vel_neg")),
    ("delta tire slip angle in rad (>0/<0)", ("d_slip_pos", "d_slip_neg")),
    ("lateral deviation of the race trajectory in m", ("lat_dev",)),
)


def relative_difference(candidate: float, baseline: float) -> float:
    """Percent change of the candidate's magnitude relative to the baseline's.

    ``100 * (|candidate| - |baseline|) / |baseline|``. For negative-valued
    KPIs (minimum acceleration, negative split averages) this compares
    magnitudes, so a smaller deceleration peak reads as a negative change.
    """
    if baseline == 0:
        raise BaselineZero("baseline value is zero")
    return 100.0 * (abs(candidate) - abs(baseline)) / abs(baseline)


@dataclass
class ComparisonReport:
    baseline: KpiReport
    candidate: KpiReport
    rel_diff: dict[str, float] = field(default_factory=dict)
    missing: dict[str, str] = field(default_factory=dict)


def compare(baseline: KpiReport, candidate: KpiReport) -> ComparisonReport:
    """Relative difference of every KPI present in both reports.

    Raises:
        TrackMismatch: the reports come from different tracks.
    """
    if baseline.track_id != candidate.track_id:
        raise TrackMismatch(f"track '{baseline.track_id}' vs '{candidate.track_id}'")
    out = ComparisonReport(baseline, candidate)
    for name in KPI_NAMES:
        b, c = getattr(baseline, name), getattr(candidate, name)
        if b is None or c is None:
            side = "baseline" if b is None else "candidate"
            rep = baseline if b is None else candidate
            out.missing[name] = f"absent in {side}: {rep.reasons.get(name, 'not computed')}"
            continue
        try:
            out.rel_diff[name] = relative_difference(c, b)
        except BaselineZero:
            out.missing[name] = "baseline is zero; relative difference undefined"
    return out


# -- serialization -----------------------------------------------------------


def _kpi_entry(rep: KpiReport, name: str) -> dict:
    value = getattr(rep, name)
    if value is None:
        return {"value": None, "reason": rep.reasons.get(name, "not computed")}
    return {"value": float(value)}


def _report_dict(rep: KpiReport, meta: dict | None) -> dict:
    return {
        "meta": {"type": "kpi_report", "driver_tag": rep.driver_tag, "track_id": rep.track_id, **(meta or {})},
        "kpis": {name: _kpi_entry(rep, name) for name in KPI_NAMES},
        "diagnostics": dict(rep.diagnostics),
    }


def _comparison_dict(cmp: ComparisonReport, meta: dict | None) -> dict:
    return {
        "meta": {
            "type": "comparison",
            "track_id": cmp.baseline.track_id,
            "baseline": {"driver_tag": cmp.baseline.driver_tag, "diagnostics": dict(cmp.baseline.diagnostics)},
            "candidate": {"driver_tag": cmp.candidate.driver_tag, "diagnostics": dict(cmp.candidate.diagnostics)},
            **(meta or {}),
        },
        "kpis": {
            name: {"baseline": _kpi_entry(cmp.baseline, name), "candidate": _kpi_entry(cmp.candidate, name)}
            for name in KPI_NAMES
        },
        "rel_diff": {name: cmp.rel_diff[name] for name in KPI_NAMES if name in cmp.rel_diff},
        "missing": {name: cmp.missing[name] for name in KPI_NAMES if name in cmp.missing},
    }


def _num(v: float | None) -> str:
    return "" if v is None else repr(float(v))


def _short(v: float | None) -> str:
    return "n/a" if v is None else f"{v:.4g}"


def _pct(v: float | None, digits: int) -> str:
    return "n/a" if v is None else f"{v:+.{digits}f} %"


def _cell(values, fmt, sep="/") -> str:
    return sep.join(fmt(v) for v in values)


def _render_csv(report, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    if isinstance(report, ComparisonReport):
        writer.writerow(["kpi", "baseline", "candidate", "rel_diff_pct"])
        for _, names in TABLE_ROWS:
            writer.writerow(
                [
                    "/".join(names),
                    _cell([getattr(report.baseline, n) for n in names], _num),
                    _cell([getattr(report.candidate, n) for n in names], _num),
                    _cell([report.rel_diff.get(n) for n in names], _num),
                ]
            )
    else:
        writer.writerow(["kpi", "value", "reason"])
        for name in KPI_NAMES:
            writer.writerow([name, _num(getattr(report, name)), report.reasons.get(name, "")])


def _render_text(report, digits: int) -> str:
    if isinstance(report, ComparisonReport):
        head = ["KPIs (lap average)", report.baseline.driver_tag, report.candidate.driver_tag, "relative difference"]
        rows = [
            [
                label,
                _cell([getattr(report.baseline, n) for n in names], _short, "/ "),
                _cell([getattr(report.candidate, n) for n in names], _short, "/ "),
                _cell([report.rel_diff.get(n) for n in names], lambda v: _pct(v, digits), "/ "),
            ]
            for label, names in TABLE_ROWS
        ]
    else:
        head = ["KPIs (lap average)", report.driver_tag]
        rows = [
            [label, _cell([getattr(report, n) for n in names], _short, "/ ")] for label, names in TABLE_ROWS
        ]
    widths = [max(len(r[i]) for r in [head, *rows]) for i in range(len(head))]
    lines = []
    for k, r in enumerate([head, *rows]):
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def render(report: KpiReport | ComparisonReport, fmt: str = "json", *, meta: dict | None = None, digits: int = 0) -> bytes:
    """Serialize a report deterministically.

    ``fmt`` is ``"json"``, ``"csv"`` or ``"text"``. ``digits`` sets the
    decimals of relative differences in the text table only; JSON and CSV
    keep full precision.
    """
    if fmt == "json":
        data = _comparison_dict(report, meta) if isinstance(report, ComparisonReport) else _report_dict(report, meta)
        return (json.dumps(data, indent=2, allow_nan=False) + "\n").encode("utf-8")
    if fmt == "csv":
        buf = io.StringIO()
        _render_csv(report, buf)
        return buf.getvalue().encode("utf-8")
    if fmt == "text":
        return _render_text(report, digits).encode("utf-8")
    raise ValueError(f"unknown format '{fmt}'")


def _report_from_entries(entries: dict, which: str | None, driver_tag: str, track_id: str, diagnostics: dict) -> KpiReport:
    rep = KpiReport(driver_tag=driver_tag, track_id=track_id, diagnostics=dict(diagnostics))
    for name in KPI_NAMES:
        entry = entries[name] if which is None else entries[name][which]
        if entry["value"] is None:
            rep.set_absent(name, entry.get("reason", "not computed"))
        else:
            setattr(rep, name, float(entry["value"]))
    return rep


def parse_report(data: bytes | str) -> KpiReport | ComparisonReport:
    """Inverse of ``render(..., "json")``."""
    doc = json.loads(data)
    meta = doc["meta"]
    if meta.get("type") == "comparison":
        track = meta["track_id"]
        base = _report_from_entries(
            doc["kpis"], "baseline", meta["baseline"]["driver_tag"], track, meta["baseline"]["diagnostics"]
        )
        cand = _report_from_entries(
            doc["kpis"], "candidate", meta["candidate"]["driver_tag"], track, meta["candidate"]["diagnostics"]
        )
        return ComparisonReport(base, cand, dict(doc["rel_diff"]), dict(doc["missing"]))
    return _report_from_entries(doc["kpis"], None, meta["driver_tag"], meta["track_id"], doc.get("diagnostics", {}))
