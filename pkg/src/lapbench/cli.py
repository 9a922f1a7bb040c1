"""Command-line front end.

Subcommands: ``analyze``, ``compare``, ``synth``, ``gg`` and ``autonomy``.
Exit codes: 0 ok, 1 generic error, 2 parse/ingest error, 3 comparison
mismatch, 4 infeasible synthesis. Errors print one line to stderr::

    lapbench: error[<code>]: <ErrorType>: <message>
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .autonomy import oscillation_index, signal_quality, tracking_deviation
from .compare import compare, parse_report, render
from .config import EngineConfig
from .errors import (
    InfeasibleProfile,
    IngestError,
    LapbenchError,
    OpenTrackWhenClosedRequired,
    TrackMismatch,
)
from .gg import gg_envelope, write_envelope_csv, write_points_csv
from .ingest import (
    parse_csv,
    read_reference_csv,
    resample,
    write_reference_csv,
    write_telemetry_csv,
)
from .kpi import KpiReport
from .pipeline import analyze_lap, load_laps
from .synth import DriverProfile, TrackSpec, simulate_session

EXIT_OK, EXIT_GENERIC, EXIT_INGEST, EXIT_MISMATCH, EXIT_INFEASIBLE = 0, 1, 2, 3, 4
BUNDLED = ("oval", "software", "human")


def _meta(args, **extra) -> dict:
    meta = {"tool": "lapbench", "version": __version__, **extra}
    if args.epoch is not None:
        meta["epoch"] = args.epoch
    return meta


def _config(args) -> EngineConfig:
    cfg = EngineConfig.from_json(args.config) if args.config else EngineConfig()
    return cfg.with_overrides(rate_hz=getattr(args, "rate", None))


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, data: bytes | str) -> None:
    if isinstance(data, str):
        data = data.encode("utf-8")
    path.write_bytes(data)
    print(path)


def _json_input(arg: str):
    """Load a JSON file, or a bundled one by short name (``oval``, ``software``, ``human``)."""
    path = Path(arg)
    if not path.exists() and arg in BUNDLED:
        return json.loads(resources.files("lapbench").joinpath("data", f"{arg}.json").read_text("utf-8"))
    with path.open(encoding="utf-8") as fh:
        return json.load(fh)


def _read_ref(path):
    if path is None:
        return None
    with open(path, "rb") as fh:
        return read_reference_csv(fh)


def _load_series(path: str, cfg: EngineConfig) -> dict[str, np.ndarray]:
    with open(path, "rb") as fh:
        raw = parse_csv(fh, source=path)
    return resample(raw, cfg.rate_hz, cfg.max_gap_s)


# -- subcommands --------------------------------------------------------------


def cmd_analyze(args) -> int:
    cfg = _config(args)
    ref = _read_ref(args.ref)
    laps = load_laps(
        args.telemetry,
        cfg,
        ref=ref,
        split=args.split,
        driver_tag=args.driver_tag,
        track_id=args.track_id,
    )
    out = _out_dir(args)
    stem = Path(args.telemetry).stem
    formats = [args.format] if args.format else ["json", "csv"]
    meta = _meta(args, source=Path(args.telemetry).name, config=cfg.to_dict())
    for lap in laps:
        report = analyze_lap(lap, ref, cfg)
        for fmt in formats:
            ext = "txt" if fmt == "text" else fmt
            _write(out / f"{stem}_lap{lap.index:02d}.{ext}", render(report, fmt, meta={**meta, "lap": lap.index}))
    return EXIT_OK


def _read_report(path: str) -> KpiReport:
    with open(path, "rb") as fh:
        rep = parse_report(fh.read())
    if not isinstance(rep, KpiReport):
        raise ValueError(f"{path} is not a single-lap KPI report")
    return rep


def cmd_compare(args) -> int:
    result = compare(_read_report(args.baseline), _read_report(args.candidate))
    out = _out_dir(args)
    formats = [args.format] if args.format else ["json", "text"]
    for fmt in formats:
        ext = "txt" if fmt == "text" else fmt
        _write(out / f"comparison.{ext}", render(result, fmt, meta=_meta(args), digits=args.digits))
    return EXIT_OK


def _noise(items) -> dict[str, float]:
    noise = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"--noise-sigma expects channel=sigma, got '{item}'")
        noise[name.strip()] = float(value)
    return noise


def cmd_synth(args) -> int:
    cfg = _config(args)
    track = TrackSpec.from_json(_json_input(args.track))
    profile = DriverProfile.from_dict(_json_input(args.profile))
    series, truth = simulate_session(
        track,
        profile,
        cfg.vehicle,
        cfg.rate_hz,
        args.laps,
        driver_tag=args.driver_tag,
        resolution=args.ref_resolution,
        noise_sigma=_noise(args.noise_sigma),
        seed=args.seed,
    )
    out = _out_dir(args)
    with (out / "telemetry.csv").open("w", encoding="utf-8", newline="") as fh:
        write_telemetry_csv(series, fh)
    print(out / "telemetry.csv")
    # The target trajectory is the centerline carrying the solved speed.
    ref = truth.target
    with (out / "reference.csv").open("w", encoding="utf-8", newline="") as fh:
        write_reference_csv(ref, fh)
    print(out / "reference.csv")
    doc = {"meta": _meta(args, track_length_m=ref.length), "truth": truth.to_dict()}
    _write(out / "truth.json", json.dumps(doc, indent=2, allow_nan=False) + "\n")
    return EXIT_OK


def cmd_gg(args) -> int:
    cfg = _config(args)
    series = _load_series(args.telemetry, cfg)
    points = np.column_stack([series["ay"], series["ax"]])
    env = gg_envelope(points, args.bins or cfg.gg_bins)
    out = _out_dir(args)
    stem = Path(args.telemetry).stem
    for name, writer, obj in (("gg_points", write_points_csv, points), ("gg_envelope", write_envelope_csv, env)):
        path = out / f"{stem}_{name}.csv"
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer(obj, fh)
        print(path)
    return EXIT_OK


def cmd_autonomy(args) -> int:
    cfg = _config(args)
    target = _read_ref(args.target)
    laps = load_laps(args.telemetry, cfg, ref=target, split=args.split, driver_tag="software")
    out = _out_dir(args)
    stem = Path(args.telemetry).stem
    channels = args.channel or ["steer"]
    for lap in laps:
        doc = {"meta": _meta(args, source=Path(args.telemetry).name, lap=lap.index)}
        doc["tracking"] = tracking_deviation(lap, target, cfg.ref_max_dist_m).to_dict()
        doc["oscillation_index"] = {}
        doc["signal_quality"] = {}
        for name in channels:
            if name not in lap:
                raise ValueError(f"lap has no channel '{name}'")
            doc["oscillation_index"][name] = oscillation_index(lap[name], lap.dt, cfg.oscillation_cutoff_hz)
            doc["signal_quality"][name] = signal_quality(lap[name], lap.dt).to_dict()
        _write(out / f"{stem}_lap{lap.index:02d}_autonomy.json", json.dumps(doc, indent=2, allow_nan=False) + "\n")
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON engine config (overrides built-in defaults)")
    common.add_argument("--out-dir", default=".", help="output directory (default: current)")
    common.add_argument("--epoch", type=int, help="fixed build epoch recorded in output metadata")

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--rate", type=float, help="resampling rate in Hz (overrides config)")

    parser = argparse.ArgumentParser(prog="lapbench", description="Race telemetry KPI engine.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common, sampling], help="KPI report per lap")
    p.add_argument("telemetry")
    p.add_argument("--ref", help="reference line CSV for lateral deviation and line-crossing splits")
    p.add_argument("--format", choices=["json", "csv", "text"], help="single output format (default: json and csv)")
    p.add_argument("--split", choices=["distance", "line"], default="distance")
    p.add_argument("--driver-tag", default="other", choices=["human", "software", "other"])
    p.add_argument("--track-id", default="")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compare", parents=[common], help="relative differences of two KPI reports")
    p.add_argument("baseline")
    p.add_argument("candidate")
    p.add_argument("--format", choices=["json", "csv", "text"], help="single output format (default: json and text)")
    p.add_argument("--digits", type=int, default=0, help="decimals of relative differences in the text table")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", parents=[common, sampling], help="synthetic telemetry with ground truth")
    p.add_argument("track", help="TrackSpec JSON, or 'oval' for the bundled one")
    p.add_argument("profile", help="DriverProfile JSON, or 'software' / 'human'")
    p.add_argument("--laps", type=int, default=1)
    p.add_argument("--noise-sigma", action="append", metavar="CHANNEL=SIGMA")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--driver-tag", default="software", choices=["human", "software", "other"])
    p.add_argument("--ref-resolution", type=float, default=0.5, help="solver grid and reference point spacing in m")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("gg", parents=[common, sampling], help="g-g points and polar envelope")
    p.add_argument("telemetry")
    p.add_argument("--bins", type=int, help="number of angular sectors (default from config)")
    p.set_defaults(func=cmd_gg)

    p = sub.add_parser("autonomy", parents=[common, sampling], help="tracking and signal metrics")
    p.add_argument("telemetry")
    p.add_argument("--target", required=True, help="target trajectory CSV (reference format with v_ref)")
    p.add_argument("--channel", action="append", help="channel for oscillation and quality metrics (repeatable)")
    p.add_argument("--split", choices=["distance", "line"], default="distance")
    p.set_defaults(func=cmd_autonomy)
    return parser


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, IngestError):
        return EXIT_INGEST
    if isinstance(exc, TrackMismatch):
        return EXIT_MISMATCH
    if isinstance(exc, (InfeasibleProfile, OpenTrackWhenClosedRequired)):
        return EXIT_INFEASIBLE
    return EXIT_GENERIC


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (LapbenchError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        code = exit_code(exc)
        reason = " ".join(str(exc).split()) or "no details"
        print(f"lapbench: error[{code}]: {type(exc).__name__}: {reason}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
