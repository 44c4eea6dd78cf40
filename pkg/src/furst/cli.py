"""Batch front-end: construct, estimate, verify, report.

Every command reads a JSON config and/or a previously written output
directory and emits flat files (CSV/JSON/SVG).  Outputs are byte-stable
for a fixed config and seed: no timestamps, sorted JSON keys, repr-exact
floats.  Exit codes: 0 success, 1 user/config error, 2 resource cap,
3 soundness violation.
"""

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from .boxcount import PointCloud, dyadic_schedule, estimate_dimension, fit_slope, grid_count
from .construct_box import BoxSharpSpec, build_lines, build_points, calibrate_cover, predicted_cover
from .construct_packing import (
    OPTION_LINES,
    ScaleSchedule,
    predicted_step_factors,
    run_alternating,
)
from .errors import FurstError, InconsistentInput, InvalidParameter, ResourceCap, SoundnessViolation
from .grassmann import LineFamily, mesh_cover_count
from .verifier import dimension_thresholds, pigeonhole_extract, two_point_extract

EXIT_OK = 0
EXIT_USER = 1
EXIT_RESOURCE = 2
EXIT_SOUNDNESS = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; route through EXIT_USER instead
    def error(self, message):
        raise InvalidParameter(message)


def _write_json(path: Path, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_json(path: Path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _write_points_csv(path: Path, points: np.ndarray):
    d = points.shape[1]
    with open(path, "w") as fh:
        fh.write(",".join(f"x{i + 1}" for i in range(d)) + "\n")
        for row in points:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _write_lines_csv(path: Path, family: LineFamily):
    d = family.dim
    cols = [f"dir{i + 1}" for i in range(d)] + [f"trans{i + 1}" for i in range(d)]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for v, a in zip(family.directions, family.translations):
            fh.write(
                ",".join(repr(float(x)) for x in v)
                + ","
                + ",".join(repr(float(x)) for x in a)
                + "\n"
            )


def _read_points_csv(path: Path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data


def cmd_construct_box(config: dict, out: Path) -> int:
    spec = BoxSharpSpec.from_config(config)
    cloud = build_points(spec)
    family = build_lines(spec)
    out.mkdir(parents=True, exist_ok=True)
    _write_points_csv(out / "points.csv", cloud.points)
    _write_lines_csv(out / "lines.csv", family)
    box, packing, hausdorff = dimension_thresholds(spec.d, spec.s, spec.t)
    _write_json(
        out / "manifest.json",
        {
            "kind": "box",
            "spec": spec.to_config(),
            "achieved_s": spec.s,
            "beta": spec.beta,
            "collapsed": spec.collapsed,
            "counts": {"points": len(cloud), "lines": len(family)},
            "floors": {
                "points": cloud.resolution_floor,
                "lines": family.resolution_floor,
            },
            "thresholds": {
                "box": box,
                "packing": packing,
                "hausdorff": hausdorff,
            },
        },
    )
    return EXIT_OK


def cmd_construct_packing(config: dict, out: Path) -> int:
    schedule = ScaleSchedule.from_config(config["schedule"])
    K = int(config.get("K", schedule.steps))
    if K > schedule.steps:
        raise InvalidParameter(f"K = {K} exceeds the schedule's {schedule.steps} steps")
    schedule = ScaleSchedule(schedule.etas[: K + 1], schedule.mode)
    caps = config.get("caps", {})
    first = config.get("first", OPTION_LINES)
    states = run_alternating(
        int(config["d"]),
        float(config["s"]),
        float(config["t"]),
        schedule,
        first_option=first,
        max_lines=int(caps.get("max_lines", 200_000)),
        max_marks=int(caps.get("max_marks", 500_000)),
    )
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "trajectory.csv", "w") as fh:
        fh.write("k,eta,option,num_lines,num_marks,pred_lines,pred_marks\n")
        pred_l, pred_m = 1.0, 1.0
        for st in states:
            option = st.history[-1] if st.history else ""
            fh.write(
                f"{st.k},{st.eta!r},{option},{st.num_lines},{st.num_marks},"
                f"{pred_l!r},{pred_m!r}\n"
            )
            if st.k < len(states) - 1:
                nxt_eta = schedule.etas[st.k + 1]
                nxt_option = states[st.k + 1].history[-1]
                fl, fm = predicted_step_factors(st, nxt_eta, nxt_option)
                pred_l *= fl
                pred_m *= fm
    states_payload = []
    for st in states:
        states_payload.append(
            {
                "k": st.k,
                "eta": st.eta,
                "lines": [
                    {
                        "direction": [float(x) for x in ln.direction.vector],
                        "translation": [float(x) for x in ln.translation],
                    }
                    for ln in st.lines
                ],
                "marks": [[list(map(float, p)) for p in m] for m in st.marks],
                "option": st.history[-1] if st.history else None,
            }
        )
    _write_json(
        out / "states.json",
        {
            "d": int(config["d"]),
            "s": float(config["s"]),
            "t": float(config["t"]),
            "schedule": schedule.to_config(),
            "states": states_payload,
        },
    )
    _write_json(
        out / "manifest.json",
        {
            "kind": "packing",
            "config": config,
            "counts": {
                "final_lines": states[-1].num_lines,
                "final_marks": states[-1].num_marks,
            },
        },
    )
    return EXIT_OK


def _load_box_artifacts(out: Path):
    manifest = _read_json(out / "manifest.json")
    if manifest.get("kind") != "box":
        raise InvalidParameter(f"{out} does not hold box artifacts")
    pts = _read_points_csv(out / "points.csv")
    cloud = PointCloud(pts, manifest["floors"]["points"])
    d = pts.shape[1]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # loadtxt warns on header-only files
        raw = np.loadtxt(out / "lines.csv", delimiter=",", skiprows=1, ndmin=2)
    if raw.size == 0:
        raw = np.empty((0, 2 * d))
    family = LineFamily(raw[:, :d], raw[:, d:], manifest["floors"]["lines"])
    return manifest, cloud, family


def _default_scales(floor: float, requested) -> list[float]:
    if requested:
        return dyadic_schedule(requested[0], requested[1])
    return dyadic_schedule(0.25, max(floor, 2.0**-12))


def cmd_estimate(out: Path, scales, fmt: str) -> int:
    manifest = _read_json(out / "manifest.json")
    if manifest.get("kind") == "box":
        manifest, cloud, family = _load_box_artifacts(out)
        spec = BoxSharpSpec.from_config(manifest["spec"])
        xsched = _default_scales(cloud.resolution_floor, scales)
        report = estimate_dimension(cloud, xsched)
        report.write_csv(out / "x_cover.csv")
        calibration = calibrate_cover(spec, cloud, xsched[0])
        envelope = [predicted_cover(spec, s, calibration=calibration) for s in xsched]
        report.write_sidecar(
            out / "x_cover.json",
            extra={
                "thresholds": manifest["thresholds"],
                "envelope_calibration": calibration,
                "envelope": envelope,
                "envelope_holds": bool(
                    all(n <= e for n, e in zip(report.counts, envelope))
                ),
            },
        )
        lsched = [s for s in _default_scales(family.resolution_floor, scales)
                  if s >= family.resolution_floor]
        if len(lsched) < 3:
            raise InvalidParameter(
                "fewer than 3 usable line scales above the family's "
                f"resolution floor {family.resolution_floor:.3e}"
            )
        lcounts = [mesh_cover_count(family, s) for s in lsched]
        lslope, lresid = fit_slope(lsched, lcounts)
        with open(out / "line_cover.csv", "w") as fh:
            fh.write("delta,count,log_inv_delta,log_count\n")
            for s, n in zip(lsched, lcounts):
                fh.write(f"{s!r},{n},{float(np.log(1 / s))!r},{float(np.log(n))!r}\n")
        _write_json(
            out / "line_cover.json",
            {
                "slope": lslope,
                "residual": lresid,
                "fit_range": [lsched[0], lsched[-1]],
                "target_t": spec.t,
                "thresholds": manifest["thresholds"],
            },
        )
        if fmt == "json":
            _write_json(
                out / "estimate.json",
                {
                    "x_slope": report.slope,
                    "line_slope": lslope,
                    "x_counts": list(report.counts),
                    "line_counts": lcounts,
                },
            )
        return EXIT_OK
    if manifest.get("kind") == "packing":
        payload = _read_json(out / "states.json")
        rows = []
        for st in payload["states"]:
            if st["k"] == 0:
                continue
            eta = st["eta"]
            marks = np.concatenate([np.array(m) for m in st["marks"]])
            mcloud = PointCloud(marks, eta / 4.0)
            mcount = grid_count(mcloud, eta)
            fam = LineFamily(
                np.array([ln["direction"] for ln in st["lines"]]),
                np.array([ln["translation"] for ln in st["lines"]]),
                eta / 4.0,
            )
            lcount = mesh_cover_count(fam, eta)
            rows.append(
                (
                    st["k"],
                    eta,
                    mcount,
                    lcount,
                    float(np.log(mcount) / np.log(1.0 / eta)),
                    float(np.log(lcount) / np.log(1.0 / eta)),
                )
            )
        with open(out / "packing_exponents.csv", "w") as fh:
            fh.write("k,eta,mark_cells,line_cells,mark_exponent,line_exponent\n")
            for row in rows:
                fh.write(
                    f"{row[0]},{row[1]!r},{row[2]},{row[3]},{row[4]!r},{row[5]!r}\n"
                )
        s, t = payload["s"], payload["t"]
        _write_json(
            out / "packing_exponents.json",
            {
                "mark_exponent_cap": max(s, t / 2.0),
                "max_mark_exponent": max(r[4] for r in rows) if rows else 0.0,
            },
        )
        return EXIT_OK
    raise InvalidParameter(f"unknown artifact kind in {out}")


def cmd_verify(out: Path, scales) -> int:
    manifest = _read_json(out / "manifest.json")
    certificates = []
    sound = True
    if manifest.get("kind") == "box":
        manifest, cloud, family = _load_box_artifacts(out)
        sched = [
            s
            for s in _default_scales(cloud.resolution_floor, scales)
            if s <= 0.5
        ]
        if not sched:
            raise InvalidParameter("no usable scales at or below 0.5")
        if len(family) == 0:
            sched = []
        for s in sched:
            cert = pigeonhole_extract(family, cloud, s)
            measured = grid_count(cloud, s)
            ok = (
                cert.bound <= 3**cloud.dim * measured
                and cert.min_witness_separation() >= s
            )
            sound &= ok
            entry = cert.to_json()
            entry["measured_count"] = measured
            entry["sound"] = ok
            certificates.append(entry)
    elif manifest.get("kind") == "packing":
        payload = _read_json(out / "states.json")
        final = payload["states"][-1]
        eta = final["eta"]
        marks = [np.array(m) for m in final["marks"]]
        if all(m.shape[0] >= 2 for m in marks):
            fam = LineFamily(
                np.array([ln["direction"] for ln in final["lines"]]),
                np.array([ln["translation"] for ln in final["lines"]]),
                eta / 4.0,
            )
            xs = np.array([m[0] for m in marks])
            ys = np.array([m[-1] for m in marks])
            gap = float(np.linalg.norm(xs - ys, axis=1).min())
            n = int(np.ceil(1.0 / gap))
            cert = two_point_extract(fam, xs, ys, eta, payload["t"], n)
            all_marks = np.concatenate(marks)
            measured = grid_count(PointCloud(all_marks, eta / 4.0), eta)
            ok = cert.bound <= 3 ** len(final["lines"][0]["direction"]) * measured
            sound &= ok
            entry = cert.to_json()
            entry["measured_count"] = measured
            entry["sound"] = ok
            certificates.append(entry)
    else:
        raise InvalidParameter(f"unknown artifact kind in {out}")
    _write_json(
        out / "certificates.json",
        {"certificates": certificates, "all_sound": sound},
    )
    summary = {
        "scales_checked": len(certificates),
        "all_sound": sound,
    }
    _write_json(out / "verify_summary.json", summary)
    if not certificates:
        print("verify: no certificates produced (empty input)", file=sys.stderr)
    if not sound:
        raise SoundnessViolation("a certificate exceeded the measured count")
    return EXIT_OK


def _svg_scatter(path: Path, xs, ys, slope: float, intercept: float, title: str):
    """Minimal deterministic SVG scatter of (x, y) with the fitted line."""
    W, H, m = 640, 480, 60
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    xr = (x1 - x0) or 1.0
    yr = (y1 - y0) or 1.0

    def sx(x):
        return m + (x - x0) / xr * (W - 2 * m)

    def sy(y):
        return H - m - (y - y0) / yr * (H - 2 * m)

    rows = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<line x1="{m}" y1="{H - m}" x2="{W - m}" y2="{H - m}" stroke="black"/>',
        f'<line x1="{m}" y1="{m}" x2="{m}" y2="{H - m}" stroke="black"/>',
        f'<text x="{W // 2}" y="{H - 15}" text-anchor="middle" font-size="13">log(1/delta)</text>',
        f'<text x="18" y="{H // 2}" font-size="13" transform="rotate(-90 18 {H // 2})" text-anchor="middle">log(count)</text>',
        f'<text x="{W // 2}" y="25" text-anchor="middle" font-size="14">{title} (slope {slope:.4f})</text>',
    ]
    ya, yb = intercept + slope * x0, intercept + slope * x1
    rows.append(
        f'<line x1="{sx(x0):.2f}" y1="{sy(ya):.2f}" x2="{sx(x1):.2f}" '
        f'y2="{sy(yb):.2f}" stroke="#888" stroke-dasharray="4 3"/>'
    )
    for x, y in zip(xs, ys):
        rows.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="4" fill="#1f5fa8"/>')
    rows.append("</svg>")
    path.write_text("\n".join(rows) + "\n")


def cmd_report(out: Path) -> int:
    made = []
    for stem in ("x_cover", "line_cover"):
        csv = out / f"{stem}.csv"
        sidecar = out / f"{stem}.json"
        if not csv.exists() or not sidecar.exists():
            continue
        data = np.loadtxt(csv, delimiter=",", skiprows=1, ndmin=2)
        meta = _read_json(sidecar)
        xs, ys = data[:, 2], data[:, 3]
        slope = meta["slope"]
        intercept = float(ys.mean() - slope * xs.mean())
        _svg_scatter(out / f"{stem}.svg", xs, ys, slope, intercept, stem)
        made.append({"series": stem, "slope": slope, "points": len(xs)})
    if not made:
        raise InvalidParameter(
            f"no cover reports found in {out}; run `estimate` first"
        )
    _write_json(out / "report.json", {"series": made})
    return EXIT_OK


def _parse_scales(text):
    if text is None:
        return None
    try:
        hi, lo = (float(x) for x in text.split(","))
    except ValueError as exc:
        raise InvalidParameter("--scales expects 'max,min'") from exc
    return (hi, lo)


def build_parser() -> _Parser:
    parser = _Parser(prog="furst", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("construct-box", "construct-packing"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--scales", default=None)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
    for name in ("estimate", "verify", "report"):
        p = sub.add_parser(name)
        p.add_argument("--out", required=True)
        p.add_argument("--config", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--scales", default=None)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        out = Path(args.out)
        if args.command in ("construct-box", "construct-packing"):
            config = _read_json(Path(args.config))
            if args.seed is not None:
                config["seed"] = args.seed
            if "seed" not in config:
                raise InvalidParameter(
                    "a seed is required, via the config or --seed"
                )
            if args.command == "construct-box":
                return cmd_construct_box(config, out)
            return cmd_construct_packing(config, out)
        if args.command == "estimate":
            return cmd_estimate(out, _parse_scales(args.scales), args.format)
        if args.command == "verify":
            return cmd_verify(out, _parse_scales(args.scales))
        return cmd_report(out)
    except SoundnessViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOUNDNESS
    except ResourceCap as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (InvalidParameter, InconsistentInput, FurstError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc!r}", file=sys.stderr)
        return EXIT_USER


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
