"""Command-line front end: ``simulate``, ``process`` and ``metrics``.

Exit codes: 0 success, 2 usage error, 3 data/format error, 4 degenerate input.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

from . import config as cfgmod
from .errors import DegenerateInputError, DomainError, FormatError, SpecError
from .formats import atomic_write, pgm_bytes, read_tvol, slice_csv_bytes, tvol_bytes
from .phantom import build_phantom, ground_truth_dict, scan_phantom
from .pipeline import process_volume, results_csv
from .segmentation import compute_metrics, reports_to_csv

log = logging.getLogger("thzcwt")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DEGENERATE = 0, 2, 3, 4

VOLUME_NAME = "volume.tvol"
TRUTH_NAME = "volume.truth.json"
REPORT_NAME = "report.csv"


class UsageError(Exception):
    pass


def _merged_settings(args, flag_map: dict[str, str]) -> dict[str, str]:
    """Config-file values overridden by any flags given on the command line."""
    kv = cfgmod.read_kv(args.config) if getattr(args, "config", None) else {}
    for attr, key in flag_map.items():
        value = getattr(args, attr, None)
        if value is not None:
            kv[key] = str(value)
    return kv


def cmd_simulate(args) -> int:
    kv = _merged_settings(args, {"spec": "spec", "out": "out", "seed": "seed", "noise_sigma": "noise_sigma",
                                 "workers": "workers"})
    if kv.get("input"):
        raise UsageError("simulate takes a phantom spec, not a volume input")
    if not kv.get("spec"):
        raise UsageError("simulate needs --spec")
    run = {k: kv[k] for k in ("seed", "noise_sigma", "workers") if k in kv}
    spec_kv = cfgmod.read_kv(kv["spec"])
    # run settings may also live in the spec file; flags and --config win
    for k in ("seed", "noise_sigma", "workers"):
        if k in spec_kv:
            run.setdefault(k, spec_kv.pop(k))
    cfgmod.check_keys(spec_kv, cfgmod.PHANTOM_KEYS | cfgmod.SWEEP_KEYS)
    spec = cfgmod.phantom_spec_from_kv(spec_kv)
    sweep = cfgmod.sweep_from_kv(spec_kv)
    n_bins = int(spec_kv.get("n_depth_bins", 512))
    pc = cfgmod.pipeline_config({"spec": kv["spec"], **run})
    pc.validate()

    phantom, truth = build_phantom(spec)
    vol = scan_phantom(phantom, sweep, pc.noise_sigma, pc.seed, n_depth_bins=n_bins, workers=pc.workers)
    truth_doc = ground_truth_dict(truth, vol.depth_bin_m)
    truth_doc["seed"] = pc.seed
    truth_doc["noise_sigma"] = pc.noise_sigma
    truth_bytes = (json.dumps(truth_doc, indent=1, sort_keys=True) + "\n").encode()

    out = kv.get("out", ".")
    os.makedirs(out, exist_ok=True)
    atomic_write(os.path.join(out, VOLUME_NAME), tvol_bytes(vol))
    atomic_write(os.path.join(out, TRUTH_NAME), truth_bytes)
    nx, ny, nz = vol.shape
    print(f"wrote {os.path.join(out, VOLUME_NAME)} ({nx}x{ny}x{nz}) with {truth_doc['n_defects']} defects")
    return EXIT_OK


def _default_truth_path(input_path: str) -> str:
    base, _ = os.path.splitext(input_path)
    return base + ".truth.json"


def cmd_process(args) -> int:
    flag_map = {"input": "input", "truth": "truth", "out": "out", "wavelet": "wavelet", "scales": "scales",
                "scale_policy": "scale_policy", "fixed_scale": "fixed_scale", "z_index": "z_index",
                "z_window": "z_window", "threshold": "threshold", "format": "format", "workers": "workers",
                "boundary": "boundary"}
    kv = _merged_settings(args, flag_map)
    if kv.get("spec"):
        raise UsageError("process takes a volume input, not a phantom spec")
    if not kv.get("input"):
        raise UsageError("process needs --input")
    cfgmod.check_keys(kv, cfgmod.PROCESS_KEYS | cfgmod.RUN_KEYS)
    pc = cfgmod.pipeline_config(kv)
    pc.validate()

    raw = read_tvol(pc.input_path)
    truth_path = pc.truth_path or _default_truth_path(pc.input_path)
    with open(truth_path) as fh:
        try:
            truth = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{truth_path}: {exc}") from None
    if "actual_areas_mm2" not in truth:
        raise FormatError(f"{truth_path}: missing actual_areas_mm2")

    results = process_volume(raw, pc, truth)

    os.makedirs(pc.out_dir, exist_ok=True)
    for r in results:
        stem = os.path.join(pc.out_dir, f"slice_{r.method}")
        if "pgm" in pc.formats:
            atomic_write(stem + ".pgm", pgm_bytes(r.slice))
        if "csv" in pc.formats:
            atomic_write(stem + ".csv", slice_csv_bytes(r.slice))
    report = results_csv(truth["actual_areas_mm2"], results)
    atomic_write(os.path.join(pc.out_dir, REPORT_NAME), report.encode())
    sys.stdout.write(report)

    failed = [r for r in results if r.error]
    for r in failed:
        print(f"error: {r.error}", file=sys.stderr)
    return EXIT_DATA if failed else EXIT_OK


def _read_rows(path) -> list[tuple[str | None, list[float]]]:
    """Rows of ``[tag,] v1, v2, ...``; header lines (non-numeric values) are skipped."""
    rows = []
    with open(path, newline="") as fh:
        for cells in csv.reader(fh):
            cells = [c.strip() for c in cells if c.strip()]
            if not cells:
                continue
            tag = None
            try:
                float(cells[0])
            except ValueError:
                tag, cells = cells[0], cells[1:]
            try:
                values = [float(c) for c in cells]
            except ValueError:
                continue
            if values:
                rows.append((tag, values))
    if not rows:
        raise FormatError(f"{path}: no numeric rows")
    return rows


def cmd_metrics(args) -> int:
    measured = _read_rows(args.measured)
    actual = _read_rows(args.actual)[0][1]
    reports = []
    for i, (tag, values) in enumerate(measured):
        reports.append(compute_metrics(values, actual, tag or f"row{i + 1}"))
    text = reports_to_csv(actual, reports)
    if args.out:
        parent = os.path.dirname(args.out)
        if parent:
            os.makedirs(parent, exist_ok=True)
        atomic_write(args.out, text.encode())
    sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thzcwt", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="scan a synthetic phantom into a TVOL volume")
    s.add_argument("--spec", help="phantom/sweep key=value file")
    s.add_argument("--config", help="pipeline key=value file (flags win)")
    s.add_argument("--out", help="output directory")
    s.add_argument("--seed", type=int)
    s.add_argument("--noise-sigma", dest="noise_sigma", type=float)
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_simulate)

    q = sub.add_parser("process", help="enhance, slice, segment and report a TVOL volume")
    q.add_argument("--input", help="TVOL volume")
    q.add_argument("--truth", help="ground-truth sidecar (default: <input>.truth.json)")
    q.add_argument("--config", help="pipeline key=value file (flags win)")
    q.add_argument("--out", help="output directory")
    q.add_argument("--wavelet", help="raw|morlet|gaussian|mexican-hat|all, comma separated")
    q.add_argument("--scales", help="'1,2,4' or 'geom:min:max:count'")
    q.add_argument("--scale-policy", dest="scale_policy", choices=["fixed", "max"])
    q.add_argument("--fixed-scale", dest="fixed_scale", type=float, help="scale for the fixed policy")
    q.add_argument("--boundary", choices=["zero", "reflect"])
    q.add_argument("--z-index", dest="z_index", type=int)
    q.add_argument("--z-window", dest="z_window", help="lo:hi (half-open)")
    q.add_argument("--threshold", help="otsu or a number")
    q.add_argument("--format", help="pgm,csv")
    q.add_argument("--workers", type=int)
    q.set_defaults(func=cmd_process)

    m = sub.add_parser("metrics", help="area metrics for externally measured defects")
    m.add_argument("--measured", required=True, help="CSV, one row per method: [tag,] areas...")
    m.add_argument("--actual", required=True, help="CSV with one row of actual areas")
    m.add_argument("--out", help="write the report CSV here as well as stdout")
    m.set_defaults(func=cmd_metrics)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateInputError as exc:
        print(f"degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (SpecError, FormatError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
