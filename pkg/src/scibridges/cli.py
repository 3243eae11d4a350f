"""Command line interface.

Subcommands: ``analyze-bridges``, ``metrics``, ``preprocess``, ``phantom`` and
``stats-compare``. Exit codes are shared: 0 success, 1 I/O error,
2 validation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import statistics
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import jsonschema

from . import __version__
from .bridges import analyze_bridges
from .centerline import DEFAULT_WINDOW
from .data import TABLE2_DORSAL, TABLE2_VENTRAL, table2_path
from .errors import ValidationError, VolumeIOError
from .kernels import BACKEND
from .metrics import dice, lesion_wise_counts
from .phantom import PHANTOM_SCHEMA, PhantomSpec, generate_phantom
from .preprocess import DEFAULT_SPACING, binarize, resample, zscore_normalize
from .report import FORMAT_VERSION, csv_text, dumps, write_json, write_text_atomic
from .stats import SIGNIFICANCE_LEVEL, dagostino_pearson, kruskal_wallis
from .volume import BinaryMask, check_same_geometry, read_mask, read_nifti, reorient, write_nifti

SPACING_ENV = "SCIBRIDGES_SPACING"
METRIC_KEYS = ("dice", "ppv_l", "sens_l", "f1_l")


def _parse_triple(text: str) -> tuple:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError:
        raise ValidationError(f"expected three comma-separated numbers, got {text!r}") from None
    if len(vals) != 3 or any(not v > 0 for v in vals):
        raise ValidationError(f"expected three positive numbers, got {text!r}")
    return vals


def default_spacing() -> tuple:
    env = os.environ.get(SPACING_ENV)
    return _parse_triple(env) if env else DEFAULT_SPACING


def _emit(text: str, out):
    if out:
        write_text_atomic(out, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- bridges


def bridge_report_dict(report, sc_path=None, lesion_path=None, orientation_in=None) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "command": "analyze-bridges",
        "inputs": {"sc": sc_path, "lesion": lesion_path},
        "input_orientation": orientation_in,
        "index_frame": "RPI",
        "spacing_mm": list(report.spacing),
        "midsagittal_index": report.midsagittal_index,
        "angle_corrected": report.angle_corrected,
        "all_slices": report.all_slices,
        "lesion_absent": report.lesion_absent,
        "per_slice": [
            {
                "sagittal_index": m.sagittal_index,
                "ventral_width_mm": m.ventral_width_mm,
                "dorsal_width_mm": m.dorsal_width_mm,
                "min_row_ventral": m.min_row_ventral,
                "min_row_dorsal": m.min_row_dorsal,
                "angle_deg": m.angle_deg,
            }
            for m in report.per_slice
        ],
        "warnings": list(report.warnings),
    }


def cmd_analyze_bridges(args) -> int:
    sc = read_mask(args.sc)
    lesion = read_mask(args.lesion)
    check_same_geometry(sc, lesion, (f"--sc {args.sc}", f"--lesion {args.lesion}"))
    orientation_in = sc.orientation
    sc, lesion = reorient(sc, "RPI"), reorient(lesion, "RPI")
    report = analyze_bridges(
        sc,
        lesion,
        all_slices=args.all_slices,
        angle_correct=not args.no_angle_correction,
        window=args.window,
    )
    doc = bridge_report_dict(report, str(args.sc), str(args.lesion), orientation_in)
    _emit(dumps(doc), args.out)
    if args.csv:
        rows = [(m.sagittal_index, m.ventral_width_mm, m.dorsal_width_mm, m.angle_deg) for m in report.per_slice]
        write_text_atomic(args.csv, csv_text(("sagittal_index", "ventral_mm", "dorsal_mm", "angle_deg"), rows))
    return 0


# ---------------------------------------------------------------- metrics


def _subject_metrics(pred_path, gt_path, connectivity, min_overlap) -> dict:
    pred = read_mask(pred_path)
    gt = read_mask(gt_path)
    check_same_geometry(pred, gt, (f"prediction {pred_path}", f"ground truth {gt_path}"))
    lw = lesion_wise_counts(pred, gt, connectivity, min_overlap)
    return {"dice": dice(pred, gt), **lw.as_dict()}


def aggregate(rows: list) -> dict:
    """Mean and sample standard deviation of each rate over subjects."""
    out = {"n": len(rows)}
    for key in METRIC_KEYS:
        vals = [r[key] for r in rows]
        out[key] = {
            "mean": statistics.fmean(vals) if vals else None,
            "sd": statistics.stdev(vals) if len(vals) > 1 else None,
        }
    return out


def _read_manifest(path: Path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            fields = reader.fieldnames or []
            for col in ("subject_id", "pred_path", "gt_path"):
                if col not in fields:
                    raise ValidationError(f"{path}: manifest is missing column {col!r}")
            rows = list(reader)
    except OSError as exc:
        raise VolumeIOError(f"cannot read {path}: {exc.strerror or exc}") from exc
    base = path.parent

    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    return [(r["subject_id"], resolve(r["pred_path"]), resolve(r["gt_path"])) for r in rows]


def cmd_metrics(args) -> int:
    header = {
        "format_version": FORMAT_VERSION,
        "command": "metrics",
        "connectivity": args.connectivity,
        "min_overlap_voxels": args.min_overlap,
    }
    if args.manifest:
        subjects = _read_manifest(Path(args.manifest))

        def run(item):
            sid, pred, gt = item
            return {"subject_id": sid, **_subject_metrics(pred, gt, args.connectivity, args.min_overlap)}

        with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
            rows = list(pool.map(run, subjects))
        doc = {**header, "subjects": rows, "aggregate": aggregate(rows)}
        if args.csv:
            cols = ("subject_id", "dice", "tp", "fp", "fn", "ppv_l", "sens_l", "f1_l")
            table = [[r[c] for c in cols] for r in rows]
            agg = doc["aggregate"]
            table.append(["mean", *[agg[c]["mean"] if c in METRIC_KEYS else None for c in cols[1:]]])
            table.append(["sd", *[agg[c]["sd"] if c in METRIC_KEYS else None for c in cols[1:]]])
            write_text_atomic(args.csv, csv_text(cols, table))
    else:
        if not (args.pred and args.gt):
            raise ValidationError("give --pred and --gt, or --manifest")
        doc = {
            **header,
            "inputs": {"pred": str(args.pred), "gt": str(args.gt)},
            **_subject_metrics(args.pred, args.gt, args.connectivity, args.min_overlap),
        }
    _emit(dumps(doc), args.out)
    return 0


# ---------------------------------------------------------------- preprocess


def cmd_preprocess(args) -> int:
    vol = read_nifti(args.input)
    if args.mask:
        if args.threshold is not None:
            vol = binarize(vol, args.threshold)
        else:
            try:
                vol = BinaryMask(vol.data, vol.affine)
            except ValidationError as exc:
                raise ValidationError(f"{args.input}: --mask input is not binary ({exc}); pass --threshold") from None
    vol = reorient(vol, args.orientation)
    if args.spacing != "native":
        target = _parse_triple(args.spacing) if args.spacing else default_spacing()
        vol = resample(vol, target, "nearest" if args.mask else "linear")
    if args.zscore and not args.mask:
        vol = zscore_normalize(vol)
    write_nifti(vol, args.out)
    print(f"wrote {args.out}: {vol.geometry()}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------- phantom


def truth_dict(spec: PhantomSpec, truth) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "command": "phantom",
        "spec": spec.to_dict(),
        "midsagittal_index": truth.midsagittal_index,
        "tilt_deg": truth.tilt_deg,
        "ventral_mm": truth.ventral_mm,
        "dorsal_mm": truth.dorsal_mm,
        "ventral_mm_corrected": truth.ventral_mm_corrected,
        "dorsal_mm_corrected": truth.dorsal_mm_corrected,
        "lesion_slices": list(truth.lesion_slices),
        "lesion_rows": list(truth.lesion_rows),
        "cord_levels": list(truth.cord_levels),
    }


def load_phantom_spec(path) -> PhantomSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise VolumeIOError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    try:
        jsonschema.validate(raw, PHANTOM_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ValidationError(f"{path}: invalid phantom spec at {exc.json_path}: {exc.message}") from None
    return PhantomSpec.from_dict(raw)


def cmd_phantom(args) -> int:
    spec = load_phantom_spec(args.spec)
    sc, lesion, truth = generate_phantom(spec)
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise VolumeIOError(f"cannot create {out}: {exc.strerror or exc}") from exc
    write_nifti(sc, out / "sc.nii.gz")
    write_nifti(lesion, out / "lesion.nii.gz")
    write_json(out / "truth.json", truth_dict(spec, truth))
    return 0


# ---------------------------------------------------------------- stats


def read_columns(path, columns) -> dict:
    """Numeric columns of a CSV file with a header row."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            fields = reader.fieldnames or []
            for col in columns:
                if col not in fields:
                    raise ValidationError(f"{path}: missing column {col!r} (have {', '.join(fields)})")
            data = {c: [] for c in columns}
            for lineno, row in enumerate(reader, start=2):
                for col in columns:
                    cell = (row.get(col) or "").strip()
                    try:
                        val = float(cell)
                    except ValueError:
                        raise ValidationError(
                            f"{path}: non-numeric cell {cell!r} at row {lineno}, column {col!r}"
                        ) from None
                    if not math.isfinite(val):
                        raise ValidationError(f"{path}: non-finite cell at row {lineno}, column {col!r}")
                    data[col].append(val)
    except OSError as exc:
        raise VolumeIOError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return data


def compare_columns(data: dict, columns, alpha: float = SIGNIFICANCE_LEVEL) -> dict:
    normality = []
    for col in columns:
        vals = data[col]
        entry = {"column": col, "n": len(vals)}
        if len(vals) < 20:
            entry.update(status="skipped", reason=f"n = {len(vals)} < 20")
        else:
            try:
                res = dagostino_pearson(vals)
            except ValidationError as exc:
                entry.update(status="skipped", reason=str(exc))
            else:
                entry.update(
                    status="tested",
                    statistic=res.statistic,
                    p_value=res.p_value,
                    normal_at_alpha=not res.significant(alpha),
                )
        normality.append(entry)
    kw = kruskal_wallis([data[c] for c in columns])
    return {
        "columns": list(columns),
        "normality": normality,
        "kruskal_wallis": {
            "statistic": kw.statistic,
            "p_value": kw.p_value,
            "df": kw.df,
            "n": kw.details["n"],
            "tie_corrected": kw.details["tie_corrected"],
            "significant": kw.significant(alpha),
        },
    }


def cmd_stats_compare(args) -> int:
    if args.table2:
        source = table2_path()
        groups = args.columns or [",".join(TABLE2_VENTRAL), ",".join(TABLE2_DORSAL)]
    else:
        if not args.csv:
            raise ValidationError("give --csv FILE or --table2")
        if not args.columns:
            raise ValidationError("give at least one --columns A,B[,C...]")
        source, groups = args.csv, args.columns
    comparisons = []
    for spec in groups:
        cols = [c.strip() for c in spec.split(",") if c.strip()]
        if len(cols) < 2:
            raise ValidationError(f"--columns needs at least two columns, got {spec!r}")
        data = read_columns(source, cols)
        comparisons.append(compare_columns(data, cols, args.alpha))
    doc = {
        "format_version": FORMAT_VERSION,
        "command": "stats-compare",
        "source": "table2" if args.table2 else str(source),
        "alpha": args.alpha,
        "comparisons": comparisons,
    }
    _emit(dumps(doc), args.out)
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scibridges",
        description="Tissue-bridge measurement and lesion segmentation scoring for spinal cord injury masks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} (kernels: {BACKEND})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze-bridges", help="measure ventral/dorsal tissue bridges")
    p.add_argument("--sc", required=True, help="spinal cord mask (NIfTI)")
    p.add_argument("--lesion", required=True, help="lesion mask (NIfTI)")
    p.add_argument("--out", help="JSON report path (default: stdout)")
    p.add_argument("--csv", help="optional per-slice CSV path")
    p.add_argument("--all-slices", action="store_true", help="measure every sagittal slice crossed by the lesion")
    p.add_argument("--no-angle-correction", action="store_true", help="report raw A-P widths")
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW, help="centerline smoothing window in levels")
    p.set_defaults(func=cmd_analyze_bridges)

    p = sub.add_parser("metrics", help="Dice and lesion-wise detection metrics")
    p.add_argument("--pred", help="predicted lesion mask")
    p.add_argument("--gt", help="ground-truth lesion mask")
    p.add_argument("--manifest", help="CSV with subject_id,pred_path,gt_path for batch mode")
    p.add_argument("--connectivity", type=int, choices=(6, 18, 26), default=26)
    p.add_argument("--min-overlap", type=int, default=1, help="voxels of overlap needed for a match")
    p.add_argument("--jobs", type=int, default=1, help="subjects processed concurrently")
    p.add_argument("--out", help="JSON output path (default: stdout)")
    p.add_argument("--csv", help="batch mode: per-subject CSV with mean/sd rows")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("preprocess", help="reorient and resample a volume, optionally z-scored")
    p.add_argument("--in", dest="input", required=True, help="input NIfTI")
    p.add_argument("--out", required=True, help="output NIfTI (.nii or .nii.gz)")
    p.add_argument("--orientation", default="RPI")
    p.add_argument(
        "--spacing",
        default=None,
        help=f"target spacing in mm, e.g. 0.92,0.68,0.92, or 'native' to skip resampling "
        f"(default: ${SPACING_ENV} or {','.join(map(str, DEFAULT_SPACING))})",
    )
    p.add_argument("--zscore", action="store_true", help="z-score intensities over all voxels")
    p.add_argument("--mask", action="store_true", help="treat input as a mask: nearest-neighbor, no z-score")
    p.add_argument("--threshold", type=float, default=None, help="with --mask: binarize values above this first")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("phantom", help="write a synthetic cord/lesion pair with known bridges")
    p.add_argument("--spec", required=True, help="phantom spec JSON")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("stats-compare", help="normality and Kruskal-Wallis tests across CSV columns")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--csv", help="CSV file with a header row")
    src.add_argument("--table2", action="store_true", help="use the packaged 15-subject bridge table")
    p.add_argument(
        "--columns",
        action="append",
        help="comma-separated columns compared in one test; repeat for several comparisons",
    )
    p.add_argument("--alpha", type=float, default=SIGNIFICANCE_LEVEL)
    p.add_argument("--out", help="JSON output path (default: stdout)")
    p.set_defaults(func=cmd_stats_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (VolumeIOError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
