"""Command-line interface.

Subcommands: calibrate, coarse, refine, evaluate, project, synth, sweep.
Pipeline failures map to stable exit codes: 1 parse, 2 extraction,
3 coarse, 4 refine.
"""
from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import evaluation, fileio, synth
from .cloud_features import (
    PointCloud,
    extract_cloud_features,
    extract_lane_points,
    extract_pole_points,
    fit_ground_plane,
    ground_parallel_rotation,
    ransac_line3d,
)
from .config import PipelineConfig, load_config
from .cost import cost
from .errors import STAGE_EXIT_CODES, CalibError
from .fileio import (
    load_cloud,
    load_extrinsic,
    load_image,
    load_intrinsics,
    save_cloud,
    save_extrinsic,
    save_pgm,
    save_ppm,
)
from .geometry import EPS_Z, Extrinsic
from .image_features import extract_image_features, load_mask
from .pipeline import CalibrationReport, build_evaluator, calibrate, coarse_calibrate
from .refine import refine


def _add_bundle_args(p):
    p.add_argument("--cloud", required=True, help="point cloud (.bin or ascii)")
    p.add_argument("--lane-mask", required=True, help="lane PGM mask")
    p.add_argument("--pole-mask", required=True, help="pole PGM mask")
    p.add_argument("--intrinsics", required=True, help="intrinsics text file")


def _add_common(p):
    p.add_argument("--config", default=None, help="pipeline config file")
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for batch loops")


def _load_cfg(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    return cfg


def _load_bundle(args, cfg):
    intr = load_intrinsics(args.intrinsics)
    cloud = PointCloud.from_array(load_cloud(args.cloud))
    lane_mask = load_mask(args.lane_mask, "lane", intr)
    pole_mask = load_mask(args.pole_mask, "pole", intr)
    return cloud, lane_mask, pole_mask, intr


def cmd_calibrate(args) -> int:
    cfg = _load_cfg(args)
    cloud, lane_mask, pole_mask, intr = _load_bundle(args, cfg)
    extrinsic, report = calibrate(cloud, lane_mask, pole_mask, intr, cfg)
    save_extrinsic(args.out, extrinsic)
    report_text = report.format()
    if args.report:
        Path(args.report).write_text(report_text, encoding="utf-8")
    sys.stdout.write(report_text)
    return 0


def cmd_coarse(args) -> int:
    cfg = _load_cfg(args)
    cloud, lane_mask, pole_mask, intr = _load_bundle(args, cfg)
    cf = extract_cloud_features(cloud, seed=cfg.seed, cfg=cfg)
    imf = extract_image_features(lane_mask, pole_mask, cfg)
    ev = build_evaluator(cf, imf, intr)
    report = CalibrationReport()
    extrinsic = coarse_calibrate(cf, imf, ev, report)
    save_extrinsic(args.out, extrinsic)
    sys.stdout.write(f"candidates: {report.candidates}\n")
    sys.stdout.write(f"coarse_cost: {report.coarse_cost:.6f}\n")
    return 0


def cmd_refine(args) -> int:
    cfg = _load_cfg(args)
    cloud, lane_mask, pole_mask, intr = _load_bundle(args, cfg)
    initial = load_extrinsic(args.init)
    cf = extract_cloud_features(cloud, seed=cfg.seed, cfg=cfg)
    imf = extract_image_features(lane_mask, pole_mask, cfg)
    ev = build_evaluator(cf, imf, intr)
    result = refine(initial, ev, cfg.refinement())
    save_extrinsic(args.out, result)
    sys.stdout.write(f"initial_cost: {cost(initial, ev):.6f}\n")
    sys.stdout.write(f"refined_cost: {cost(result, ev):.6f}\n")
    return 0


def cmd_evaluate(args) -> int:
    est = load_extrinsic(args.estimated)
    ref = load_extrinsic(args.reference)
    err = evaluation.calibration_error(est, ref)
    sys.stdout.write(
        f"dt_m: {err.dt:.6f}\n"
        f"dtheta_deg: {math.degrees(err.dtheta):.6f}\n"
    )
    sys.stdout.write(evaluation.CalibrationError.CSV_HEADER + "\n")
    sys.stdout.write(err.csv_row() + "\n")
    return 0


def cmd_project(args) -> int:
    cfg = _load_cfg(args)
    intr = load_intrinsics(args.intrinsics)
    cloud = PointCloud.from_array(load_cloud(args.cloud))
    extrinsic = load_extrinsic(args.extrinsic)
    img = load_image(args.image).copy()
    lane_mask = load_mask(args.lane_mask, "lane") if args.lane_mask else None

    lane_sel = np.zeros(len(cloud), dtype=bool)
    pole_sel = np.zeros(len(cloud), dtype=bool)
    try:
        seg = fit_ground_plane(cloud, cfg.seed, cfg)
        lane_idx = extract_lane_points(seg, cloud, cfg.seed + 1, cfg)
        lane_sel[lane_idx] = True
        lines = ransac_line3d(
            cloud.xyz[lane_idx], cfg.line_inlier_tol, cfg.seed + 2,
            trials=cfg.line_trials, min_inliers=cfg.line_min_inliers,
        )
        if lines:
            frame = ground_parallel_rotation(seg.plane, lines[0].line)
            pole_idx, _ = extract_pole_points(seg, cloud, frame, cfg)
            pole_sel[pole_idx] = True
    except CalibError:
        pass  # plain intensity overlay when feature extraction fails

    p_c = extrinsic.apply(cloud.xyz)
    z = p_c[:, 2]
    valid = z > EPS_Z
    zs = np.where(valid, z, 1.0)
    iu = np.rint(intr.fx * p_c[:, 0] / zs + intr.cx).astype(int)
    iv = np.rint(intr.fy * p_c[:, 1] / zs + intr.cy).astype(int)
    h, w = img.shape[:2]
    ok = valid & (iu >= 0) & (iu < w) & (iv >= 0) & (iv < h)

    imax = cloud.intensity.max() if cloud.intensity.max() > 0 else 1.0
    shade = np.clip(cloud.intensity / imax * 255.0, 0, 255).astype(np.uint8)
    other = ok & ~lane_sel & ~pole_sel
    img[iv[other], iu[other]] = np.column_stack([shade[other]] * 3)
    sel = ok & lane_sel
    img[iv[sel], iu[sel]] = (0, 255, 0)
    sel = ok & pole_sel
    img[iv[sel], iu[sel]] = (255, 0, 0)
    save_ppm(args.out, img)

    if args.stats:
        if lane_mask is None:
            sys.stderr.write("--stats needs --lane-mask\n")
            return 1
        dil = _dilate(lane_mask.bits, 2)
        sel = ok & lane_sel
        total = int(sel.sum())
        inside = int(dil[iv[sel], iu[sel]].sum()) if total else 0
        frac = inside / total if total else 0.0
        sys.stdout.write(f"lane_points_projected: {total}\n")
        sys.stdout.write(f"lane_points_in_mask: {inside}\n")
        sys.stdout.write(f"lane_in_mask_fraction: {frac:.4f}\n")
    return 0


def _dilate(bits: np.ndarray, radius: int) -> np.ndarray:
    out = bits.copy()
    for _ in range(radius):
        grown = out.copy()
        grown[1:] |= out[:-1]
        grown[:-1] |= out[1:]
        grown[:, 1:] |= out[:, :-1]
        grown[:, :-1] |= out[:, 1:]
        out = grown
    return out


def cmd_synth(args) -> int:
    spec = synth.load_scene_spec(args.spec)
    if args.seed is not None:
        import dataclasses

        spec = dataclasses.replace(spec, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cloud, lane_mask, pole_mask, gt = synth.generate(spec)
    save_cloud(out / "frame_cloud.bin", cloud.to_array())
    save_pgm(out / "frame_lane.pgm", np.where(lane_mask.bits, 255, 0).astype(np.uint8))
    save_pgm(out / "frame_pole.pgm", np.where(pole_mask.bits, 255, 0).astype(np.uint8))
    k = spec.intrinsics
    (out / "intrinsics.txt").write_text(
        f"fx = {k.fx:.17g}\nfy = {k.fy:.17g}\ncx = {k.cx:.17g}\ncy = {k.cy:.17g}\n"
        f"width = {k.width}\nheight = {k.height}\n",
        encoding="utf-8",
    )
    save_extrinsic(out / "extrinsic_gt.txt", gt)
    sys.stdout.write(f"wrote 5 files to {out}\n")
    return 0


def _sweep_worker(task):
    frame_dir, ref_path, n_trials, max_t, max_theta, seed, cfg_kw, fi = task
    cfg = PipelineConfig(**cfg_kw)
    frame = Path(frame_dir)
    intr = load_intrinsics(frame / "intrinsics.txt")
    cloud = PointCloud.from_array(load_cloud(frame / "frame_cloud.bin"))
    lane_mask = load_mask(frame / "frame_lane.pgm", "lane", intr)
    pole_mask = load_mask(frame / "frame_pole.pgm", "pole", intr)
    cf = extract_cloud_features(cloud, seed=cfg.seed, cfg=cfg)
    imf = extract_image_features(lane_mask, pole_mask, cfg)
    ev = build_evaluator(cf, imf, intr)
    ref = load_extrinsic(ref_path)
    return evaluation.robustness_sweep(
        [ev], ref, n_trials, max_t, max_theta,
        seed + 10007 * fi, refine_cfg=cfg.refinement(),
    )


def cmd_sweep(args) -> int:
    cfg = _load_cfg(args)
    import dataclasses

    cfg_kw = dataclasses.asdict(cfg)
    max_theta = math.radians(args.max_theta_deg)
    tasks = [
        (frame, args.ref, args.trials, args.max_t, max_theta, cfg.seed, cfg_kw, fi)
        for fi, frame in enumerate(args.frames)
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_sweep_worker, tasks))
    else:
        results = [_sweep_worker(t) for t in tasks]
    rows = [t for sub in results for t in sub]
    sys.stdout.write("magnitude," + evaluation.CalibrationError.CSV_HEADER + "\n")
    for t in rows:
        sys.stdout.write(f"{t.initial_magnitude:.9g}," + t.refined_error.csv_row() + "\n")
    mae = evaluation.aggregate([t.refined_error for t in rows])
    sys.stdout.write("MAE," + mae.csv_row() + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="linecalib",
        description="LiDAR-camera extrinsic calibration from lane/pole line features",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="full pipeline: extract, coarse solve, refine")
    _add_bundle_args(p)
    _add_common(p)
    p.add_argument("--out", required=True, help="output extrinsic file")
    p.add_argument("--report", default=None, help="optional report file")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("coarse", help="stop after the coarse P3L solve")
    _add_bundle_args(p)
    _add_common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_coarse)

    p = sub.add_parser("refine", help="refine a provided initial extrinsic")
    _add_bundle_args(p)
    _add_common(p)
    p.add_argument("--init", required=True, help="initial extrinsic file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("evaluate", help="compare two extrinsic files")
    p.add_argument("estimated")
    p.add_argument("reference")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("project", help="render a point-cloud overlay image")
    p.add_argument("--cloud", required=True)
    p.add_argument("--intrinsics", required=True)
    p.add_argument("--extrinsic", required=True)
    p.add_argument("--image", required=True, help="background PGM/PPM image")
    p.add_argument("--out", required=True, help="output PPM")
    p.add_argument("--lane-mask", default=None)
    p.add_argument("--stats", action="store_true", help="print lane-in-mask stats")
    _add_common(p)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("synth", help="generate a synthetic frame bundle")
    p.add_argument("--spec", required=True, help="scene spec file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sweep", help="miscalibration robustness protocol")
    p.add_argument("--frames", nargs="+", required=True, help="frame bundle directories")
    p.add_argument("--ref", required=True, help="reference extrinsic file")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--max-t", type=float, default=1.0)
    p.add_argument("--max-theta-deg", type=float, default=6.0)
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CalibError as e:
        code = STAGE_EXIT_CODES.get(e.stage, 1)
        sys.stderr.write(f"error ({e.stage}): {e}\n")
        return code


if __name__ == "__main__":
    sys.exit(main())
