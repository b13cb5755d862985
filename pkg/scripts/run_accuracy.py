#!/usr/bin/env python3
"""Full-pipeline accuracy over a batch of synthetic scenes.

For each scene seed, generates a noisy frame, runs the complete
calibration (extraction, coarse solve, refinement), and reports
translation / rotation error statistics plus wall-clock timing.

    python scripts/run_accuracy.py --scenes 50
"""
import argparse
import math
import sys
import time

import numpy as np

from linecalib.cloud_features import extract_cloud_features
from linecalib.config import PipelineConfig
from linecalib.evaluation import calibration_error
from linecalib.image_features import extract_image_features
from linecalib.pipeline import build_evaluator, calibrate, coarse_calibrate
from linecalib.synth import canonical_spec, generate


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenes", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0, help="pipeline seed")
    ap.add_argument("--coarse-only", action="store_true")
    args = ap.parse_args(argv)

    cfg = PipelineConfig(seed=args.seed)
    dts, dths, times = [], [], []
    for s in range(args.scenes):
        spec = canonical_spec(s)
        cloud, lane_mask, pole_mask, gt = generate(spec)
        t0 = time.perf_counter()
        if args.coarse_only:
            cf = extract_cloud_features(cloud, seed=cfg.seed, cfg=cfg)
            imf = extract_image_features(lane_mask, pole_mask, cfg)
            ev = build_evaluator(cf, imf, spec.intrinsics)
            pose = coarse_calibrate(cf, imf, ev)
        else:
            pose, _ = calibrate(cloud, lane_mask, pole_mask, spec.intrinsics, cfg)
        elapsed = time.perf_counter() - t0
        err = calibration_error(pose, gt)
        dts.append(err.dt)
        dths.append(math.degrees(err.dtheta))
        times.append(elapsed)
        print(
            f"scene {s:3d}: dt {err.dt:7.4f} m  "
            f"dtheta {math.degrees(err.dtheta):7.4f} deg  "
            f"{elapsed:5.2f} s"
        )
    dts, dths = np.array(dts), np.array(dths)
    print(
        f"\n{args.scenes} scenes: "
        f"dt median {np.median(dts):.4f} max {dts.max():.4f} m | "
        f"dtheta median {np.median(dths):.4f} max {dths.max():.4f} deg | "
        f"time median {np.median(times):.2f} s"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
