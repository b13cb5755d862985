"""Semantic line-alignment cost.

For each class (lane, pole) the extracted LiDAR points are projected
through the candidate extrinsic and looked up in the class height map;
the cost is the sum of the two per-class means.  Points behind the
camera or outside the image contribute zero, so the cost is bounded by 2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import EPS_Z, Extrinsic, Intrinsics
from .image_features import HeightMap


@dataclass(frozen=True)
class CostEvaluator:
    lane_points: np.ndarray   # (N, 3) LiDAR frame
    pole_points: np.ndarray   # (M, 3)
    lane_height: HeightMap
    pole_height: HeightMap
    intrinsics: Intrinsics

    def __post_init__(self):
        lp = np.ascontiguousarray(np.asarray(self.lane_points, dtype=float).reshape(-1, 3))
        pp = np.ascontiguousarray(np.asarray(self.pole_points, dtype=float).reshape(-1, 3))
        if len(lp) == 0 or len(pp) == 0:
            raise ValueError("cost evaluator needs non-empty point sets")
        lp.setflags(write=False)
        pp.setflags(write=False)
        object.__setattr__(self, "lane_points", lp)
        object.__setattr__(self, "pole_points", pp)

    def __call__(self, e: Extrinsic) -> float:
        return cost(e, self)


def _class_term(R, t, pts, hmap: HeightMap, k: Intrinsics) -> float:
    p_c = pts @ R.T + t
    z = p_c[:, 2]
    valid = z > EPS_Z
    if not valid.any():
        return 0.0
    p_c = p_c[valid]
    u = k.fx * p_c[:, 0] / p_c[:, 2] + k.cx
    v = k.fy * p_c[:, 1] / p_c[:, 2] + k.cy
    return float(hmap.sample_bilinear(u, v).sum()) / len(pts)


def cost(e: Extrinsic, ev: CostEvaluator) -> float:
    R, t = e.matrix(), e.t
    return _class_term(R, t, ev.lane_points, ev.lane_height, ev.intrinsics) + _class_term(
        R, t, ev.pole_points, ev.pole_height, ev.intrinsics
    )
