"""Coarse pose from three line correspondences (two parallel lanes + one pole).

In the ground-parallel frame G the lane directions are (1, 0, 0) and the
pole direction is (0, 0, 1).  The rotation camera<-G is parameterized as
R = R' @ Rot(X, alpha) @ Rot(Z, beta) with the first column of R' equal
to the back-projected normal of the pole image line, which satisfies the
pole constraint identically and reduces the lane constraints to a
trigonometric system in (alpha, beta).  Translation then follows from a
3x3 linear system, one plane constraint per line.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cloud_features import GroundParallelFrame
from .errors import DegenerateNormals, NoSolution
from .geometry import (
    Extrinsic,
    Intrinsics,
    Line2D,
    Line3D,
    backproject_line,
    matrix_to_angle_axis,
    rot_x,
    rot_z,
)

_LANE_DIR_G = np.array([1.0, 0.0, 0.0])
_POLE_DIR_G = np.array([0.0, 0.0, 1.0])

MAX_CONDITION = 1e6


@dataclass(frozen=True)
class P3LProblem:
    lane1_img: Line2D
    lane2_img: Line2D
    pole_img: Line2D
    lane1_cloud: Line3D
    lane2_cloud: Line3D
    pole_cloud: Line3D
    frame: GroundParallelFrame
    intrinsics: Intrinsics

    def __post_init__(self):
        R = self.frame.rotation
        for lane in (self.lane1_cloud, self.lane2_cloud):
            d = R @ lane.direction
            if abs(float(d @ _LANE_DIR_G)) < math.cos(math.radians(2.0)):
                raise ValueError("cloud lane direction deviates > 2 deg from X in G")
        dp = R @ self.pole_cloud.direction
        if abs(float(dp @ _POLE_DIR_G)) < math.cos(math.radians(15.0)):
            raise ValueError("cloud pole direction deviates > 15 deg from Z in G")


def _orthonormal_from_first(n: np.ndarray) -> np.ndarray:
    """A rotation matrix whose first column is the unit vector n."""
    e = np.zeros(3)
    e[int(np.argmin(np.abs(n)))] = 1.0
    u = e - (e @ n) * n
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    return np.column_stack([n, u, v])


def solve_p3l(prob: P3LProblem) -> list[Extrinsic]:
    """All candidate extrinsics consistent with the three correspondences.

    Candidates failing cheirality (the representative point of each line
    must land in front of the camera) or with an ill-conditioned
    translation system are dropped.  Returns 0 to 4 candidates.
    """
    k = prob.intrinsics
    n1 = backproject_line(k, prob.lane1_img)
    n2 = backproject_line(k, prob.lane2_img)
    n3 = backproject_line(k, prob.pole_img)
    N = np.stack([n1, n2, n3])
    sv = np.linalg.svd(N, compute_uv=False)
    if sv[-1] < 1e-6:
        raise DegenerateNormals("back-projected normals span < 3 dimensions")
    well_conditioned = sv[0] / sv[-1] <= MAX_CONDITION

    R_prime = _orthonormal_from_first(n3)
    # lane constraint: n_i . (R' RotX(a) RotZ(b) e1) = 0 with
    # RotX(a) RotZ(b) e1 = (cos b, cos a sin b, sin a sin b)
    m1 = R_prime.T @ n1
    m2 = R_prime.T @ n2
    A = m2[0] * m1[1] - m1[0] * m2[1]
    B = m2[0] * m1[2] - m1[0] * m2[2]
    if abs(A) < 1e-14 and abs(B) < 1e-14:
        raise DegenerateNormals("lane constraints do not determine alpha")
    alpha0 = math.atan2(-A, B)

    R_LG = prob.frame.rotation
    # representative points, one per line, in enumeration order lane1/lane2/pole
    pts_l = [prob.lane1_cloud.point, prob.lane2_cloud.point, prob.pole_cloud.point]
    candidates = []
    for alpha in (alpha0, alpha0 + math.pi):
        ca, sa = math.cos(alpha), math.sin(alpha)
        k1 = m1[1] * ca + m1[2] * sa
        k2 = m2[1] * ca + m2[2] * sa
        # pick the better-conditioned equation for beta
        if abs(m1[0]) + abs(k1) >= abs(m2[0]) + abs(k2):
            beta0 = math.atan2(m1[0], -k1)
        else:
            beta0 = math.atan2(m2[0], -k2)
        for beta in (beta0, beta0 + math.pi):
            R_GC = R_prime @ rot_x(alpha) @ rot_z(beta)
            R = R_GC @ R_LG
            if not well_conditioned:
                continue
            # translation: n_i . t = -n_i . (R p_i)
            b = np.array([-(N[i] @ (R @ pts_l[i])) for i in range(3)])
            t = np.linalg.solve(N, b)
            # cheirality: representative points in front of the camera
            depths = [(R @ p + t)[2] for p in pts_l]
            if min(depths) <= 0:
                continue
            candidates.append(Extrinsic(matrix_to_angle_axis(R), t))
    if not candidates:
        raise NoSolution("every (alpha, beta) candidate was dropped")
    return candidates
