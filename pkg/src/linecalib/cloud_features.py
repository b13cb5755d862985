"""Point-cloud features: ground plane, lane points, pole points, 3D lines.

The extraction chain: RANSAC ground plane -> intensity-thresholded lane
points filtered by fitted lines -> ground-parallel frame from the plane
normal and a reference lane -> elevation-grid pole points -> per-cluster
pole lines.  Everything is deterministic for a fixed seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import PipelineConfig
from .errors import (
    DegenerateFrame,
    InsufficientLines,
    NoGroundPlane,
    NoLanePoints,
    NoPolePoints,
)
from .geometry import Line3D, Plane3D


@dataclass(frozen=True)
class PointCloud:
    xyz: np.ndarray        # (N, 3) meters
    intensity: np.ndarray  # (N,) reflectance >= 0

    def __post_init__(self):
        xyz = np.ascontiguousarray(np.asarray(self.xyz, dtype=float).reshape(-1, 3))
        inten = np.asarray(self.intensity, dtype=float).reshape(-1)
        if len(xyz) != len(inten):
            raise ValueError("xyz / intensity length mismatch")
        if not (np.isfinite(xyz).all() and np.isfinite(inten).all()):
            raise ValueError("cloud contains non-finite values")
        xyz.setflags(write=False)
        inten.setflags(write=False)
        object.__setattr__(self, "xyz", xyz)
        object.__setattr__(self, "intensity", inten)

    def __len__(self):
        return len(self.xyz)

    @staticmethod
    def from_array(arr: np.ndarray) -> "PointCloud":
        arr = np.asarray(arr, dtype=float)
        return PointCloud(arr[:, :3], arr[:, 3])

    def to_array(self) -> np.ndarray:
        return np.column_stack([self.xyz, self.intensity])


@dataclass(frozen=True)
class GroundSegmentation:
    plane: Plane3D
    ground_indices: np.ndarray
    object_indices: np.ndarray


@dataclass(frozen=True)
class GroundParallelFrame:
    """Rotation R taking LiDAR-frame vectors into the ground-parallel frame.

    Row 2 is the ground normal, row 0 the reference lane direction
    projected onto the plane; same origin as the LiDAR.
    """

    rotation: np.ndarray  # (3, 3)

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float).reshape(3, 3).copy()
        R.setflags(write=False)
        object.__setattr__(self, "rotation", R)

    def to_ground(self, p: np.ndarray) -> np.ndarray:
        return np.asarray(p, dtype=float) @ self.rotation.T

    def to_lidar(self, p: np.ndarray) -> np.ndarray:
        return np.asarray(p, dtype=float) @ self.rotation


@dataclass(frozen=True)
class ScoredLine3D:
    line: Line3D
    inliers: np.ndarray  # indices into the point array the fit consumed


@dataclass(frozen=True)
class FeatureSetCloud:
    lane_points: np.ndarray
    pole_points: np.ndarray
    lane_lines: list[ScoredLine3D] = field(default_factory=list)
    pole_lines: list[ScoredLine3D] = field(default_factory=list)
    frame: GroundParallelFrame = None


def fit_ground_plane(
    cloud: PointCloud, seed: int, cfg: PipelineConfig | None = None
) -> GroundSegmentation:
    """RANSAC plane fit over the whole cloud, normal oriented towards +Z."""
    cfg = cfg or PipelineConfig()
    pts = cloud.xyz
    n = len(pts)
    if n < 1000:
        raise NoGroundPlane(f"cloud too small ({n} points, need 1000)")
    rng = np.random.default_rng(seed)
    band = cfg.plane_inlier_band
    best_count = -1
    best_normal = None
    best_d = None
    samples = rng.integers(0, n, size=(cfg.plane_trials, 3))
    for tri in samples:
        p0, p1, p2 = pts[tri]
        normal = np.cross(p1 - p0, p2 - p0)
        nn = np.linalg.norm(normal)
        if nn < 1e-9:
            continue
        normal /= nn
        d = -normal @ p0
        count = int((np.abs(pts @ normal + d) <= band).sum())
        if count > best_count:
            best_count, best_normal, best_d = count, normal, d
    if best_count < cfg.plane_min_inlier_ratio * n:
        raise NoGroundPlane(
            f"best plane has {best_count}/{n} inliers "
            f"(< {cfg.plane_min_inlier_ratio:.0%})"
        )
    # least-squares refinement on the consensus set
    inliers = np.abs(pts @ best_normal + best_d) <= band
    sub = pts[inliers]
    centroid = sub.mean(axis=0)
    _, _, vt = np.linalg.svd(sub - centroid, full_matrices=False)
    normal = vt[2]
    if normal[2] < 0:
        normal = -normal
    plane = Plane3D(normal, -normal @ centroid)
    ground = np.abs(plane.signed_distance(pts)) <= band
    if ground.sum() < cfg.plane_min_inlier_ratio * n:
        raise NoGroundPlane("refined plane lost its consensus")
    idx = np.arange(n)
    return GroundSegmentation(
        plane=plane, ground_indices=idx[ground], object_indices=idx[~ground]
    )


def ransac_line3d(
    points: np.ndarray,
    inlier_tol: float,
    seed: int,
    trials: int = 100,
    min_inliers: int = 20,
) -> list[ScoredLine3D]:
    """Greedy sequential RANSAC line fitting.

    Fits the best-supported line, removes its inliers, repeats while a
    line with >= min_inliers support exists.  Each line is refined by a
    principal-axis least-squares fit over its inliers, so collinear
    dashed segments merge into a single line.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(points) < 2:
        raise ValueError("ransac_line3d needs at least 2 points")
    rng = np.random.default_rng(seed)
    pool = np.arange(len(points))
    out: list[ScoredLine3D] = []
    while len(pool) >= max(2, min_inliers):
        sub = points[pool]
        best_count = -1
        best_line = None
        for _ in range(trials):
            i, j = rng.integers(0, len(pool), size=2)
            if i == j:
                continue
            d = sub[j] - sub[i]
            nd = np.linalg.norm(d)
            if nd < 1e-9:
                continue
            line = Line3D(sub[i], d / nd)
            count = int((line.distance(sub) <= inlier_tol).sum())
            if count > best_count:
                best_count, best_line = count, line
        if best_line is None or best_count < min_inliers:
            break
        inl = best_line.distance(sub) <= inlier_tol
        refined = _fit_line_lsq(sub[inl])
        inl = refined.distance(sub) <= inlier_tol
        if int(inl.sum()) < min_inliers:
            break
        out.append(ScoredLine3D(line=refined, inliers=pool[inl]))
        pool = pool[~inl]
    return out


def _fit_line_lsq(pts: np.ndarray) -> Line3D:
    """Centroid + principal axis, direction sign canonicalized."""
    centroid = pts.mean(axis=0)
    _, _, vt = np.linalg.svd(pts - centroid, full_matrices=False)
    d = vt[0]
    k = int(np.argmax(np.abs(d)))
    if d[k] < 0:
        d = -d
    return Line3D(centroid, d)


def extract_lane_points(
    seg: GroundSegmentation,
    cloud: PointCloud,
    seed: int,
    cfg: PipelineConfig | None = None,
) -> np.ndarray:
    """Indices of lane points: intensity filter then distance-to-line filter."""
    cfg = cfg or PipelineConfig()
    gi = seg.ground_indices
    inten = cloud.intensity[gi]
    thr = inten.mean() + cfg.intensity_sigma_scale * inten.std()
    bright = gi[inten > thr]
    if len(bright) < 2:
        raise NoLanePoints(f"{len(bright)} points above intensity threshold")
    pts = cloud.xyz[bright]
    lines = ransac_line3d(
        pts,
        cfg.line_inlier_tol,
        seed,
        trials=cfg.line_trials,
        min_inliers=cfg.line_min_inliers,
    )
    if not lines:
        raise NoLanePoints("no line structure among high-intensity points")
    d_min = np.min(np.stack([s.line.distance(pts) for s in lines]), axis=0)
    keep = bright[d_min < cfg.lane_dist_max]
    if len(keep) < cfg.min_feature_points:
        raise NoLanePoints(f"only {len(keep)} lane points survive the line filter")
    return keep


def ground_parallel_rotation(plane: Plane3D, reference_lane: Line3D) -> GroundParallelFrame:
    """Rotation whose Z is the plane normal and X follows the lane."""
    z = plane.normal
    d = reference_lane.direction
    if abs(float(d @ z)) >= math.cos(math.radians(5.0)):
        raise DegenerateFrame("lane direction within 5 deg of the plane normal")
    x = d - (d @ z) * z
    x = x / np.linalg.norm(x)
    y = np.cross(z, x)
    return GroundParallelFrame(rotation=np.stack([x, y, z]))


def extract_pole_points(
    seg: GroundSegmentation,
    cloud: PointCloud,
    frame: GroundParallelFrame,
    cfg: PipelineConfig | None = None,
):
    """Indices of pole points plus a grid-cell id per point.

    Object points are rotated into the ground-parallel frame, binned on
    an x-y grid, and only cells whose maximum elevation clears pole_h1
    survive; near-ground points below pole_h0 are dropped.
    """
    cfg = cfg or PipelineConfig()
    oi = seg.object_indices
    g = frame.to_ground(cloud.xyz[oi])
    in_grid = (
        (g[:, 0] >= cfg.grid_x_min)
        & (g[:, 0] < cfg.grid_x_max)
        & (g[:, 1] >= cfg.grid_y_min)
        & (g[:, 1] < cfg.grid_y_max)
    )
    oi, g = oi[in_grid], g[in_grid]
    if len(oi) == 0:
        raise NoPolePoints("no object points inside the pole grid")
    nx = int(math.ceil((cfg.grid_x_max - cfg.grid_x_min) / cfg.grid_cell))
    cx = ((g[:, 0] - cfg.grid_x_min) / cfg.grid_cell).astype(int)
    cy = ((g[:, 1] - cfg.grid_y_min) / cfg.grid_cell).astype(int)
    cell = cy * nx + cx
    max_z = np.full(cell.max() + 1, -np.inf)
    np.maximum.at(max_z, cell, g[:, 2])
    keep = (max_z[cell] > cfg.pole_h1) & (g[:, 2] > cfg.pole_h0)
    if int(keep.sum()) < cfg.min_feature_points:
        raise NoPolePoints(f"only {int(keep.sum())} pole points survive")
    return oi[keep], cell[keep]


def cluster_cells(cells: np.ndarray, nx: int) -> np.ndarray:
    """Label points by 8-connected components of their grid cells."""
    unique = np.unique(cells)
    cell_set = set(int(c) for c in unique)
    label_of: dict[int, int] = {}
    next_label = 0
    for c in unique:
        c = int(c)
        if c in label_of:
            continue
        stack = [c]
        label_of[c] = next_label
        while stack:
            cur = stack.pop()
            x, y = cur % nx, cur // nx
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    nb = (y + dy) * nx + (x + dx)
                    if nb in cell_set and nb not in label_of and 0 <= x + dx < nx:
                        label_of[nb] = next_label
                        stack.append(nb)
        next_label += 1
    return np.array([label_of[int(c)] for c in cells])


def extract_cloud_features(
    cloud: PointCloud, seed: int = 0, cfg: PipelineConfig | None = None
) -> FeatureSetCloud:
    """Run the full point-cloud extraction chain."""
    cfg = cfg or PipelineConfig()
    seg = fit_ground_plane(cloud, seed, cfg)
    lane_idx = extract_lane_points(seg, cloud, seed + 1, cfg)
    lane_pts = cloud.xyz[lane_idx]
    lane_lines = ransac_line3d(
        lane_pts,
        cfg.line_inlier_tol,
        seed + 2,
        trials=cfg.line_trials,
        min_inliers=cfg.line_min_inliers,
    )
    if not lane_lines:
        raise InsufficientLines("no lane line could be fitted")
    # the dominant paint line sets the driving direction; span keeps short
    # perpendicular markings (stop lines, crosswalk bars) from winning, and
    # the inlier count keeps sparse diagonals that graze two separate lane
    # corridors from out-ranking a dense true lane of similar extent
    reference = max(
        lane_lines,
        key=lambda s: len(s.inliers) * _inlier_span(s, lane_pts),
    )
    frame = ground_parallel_rotation(seg.plane, reference.line)
    ground_lines = [
        s for s in lane_lines if abs(frame.to_ground(s.line.direction)[2]) < 0.1
    ]
    # cost points come from any ground-parallel paint line; points that
    # only supported rejected lines (e.g. bright clutter edges) are
    # dropped so they cannot bias the alignment cost
    if ground_lines:
        d_min = np.min(
            np.stack([s.line.distance(lane_pts) for s in ground_lines]), axis=0
        )
        lane_pts = lane_pts[d_min < cfg.lane_dist_max]
    # P3L uses only the lines that follow the driving direction
    lane_lines = _canonical_lane_lines(lane_lines, frame)
    pole_idx, cells = extract_pole_points(seg, cloud, frame, cfg)
    pole_pts = cloud.xyz[pole_idx]
    nx = int(math.ceil((cfg.grid_x_max - cfg.grid_x_min) / cfg.grid_cell))
    labels = cluster_cells(cells, nx)
    pole_lines = []
    for lab in range(labels.max() + 1):
        sub = pole_pts[labels == lab]
        if len(sub) < cfg.line_min_inliers:
            continue
        fitted = ransac_line3d(
            sub,
            cfg.line_inlier_tol,
            seed + 3 + lab,
            trials=cfg.line_trials,
            min_inliers=cfg.line_min_inliers,
        )
        if fitted:
            pole_lines.append(fitted[0])
    pole_lines = _canonical_pole_lines(pole_lines, frame)
    if len(lane_lines) < 2 or len(pole_lines) < 1:
        raise InsufficientLines(
            f"need >= 2 lane and >= 1 pole cloud lines, "
            f"got {len(lane_lines)} / {len(pole_lines)}"
        )
    return FeatureSetCloud(
        lane_points=lane_pts,
        pole_points=pole_pts,
        lane_lines=lane_lines,
        pole_lines=pole_lines,
        frame=frame,
    )


def _inlier_span(s: ScoredLine3D, pts: np.ndarray) -> float:
    proj = pts[s.inliers] @ s.line.direction
    return float(proj.max() - proj.min())


def _canonical_lane_lines(lines, frame):
    # keep ground-parallel lines within 2 deg of the reference direction,
    # re-oriented along +X in G; rejects diagonal artifacts across dashes
    out = []
    for s in lines:
        dg = frame.to_ground(s.line.direction)
        if abs(dg[2]) >= 0.1:
            continue
        if abs(dg[0]) < math.cos(math.radians(2.0)):
            continue
        if dg[0] < 0:
            s = ScoredLine3D(Line3D(s.line.point, -s.line.direction), s.inliers)
        out.append(s)
    return out


def _canonical_pole_lines(lines, frame):
    out = []
    for s in lines:
        dg = frame.to_ground(s.line.direction)
        if abs(dg[2]) <= 0.9:
            continue
        if dg[2] < 0:
            s = ScoredLine3D(Line3D(s.line.point, -s.line.direction), s.inliers)
        out.append(s)
    return out
