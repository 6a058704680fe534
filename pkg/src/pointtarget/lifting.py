"""Lift 2D pixel locations into camera-frame 3D points.

Depth maps go through the pinhole model x = (u - cx) * z / fx,
y = (v - cy) * z / fy; point maps already store the 3D point per pixel.
Depth rasters contain holes (non-positive or non-finite entries), which
are filled from the median of valid neighbors in an expanding window.
"""

from __future__ import annotations

import numpy as np

from .scene import Detection, DepthSource, Intrinsics, Point3, PoseSet

# Hole-filling windows, tried in order; give up after the largest.
FILL_WINDOWS = (5, 9, 13)

# Detection depth comes from this central fraction of the box,
# never smaller than MIN_REGION_PX pixels on a side.
CENTER_FRACTION = 0.2
MIN_REGION_PX = 3


def backproject(u: float, v: float, z: float, intrinsics: Intrinsics) -> Point3:
    """Exact pinhole inverse at a continuous pixel location."""
    x = (u - intrinsics.cx) * z / intrinsics.fx
    y = (v - intrinsics.cy) * z / intrinsics.fy
    return Point3(x, y, float(z))


def project(point: Point3, intrinsics: Intrinsics) -> tuple[float, float]:
    """Pinhole projection of a camera-frame point with z > 0."""
    u = intrinsics.cx + intrinsics.fx * point.x / point.z
    v = intrinsics.cy + intrinsics.fy * point.y / point.z
    return (u, v)


def _nearest_index(u: float, v: float, depth: DepthSource) -> tuple[int, int]:
    col = min(max(int(round(u)), 0), depth.width - 1)
    row = min(max(int(round(v)), 0), depth.height - 1)
    return row, col


def _window_values(depth: DepthSource, row: int, col: int, half: int) -> np.ndarray:
    r0, r1 = max(row - half, 0), min(row + half + 1, depth.height)
    c0, c1 = max(col - half, 0), min(col + half + 1, depth.width)
    patch = depth.data[r0:r1, c0:c1]
    ok = depth.valid_mask()[r0:r1, c0:c1]
    return patch[ok]


def _sample(depth: DepthSource, row: int, col: int):
    """Depth (or point) at a pixel, hole-filled by windowed medians.

    Returns a float z for depth maps, a length-3 array for point maps,
    or None when no valid entry exists within the largest window.
    """
    if depth.valid_mask()[row, col]:
        return depth.data[row, col]
    for size in FILL_WINDOWS:
        values = _window_values(depth, row, col, size // 2)
        if values.size:
            return np.median(values, axis=0)
    return None


def lift_pixel(depth: DepthSource, u: float, v: float) -> Point3 | None:
    """Lift one pixel; None when no valid depth is found nearby.

    Raises ValueError for out-of-bounds pixels, which is a caller bug
    rather than a data hole.
    """
    if not (0 <= u < depth.width and 0 <= v < depth.height):
        raise ValueError(f"pixel ({u}, {v}) outside {depth.width}x{depth.height} raster")
    row, col = _nearest_index(u, v, depth)
    sample = _sample(depth, row, col)
    if sample is None:
        return None
    if depth.kind == "depth_map":
        return backproject(u, v, float(sample), depth.intrinsics)
    return Point3.from_array(sample)


def lift_detection(depth: DepthSource, det: Detection) -> Point3 | None:
    """3D centroid of a detection.

    The depth is the median over valid samples in the central region of
    the box (robust against stray foreground/background pixels); the x, y
    location is the box centroid.  None when the whole region is invalid.
    """
    u_c, v_c = det.box.centroid
    half_w = max(CENTER_FRACTION * det.box.width, MIN_REGION_PX) / 2.0
    half_h = max(CENTER_FRACTION * det.box.height, MIN_REGION_PX) / 2.0

    c0 = max(int(np.floor(u_c - half_w)), 0)
    c1 = min(int(np.ceil(u_c + half_w)), depth.width - 1)
    r0 = max(int(np.floor(v_c - half_h)), 0)
    r1 = min(int(np.ceil(v_c + half_h)), depth.height - 1)
    if c1 < c0 or r1 < r0:
        return None

    region = depth.data[r0 : r1 + 1, c0 : c1 + 1]
    ok = depth.valid_mask()[r0 : r1 + 1, c0 : c1 + 1]
    if not ok.any():
        return None
    values = region[ok]
    if depth.kind == "depth_map":
        z = float(np.median(values))
        return backproject(u_c, v_c, z, depth.intrinsics)
    return Point3.from_array(np.median(values, axis=0))


def lift_pose(depth: DepthSource, pose: PoseSet) -> dict[str, Point3 | None]:
    """Lift every landmark; off-frame pixels clamp to the border first."""
    lifted: dict[str, Point3 | None] = {}
    for name, lm in pose.landmarks.items():
        u = min(max(lm.u, 0.0), depth.width - 1.0)
        v = min(max(lm.v, 0.0), depth.height - 1.0)
        lifted[name] = lift_pixel(depth, u, v)
    return lifted
