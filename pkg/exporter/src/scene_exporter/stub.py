"""Fixed synthetic-equivalent scene for CI and smoke tests.

No models, no input image: one person pointing their right arm at the
left of two tabletop objects, with a painted depth raster that matches
the landmark and box geometry.  Output is byte-deterministic.
"""

from __future__ import annotations

import numpy as np

from .writer import RawDetection, SceneDocument

WIDTH, HEIGHT = 640, 480
INTRINSICS = {"fx": 600.0, "fy": 600.0, "cx": 320.0, "cy": 240.0}

# (label, confidence, box, depth in meters)
OBJECTS = (
    ("bottle", 0.88, (140.0, 270.0, 210.0, 370.0), 1.5),
    ("cup", 0.74, (290.0, 300.0, 350.0, 360.0), 1.7),
)

# name -> (u, v, depth); right arm extended toward the bottle
LANDMARKS = {
    "nose": (405.0, 120.0, 2.5),
    "left_shoulder": (450.0, 165.0, 2.5),
    "right_shoulder": (360.0, 165.0, 2.5),
    "left_elbow": (458.0, 232.0, 2.5),
    "right_elbow": (330.0, 188.0, 2.3),
    "left_wrist": (462.0, 292.0, 2.5),
    "right_wrist": (300.0, 210.0, 2.15),
    "left_hip": (440.0, 290.0, 2.5),
    "right_hip": (380.0, 290.0, 2.5),
}

PATCH_RADIUS = 12


def stub_depth() -> np.ndarray:
    depth = np.full((HEIGHT, WIDTH), 4.0, dtype=np.float32)

    # table plane y = 0.36 m below the camera axis
    rows = np.arange(HEIGHT, dtype=np.float32)
    with np.errstate(divide="ignore"):
        z_row = 0.36 * INTRINSICS["fy"] / np.maximum(rows - INTRINSICS["cy"], 1e-6)
    table = (z_row > 0.9) & (z_row < 2.3)
    depth[table, :] = z_row[table, None]

    for _, _, box, z in sorted(OBJECTS, key=lambda o: -o[3]):
        x0, y0, x1, y1 = [int(round(v)) for v in box]
        depth[y0 : y1 + 1, x0 : x1 + 1] = z

    for u, v, z in sorted(LANDMARKS.values(), key=lambda p: -p[2]):
        c, r = int(round(u)), int(round(v))
        depth[
            max(r - PATCH_RADIUS, 0) : r + PATCH_RADIUS + 1,
            max(c - PATCH_RADIUS, 0) : c + PATCH_RADIUS + 1,
        ] = z
    return depth


def stub_document() -> SceneDocument:
    return SceneDocument(
        image_width=WIDTH,
        image_height=HEIGHT,
        detections=[RawDetection(label, conf, box) for label, conf, box, _ in OBJECTS],
        landmarks={name: (u, v, 1.0) for name, (u, v, _) in LANDMARKS.items()},
        depth_kind="depth_map",
        depth_data=stub_depth(),
        intrinsics=INTRINSICS,
        captions={0: "a bottle of water on a table", 1: "a white cup"},
        meta={"flags": ["stub"], "detector": None, "pose": None, "depth": None},
    )
