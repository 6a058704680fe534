"""Build a scene document by hand, save it, reload it, lift pixels.

A scene is one image's worth of upstream outputs: detections, body
landmarks, and a dense depth source.  This walkthrough constructs a tiny
one from scratch and shows the pinhole lifting at work.
"""

import tempfile
from pathlib import Path

import numpy as np

from pointtarget import (
    BoundingBox,
    Detection,
    DepthSource,
    Intrinsics,
    Landmark,
    PoseSet,
    Scene,
    lift_detection,
    lift_pixel,
    load_scene,
    save_scene,
)

intr = Intrinsics(fx=300.0, fy=300.0, cx=160.0, cy=120.0)

# A flat wall of depth 2 m with a nearer slab where the object sits.
depth_values = np.full((240, 320), 2.0, dtype=np.float32)
depth_values[100:180, 200:280] = 1.4
depth = DepthSource.depth_map(depth_values, intr)

pose = PoseSet.from_landmarks(
    [
        Landmark("left_shoulder", 120, 80), Landmark("right_shoulder", 80, 80),
        Landmark("left_elbow", 135, 110), Landmark("right_elbow", 70, 110),
        Landmark("left_wrist", 170, 105), Landmark("right_wrist", 65, 140),
        Landmark("left_hip", 115, 160), Landmark("right_hip", 90, 160),
    ]
)

scene = Scene(
    image_width=320,
    image_height=240,
    detections=[Detection(0, "cup", 0.91, BoundingBox(205, 110, 275, 175))],
    pose=pose,
    depth=depth,
)

print("lift principal point:", lift_pixel(depth, 160, 120))
print("lift off-axis pixel:", lift_pixel(depth, 240, 120))
print("lift the cup detection:", lift_detection(depth, scene.detections[0]))

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "scene.json"
    save_scene(scene, path)
    print("\nwrote", path.name, "and", path.with_suffix("").name + ".depth.bin")
    again = load_scene(path)
    print("reloaded detections:", [(d.id, d.label) for d in again.detections])
    print("depth round-trips bit-exactly:", np.array_equal(again.depth.data, depth_values))
