"""Write scene files in the pointtarget on-disk format.

The exporter never imports the resolver package; the JSON + float32
sidecar layout documented in the pointtarget README is the contract, and
this module implements it directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# Landmark vocabulary of the scene format (33 standard body joints).
LANDMARK_NAMES = (
    "nose",
    "left_eye_inner", "left_eye", "left_eye_outer",
    "right_eye_inner", "right_eye", "right_eye_outer",
    "left_ear", "right_ear",
    "mouth_left", "mouth_right",
    "left_shoulder", "right_shoulder",
    "left_elbow", "right_elbow",
    "left_wrist", "right_wrist",
    "left_pinky", "right_pinky",
    "left_index", "right_index",
    "left_thumb", "right_thumb",
    "left_hip", "right_hip",
    "left_knee", "right_knee",
    "left_ankle", "right_ankle",
    "left_heel", "right_heel",
    "left_foot_index", "right_foot_index",
)

REQUIRED_LANDMARKS = (
    "left_shoulder", "right_shoulder",
    "left_elbow", "right_elbow",
    "left_wrist", "right_wrist",
    "left_hip", "right_hip",
)


@dataclass
class RawDetection:
    label: str
    confidence: float
    box: tuple[float, float, float, float]  # x_min, y_min, x_max, y_max


@dataclass
class SceneDocument:
    """Everything needed to emit one scene file."""

    image_width: int
    image_height: int
    detections: list[RawDetection] = field(default_factory=list)
    # name -> (u, v, visibility); empty means no person was found
    landmarks: dict[str, tuple[float, float, float]] = field(default_factory=dict)
    depth_kind: str = "depth_map"
    depth_data: np.ndarray | None = None  # (H, W) or (H, W, 3) float32
    intrinsics: dict | None = None  # {"fx","fy","cx","cy"} for depth_map
    captions: dict[int, str] | None = None
    meta: dict | None = None


def _clamp_box(box, width, height):
    x0, y0, x1, y1 = box
    x0, x1 = max(0.0, float(x0)), min(float(width), float(x1))
    y0, y1 = max(0.0, float(y0)), min(float(height), float(y1))
    return x0, y0, x1, y1


def write_scene(doc: SceneDocument, out_path) -> Path:
    """Emit the scene JSON plus its depth sidecar; returns the JSON path."""
    out_path = Path(out_path)
    w, h = doc.image_width, doc.image_height
    if doc.depth_data is None:
        raise ValueError("a depth raster is required")
    depth = np.asarray(doc.depth_data, dtype=np.float32)
    expected = (h, w) if doc.depth_kind == "depth_map" else (h, w, 3)
    if depth.shape != expected:
        raise ValueError(f"depth raster shape {depth.shape} != {expected}")
    if doc.depth_kind == "depth_map" and doc.intrinsics is None:
        raise ValueError("depth_map needs intrinsics")

    detections = []
    for i, det in enumerate(doc.detections):
        x0, y0, x1, y1 = _clamp_box(det.box, w, h)
        if x1 - x0 < 1 or y1 - y0 < 1:
            continue  # degenerate after clamping
        detections.append(
            {
                "id": i,
                "label": str(det.label),
                "confidence": float(min(max(det.confidence, 0.0), 1.0)),
                "box": [x0, y0, x1, y1],
            }
        )
    kept_ids = {d["id"] for d in detections}

    pose = []
    if doc.landmarks:
        missing = [n for n in REQUIRED_LANDMARKS if n not in doc.landmarks]
        if missing:
            raise ValueError(f"pose present but missing required landmarks: {missing}")
    for name, (u, v, vis) in doc.landmarks.items():
        if name not in LANDMARK_NAMES:
            raise ValueError(f"unknown landmark name {name!r}")
        # the format allows up to a 25% off-frame margin
        u = min(max(float(u), -0.25 * w), 1.25 * w)
        v = min(max(float(v), -0.25 * h), 1.25 * h)
        pose.append({"name": name, "u": u, "v": v, "visibility": float(min(max(vis, 0.0), 1.0))})

    sidecar = out_path.stem + ".depth.bin"
    depth_doc = {
        "kind": doc.depth_kind,
        "width": w,
        "height": h,
        "data": sidecar,
    }
    if doc.depth_kind == "depth_map":
        intr = doc.intrinsics
        depth_doc["intrinsics"] = {
            "fx": float(intr["fx"]),
            "fy": float(intr["fy"]),
            "cx": float(intr["cx"]),
            "cy": float(intr["cy"]),
        }

    payload: dict = {
        "image_width": w,
        "image_height": h,
        "detections": detections,
        "pose": pose,
        "depth": depth_doc,
    }
    if doc.captions:
        payload["captions"] = {
            str(k): str(v) for k, v in doc.captions.items() if k in kept_ids
        }
    if doc.meta is not None:
        payload["meta"] = doc.meta

    out_path.parent.mkdir(parents=True, exist_ok=True)
    (out_path.parent / sidecar).write_bytes(np.ascontiguousarray(depth, dtype="<f4").tobytes())
    out_path.write_text(json.dumps(payload, indent=1), encoding="utf-8")
    return out_path
