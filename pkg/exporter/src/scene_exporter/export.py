"""Run upstream models on an image and emit one scene file.

The exporter is strictly upstream-model IO: it never computes scores,
features, or targets.  Backends are injectable, so tests (and callers
with custom models) can pass their own callables in place of the lazily
loaded defaults.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from . import backends, stub
from .writer import SceneDocument, write_scene


@dataclass
class ExportConfig:
    detector: str = "torchvision"
    pose: str = "torchvision"
    depth: str = "depth-anything"
    captioner: str | None = None
    conf: float = 0.25
    stub: bool = False


def export_scene(
    image_path,
    out_path,
    config: ExportConfig | None = None,
    *,
    detector=None,
    pose=None,
    depth=None,
    captioner=None,
) -> Path:
    """Write a scene file for one image; returns the JSON path.

    In stub mode a fixed synthetic-equivalent scene is emitted without
    touching any model, for CI and smoke tests.
    """
    config = config or ExportConfig()
    if config.stub:
        return write_scene(stub.stub_document(), out_path)

    image = Image.open(image_path).convert("RGB")
    width, height = image.size

    detector = detector or backends.make_detector(config.detector, config.conf)
    pose = pose or backends.make_pose(config.pose)
    depth = depth or backends.make_depth(config.depth)
    if captioner is None and config.captioner:
        captioner = backends.make_captioner(config.captioner)

    detections = detector(image)
    landmarks = pose(image)
    raster, intrinsics = depth(image)
    raster = np.asarray(raster, dtype=np.float32)
    if raster.shape != (height, width):
        raise ValueError(f"depth backend returned {raster.shape} for a {width}x{height} image")

    flags = []
    if landmarks is None:
        landmarks = {}
        flags.append("no_pose")

    doc = SceneDocument(
        image_width=width,
        image_height=height,
        detections=detections,
        landmarks=landmarks,
        depth_kind="depth_map",
        depth_data=raster,
        intrinsics=intrinsics,
        meta={
            "source_image": str(image_path),
            "detector": config.detector,
            "pose": config.pose,
            "depth": config.depth,
            "captioner": config.captioner,
            "conf_threshold": config.conf,
            "flags": flags,
        },
    )
    if captioner is not None:
        doc.captions = {
            i: captioner(image, det.box) for i, det in enumerate(detections)
        }
    return write_scene(doc, out_path)
