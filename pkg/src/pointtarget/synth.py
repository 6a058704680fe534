"""Synthetic tabletop scenes with exact geometric ground truth.

Each scene is built from a true 3D layout: a camera at the origin
(x right, y down, z forward), a table plane, a person behind the table,
and box-shaped objects standing on it.  Joints and object cross-sections
are projected through the pinhole model to produce landmarks and
detections, and a depth raster is painted from the layout (nearest
surface wins where regions overlap).  Ground truth comes from a
brute-force oracle evaluated on the exact pre-noise geometry, so the
annotated target is well defined by construction.

Presets:
  easy       one pointing arm, objects spread laterally >= 100 px apart;
  hard       one pointing arm at one of two depth-stacked objects whose
             centroids line up with the shoulder in the image (the 2D-
             ambiguous case), plus a side object overlapping the front
             one heavily;
  neutral    both arms hanging, nobody points;
  both_arms  both arms point at the same object in an easy layout.

Generation is deterministic: scene i uses its own rng seeded with
(seed + i), so results do not depend on worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .scene import (
    BoundingBox,
    Detection,
    DepthSource,
    GroundTruth,
    Intrinsics,
    Landmark,
    Manifest,
    ManifestEntry,
    PoseSet,
    Scene,
    save_manifest,
    save_scene,
)

PRESETS = ("easy", "hard", "neutral", "both_arms")

# Manifest/ground-truth difficulty for each preset.
PRESET_DIFFICULTY = {"easy": "easy", "hard": "hard", "neutral": "easy", "both_arms": "easy"}

OBJECT_LABELS = ("bottle", "cup", "book", "bowl", "vase", "remote", "banana", "apple")

# Depth is painted in squares of this half-size around each landmark, so
# noisy landmark pixels still sample the joint's own depth.
PATCH_RADIUS_PX = 12

# A small core around each landmark pixel is repainted with the joint's
# own depth afterwards, so neighboring joints' patches (foreshortened
# arms) cannot steal the exact landmark pixel.  Landmark pixels are kept
# at least MIN_LANDMARK_SEP_PX apart so the cores stay disjoint.
CORE_RADIUS_PX = 2
MIN_LANDMARK_SEP_PX = 6

# Pointing arms aim at the target with at most this much angular error.
AIM_JITTER_DEG = 3.0

# Every non-target object must be at least this far (in 3D angle from the
# pointing shoulder) from the target, so the oracle argmax has margin.
MIN_TARGET_MARGIN_DEG = 6.0

# Hard preset: the stacked pair's centroids stay within this 2D angle of
# each other as seen from the pointing shoulder (the ray pierces both).
MAX_STACK_ANGLE_2D_DEG = 2.5

MAX_ATTEMPTS = 1000


class GenerationError(RuntimeError):
    """No feasible layout found within the attempt budget."""


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    count: int = 1
    difficulty: str = "easy"
    objects_min: int = 2
    objects_max: int = 3
    keypoint_noise_px: float = 0.0
    depth_noise_rel: float = 0.0
    intrinsics: Intrinsics = Intrinsics(600.0, 600.0, 320.0, 240.0)
    image_width: int = 640
    image_height: int = 480
    depth_kind: str = "depth_map"

    def __post_init__(self):
        if self.difficulty not in PRESETS:
            raise ValueError(f"unknown preset {self.difficulty!r}")
        if self.count <= 0:
            raise ValueError("count must be positive")
        if self.keypoint_noise_px < 0 or self.depth_noise_rel < 0:
            raise ValueError("noise parameters must be >= 0")
        if not (1 <= self.objects_min <= self.objects_max):
            raise ValueError("bad objects_per_scene range")
        if self.depth_kind not in ("depth_map", "point_map"):
            raise ValueError(f"unknown depth kind {self.depth_kind!r}")


@dataclass(frozen=True)
class ObjectSpec:
    id: int
    label: str
    center: tuple[float, float, float]
    width: float
    height: float
    confidence: float


@dataclass(frozen=True)
class SceneGeometry:
    """Exact pre-noise layout behind one generated scene."""

    joints: dict[str, tuple[float, float, float]]
    objects: tuple[ObjectSpec, ...]
    pointing_arms: tuple[str, ...]
    target_id: int | None
    table_y: float
    background_z: float


def _project(intr: Intrinsics, p) -> tuple[float, float]:
    return (intr.cx + intr.fx * p[0] / p[2], intr.cy + intr.fy * p[1] / p[2])


def _object_box(obj: ObjectSpec, intr: Intrinsics) -> BoundingBox:
    """Projection of the object's frontal cross-section at its center
    depth; symmetric, so the box centroid is the projected center."""
    x, y, z = obj.center
    half_u = intr.fx * obj.width / 2.0 / z
    half_v = intr.fy * obj.height / 2.0 / z
    u, v = _project(intr, obj.center)
    return BoundingBox(u - half_u, v - half_v, u + half_u, v + half_v)


def _iou(a: BoundingBox, b: BoundingBox) -> float:
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = a.width * a.height + b.width * b.height - inter
    return inter / union


def _angle_deg(a: np.ndarray, b: np.ndarray) -> float:
    cosv = np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
    return math.degrees(math.acos(min(1.0, max(-1.0, cosv))))


def oracle_target(geom: SceneGeometry, side: str) -> int:
    """Brute-force argmax of the cosine rule over the exact layout."""
    shoulder = np.array(geom.joints[f"{side}_shoulder"])
    wrist = np.array(geom.joints[f"{side}_wrist"])
    ray = wrist - shoulder
    best_id = None
    best = -2.0
    for obj in sorted(geom.objects, key=lambda o: o.id):
        to_obj = np.array(obj.center) - shoulder
        score = float(np.dot(ray, to_obj) / (np.linalg.norm(ray) * np.linalg.norm(to_obj)))
        if score > best:
            best_id, best = obj.id, score
    return best_id


def _jittered_direction(rng: np.random.Generator, direction: np.ndarray, max_deg: float) -> np.ndarray:
    """Unit vector within max_deg of the given direction."""
    d = direction / np.linalg.norm(direction)
    raw = rng.standard_normal(3)
    perp = raw - d * np.dot(raw, d)
    norm = np.linalg.norm(perp)
    if norm < 1e-12:
        return d
    perp /= norm
    theta = math.radians(rng.uniform(0.0, max_deg))
    return d * math.cos(theta) + perp * math.sin(theta)


def _hanging_arm(rng: np.random.Generator, shoulder: np.ndarray, side: str) -> tuple[np.ndarray, np.ndarray]:
    """Elbow and wrist of a relaxed arm hanging by the torso."""
    out = 1.0 if side == "left" else -1.0
    elbow = shoulder + np.array(
        [
            out * rng.uniform(0.00, 0.04),
            rng.uniform(0.25, 0.30),
            rng.uniform(-0.03, 0.03),
        ]
    )
    wrist = elbow + np.array(
        [
            out * rng.uniform(-0.02, 0.05),
            rng.uniform(0.22, 0.27),
            rng.uniform(-0.08, 0.02),
        ]
    )
    return elbow, wrist


def _pointing_arm(
    rng: np.random.Generator, shoulder: np.ndarray, target: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Elbow and wrist of an arm extended toward the target."""
    direction = _jittered_direction(rng, target - shoulder, AIM_JITTER_DEG)
    reach = rng.uniform(0.46, 0.58)
    wrist = shoulder + reach * direction
    # Slight elbow sag keeps the arm realistic but nearly straight.
    raw = rng.standard_normal(3)
    perp = raw - direction * np.dot(raw, direction)
    perp /= max(np.linalg.norm(perp), 1e-12)
    elbow = shoulder + rng.uniform(0.48, 0.55) * reach * direction + rng.uniform(0.0, 0.03) * perp
    return elbow, wrist


def _sample_person(rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Torso joints (both arms added later)."""
    x_p = rng.uniform(0.30, 0.44)
    z_p = rng.uniform(2.35, 2.65)
    shoulder_y = rng.uniform(-0.34, -0.27)
    shoulder_half = rng.uniform(0.16, 0.20)
    hip_y = rng.uniform(0.15, 0.21)
    hip_half = rng.uniform(0.10, 0.13)

    def jitter_z() -> float:
        return z_p + rng.uniform(-0.02, 0.02)

    return {
        "nose": np.array([x_p + rng.uniform(-0.02, 0.02), shoulder_y - rng.uniform(0.16, 0.20), jitter_z()]),
        "left_shoulder": np.array([x_p + shoulder_half, shoulder_y, jitter_z()]),
        "right_shoulder": np.array([x_p - shoulder_half, shoulder_y, jitter_z()]),
        "left_hip": np.array([x_p + hip_half, hip_y, jitter_z()]),
        "right_hip": np.array([x_p - hip_half, hip_y, jitter_z()]),
    }


def _spread_centroids(rng: np.random.Generator, n: int, lo: float, hi: float, gap: float) -> np.ndarray:
    """n sorted values in [lo, hi] pairwise at least gap apart."""
    slack = (hi - lo) - (n - 1) * gap
    if slack < 0:
        raise GenerationError(f"cannot fit {n} objects {gap} px apart in [{lo}, {hi}]")
    cuts = np.sort(rng.uniform(0.0, slack, size=n))
    return lo + cuts + np.arange(n) * gap


def _lateral_objects(
    rng: np.random.Generator, config: SynthConfig, table_y: float, n: int
) -> list[ObjectSpec]:
    """Laterally spread tabletop objects (easy/neutral layouts)."""
    intr = config.intrinsics
    lo, hi = 0.11 * config.image_width, 0.46 * config.image_width
    centroids = _spread_centroids(rng, n, lo, hi, 100.0)
    objects = []
    for i, u_c in enumerate(centroids):
        z = rng.uniform(1.25, 1.90)
        w = rng.uniform(0.10, 0.20)
        h = rng.uniform(0.14, 0.28)
        x = (u_c - intr.cx) * z / intr.fx
        center = (x, table_y - h / 2.0, z)
        objects.append(
            ObjectSpec(
                i, str(rng.choice(OBJECT_LABELS)), center, w, h, round(rng.uniform(0.55, 0.95), 3)
            )
        )
    return objects


def _stacked_objects(
    rng: np.random.Generator, config: SynthConfig, table_y: float, shoulder_px: tuple[float, float]
) -> list[ObjectSpec]:
    """Hard layout: rear/front pair collinear with the shoulder in 2D,
    plus a side object overlapping the front one heavily."""
    intr = config.intrinsics

    z_r = rng.uniform(1.72, 1.88)
    w_r = rng.uniform(0.24, 0.30)
    h_r = rng.uniform(0.26, 0.34)
    u_r = rng.uniform(0.24 * config.image_width, 0.37 * config.image_width)
    x_r = (u_r - intr.cx) * z_r / intr.fx
    rear_center = (x_r, table_y - h_r / 2.0, z_r)
    v_r = _project(intr, rear_center)[1]

    z_f = z_r - rng.uniform(0.52, 0.62)
    h_f = rng.uniform(0.16, 0.20)
    w_f = rng.uniform(0.16, 0.22)
    y_f = table_y - h_f / 2.0
    v_f = intr.cy + intr.fy * y_f / z_f
    # Front centroid on the image line shoulder -> rear centroid.
    s_u, s_v = shoulder_px
    u_f = s_u + (v_f - s_v) * (u_r - s_u) / (v_r - s_v) + rng.uniform(-3.0, 3.0)
    x_f = (u_f - intr.cx) * z_f / intr.fx
    front_center = (x_f, y_f, z_f)

    # Side object: matches the front object's projected size, just behind
    # it, offset sideways by about half a box width so the boxes overlap
    # strongly while both central regions keep a clear majority of their
    # own pixels.
    z_g = z_f + rng.uniform(0.02, 0.06)
    w_g = w_f * (z_g / z_f) * rng.uniform(1.00, 1.05)
    h_g = h_f * (z_g / z_f) * rng.uniform(1.00, 1.04)
    front_w_px = intr.fx * w_f / z_f
    direction = 1.0 if u_f < (u_r + s_u) / 2.0 else -1.0
    u_g = u_f + direction * rng.uniform(0.512, 0.53) * front_w_px
    x_g = (u_g - intr.cx) * z_g / intr.fx
    side_center = (x_g, table_y - h_g / 2.0, z_g)

    label = str(rng.choice(OBJECT_LABELS))
    labels = [label, label, str(rng.choice(OBJECT_LABELS))]
    conf = [round(rng.uniform(0.55, 0.95), 3) for _ in range(3)]
    return [
        ObjectSpec(0, labels[0], rear_center, w_r, h_r, conf[0]),
        ObjectSpec(1, labels[1], front_center, w_f, h_f, conf[1]),
        ObjectSpec(2, labels[2], side_center, w_g, h_g, conf[2]),
    ]


def _boxes_in_frame(boxes: list[BoundingBox], config: SynthConfig, margin: float = 2.0) -> bool:
    w, h = config.image_width, config.image_height
    for b in boxes:
        if b.x_min < margin or b.y_min < margin or b.x_max > w - margin or b.y_max > h - margin:
            return False
        if b.width < 8 or b.height < 8:
            return False
    return True


def _landmarks_clear(
    joints: dict[str, np.ndarray], boxes: list[BoundingBox], config: SynthConfig
) -> bool:
    """Landmark depth patches must stay inside the frame and outside
    every detection box."""
    intr = config.intrinsics
    pad = PATCH_RADIUS_PX
    pixels = []
    for p in joints.values():
        u, v = _project(intr, p)
        if not (pad + 1 <= u <= config.image_width - pad - 2):
            return False
        if not (pad + 1 <= v <= config.image_height - pad - 2):
            return False
        for b in boxes:
            if b.x_min - pad <= u <= b.x_max + pad and b.y_min - pad <= v <= b.y_max + pad:
                return False
        pixels.append((u, v))
    for i, (u1, v1) in enumerate(pixels):
        for u2, v2 in pixels[i + 1 :]:
            if max(abs(u1 - u2), abs(v1 - v2)) < MIN_LANDMARK_SEP_PX:
                return False
    return True


def _covered_fraction(region: BoundingBox, cover: BoundingBox) -> float:
    iw = min(region.x_max, cover.x_max) - max(region.x_min, cover.x_min)
    ih = min(region.y_max, cover.y_max) - max(region.y_min, cover.y_min)
    if iw <= 0 or ih <= 0:
        return 0.0
    return (iw * ih) / (region.width * region.height)


def _central_region(box: BoundingBox, min_px: float = 3.0) -> BoundingBox:
    u, v = box.centroid
    half_w = max(0.2 * box.width, min_px) / 2.0
    half_h = max(0.2 * box.height, min_px) / 2.0
    return BoundingBox(u - half_w, v - half_h, u + half_w, v + half_h)


def _region_visible(objects: list[ObjectSpec], boxes: list[BoundingBox]) -> bool:
    """Each object's central region keeps a majority of its own pixels
    against every nearer object's box."""
    for i, obj in enumerate(objects):
        region = _central_region(boxes[i])
        for j, other in enumerate(objects):
            if other.center[2] < obj.center[2]:
                if _covered_fraction(region, boxes[j]) >= 0.45:
                    return False
    return True


def _check_margins(
    geom_joints: dict[str, np.ndarray],
    objects: list[ObjectSpec],
    target_id: int,
    sides: tuple[str, ...],
) -> bool:
    """Oracle margin: every non-target object at least
    MIN_TARGET_MARGIN_DEG away from the target (3D, per shoulder)."""
    target = next(o for o in objects if o.id == target_id)
    for side in sides:
        shoulder = geom_joints[f"{side}_shoulder"]
        t_dir = np.array(target.center) - shoulder
        for obj in objects:
            if obj.id == target_id:
                continue
            if _angle_deg(t_dir, np.array(obj.center) - shoulder) < MIN_TARGET_MARGIN_DEG:
                return False
    return True


def _sample_geometry(config: SynthConfig, rng: np.random.Generator) -> SceneGeometry:
    intr = config.intrinsics
    for _ in range(MAX_ATTEMPTS):
        table_y = rng.uniform(0.33, 0.41)
        background_z = rng.uniform(3.5, 4.2)
        torso = _sample_person(rng)

        if config.difficulty == "neutral":
            sides: tuple[str, ...] = ()
        elif config.difficulty == "both_arms":
            sides = ("left", "right")
        else:
            sides = (str(rng.choice(["left", "right"])),)

        n = int(rng.integers(config.objects_min, config.objects_max + 1))
        if config.difficulty == "hard":
            shoulder_px = _project(intr, torso[f"{sides[0]}_shoulder"])
            objects = _stacked_objects(rng, config, table_y, shoulder_px)
            target_id = int(rng.integers(0, 2))  # rear or front of the pair
        else:
            try:
                objects = _lateral_objects(rng, config, table_y, n)
            except GenerationError:
                raise
            target_id = int(rng.integers(0, len(objects))) if sides else None

        joints = dict(torso)
        if sides:
            target = np.array(next(o for o in objects if o.id == target_id).center)
        for side in ("left", "right"):
            shoulder = joints[f"{side}_shoulder"]
            if side in sides:
                elbow, wrist = _pointing_arm(rng, shoulder, target)
            else:
                elbow, wrist = _hanging_arm(rng, shoulder, side)
            joints[f"{side}_elbow"] = elbow
            joints[f"{side}_wrist"] = wrist

        boxes = [_object_box(o, intr) for o in objects]
        if not _boxes_in_frame(boxes, config):
            continue
        if not _landmarks_clear(joints, boxes, config):
            continue
        if not _region_visible(objects, boxes):
            continue

        if config.difficulty == "hard":
            if _iou(boxes[1], boxes[2]) <= 0.302:
                continue
            if _iou(boxes[0], boxes[1]) <= 0.0:
                continue
            shoulder = joints[f"{sides[0]}_shoulder"]
            s_px = np.array(_project(intr, shoulder))
            d_rear = np.array(boxes[0].centroid) - s_px
            d_front = np.array(boxes[1].centroid) - s_px
            if _angle_deg(d_rear, d_front) > MAX_STACK_ANGLE_2D_DEG:
                continue

        if sides and not _check_margins(joints, objects, target_id, sides):
            continue

        geom = SceneGeometry(
            joints={k: tuple(float(x) for x in v) for k, v in joints.items()},
            objects=tuple(objects),
            pointing_arms=sides,
            target_id=target_id,
            table_y=table_y,
            background_z=background_z,
        )
        if sides and any(oracle_target(geom, side) != target_id for side in sides):
            continue
        return geom
    raise GenerationError(
        f"no feasible {config.difficulty} layout after {MAX_ATTEMPTS} attempts"
    )


def render_scene(geom: SceneGeometry, config: SynthConfig, rng: np.random.Generator) -> Scene:
    """Project the layout into a scene document, painting the depth
    raster far-to-near and applying the configured noise."""
    intr = config.intrinsics
    w, h = config.image_width, config.image_height

    depth = np.full((h, w), geom.background_z, dtype=np.float64)

    # Table plane: depth where each pixel's ray meets y = table_y, within
    # the table's extent.
    vs = (np.arange(h, dtype=np.float64)[:, None] - intr.cy) / intr.fy
    us = (np.arange(w, dtype=np.float64)[None, :] - intr.cx) / intr.fx
    with np.errstate(divide="ignore", invalid="ignore"):
        z_table = np.broadcast_to(
            np.where(vs > 1e-6, geom.table_y / vs, np.inf), (h, w)
        )
        x_table = us * z_table
        table_mask = (z_table > 0.95) & (z_table < 2.3) & (np.abs(x_table) < 1.1)

    # Per-entity depth scale factors model the low-frequency bias of
    # monocular depth: one factor per surface, one for the whole person.
    rel = config.depth_noise_rel
    factor_bg = 1.0 + rel * rng.standard_normal()
    factor_table = 1.0 + rel * rng.standard_normal()
    factors_obj = [1.0 + rel * rng.standard_normal() for _ in geom.objects]
    factor_person = 1.0 + rel * rng.standard_normal()

    depth *= factor_bg
    depth[table_mask] = (z_table[table_mask]) * factor_table

    boxes = {o.id: _object_box(o, intr) for o in geom.objects}
    for obj in sorted(geom.objects, key=lambda o: -o.center[2]):
        b = boxes[obj.id]
        c0, c1 = int(round(b.x_min)), int(round(b.x_max))
        r0, r1 = int(round(b.y_min)), int(round(b.y_max))
        depth[max(r0, 0) : min(r1 + 1, h), max(c0, 0) : min(c1 + 1, w)] = (
            obj.center[2] * factors_obj[obj.id]
        )

    joint_order = sorted(geom.joints, key=lambda k: -geom.joints[k][2])
    for radius in (PATCH_RADIUS_PX, CORE_RADIUS_PX):
        for name in joint_order:
            p = geom.joints[name]
            u, v = _project(intr, p)
            c, r = int(round(u)), int(round(v))
            depth[
                max(r - radius, 0) : min(r + radius + 1, h),
                max(c - radius, 0) : min(c + radius + 1, w),
            ] = p[2] * factor_person

    depth32 = depth.astype(np.float32)
    if config.depth_kind == "depth_map":
        source = DepthSource.depth_map(depth32, intr)
    else:
        xs = (us * depth).astype(np.float32)
        ys = (vs * depth).astype(np.float32)
        source = DepthSource.point_map(np.stack([xs, ys, depth32], axis=2))

    sigma = config.keypoint_noise_px
    landmarks = []
    order = ["nose"] + [f"{s}_{part}" for s in ("left", "right") for part in ("shoulder", "elbow", "wrist", "hip")]
    for name in order:
        u, v = _project(intr, geom.joints[name])
        if sigma > 0:
            u += sigma * rng.standard_normal()
            v += sigma * rng.standard_normal()
        u = min(max(u, -0.25 * w), 1.25 * w)
        v = min(max(v, -0.25 * h), 1.25 * h)
        landmarks.append(Landmark(name, float(u), float(v), 1.0))

    detections = [
        Detection(o.id, o.label, o.confidence, boxes[o.id]) for o in geom.objects
    ]
    truth = GroundTruth(
        is_pointing=bool(geom.pointing_arms),
        arms=geom.pointing_arms,
        target_id=geom.target_id,
        difficulty=PRESET_DIFFICULTY[config.difficulty],
    )
    return Scene(
        image_width=w,
        image_height=h,
        detections=detections,
        pose=PoseSet.from_landmarks(landmarks),
        depth=source,
        truth=truth,
    )


def _generate_one(config: SynthConfig, index: int) -> tuple[Scene, SceneGeometry]:
    rng = np.random.default_rng(config.seed + index)
    geom = _sample_geometry(config, rng)
    scene = render_scene(geom, config, rng)
    return scene, geom


def generate_with_geometry(config: SynthConfig, jobs: int = 1) -> list[tuple[Scene, SceneGeometry]]:
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_generate_one, [config] * config.count, range(config.count)))
    return [_generate_one(config, i) for i in range(config.count)]


def generate(config: SynthConfig, jobs: int = 1) -> list[Scene]:
    """Generate config.count scenes for the configured preset."""
    return [scene for scene, _ in generate_with_geometry(config, jobs)]


def write_dataset(
    scenes: list[Scene],
    out_dir,
    split: str = "test",
    prefix: str = "scene",
    manifest_name: str = "manifest.json",
) -> Path:
    """Write scene files plus a manifest; merges with an existing
    manifest in the same directory so multi-preset datasets can be built
    with repeated calls."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    new_entries = []
    for i, scene in enumerate(scenes):
        name = f"{prefix}_{i:04d}.json"
        save_scene(scene, out / name)
        difficulty = scene.truth.difficulty if scene.truth else "easy"
        new_entries.append(ManifestEntry(name, split, difficulty))

    manifest_path = out / manifest_name
    existing: list[ManifestEntry] = []
    if manifest_path.exists():
        from .scene import load_manifest

        new_paths = {e.path for e in new_entries}
        existing = [e for e in load_manifest(manifest_path).entries if e.path not in new_paths]
    save_manifest(Manifest(existing + new_entries, base_dir=out), manifest_path)
    return manifest_path
