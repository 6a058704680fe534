"""Scene documents and dataset manifests.

A Scene bundles everything the resolver needs for one image: 2D object
detections, body landmarks in pixel coordinates, a dense depth source
(either a metric depth map with camera intrinsics or a per-pixel point
map), optional per-detection captions, and optional ground truth.

Scenes are stored as UTF-8 JSON with the depth raster in a little-endian
float32 sidecar binary next to the JSON file.  Saving and reloading a
scene reproduces it field for field; depth values round-trip bit-exactly.

All types are treated as immutable after construction and are safe to
share across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class SceneError(Exception):
    """Base class for scene document problems."""


class SceneParseError(SceneError):
    """The document is malformed (bad JSON, missing or mistyped keys)."""


class SceneValidationError(SceneError):
    """The document parsed but violates an invariant."""


# MediaPipe-style 33-joint vocabulary; landmark names must come from here.
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

# Landmarks may sit off-frame by up to this fraction of the image size.
POSE_MARGIN = 0.25

SPLITS = ("train", "test")
DIFFICULTIES = ("easy", "hard")
ARM_SIDES = ("left", "right")


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned pixel box, origin at the image top-left."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def centroid(self) -> tuple[float, float]:
        return (0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))

    def as_list(self) -> list[float]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]


@dataclass(frozen=True)
class Detection:
    id: int
    label: str
    confidence: float
    box: BoundingBox


@dataclass(frozen=True)
class Landmark:
    name: str
    u: float
    v: float
    visibility: float = 1.0


@dataclass(frozen=True)
class PoseSet:
    """Named body landmarks in pixels.

    Either empty (no person found upstream) or it contains at least the
    eight required arm/torso landmarks.
    """

    landmarks: dict[str, Landmark] = field(default_factory=dict)

    @classmethod
    def from_landmarks(cls, landmarks) -> "PoseSet":
        return cls({lm.name: lm for lm in landmarks})

    def get(self, name: str) -> Landmark | None:
        return self.landmarks.get(name)

    @property
    def has_person(self) -> bool:
        return bool(self.landmarks)


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole camera parameters in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float


@dataclass(frozen=True)
class Point3:
    """Camera-frame 3D point in meters (x right, y down, z forward)."""

    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, a) -> "Point3":
        return cls(float(a[0]), float(a[1]), float(a[2]))


class DepthSource:
    """Dense per-pixel depth, one of two forms.

    depth_map: (H, W) float32 of z in meters plus intrinsics.
    point_map: (H, W, 3) float32 of camera-frame (x, y, z) in meters.

    Entries with non-positive or non-finite z are holes.  The raster is
    marked read-only after construction.
    """

    def __init__(self, kind: str, data: np.ndarray, intrinsics: Intrinsics | None = None):
        if kind not in ("depth_map", "point_map"):
            raise SceneValidationError(f"unknown depth kind {kind!r}")
        data = np.asarray(data, dtype=np.float32)
        if kind == "depth_map":
            if data.ndim != 2:
                raise SceneValidationError("depth_map raster must be 2-D")
            if intrinsics is None:
                raise SceneValidationError("depth_map requires intrinsics")
        else:
            if data.ndim != 3 or data.shape[2] != 3:
                raise SceneValidationError("point_map raster must be (H, W, 3)")
            if intrinsics is not None:
                raise SceneValidationError("point_map carries no intrinsics")
        data = data.copy()
        data.flags.writeable = False
        self.kind = kind
        self.data = data
        self.intrinsics = intrinsics
        self._valid: np.ndarray | None = None

    @classmethod
    def depth_map(cls, data, intrinsics: Intrinsics) -> "DepthSource":
        return cls("depth_map", data, intrinsics)

    @classmethod
    def point_map(cls, data) -> "DepthSource":
        return cls("point_map", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def valid_mask(self) -> np.ndarray:
        """Boolean (H, W) mask of usable entries (computed once)."""
        if self._valid is None:
            z = self.data if self.kind == "depth_map" else self.data[:, :, 2]
            ok = np.isfinite(z) & (z > 0)
            if self.kind == "point_map":
                ok &= np.isfinite(self.data).all(axis=2)
            ok.flags.writeable = False
            self._valid = ok
        return self._valid

    def __eq__(self, other) -> bool:
        if not isinstance(other, DepthSource):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.intrinsics == other.intrinsics
            and self.data.shape == other.data.shape
            and np.array_equal(self.data, other.data, equal_nan=True)
        )

    def __repr__(self) -> str:
        return f"DepthSource(kind={self.kind!r}, shape={self.data.shape})"


@dataclass(frozen=True)
class GroundTruth:
    is_pointing: bool
    arms: tuple[str, ...] = ()
    target_id: int | None = None
    difficulty: str = "easy"

    def __post_init__(self):
        object.__setattr__(self, "arms", tuple(sorted(set(self.arms))))


@dataclass
class Scene:
    image_width: int
    image_height: int
    detections: list[Detection]
    pose: PoseSet
    depth: DepthSource
    captions: dict[int, str] | None = None
    truth: GroundTruth | None = None
    meta: dict | None = None

    def detection_by_id(self, det_id: int) -> Detection | None:
        for det in self.detections:
            if det.id == det_id:
                return det
        return None


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    split: str
    difficulty: str


@dataclass
class Manifest:
    entries: list[ManifestEntry]
    base_dir: Path | None = None

    def resolve(self, entry: ManifestEntry) -> Path:
        p = Path(entry.path)
        if not p.is_absolute() and self.base_dir is not None:
            p = self.base_dir / p
        return p

    def select(self, split: str | None = None, difficulty: str | None = None):
        out = []
        for e in self.entries:
            if split is not None and e.split != split:
                continue
            if difficulty is not None and e.difficulty != difficulty:
                continue
            out.append(e)
        return out


def _finite(*values) -> bool:
    return all(isinstance(v, (int, float)) and math.isfinite(v) for v in values)


def validate_scene(scene: Scene) -> None:
    """Raise SceneValidationError naming the first violated invariant."""
    w, h = scene.image_width, scene.image_height
    if not (isinstance(w, int) and isinstance(h, int) and w > 0 and h > 0):
        raise SceneValidationError("image dims must be positive integers")

    seen_ids = set()
    for det in scene.detections:
        b = det.box
        if not _finite(b.x_min, b.y_min, b.x_max, b.y_max):
            raise SceneValidationError(f"detection {det.id}: box values must be finite")
        if not (b.x_min < b.x_max and b.y_min < b.y_max):
            raise SceneValidationError(f"detection {det.id}: box must have positive extent")
        if b.x_min < 0 or b.y_min < 0 or b.x_max > w or b.y_max > h:
            raise SceneValidationError(f"detection {det.id}: box outside image bounds")
        if not (0.0 <= det.confidence <= 1.0):
            raise SceneValidationError(f"detection {det.id}: confidence outside [0,1]")
        if det.id in seen_ids:
            raise SceneValidationError(f"duplicate detection id {det.id}")
        seen_ids.add(det.id)

    if scene.pose.has_person:
        for name in REQUIRED_LANDMARKS:
            if name not in scene.pose.landmarks:
                raise SceneValidationError(f"missing required landmark {name!r}")
    for lm in scene.pose.landmarks.values():
        if lm.name not in LANDMARK_NAMES:
            raise SceneValidationError(f"unknown landmark name {lm.name!r}")
        if not _finite(lm.u, lm.v, lm.visibility):
            raise SceneValidationError(f"landmark {lm.name}: values must be finite")
        if not (0.0 <= lm.visibility <= 1.0):
            raise SceneValidationError(f"landmark {lm.name}: visibility outside [0,1]")
        if not (-POSE_MARGIN * w <= lm.u <= (1 + POSE_MARGIN) * w):
            raise SceneValidationError(f"landmark {lm.name}: u beyond 25% margin")
        if not (-POSE_MARGIN * h <= lm.v <= (1 + POSE_MARGIN) * h):
            raise SceneValidationError(f"landmark {lm.name}: v beyond 25% margin")

    if scene.depth.height != h or scene.depth.width != w:
        raise SceneValidationError(
            f"depth dims mismatch: raster {scene.depth.width}x{scene.depth.height} "
            f"under a {w}x{h} image"
        )
    intr = scene.depth.intrinsics
    if intr is not None:
        if not _finite(intr.fx, intr.fy, intr.cx, intr.cy) or intr.fx <= 0 or intr.fy <= 0:
            raise SceneValidationError("intrinsics must be finite with positive focal lengths")

    if scene.captions is not None:
        for det_id in scene.captions:
            if det_id not in seen_ids:
                raise SceneValidationError(f"caption references unknown detection id {det_id}")

    truth = scene.truth
    if truth is not None:
        if truth.difficulty not in DIFFICULTIES:
            raise SceneValidationError(f"unknown difficulty {truth.difficulty!r}")
        for arm in truth.arms:
            if arm not in ARM_SIDES:
                raise SceneValidationError(f"unknown arm {arm!r}")
        if truth.is_pointing != (truth.target_id is not None):
            raise SceneValidationError("target_id must be present iff is_pointing")
        if truth.target_id is not None and truth.target_id not in seen_ids:
            raise SceneValidationError(f"dangling target_id {truth.target_id}")


def _sidecar_name(scene_path: Path) -> str:
    return scene_path.stem + ".depth.bin"


def save_scene(scene: Scene, path) -> None:
    """Write the scene JSON plus its depth sidecar next to it."""
    validate_scene(scene)
    path = Path(path)
    sidecar = _sidecar_name(path)

    depth_doc: dict = {
        "kind": scene.depth.kind,
        "width": scene.depth.width,
        "height": scene.depth.height,
        "data": sidecar,
    }
    if scene.depth.kind == "depth_map":
        intr = scene.depth.intrinsics
        depth_doc["intrinsics"] = {"fx": intr.fx, "fy": intr.fy, "cx": intr.cx, "cy": intr.cy}

    doc: dict = {
        "image_width": scene.image_width,
        "image_height": scene.image_height,
        "detections": [
            {
                "id": d.id,
                "label": d.label,
                "confidence": d.confidence,
                "box": d.box.as_list(),
            }
            for d in scene.detections
        ],
        "pose": [
            {"name": lm.name, "u": lm.u, "v": lm.v, "visibility": lm.visibility}
            for lm in scene.pose.landmarks.values()
        ],
        "depth": depth_doc,
    }
    if scene.captions is not None:
        doc["captions"] = {str(k): v for k, v in scene.captions.items()}
    if scene.truth is not None:
        doc["truth"] = {
            "is_pointing": scene.truth.is_pointing,
            "arms": list(scene.truth.arms),
            "target_id": scene.truth.target_id,
            "difficulty": scene.truth.difficulty,
        }
    if scene.meta is not None:
        doc["meta"] = scene.meta

    try:
        raw = np.ascontiguousarray(scene.depth.data, dtype="<f4").tobytes()
        (path.parent / sidecar).write_bytes(raw)
        path.write_text(json.dumps(doc, indent=1), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write scene to {path}: {exc}") from exc


def load_scene(path) -> Scene:
    """Read and validate a scene document."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read scene {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneParseError(f"{path}: invalid JSON: {exc}") from exc

    try:
        detections = [
            Detection(
                id=int(d["id"]),
                label=str(d["label"]),
                confidence=float(d["confidence"]),
                box=BoundingBox(*[float(v) for v in d["box"]]),
            )
            for d in doc["detections"]
        ]
        pose = PoseSet.from_landmarks(
            Landmark(str(p["name"]), float(p["u"]), float(p["v"]), float(p["visibility"]))
            for p in doc["pose"]
        )
        ddoc = doc["depth"]
        kind = ddoc["kind"]
        width, height = int(ddoc["width"]), int(ddoc["height"])
        data_path = Path(ddoc["data"])
        if not data_path.is_absolute():
            data_path = path.parent / data_path
        raw = np.frombuffer(data_path.read_bytes(), dtype="<f4")
        if kind == "depth_map":
            idoc = ddoc["intrinsics"]
            intr = Intrinsics(
                float(idoc["fx"]), float(idoc["fy"]), float(idoc["cx"]), float(idoc["cy"])
            )
            expected = width * height
            if raw.size != expected:
                raise SceneParseError(
                    f"{path}: sidecar holds {raw.size} values, expected {expected}"
                )
            depth = DepthSource.depth_map(raw.reshape(height, width), intr)
        elif kind == "point_map":
            expected = width * height * 3
            if raw.size != expected:
                raise SceneParseError(
                    f"{path}: sidecar holds {raw.size} values, expected {expected}"
                )
            depth = DepthSource.point_map(raw.reshape(height, width, 3))
        else:
            raise SceneValidationError(f"unknown depth kind {kind!r}")

        captions = None
        if "captions" in doc:
            captions = {int(k): str(v) for k, v in doc["captions"].items()}
        truth = None
        if "truth" in doc:
            t = doc["truth"]
            truth = GroundTruth(
                is_pointing=bool(t["is_pointing"]),
                arms=tuple(t.get("arms", ())),
                target_id=None if t.get("target_id") is None else int(t["target_id"]),
                difficulty=str(t.get("difficulty", "easy")),
            )
        scene = Scene(
            image_width=int(doc["image_width"]),
            image_height=int(doc["image_height"]),
            detections=detections,
            pose=pose,
            depth=depth,
            captions=captions,
            truth=truth,
            meta=doc.get("meta"),
        )
    except (SceneError, OSError):
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneParseError(f"{path}: malformed scene document: {exc}") from exc

    try:
        validate_scene(scene)
    except SceneValidationError as exc:
        raise SceneValidationError(f"{path}: {exc}") from exc
    return scene


def scenes_equal(a: Scene, b: Scene) -> bool:
    """Exact field-for-field comparison (depth compared bitwise, NaN-safe)."""
    return (
        a.image_width == b.image_width
        and a.image_height == b.image_height
        and a.detections == b.detections
        and a.pose == b.pose
        and a.depth == b.depth
        and a.captions == b.captions
        and a.truth == b.truth
        and a.meta == b.meta
    )


def save_manifest(manifest: Manifest, path) -> None:
    path = Path(path)
    doc = [
        {"path": e.path, "split": e.split, "difficulty": e.difficulty}
        for e in manifest.entries
    ]
    path.write_text(json.dumps(doc, indent=1), encoding="utf-8")


def load_manifest(path) -> Manifest:
    """Read a manifest and validate its entries against disk."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise OSError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SceneParseError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise SceneParseError(f"{path}: manifest must be a JSON array")

    entries = []
    seen = set()
    for item in doc:
        try:
            entry = ManifestEntry(str(item["path"]), str(item["split"]), str(item["difficulty"]))
        except (KeyError, TypeError) as exc:
            raise SceneParseError(f"{path}: malformed manifest entry: {exc}") from exc
        if entry.split not in SPLITS:
            raise SceneValidationError(f"{path}: unknown split {entry.split!r}")
        if entry.difficulty not in DIFFICULTIES:
            raise SceneValidationError(f"{path}: unknown difficulty {entry.difficulty!r}")
        if entry.path in seen:
            raise SceneValidationError(f"{path}: duplicate path {entry.path!r}")
        seen.add(entry.path)
        entries.append(entry)

    manifest = Manifest(entries, base_dir=path.parent)
    for entry in entries:
        if not manifest.resolve(entry).is_file():
            raise SceneValidationError(f"{path}: referenced scene missing: {entry.path}")
    return manifest
