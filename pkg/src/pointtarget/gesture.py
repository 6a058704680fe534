"""Arm feature extraction and the is-pointing classifier.

Per arm we build one of two feature vectors:

  kponly: shoulder/elbow/wrist coordinates expressed relative to the
          torso center and divided by the torso size, plus the best
          object score for that arm (10 components).
  full:   the 10 above plus the elbow angle, the wrist-to-torso distance
          (torso-normalized), and the forearm/upper-arm cosine that
          measures how straight the arm is (13 components).

Torso normalization makes the coordinates invariant to the person's
distance from the camera.  The classifier is a logistic regression fit
by full-batch gradient descent on standardized features; training is
bit-deterministic for a given dataset and config.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import captions as captions_mod
from . import lifting, pointing
from .scene import ARM_SIDES, GroundTruth, Point3, Scene
from .pointing import ArmJoints, DegenerateGeometryError, ScoredObject

FEATURE_MODES = ("kponly", "full")
FEATURE_DIMS = {"kponly": 10, "full": 13}

TORSO_JOINTS = ("left_shoulder", "right_shoulder", "left_hip", "right_hip")


class TrainingError(RuntimeError):
    """Training cannot proceed (single-class data, diverging loss)."""


@dataclass(frozen=True)
class FeatureVector:
    mode: str
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if self.mode not in FEATURE_MODES:
            raise ValueError(f"unknown feature mode {self.mode!r}")
        if values.shape != (FEATURE_DIMS[self.mode],):
            raise ValueError(
                f"{self.mode} expects {FEATURE_DIMS[self.mode]} components, "
                f"got {values.shape}"
            )
        if not np.isfinite(values).all():
            raise ValueError("feature components must be finite")
        object.__setattr__(self, "values", values)


def torso_frame(pose3d: dict[str, Point3 | None]) -> tuple[Point3, float]:
    """Torso center (mean of shoulders and hips) and size (mid-shoulder
    to mid-hip distance)."""
    joints = []
    for name in TORSO_JOINTS:
        p = pose3d.get(name)
        if p is None:
            raise ValueError(f"torso joint {name!r} not available")
        joints.append(p.as_array())
    joints = np.stack(joints)
    center = joints.mean(axis=0)
    mid_shoulder = joints[:2].mean(axis=0)
    mid_hip = joints[2:].mean(axis=0)
    size = float(np.linalg.norm(mid_shoulder - mid_hip))
    if size < 1e-6:
        raise DegenerateGeometryError("degenerate torso: shoulders and hips coincide")
    return Point3.from_array(center), size


def _angle_between(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na < 1e-9 or nb < 1e-9:
        raise DegenerateGeometryError("zero-length arm segment")
    return float(np.arccos(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0)))


def extract_features(
    pose3d: dict[str, Point3 | None],
    arm_side: str,
    best_score: float,
    mode: str = "full",
) -> FeatureVector:
    """Feature vector for one arm. best_score is the arm's highest object
    score (0 when nothing scored)."""
    arm = pointing.arm_from_pose3d(pose3d, arm_side)
    if arm is None:
        raise ValueError(f"{arm_side} arm joints not available")
    if not -1.0 <= best_score <= 1.0:
        raise ValueError(f"best_score {best_score} outside [-1, 1]")
    center, size = torso_frame(pose3d)

    c = center.as_array()
    shoulder = arm.shoulder.as_array()
    elbow = arm.elbow.as_array()
    wrist = arm.wrist.as_array()

    coords = np.concatenate([(shoulder - c) / size, (elbow - c) / size, (wrist - c) / size])
    values = np.concatenate([coords, [best_score]])

    if mode == "full":
        upper = shoulder - elbow
        fore = wrist - elbow
        elbow_angle = _angle_between(upper, fore)
        wrist_torso = float(np.linalg.norm(wrist - c)) / size
        straightness = float(
            np.clip(
                np.dot(fore, elbow - shoulder)
                / (np.linalg.norm(fore) * np.linalg.norm(elbow - shoulder)),
                -1.0,
                1.0,
            )
        )
        values = np.concatenate([values, [elbow_angle, wrist_torso, straightness]])
    return FeatureVector(mode, values)


@dataclass
class ClassifierModel:
    mode: str
    weights: np.ndarray
    bias: float
    means: np.ndarray
    stds: np.ndarray
    threshold: float = 0.5

    def __post_init__(self):
        dim = FEATURE_DIMS[self.mode]
        self.weights = np.asarray(self.weights, dtype=float)
        self.means = np.asarray(self.means, dtype=float)
        self.stds = np.asarray(self.stds, dtype=float)
        for name, arr in (("weights", self.weights), ("means", self.means), ("stds", self.stds)):
            if arr.shape != (dim,):
                raise ValueError(f"{name} must have {dim} components for mode {self.mode}")
        if (self.stds <= 0).any():
            raise ValueError("stds must be positive")

    def save(self, path) -> None:
        doc = {
            "mode": self.mode,
            "weights": list(self.weights),
            "bias": self.bias,
            "means": list(self.means),
            "stds": list(self.stds),
            "threshold": self.threshold,
        }
        Path(path).write_text(json.dumps(doc, indent=1), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "ClassifierModel":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            mode=doc["mode"],
            weights=np.array(doc["weights"], dtype=float),
            bias=float(doc["bias"]),
            means=np.array(doc["means"], dtype=float),
            stds=np.array(doc["stds"], dtype=float),
            threshold=float(doc["threshold"]),
        )


@dataclass(frozen=True)
class TrainConfig:
    iterations: int = 500
    learning_rate: float = 0.1
    l2: float = 1e-4


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _loss(Xs: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, l2: float) -> float:
    p = np.clip(_sigmoid(Xs @ w + b), 1e-12, 1 - 1e-12)
    ce = -float(np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))
    return ce + 0.5 * l2 * float(w @ w)


def fit_logistic(
    features: np.ndarray,
    labels: np.ndarray,
    mode: str,
    config: TrainConfig = TrainConfig(),
    loss_trace: list | None = None,
) -> ClassifierModel:
    """Deterministic full-batch gradient descent from zero weights.

    Features are standardized with training-set statistics; components
    with zero variance get std 1 so they contribute nothing.
    """
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("features and labels disagree in length")
    classes = np.unique(y)
    if classes.size < 2:
        raise TrainingError("training set contains a single class")

    means = X.mean(axis=0)
    stds = X.std(axis=0)
    stds[stds == 0] = 1.0
    Xs = (X - means) / stds

    n = X.shape[0]
    w = np.zeros(X.shape[1])
    b = 0.0
    for _ in range(config.iterations):
        if loss_trace is not None:
            loss_trace.append(_loss(Xs, y, w, b, config.l2))
        p = _sigmoid(Xs @ w + b)
        grad_w = Xs.T @ (p - y) / n + config.l2 * w
        grad_b = float(np.mean(p - y))
        w = w - config.learning_rate * grad_w
        b = b - config.learning_rate * grad_b

    final = _loss(Xs, y, w, b, config.l2)
    if loss_trace is not None:
        loss_trace.append(final)
    if not math.isfinite(final):
        raise TrainingError("non-finite training loss")
    return ClassifierModel(mode=mode, weights=w, bias=b, means=means, stds=stds)


def predict_pointing(model: ClassifierModel, features: FeatureVector) -> tuple[float, bool]:
    """Pointing probability and thresholded verdict for one arm."""
    if features.mode != model.mode:
        raise ValueError(f"feature mode {features.mode!r} does not match model {model.mode!r}")
    z = float(model.weights @ ((features.values - model.means) / model.stds) + model.bias)
    prob = float(_sigmoid(np.array([z]))[0])
    return prob, prob >= model.threshold


def _pose_points(scene: Scene, mode: str) -> dict[str, Point3 | None]:
    """Per-landmark 3D points (3d mode) or pixel points with z=0 (2d)."""
    if mode == "3d":
        return lifting.lift_pose(scene.depth, scene.pose)
    return {name: Point3(lm.u, lm.v, 0.0) for name, lm in scene.pose.landmarks.items()}


def arm_rows(
    scene: Scene, mode: str = "3d", feature_mode: str = "full"
) -> dict[str, tuple[FeatureVector, list[ScoredObject]]]:
    """Feature vector and object scores for each resolvable arm."""
    rows: dict[str, tuple[FeatureVector, list[ScoredObject]]] = {}
    if not scene.pose.has_person:
        return rows
    pose_pts = _pose_points(scene, mode)
    for side in ARM_SIDES:
        arm = pointing.arm_from_pose3d(pose_pts, side)
        if arm is None:
            continue
        if any(pose_pts.get(j) is None for j in TORSO_JOINTS):
            continue
        try:
            scored = pointing.score_objects(scene, arm, mode)
            best = max((s.score for s in scored if s.score is not None), default=0.0)
            features = extract_features(pose_pts, side, best, feature_mode)
        except (DegenerateGeometryError, ValueError):
            continue
        rows[side] = (features, scored)
    return rows


def training_rows(
    scenes, mode: str = "3d", feature_mode: str = "full"
) -> tuple[np.ndarray, np.ndarray]:
    """Per-arm feature matrix and 0/1 labels from ground-truthed scenes.

    An arm is a positive example iff the scene is a pointing scene and
    that arm is one of the pointing arms.
    """
    feats, labels = [], []
    for scene in scenes:
        if scene.truth is None:
            raise ValueError("training scenes need ground truth")
        for side, (fv, _) in sorted(arm_rows(scene, mode, feature_mode).items()):
            feats.append(fv.values)
            labels.append(float(scene.truth.is_pointing and side in scene.truth.arms))
    if not feats:
        raise TrainingError("no trainable arms in the given scenes")
    return np.stack(feats), np.array(labels)


def train_classifier(
    scenes,
    feature_mode: str = "full",
    mode: str = "3d",
    config: TrainConfig = TrainConfig(),
) -> ClassifierModel:
    """Fit the is-pointing classifier.

    Accepts an iterable of ground-truthed scenes, or a Manifest (or a
    manifest path), in which case the train split is loaded.
    """
    from .scene import Manifest, load_manifest, load_scene

    if isinstance(scenes, (str, Path)):
        scenes = load_manifest(scenes)
    if isinstance(scenes, Manifest):
        entries = scenes.select(split="train")
        if not entries:
            raise TrainingError("manifest has an empty train split")
        scenes = [load_scene(scenes.resolve(e)) for e in entries]
    X, y = training_rows(scenes, mode, feature_mode)
    return fit_logistic(X, y, feature_mode, config)


@dataclass
class PointingResult:
    """Outcome of resolving one scene."""

    is_pointing: bool
    arm: str | None = None
    probabilities: dict[str, float] = field(default_factory=dict)
    scores: list[ScoredObject] = field(default_factory=list)
    target_id: int | None = None
    label: str | None = None
    reconciliation: captions_mod.Reconciliation | None = None
    reason: str | None = None

    def to_dict(self) -> dict:
        return {
            "is_pointing": self.is_pointing,
            "arm": self.arm,
            "probabilities": self.probabilities,
            "scores": [
                {"detection_id": s.detection_id, "score": s.score} for s in self.scores
            ],
            "target_id": self.target_id,
            "label": self.label,
            "reconciliation": None
            if self.reconciliation is None
            else self.reconciliation.to_dict(),
            "reason": self.reason,
        }


def resolve_scene(
    scene: Scene,
    model: ClassifierModel,
    mode: str = "3d",
    min_score: float | None = None,
    use_captions: bool = True,
    lexicon: captions_mod.Lexicon | None = None,
    caption_policy: str = "override",
) -> PointingResult:
    """Full per-scene decision: is anyone pointing, and at what.

    Each resolvable arm is classified; the scene points when any arm
    does.  The target comes from the highest-probability pointing arm's
    scores.  When the scene carries a caption for the chosen target and
    captions are enabled, the detector label is reconciled against it.
    """
    rows = arm_rows(scene, mode, model.mode)
    if not rows:
        reason = "no_pose" if not scene.pose.has_person else "arms_unliftable"
        return PointingResult(is_pointing=False, reason=reason)

    probabilities = {}
    pointing_arms = {}
    for side, (features, scored) in sorted(rows.items()):
        prob, is_pointing = predict_pointing(model, features)
        probabilities[side] = prob
        if is_pointing:
            pointing_arms[side] = (prob, scored)

    if not pointing_arms:
        return PointingResult(is_pointing=False, probabilities=probabilities)

    chosen = max(sorted(pointing_arms), key=lambda side: pointing_arms[side][0])
    _, scored = pointing_arms[chosen]
    target_id = pointing.select_target(scored, min_score)

    result = PointingResult(
        is_pointing=True,
        arm=chosen,
        probabilities=probabilities,
        scores=scored,
        target_id=target_id,
    )
    if target_id is not None:
        det = scene.detection_by_id(target_id)
        result.label = det.label
        caption = (scene.captions or {}).get(target_id)
        if use_captions and caption:
            rec = captions_mod.reconcile(det.label, caption, lexicon, caption_policy)
            result.reconciliation = rec
            result.label = rec.final_label
    return result
