"""Pointing rays, per-object cosine scores, and target selection.

The pointing direction is the vector from the shoulder to the wrist of
the pointing arm.  Each detected object gets a score equal to the cosine
of the angle between that ray and the shoulder-to-object vector; the
object with the highest score is the pointed-at target.

Scoring runs in two modes: "3d" uses lifted camera-frame points, "2d"
uses raw pixel coordinates for both the arm and the box centroids.
Cosines are scale-invariant, so pixel units are safe in 2D.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lifting
from .scene import Point3, PoseSet, Scene

EPS = 1e-9

MODES = ("2d", "3d")


class DegenerateGeometryError(ValueError):
    """Two points that must differ coincide (within 1e-9)."""


@dataclass(frozen=True)
class ArmJoints:
    """Shoulder/elbow/wrist of one arm, 3D points or pixel points (z=0)."""

    side: str
    shoulder: Point3
    elbow: Point3
    wrist: Point3


@dataclass(frozen=True)
class ScoredObject:
    detection_id: int
    score: float | None


def arm_from_pose3d(pose3d: dict[str, Point3 | None], side: str) -> ArmJoints | None:
    """Build 3D arm joints from lifted landmarks; None if any is missing."""
    joints = [pose3d.get(f"{side}_{part}") for part in ("shoulder", "elbow", "wrist")]
    if any(j is None for j in joints):
        return None
    return ArmJoints(side, *joints)


def arm_from_pixels(pose: PoseSet, side: str) -> ArmJoints | None:
    """Build pixel-plane arm joints (z = 0) straight from the pose."""
    joints = []
    for part in ("shoulder", "elbow", "wrist"):
        lm = pose.get(f"{side}_{part}")
        if lm is None:
            return None
        joints.append(Point3(lm.u, lm.v, 0.0))
    return ArmJoints(side, *joints)


def pointing_ray(arm: ArmJoints) -> np.ndarray:
    """Unnormalized direction wrist - shoulder."""
    ray = arm.wrist.as_array() - arm.shoulder.as_array()
    if np.linalg.norm(ray) < EPS:
        raise DegenerateGeometryError(f"{arm.side} wrist coincides with shoulder")
    return ray


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    value = float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))
    return float(np.clip(value, -1.0, 1.0))


def pointing_score(arm: ArmJoints, object_center: Point3) -> float:
    """Cosine between the pointing ray and the shoulder-to-object vector."""
    ray = pointing_ray(arm)
    to_object = object_center.as_array() - arm.shoulder.as_array()
    if np.linalg.norm(to_object) < EPS:
        raise DegenerateGeometryError("object center coincides with shoulder")
    return _cosine(ray, to_object)


def score_objects(scene: Scene, arm: ArmJoints, mode: str = "3d") -> list[ScoredObject]:
    """Score every detection against the arm's ray, ordered by id.

    In 3d mode a detection whose lift fails gets score None instead of
    failing the scene; so does an object coinciding with the shoulder.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    ray = pointing_ray(arm)
    shoulder = arm.shoulder.as_array()

    scored = []
    for det in sorted(scene.detections, key=lambda d: d.id):
        if mode == "3d":
            center = lifting.lift_detection(scene.depth, det)
        else:
            u, v = det.box.centroid
            center = Point3(u, v, 0.0)
        if center is None:
            scored.append(ScoredObject(det.id, None))
            continue
        to_object = center.as_array() - shoulder
        if np.linalg.norm(to_object) < EPS:
            scored.append(ScoredObject(det.id, None))
            continue
        scored.append(ScoredObject(det.id, _cosine(ray, to_object)))
    return scored


def select_target(scored: list[ScoredObject], min_score: float | None = None) -> int | None:
    """Highest-scoring detection id; ties go to the lowest id.

    None when there is nothing to select or the best score falls below
    min_score.
    """
    best_id = None
    best_score = None
    for item in scored:
        if item.score is None:
            continue
        better = best_score is None or item.score > best_score
        tied_lower = item.score == best_score and item.detection_id < best_id
        if better or tied_lower:
            best_id, best_score = item.detection_id, item.score
    if best_id is None:
        return None
    if min_score is not None and best_score < min_score:
        return None
    return best_id
