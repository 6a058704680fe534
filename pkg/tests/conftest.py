import numpy as np
import pytest

from pointtarget import gesture
from pointtarget.scene import DepthSource, Intrinsics, Landmark, PoseSet
from pointtarget.synth import SynthConfig, generate

DEFAULT_INTR = Intrinsics(100.0, 100.0, 50.0, 50.0)


def flat_depth(width=100, height=100, z=2.0, intr=DEFAULT_INTR) -> DepthSource:
    return DepthSource.depth_map(np.full((height, width), z, dtype=np.float32), intr)


def pose_from(points: dict[str, tuple[float, float]]) -> PoseSet:
    return PoseSet.from_landmarks(Landmark(name, u, v, 1.0) for name, (u, v) in points.items())


def mixed_scenes(seed: int, per_preset: int, **noise) -> list:
    scenes = []
    for i, preset in enumerate(("easy", "hard", "neutral", "both_arms")):
        cfg = SynthConfig(seed=seed + 1000 * i, count=per_preset, difficulty=preset, **noise)
        scenes.extend(generate(cfg))
    return scenes


@pytest.fixture(scope="session")
def train_scenes():
    return mixed_scenes(seed=900, per_preset=25, keypoint_noise_px=2.0, depth_noise_rel=0.015)


@pytest.fixture(scope="session")
def models(train_scenes):
    """Classifiers shared across tests, one per pipeline mode."""
    return {
        mode: gesture.train_classifier(train_scenes, "full", mode) for mode in ("3d", "2d")
    }
