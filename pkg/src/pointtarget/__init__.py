"""Pointing-target resolution from detections, body keypoints, and depth."""

from .scene import (
    BoundingBox,
    Detection,
    DepthSource,
    GroundTruth,
    Intrinsics,
    Landmark,
    Manifest,
    ManifestEntry,
    Point3,
    PoseSet,
    Scene,
    SceneError,
    SceneParseError,
    SceneValidationError,
    load_manifest,
    load_scene,
    save_manifest,
    save_scene,
    scenes_equal,
    validate_scene,
)
from .lifting import backproject, lift_detection, lift_pixel, lift_pose, project
from .pointing import (
    ArmJoints,
    DegenerateGeometryError,
    ScoredObject,
    pointing_ray,
    pointing_score,
    score_objects,
    select_target,
)
from .gesture import (
    ClassifierModel,
    FeatureVector,
    PointingResult,
    TrainConfig,
    TrainingError,
    extract_features,
    predict_pointing,
    resolve_scene,
    torso_frame,
    train_classifier,
)
from .captions import Lexicon, Reconciliation, default_lexicon, reconcile
from .evaluation import (
    Confusion,
    EvalReport,
    evaluate_gesture,
    evaluate_recognition,
    evaluate_scenes,
    metrics,
    run_experiment,
)
from .synth import GenerationError, SceneGeometry, SynthConfig, generate, oracle_target, write_dataset

__version__ = "0.1.0"
