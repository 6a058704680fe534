import json
import subprocess
import sys

import numpy as np
import pytest
from PIL import Image

from scene_exporter import ExportConfig, ModelUnavailable, RawDetection, export_scene
from scene_exporter.writer import SceneDocument, write_scene

# The emitted files must satisfy the resolver's contract; tests verify
# that through its public loader and CLI.
from pointtarget.scene import load_scene


@pytest.fixture(scope="module")
def sample_image(tmp_path_factory):
    path = tmp_path_factory.mktemp("img") / "table.png"
    rng = np.random.default_rng(0)
    arr = rng.integers(0, 255, size=(120, 160, 3), dtype=np.uint8)
    Image.fromarray(arr).save(path)
    return path


def run_primary(args, **kw):
    return subprocess.run(
        [sys.executable, "-m", "pointtarget.cli", *map(str, args)],
        capture_output=True,
        text=True,
        timeout=300,
        **kw,
    )


@pytest.fixture(scope="module")
def primary_model(tmp_path_factory):
    """Train a classifier purely through the resolver's CLI."""
    root = tmp_path_factory.mktemp("primary")
    data, model = root / "data", root / "model.json"
    for preset, seed in (("easy", 1), ("neutral", 2)):
        proc = run_primary(
            ["synth", "--preset", preset, "--count", 10, "--seed", seed,
             "--out", data, "--split", "train"]
        )
        assert proc.returncode == 0, proc.stderr
    proc = run_primary(["train", "--manifest", data / "manifest.json", "--out", model])
    assert proc.returncode == 0, proc.stderr
    return model


def test_stub_export_passes_scene_validation(tmp_path):
    out = export_scene(None, tmp_path / "stub.json", ExportConfig(stub=True))
    scene = load_scene(out)  # validates every invariant
    assert scene.pose.has_person
    assert len(scene.detections) == 2
    assert scene.captions is not None
    assert "stub" in scene.meta["flags"]


def test_stub_export_deterministic(tmp_path):
    a = export_scene(None, tmp_path / "a.json", ExportConfig(stub=True))
    b = export_scene(None, tmp_path / "b.json", ExportConfig(stub=True))
    assert a.read_bytes().replace(b"a.depth.bin", b"b.depth.bin") == b.read_bytes()
    assert (tmp_path / "a.depth.bin").read_bytes() == (tmp_path / "b.depth.bin").read_bytes()


def test_stub_cli_flows_through_resolve(tmp_path, primary_model):
    proc = subprocess.run(
        [sys.executable, "-m", "scene_exporter.cli", "--stub", "--out", str(tmp_path / "s.json")],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0, proc.stderr
    scene_path = json.loads(proc.stdout)["scene"]

    resolved = run_primary(["resolve", "--scene", scene_path, "--model", primary_model])
    assert resolved.returncode == 0, resolved.stderr
    doc = json.loads(resolved.stdout)
    assert isinstance(doc["is_pointing"], bool)
    assert {"arm", "probabilities", "scores", "target_id"} <= set(doc)

    # captions ride along and reconcile cleanly
    resolved = run_primary(
        ["resolve", "--scene", scene_path, "--model", primary_model, "--captions", "on"]
    )
    assert resolved.returncode == 0, resolved.stderr


def fake_detector(image):
    w, h = image.size
    return [
        RawDetection("cup", 0.9, (0.1 * w, 0.5 * h, 0.3 * w, 0.8 * h)),
        RawDetection("bottle", 0.7, (0.6 * w, 0.4 * h, 0.8 * w, 0.85 * h)),
    ]


def fake_pose(image):
    w, h = image.size
    grid = {
        "left_shoulder": (0.60, 0.30), "right_shoulder": (0.45, 0.30),
        "left_elbow": (0.64, 0.45), "right_elbow": (0.40, 0.42),
        "left_wrist": (0.66, 0.60), "right_wrist": (0.33, 0.52),
        "left_hip": (0.58, 0.62), "right_hip": (0.48, 0.62),
    }
    return {name: (u * w, v * h, 1.0) for name, (u, v) in grid.items()}


def fake_depth(image):
    w, h = image.size
    raster = np.full((h, w), 2.0, dtype=np.float32)
    return raster, {"fx": 0.9 * w, "fy": 0.9 * w, "cx": w / 2, "cy": h / 2}


def fake_captioner(image, box):
    return "a small object on a table"


def test_injected_backends_produce_valid_scene(tmp_path, sample_image):
    out = export_scene(
        sample_image,
        tmp_path / "fake.json",
        ExportConfig(captioner="unused"),
        detector=fake_detector,
        pose=fake_pose,
        depth=fake_depth,
        captioner=fake_captioner,
    )
    scene = load_scene(out)
    assert [d.label for d in scene.detections] == ["cup", "bottle"]
    assert scene.captions == {0: "a small object on a table", 1: "a small object on a table"}
    assert scene.meta["conf_threshold"] == 0.25
    assert scene.meta["flags"] == []


def test_no_person_scene_flagged_and_resolvable(tmp_path, sample_image, primary_model):
    out = export_scene(
        sample_image,
        tmp_path / "noperson.json",
        ExportConfig(),
        detector=fake_detector,
        pose=lambda image: None,
        depth=fake_depth,
    )
    scene = load_scene(out)
    assert not scene.pose.has_person
    assert "no_pose" in scene.meta["flags"]

    resolved = run_primary(["resolve", "--scene", out, "--model", primary_model])
    assert resolved.returncode == 0, resolved.stderr
    doc = json.loads(resolved.stdout)
    assert doc["is_pointing"] is False
    assert doc["reason"] == "no_pose"


def test_writer_clamps_and_validates(tmp_path):
    doc = SceneDocument(
        image_width=100,
        image_height=80,
        detections=[
            RawDetection("cup", 1.4, (-10, 5, 50, 60)),     # clamped, conf capped
            RawDetection("dust", 0.5, (99.5, 79.5, 140, 120)),  # degenerate, dropped
        ],
        landmarks={},
        depth_data=np.full((80, 100), 1.0, dtype=np.float32),
        intrinsics={"fx": 90, "fy": 90, "cx": 50, "cy": 40},
    )
    out = write_scene(doc, tmp_path / "w.json")
    scene = load_scene(out)
    assert len(scene.detections) == 1
    assert scene.detections[0].confidence == 1.0
    assert scene.detections[0].box.x_min == 0.0


def test_writer_rejects_partial_pose(tmp_path):
    doc = SceneDocument(
        image_width=10,
        image_height=10,
        landmarks={"left_wrist": (1.0, 1.0, 1.0)},
        depth_data=np.ones((10, 10), dtype=np.float32),
        intrinsics={"fx": 9, "fy": 9, "cx": 5, "cy": 5},
    )
    with pytest.raises(ValueError, match="required landmarks"):
        write_scene(doc, tmp_path / "p.json")


def test_real_model_export_when_available(tmp_path, sample_image, primary_model):
    """Full real-model export; skips wherever weights cannot load."""
    try:
        out = export_scene(sample_image, tmp_path / "real.json", ExportConfig())
    except ModelUnavailable as exc:
        pytest.skip(f"model backends unavailable: {exc}")
    scene = load_scene(out)
    assert scene.image_width == 160
    resolved = run_primary(["resolve", "--scene", out, "--model", primary_model])
    assert resolved.returncode == 0, resolved.stderr
