"""Model backends, loaded lazily.

Each factory returns a callable; anything missing (library or pretrained
weights) raises ModelUnavailable so callers can fall back or skip.  All
backends are pure functions of a PIL image.

Detector:  image -> list[RawDetection]
Pose:      image -> dict[name, (u, v, visibility)] or None (no person)
Depth:     image -> (float32 (H, W) raster, intrinsics dict)
Captioner: image, box -> str
"""

from __future__ import annotations

import numpy as np

from .writer import RawDetection

COCO_INSTANCE_LABELS = (
    "__background__", "person", "bicycle", "car", "motorcycle", "airplane",
    "bus", "train", "truck", "boat", "traffic light", "fire hydrant", "N/A",
    "stop sign", "parking meter", "bench", "bird", "cat", "dog", "horse",
    "sheep", "cow", "elephant", "bear", "zebra", "giraffe", "N/A", "backpack",
    "umbrella", "N/A", "N/A", "handbag", "tie", "suitcase", "frisbee", "skis",
    "snowboard", "sports ball", "kite", "baseball bat", "baseball glove",
    "skateboard", "surfboard", "tennis racket", "bottle", "N/A", "wine glass",
    "cup", "fork", "knife", "spoon", "bowl", "banana", "apple", "sandwich",
    "orange", "broccoli", "carrot", "hot dog", "pizza", "donut", "cake",
    "chair", "couch", "potted plant", "bed", "N/A", "dining table", "N/A",
    "N/A", "toilet", "N/A", "tv", "laptop", "mouse", "remote", "keyboard",
    "cell phone", "microwave", "oven", "toaster", "sink", "refrigerator",
    "N/A", "book", "clock", "vase", "scissors", "teddy bear", "hair drier",
    "toothbrush",
)

# torchvision keypoint models emit COCO-17 joints; map them into the
# scene format's 33-name vocabulary (a subset, including all required).
COCO17_TO_VOCAB = (
    "nose", "left_eye", "right_eye", "left_ear", "right_ear",
    "left_shoulder", "right_shoulder", "left_elbow", "right_elbow",
    "left_wrist", "right_wrist", "left_hip", "right_hip",
    "left_knee", "right_knee", "left_ankle", "right_ankle",
)


class ModelUnavailable(RuntimeError):
    """The backend's library or pretrained weights cannot be loaded."""


def _to_tensor(image):
    import torch

    arr = np.asarray(image.convert("RGB"), dtype=np.float32) / 255.0
    return torch.from_numpy(arr).permute(2, 0, 1)


def make_detector(name: str, conf: float = 0.25):
    if name == "torchvision":
        try:
            import torch
            from torchvision.models.detection import fasterrcnn_resnet50_fpn
        except ImportError as exc:
            raise ModelUnavailable(f"torchvision not importable: {exc}") from exc
        try:
            model = fasterrcnn_resnet50_fpn(weights="DEFAULT").eval()
        except Exception as exc:  # weights download or load failure
            raise ModelUnavailable(f"detector weights unavailable: {exc}") from exc

        def detect(image):
            with torch.no_grad():
                out = model([_to_tensor(image)])[0]
            dets = []
            for box, label, score in zip(out["boxes"], out["labels"], out["scores"]):
                if float(score) < conf:
                    continue
                name = COCO_INSTANCE_LABELS[int(label)]
                if name in ("__background__", "N/A", "person"):
                    continue
                dets.append(RawDetection(name, float(score), tuple(float(v) for v in box)))
            return dets

        return detect

    if name == "yolo":
        try:
            from ultralytics import YOLO
        except ImportError as exc:
            raise ModelUnavailable(f"ultralytics not installed: {exc}") from exc
        try:
            model = YOLO("yolo11s.pt")
        except Exception as exc:
            raise ModelUnavailable(f"yolo weights unavailable: {exc}") from exc

        def detect(image):
            results = model.predict(image, conf=conf, verbose=False)[0]
            dets = []
            for box in results.boxes:
                label = results.names[int(box.cls)]
                if label == "person":
                    continue
                dets.append(
                    RawDetection(label, float(box.conf), tuple(float(v) for v in box.xyxy[0]))
                )
            return dets

        return detect

    if name == "owlvit":
        try:
            from transformers import pipeline
        except ImportError as exc:
            raise ModelUnavailable(f"transformers not installed: {exc}") from exc
        try:
            pipe = pipeline("zero-shot-object-detection", model="google/owlvit-base-patch32")
        except Exception as exc:
            raise ModelUnavailable(f"owlvit weights unavailable: {exc}") from exc

        queries = ["a bottle", "a cup", "a book", "a bowl", "a box", "socks", "toilet paper"]

        def detect(image):
            dets = []
            for hit in pipe(image, candidate_labels=queries):
                if hit["score"] < conf:
                    continue
                b = hit["box"]
                label = hit["label"].removeprefix("a ").strip()
                dets.append(
                    RawDetection(label, float(hit["score"]), (b["xmin"], b["ymin"], b["xmax"], b["ymax"]))
                )
            return dets

        return detect

    raise ModelUnavailable(f"unknown detector backend {name!r}")


def make_pose(name: str):
    if name == "torchvision":
        try:
            import torch
            from torchvision.models.detection import keypointrcnn_resnet50_fpn
        except ImportError as exc:
            raise ModelUnavailable(f"torchvision not importable: {exc}") from exc
        try:
            model = keypointrcnn_resnet50_fpn(weights="DEFAULT").eval()
        except Exception as exc:
            raise ModelUnavailable(f"pose weights unavailable: {exc}") from exc

        def estimate(image):
            with torch.no_grad():
                out = model([_to_tensor(image)])[0]
            if len(out["scores"]) == 0 or float(out["scores"][0]) < 0.5:
                return None
            kps = out["keypoints"][0]  # best-scoring person
            return {
                COCO17_TO_VOCAB[i]: (float(k[0]), float(k[1]), float(min(max(k[2], 0.0), 1.0)))
                for i, k in enumerate(kps)
            }

        return estimate

    if name == "mediapipe":
        try:
            import mediapipe as mp
        except ImportError as exc:
            raise ModelUnavailable(f"mediapipe not installed: {exc}") from exc
        from .writer import LANDMARK_NAMES

        pose = mp.solutions.pose.Pose(static_image_mode=True)

        def estimate(image):
            arr = np.asarray(image.convert("RGB"))
            result = pose.process(arr)
            if result.pose_landmarks is None:
                return None
            h, w = arr.shape[:2]
            return {
                LANDMARK_NAMES[i]: (lm.x * w, lm.y * h, float(lm.visibility))
                for i, lm in enumerate(result.pose_landmarks.landmark)
            }

        return estimate

    raise ModelUnavailable(f"unknown pose backend {name!r}")


def make_depth(name: str):
    if name == "depth-anything":
        try:
            from transformers import pipeline
        except ImportError as exc:
            raise ModelUnavailable(f"transformers not installed: {exc}") from exc
        try:
            pipe = pipeline("depth-estimation", model="depth-anything/Depth-Anything-V2-Small-hf")
        except Exception as exc:
            raise ModelUnavailable(f"depth weights unavailable: {exc}") from exc

        def estimate(image):
            w, h = image.size
            pred = np.asarray(pipe(image)["depth"], dtype=np.float32)
            # relative inverse depth -> a positive pseudo-metric raster
            pred = pred - pred.min()
            depth = 0.5 + 4.0 * (1.0 - pred / max(pred.max(), 1e-6))
            # no calibration available; assume a ~55 degree horizontal FOV
            fx = fy = 0.96 * w
            return depth.astype(np.float32), {"fx": fx, "fy": fy, "cx": w / 2, "cy": h / 2}

        return estimate

    raise ModelUnavailable(f"unknown depth backend {name!r}")


def make_captioner(name: str):
    model_ids = {
        "blip": "Salesforce/blip-image-captioning-base",
        "vit-gpt2": "nlpconnect/vit-gpt2-image-captioning",
        "git": "microsoft/git-base-coco",
    }
    if name not in model_ids:
        raise ModelUnavailable(f"unknown captioner backend {name!r}")
    try:
        from transformers import pipeline
    except ImportError as exc:
        raise ModelUnavailable(f"transformers not installed: {exc}") from exc
    try:
        pipe = pipeline("image-to-text", model=model_ids[name])
    except Exception as exc:
        raise ModelUnavailable(f"captioner weights unavailable: {exc}") from exc

    def caption(image, box):
        x0, y0, x1, y1 = [int(v) for v in box]
        crop = image.crop((max(x0, 0), max(y0, 0), x1, y1))
        out = pipe(crop)
        return out[0]["generated_text"].strip()

    return caption
