"""Score pipeline predictions against ground truth.

Two per-image binary tasks are reported, each per difficulty split:

  gesture:     did the pipeline call "pointing" on pointing scenes;
  recognition: did it call "pointing" AND pick the annotated target.

A wrong target on a pointing scene counts as a miss (fn) of the true
target, not as a false alarm; recall then reads as "fraction of pointed
targets found", which is the quantity that matters most downstream.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import gesture
from .scene import GroundTruth, Manifest, Scene, SceneError, load_manifest, load_scene

TASKS = ("gesture", "recognition")
REPORT_SPLITS = ("easy", "hard", "all")


@dataclass(frozen=True)
class Confusion:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def f1_score(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0 when both vanish."""
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def metrics(c: Confusion) -> tuple[float, float, float, float]:
    """(precision, recall, f1, accuracy); zero-denominator terms are 0."""
    if c.total == 0:
        raise ValueError("empty confusion")
    precision = c.tp / (c.tp + c.fp) if (c.tp + c.fp) else 0.0
    recall = c.tp / (c.tp + c.fn) if (c.tp + c.fn) else 0.0
    accuracy = (c.tp + c.tn) / c.total
    return precision, recall, f1_score(precision, recall), accuracy


@dataclass(frozen=True)
class EvalReport:
    task: str
    split: str
    mode: str
    confusion: Confusion
    precision: float
    recall: float
    f1: float
    accuracy: float

    @classmethod
    def from_confusion(cls, task: str, split: str, mode: str, c: Confusion) -> "EvalReport":
        p, r, f1, acc = metrics(c)
        return cls(task, split, mode, c, p, r, f1, acc)

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "split": self.split,
            "mode": self.mode,
            "confusion": {
                "tp": self.confusion.tp,
                "fp": self.confusion.fp,
                "fn": self.confusion.fn,
                "tn": self.confusion.tn,
            },
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy": self.accuracy,
        }


def _split_indices(truths: list[GroundTruth], split: str) -> list[int]:
    if split == "all":
        return list(range(len(truths)))
    return [i for i, t in enumerate(truths) if t.difficulty == split]


def evaluate_gesture(
    predictions: list[gesture.PointingResult],
    truths: list[GroundTruth],
    split: str = "all",
    mode: str = "3d",
) -> EvalReport:
    """Per-image pointing/not-pointing confusion for one split."""
    if len(predictions) != len(truths):
        raise ValueError("prediction/truth count mismatch")
    tp = fp = fn = tn = 0
    for i in _split_indices(truths, split):
        pred, truth = predictions[i].is_pointing, truths[i].is_pointing
        if truth and pred:
            tp += 1
        elif truth and not pred:
            fn += 1
        elif not truth and pred:
            fp += 1
        else:
            tn += 1
    return EvalReport.from_confusion("gesture", split, mode, Confusion(tp, fp, fn, tn))


def evaluate_recognition(
    predictions: list[gesture.PointingResult],
    truths: list[GroundTruth],
    split: str = "all",
    mode: str = "3d",
) -> EvalReport:
    """Per-image target confusion: a hit needs the right verdict AND the
    right target."""
    if len(predictions) != len(truths):
        raise ValueError("prediction/truth count mismatch")
    tp = fp = fn = tn = 0
    for i in _split_indices(truths, split):
        pred, truth = predictions[i], truths[i]
        if truth.is_pointing:
            if pred.is_pointing and pred.target_id == truth.target_id:
                tp += 1
            else:
                fn += 1
        else:
            if pred.is_pointing:
                fp += 1
            else:
                tn += 1
    return EvalReport.from_confusion("recognition", split, mode, Confusion(tp, fp, fn, tn))


def evaluate_scenes(
    predictions: list[gesture.PointingResult],
    truths: list[GroundTruth],
    mode: str = "3d",
) -> list[EvalReport]:
    """Both tasks over every non-empty split."""
    reports = []
    for task_fn in (evaluate_gesture, evaluate_recognition):
        for split in REPORT_SPLITS:
            if not _split_indices(truths, split):
                continue
            reports.append(task_fn(predictions, truths, split, mode))
    return reports


def _resolve_path(args) -> dict:
    path, model, mode, min_score, use_captions, lexicon, policy = args
    try:
        scene = load_scene(path)
    except SceneError as exc:
        raise SceneError(f"{path}: {exc}") from exc
    if scene.truth is None:
        raise SceneError(f"{path}: test scene lacks ground truth")
    result = gesture.resolve_scene(
        scene, model, mode, min_score, use_captions, lexicon, policy
    )
    return {"result": result, "truth": scene.truth}


def run_experiment(
    manifest: Manifest | str | Path,
    model: gesture.ClassifierModel,
    mode: str = "3d",
    *,
    use_captions: bool = False,
    min_score: float | None = None,
    lexicon=None,
    caption_policy: str = "override",
    jobs: int = 1,
) -> list[EvalReport]:
    """Resolve every test scene in the manifest and score both tasks.

    Results do not depend on the worker count; scene order follows the
    manifest.
    """
    if not isinstance(manifest, Manifest):
        manifest = load_manifest(manifest)
    entries = manifest.select(split="test")
    if not entries:
        raise ValueError("manifest has an empty test split")

    work = [
        (str(manifest.resolve(e)), model, mode, min_score, use_captions, lexicon, caption_policy)
        for e in entries
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_resolve_path, work))
    else:
        outcomes = [_resolve_path(item) for item in work]

    predictions = [o["result"] for o in outcomes]
    truths = [o["truth"] for o in outcomes]
    return evaluate_scenes(predictions, truths, mode)


def reports_to_json(reports: list[EvalReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=1)


def format_reports(reports: list[EvalReport]) -> str:
    """Fixed-width table with 2-decimal display rounding."""
    header = f"{'Task':<12} {'Split':<6} {'Mode':<5} {'Prec':>6} {'Rec':>6} {'F1':>6} {'Acc':>6}   (tp/fp/fn/tn)"
    lines = [header, "-" * len(header)]
    for r in reports:
        c = r.confusion
        lines.append(
            f"{r.task:<12} {r.split:<6} {r.mode:<5} "
            f"{r.precision:>6.2f} {r.recall:>6.2f} {r.f1:>6.2f} {r.accuracy:>6.2f}   "
            f"({c.tp}/{c.fp}/{c.fn}/{c.tn})"
        )
    return "\n".join(lines)
