"""Command-line entry point.

Subcommands:
  resolve   decide pointing/target for one scene file, print JSON
  train     fit the is-pointing classifier from a manifest's train split
  evaluate  score a manifest's test split, print/write reports
  synth     generate synthetic scenes plus a manifest

Machine output goes to stdout as JSON; diagnostics go to stderr.
Exit codes: 0 success, 1 validation/usage error, 2 IO error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import captions as captions_mod
from . import evaluation, gesture, synth
from .scene import SceneError, load_scene


def _load_lexicon(path: str | None) -> captions_mod.Lexicon | None:
    if path is None:
        path = os.environ.get("POINTRESOLVE_LEXICON")
    if path is None:
        return None
    return captions_mod.Lexicon.from_file(path)


def _cmd_resolve(args) -> int:
    scene = load_scene(args.scene)
    model = gesture.ClassifierModel.load(args.model)
    result = gesture.resolve_scene(
        scene,
        model,
        mode=args.mode,
        min_score=args.min_score,
        use_captions=args.captions == "on",
        lexicon=_load_lexicon(args.lexicon),
    )
    print(json.dumps(result.to_dict(), indent=1))
    return 0


def _cmd_train(args) -> int:
    config = gesture.TrainConfig(
        iterations=args.iterations, learning_rate=args.learning_rate, l2=args.l2
    )
    model = gesture.train_classifier(args.manifest, args.features, args.mode, config)
    model.save(args.out)
    print(json.dumps({"model": str(args.out), "mode": model.mode}))
    return 0


def _cmd_evaluate(args) -> int:
    model = gesture.ClassifierModel.load(args.model)
    reports = evaluation.run_experiment(
        args.manifest,
        model,
        mode=args.mode,
        use_captions=args.captions == "on",
        min_score=args.min_score,
        lexicon=_load_lexicon(args.lexicon),
        jobs=args.jobs,
    )
    print(evaluation.reports_to_json(reports))
    print(evaluation.format_reports(reports), file=sys.stderr)
    if args.report:
        Path(args.report).write_text(evaluation.reports_to_json(reports), encoding="utf-8")
    return 0


def _cmd_synth(args) -> int:
    preset = args.preset.replace("-", "_")
    config = synth.SynthConfig(
        seed=args.seed,
        count=args.count,
        difficulty=preset,
        keypoint_noise_px=args.keypoint_noise,
        depth_noise_rel=args.depth_noise,
    )
    scenes = synth.generate(config, jobs=args.jobs)
    manifest_path = synth.write_dataset(
        scenes, args.out, split=args.split, prefix=f"{preset}_s{args.seed}"
    )
    print(json.dumps({"manifest": str(manifest_path), "scenes": len(scenes)}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pointtarget",
        description="Resolve pointed-at objects from detections, keypoints, and depth.",
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("resolve", help="resolve one scene file")
    p.add_argument("--scene", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--mode", choices=("2d", "3d"), default="3d")
    p.add_argument("--min-score", type=float, default=None)
    p.add_argument("--lexicon", default=None)
    p.add_argument("--captions", choices=("on", "off"), default="off")
    p.set_defaults(func=_cmd_resolve)

    p = sub.add_parser("train", help="train the is-pointing classifier")
    p.add_argument("--manifest", required=True)
    p.add_argument("--features", choices=gesture.FEATURE_MODES, default="full")
    p.add_argument("--mode", choices=("2d", "3d"), default="3d")
    p.add_argument("--out", required=True)
    p.add_argument("--iterations", type=int, default=500)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--l2", type=float, default=1e-4)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="score a manifest's test split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--mode", choices=("2d", "3d"), default="3d")
    p.add_argument("--captions", choices=("on", "off"), default="off")
    p.add_argument("--min-score", type=float, default=None)
    p.add_argument("--lexicon", default=None)
    p.add_argument("--report", default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("synth", help="generate synthetic scenes")
    p.add_argument("--preset", choices=("easy", "hard", "neutral", "both-arms"), required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--split", choices=("train", "test"), default="test")
    p.add_argument("--keypoint-noise", type=float, default=0.0)
    p.add_argument("--depth-noise", type=float, default=0.0)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except (SceneError, ValueError, gesture.TrainingError, synth.GenerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
