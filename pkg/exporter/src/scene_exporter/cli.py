"""scene-export command: one image in, one scene file out.

Exit codes: 0 success, 1 validation/usage or model-availability error,
2 IO error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .backends import ModelUnavailable
from .export import ExportConfig, export_scene


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scene-export",
        description="Run detector/pose/depth/caption models on an image and write a scene file.",
    )
    parser.add_argument("--image", help="input image (unused in --stub mode)")
    parser.add_argument("--out", required=True, help="output scene JSON path")
    parser.add_argument("--detector", default="torchvision", help="torchvision|yolo|owlvit")
    parser.add_argument("--pose", default="torchvision", help="torchvision|mediapipe")
    parser.add_argument("--depth", default="depth-anything")
    parser.add_argument("--captioner", default=None, help="blip|vit-gpt2|git")
    parser.add_argument("--conf", type=float, default=0.25, help="detection confidence threshold")
    parser.add_argument("--stub", action="store_true", help="emit the fixed CI scene, no models")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not args.stub and not args.image:
        print("error: --image is required unless --stub is given", file=sys.stderr)
        return 1
    config = ExportConfig(
        detector=args.detector,
        pose=args.pose,
        depth=args.depth,
        captioner=args.captioner,
        conf=args.conf,
        stub=args.stub,
    )
    try:
        path = export_scene(args.image, args.out, config)
    except ModelUnavailable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps({"scene": str(path)}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
