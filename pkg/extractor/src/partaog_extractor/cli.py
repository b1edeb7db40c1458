"""Command-line front end: a folder or list of images in, feature volumes out."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from partaog.errors import DatasetError, PartAogError

from .extract import ExtractConfig, extract

IMAGE_SUFFIXES = (".jpg", ".jpeg", ".png", ".bmp", ".gif", ".tif", ".tiff", ".webp")


def read_image_list(path: Path) -> list[tuple[str, Path]]:
    """Line-delimited JSON {image_id, image_path}, paths relative to the file."""
    pairs = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            pairs.append((rec["image_id"], path.parent / rec["image_path"]))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DatasetError("%s line %d: %s" % (path, lineno, exc))
    return pairs


def scan_directory(path: Path) -> list[tuple[str, Path]]:
    """Every image file in the directory, ids from file stems, sorted."""
    pairs = [
        (p.stem, p)
        for p in sorted(path.iterdir())
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    ]
    if not pairs:
        raise DatasetError("no image files in %s" % path)
    return pairs


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="partaog-extract",
        description="Run cropped object images through VGG-16 and write feature volumes",
    )
    parser.add_argument(
        "--images",
        required=True,
        help="directory of images, or a JSONL list of {image_id, image_path}",
    )
    parser.add_argument("--out", required=True, help="output dataset directory")
    parser.add_argument(
        "--layers", nargs="+", default=None, help="conv layers to export (default: last 9)"
    )
    parser.add_argument("--input-size", type=int, default=224)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--weights", default=None, help="VGG-16 state-dict file (default: seeded random init)"
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    source = Path(args.images)
    try:
        if source.is_dir():
            pairs = scan_directory(source)
        else:
            pairs = read_image_list(source)
        cfg = ExtractConfig(
            out_dir=Path(args.out),
            layers=None if args.layers is None else tuple(args.layers),
            input_size=args.input_size,
            seed=args.seed,
            weights_path=None if args.weights is None else Path(args.weights),
        )
        manifest = extract(pairs, cfg)
    except PartAogError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    print(
        "wrote %d volumes to %s (%d of %d images readable)"
        % (len(manifest), args.out, len(manifest), len(pairs))
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
