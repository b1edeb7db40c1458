"""Run cropped object images through the network and write feature volumes."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from partaog import (
    DatasetManifest,
    FeatureVolume,
    ManifestEntry,
    SliceMeta,
    save_manifest,
    save_volume,
)
from partaog.errors import ConfigError

from .network import build_vgg16, capture_activations, conv_geometry, select_layers

log = logging.getLogger(__name__)

DEFAULT_LAYER_COUNT = 9

IMAGENET_MEAN = np.array([0.485, 0.456, 0.406], dtype=np.float32)
IMAGENET_STD = np.array([0.229, 0.224, 0.225], dtype=np.float32)


@dataclass(frozen=True)
class ExtractConfig:
    out_dir: Path
    model: str = "vgg16"
    layers: tuple[str, ...] | None = None  # None picks the last 9 conv layers
    input_size: int = 224
    seed: int = 0
    weights_path: Path | None = None

    def __post_init__(self):
        if self.model != "vgg16":
            raise ConfigError("unsupported model %r; only vgg16 is wired up" % self.model)
        if self.layers is not None and len(self.layers) == 0:
            raise ConfigError("at least one conv layer must be exported")
        if self.input_size < 16:
            raise ConfigError("input_size must be >= 16, got %d" % self.input_size)


def default_layers(table) -> tuple[str, ...]:
    """The last 9 conv layers, the valid layers per the part model's regime."""
    return tuple(layer.name for layer in table[-DEFAULT_LAYER_COUNT:])


def _preprocess(image: Image.Image, size: int) -> torch.Tensor:
    """Square-resized, ImageNet-normalized CHW float tensor."""
    resized = image.convert("RGB").resize((size, size), Image.BILINEAR)
    pixels = np.asarray(resized, dtype=np.float32) / 255.0
    pixels = (pixels - IMAGENET_MEAN) / IMAGENET_STD
    return torch.from_numpy(np.ascontiguousarray(pixels.transpose(2, 0, 1)))


def _volume_slices(layers, captured) -> tuple:
    slices = []
    for layer in layers:
        stack = captured[layer.name][0].numpy()
        grid_h, grid_w = stack.shape[1], stack.shape[2]
        for channel in range(stack.shape[0]):
            meta = SliceMeta(
                layer.conv_index,
                channel,
                grid_h,
                grid_w,
                layer.stride_px,
                layer.rf_size_px,
                layer.offset_px,
            )
            slices.append((meta, stack[channel]))
    return tuple(slices)


def extract(images, cfg: ExtractConfig) -> DatasetManifest:
    """Write one volume per readable (image_id, image_path) pair plus a manifest.

    Images are expected pre-cropped to the object. Unreadable files are skipped
    with a logged id; the manifest lists only what was written.
    """
    model = build_vgg16(cfg.seed, cfg.weights_path)
    table = conv_geometry(model.features)
    names = default_layers(table) if cfg.layers is None else cfg.layers
    layers = select_layers(table, names)
    out_dir = Path(cfg.out_dir)
    (out_dir / "volumes").mkdir(parents=True, exist_ok=True)
    entries = []
    for image_id, image_path in images:
        try:
            with Image.open(image_path) as image:
                batch = _preprocess(image, cfg.input_size).unsqueeze(0)
        except (OSError, ValueError) as exc:
            log.warning("skipping %s: cannot read %s (%s)", image_id, image_path, exc)
            continue
        captured = capture_activations(model, layers, batch)
        volume = FeatureVolume(
            image_id, cfg.input_size, cfg.input_size, _volume_slices(layers, captured)
        )
        rel_volume = "volumes/%s.aogf" % image_id
        save_volume(volume, out_dir / rel_volume)
        rel_image = os.path.relpath(Path(image_path).resolve(), out_dir.resolve())
        entries.append(ManifestEntry(image_id, rel_volume, rel_image))
        log.info("wrote %s (%d slices)", rel_volume, len(volume.slices))
    manifest = DatasetManifest(tuple(entries), category=out_dir.name, root=out_dir)
    save_manifest(manifest, out_dir / "manifest.jsonl")
    return manifest
