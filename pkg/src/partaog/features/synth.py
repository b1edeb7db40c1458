"""Synthetic feature-volume generator with known part ground truth.

Each image is a stack of single-layer activation grids. The chosen template
plants isotropic Gaussian bumps at fixed per-template cell offsets around a
part center, plus uniform noise. The generator is a pure function of
(config, seed): identical arguments produce byte-identical datasets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..annotations import GroundTruth, PartAnnotation, write_ground_truth
from ..errors import AnnotationError, ConfigError
from ..geometry import Box
from .io import DatasetManifest, ManifestEntry, save_manifest, save_volume
from .volume import FeatureVolume, SliceMeta, unit_center


@dataclass(frozen=True)
class BumpSpec:
    channel: int
    d_row: float  # cell offset from the part center
    d_col: float
    amplitude: float


@dataclass(frozen=True)
class TemplateLayout:
    label: str
    bumps: tuple[BumpSpec, ...]
    box_w: float  # ground-truth part box size, px
    box_h: float
    frequency: float = 1.0
    placement_jitter: float = 0.0  # per-bump uniform jitter in cells


@dataclass(frozen=True)
class SynthConfig:
    templates: tuple[TemplateLayout, ...]
    num_images: int = 50
    grid_h: int = 16
    grid_w: int = 16
    num_channels: int = 6
    stride_px: float = 8.0
    layer_index: int = 0
    noise: float = 0.2
    bump_sigma: float = 1.5
    center_jitter: int = 2  # part center cell jitter around the grid center
    flip_fraction: float = 0.0
    absent_fraction: float = 0.0
    id_prefix: str = "img"
    category: str = "synthetic"

    def __post_init__(self):
        if not self.templates:
            raise ConfigError("need at least one template layout")
        if self.num_images < 1:
            raise ConfigError("num_images must be >= 1")
        labels = [t.label for t in self.templates]
        if len(set(labels)) != len(labels):
            raise ConfigError("duplicate template labels %r" % labels)
        for t in self.templates:
            for b in t.bumps:
                if not (0 <= b.channel < self.num_channels):
                    raise ConfigError(
                        "template %r bump channel %d outside [0, %d)"
                        % (t.label, b.channel, self.num_channels)
                    )
        if self.noise < 0 or self.bump_sigma <= 0:
            raise ConfigError("noise must be >= 0 and bump_sigma > 0")
        if not (0.0 <= self.flip_fraction <= 1.0 and 0.0 <= self.absent_fraction <= 1.0):
            raise ConfigError("fractions must be within [0, 1]")

    @property
    def image_w(self) -> int:
        return int(round(self.grid_w * self.stride_px))

    @property
    def image_h(self) -> int:
        return int(round(self.grid_h * self.stride_px))

    def slice_meta(self, channel: int) -> SliceMeta:
        return SliceMeta(
            layer_index=self.layer_index,
            channel_index=channel,
            grid_h=self.grid_h,
            grid_w=self.grid_w,
            stride_px=self.stride_px,
            rf_size_px=2.0 * self.stride_px,
            offset_px=self.stride_px / 2.0,
        )


def _render_image(cfg: SynthConfig, rng: np.random.Generator, image_id: str):
    grids = rng.uniform(0.0, cfg.noise, size=(cfg.num_channels, cfg.grid_h, cfg.grid_w))
    absent = bool(rng.random() < cfg.absent_fraction)
    if absent:
        return grids, None

    weights = np.array([t.frequency for t in cfg.templates], dtype=np.float64)
    tmpl = cfg.templates[int(rng.choice(len(cfg.templates), p=weights / weights.sum()))]
    flipped = bool(rng.random() < cfg.flip_fraction)
    center_row = cfg.grid_h // 2 + int(rng.integers(-cfg.center_jitter, cfg.center_jitter + 1))
    center_col = cfg.grid_w // 2 + int(rng.integers(-cfg.center_jitter, cfg.center_jitter + 1))

    rows = np.arange(cfg.grid_h, dtype=np.float64)[:, None]
    cols = np.arange(cfg.grid_w, dtype=np.float64)[None, :]
    two_sigma_sq = 2.0 * cfg.bump_sigma * cfg.bump_sigma
    for bump in tmpl.bumps:
        jr = rng.uniform(-tmpl.placement_jitter, tmpl.placement_jitter)
        jc = rng.uniform(-tmpl.placement_jitter, tmpl.placement_jitter)
        d_col = -bump.d_col if flipped else bump.d_col
        br = center_row + bump.d_row + jr
        bc = center_col + d_col + jc
        grids[bump.channel] += bump.amplitude * np.exp(
            -((rows - br) ** 2 + (cols - bc) ** 2) / two_sigma_sq
        )

    meta = cfg.slice_meta(0)
    cx, cy = unit_center(meta, (center_row, center_col))
    annot = PartAnnotation(
        image_id=image_id,
        box=Box.from_center(cx, cy, tmpl.box_w, tmpl.box_h),
        template_label=tmpl.label,
        flipped=flipped,
    )
    b = annot.box
    if b.x < 0 or b.y < 0 or b.x2 > cfg.image_w or b.y2 > cfg.image_h:
        raise AnnotationError(
            "config places ground-truth box %r outside the %dx%d image; "
            "reduce center_jitter or the template box size"
            % (b.to_list(), cfg.image_w, cfg.image_h)
        )
    return grids, annot


def generate_dataset(cfg: SynthConfig, seed: int) -> tuple[list[FeatureVolume], GroundTruth]:
    """In-memory variant: returns (volumes, ground truth) without touching disk."""
    width = max(4, len(str(cfg.num_images - 1)))
    volumes = []
    gt: GroundTruth = {}
    for i in range(cfg.num_images):
        rng = np.random.default_rng([seed, i])
        image_id = "%s_%0*d" % (cfg.id_prefix, width, i)
        grids, annot = _render_image(cfg, rng, image_id)
        slices = tuple(
            (cfg.slice_meta(ch), grids[ch].astype(np.float32)) for ch in range(cfg.num_channels)
        )
        volumes.append(FeatureVolume(image_id, cfg.image_w, cfg.image_h, slices))
        gt[image_id] = annot
    return volumes, gt


def synth_generate(cfg: SynthConfig, seed: int, out_dir) -> tuple[DatasetManifest, GroundTruth]:
    """Write a full synthetic dataset tree and return (manifest, ground truth).

    Layout: out_dir/volumes/<id>.aogf, out_dir/manifest.jsonl,
    out_dir/ground_truth.jsonl. Paths inside the manifest are relative, so
    trees produced from the same (config, seed) are byte-identical anywhere.
    """
    out_dir = Path(out_dir)
    (out_dir / "volumes").mkdir(parents=True, exist_ok=True)
    volumes, gt = generate_dataset(cfg, seed)
    entries = []
    for v in volumes:
        rel = "volumes/%s.aogf" % v.image_id
        save_volume(v, out_dir / rel)
        entries.append(ManifestEntry(v.image_id, rel))
    manifest = DatasetManifest(
        tuple(entries),
        category=cfg.category,
        root=out_dir,
        source=out_dir / "manifest.jsonl",
    )
    save_manifest(manifest, out_dir / "manifest.jsonl")
    write_ground_truth(out_dir / "ground_truth.jsonl", gt)
    return manifest, gt
