"""Shared builders for the test suite.

Most tests run on tiny hand-built volumes where every activation is chosen
explicitly; the helpers here keep that construction to one line. Stats built
via unit_stats() carry mean 0 and std 1, so z-scored values equal the raw
activations and expected scores can be written down by hand.
"""

from __future__ import annotations

import numpy as np

from partaog import (
    ChannelStats,
    FeatureVolume,
    LatentPattern,
    PartTemplate,
    SliceMeta,
    VolumeStore,
)


def make_meta(
    layer=0,
    channel=0,
    grid_h=8,
    grid_w=8,
    stride_px=8.0,
    rf_size_px=16.0,
    offset_px=4.0,
) -> SliceMeta:
    return SliceMeta(layer, channel, grid_h, grid_w, stride_px, rf_size_px, offset_px)


def make_volume(image_id="img", grids=None, stride_px=8.0, offset_px=4.0, rf_size_px=16.0):
    """Volume from {(layer, channel): 2d array}; image size follows the first grid."""
    if grids is None:
        grids = {(0, 0): np.zeros((8, 8), dtype=np.float32)}
    slices = []
    first = next(iter(grids.values()))
    image_w = int(round(np.asarray(first).shape[1] * stride_px))
    image_h = int(round(np.asarray(first).shape[0] * stride_px))
    for (layer, channel), grid in sorted(grids.items()):
        grid = np.asarray(grid, dtype=np.float32)
        meta = SliceMeta(
            layer, channel, grid.shape[0], grid.shape[1], stride_px, rf_size_px, offset_px
        )
        slices.append((meta, grid))
    return FeatureVolume(image_id, image_w, image_h, tuple(slices))


def unit_stats(keys) -> ChannelStats:
    """Stats with mean 0 / std 1 for every key, so zscore(x) == x."""
    return ChannelStats({tuple(k): (0.0, 1.0) for k in keys}, image_count=1)


def make_pattern(
    pattern_id="p0",
    layer=0,
    channel=0,
    mu=(4.0, 4.0),
    window_radius=1.0,
    delta_bar=(0.0, 0.0),
    sigma_s=8.0,
    w_def=0.5,
) -> LatentPattern:
    return LatentPattern(pattern_id, layer, channel, mu, window_radius, delta_bar, sigma_s, w_def)


def make_template(patterns, template_id=0, label="a", region_w=32.0, region_h=32.0):
    return PartTemplate(
        template_id=template_id,
        label=label,
        patterns=tuple(patterns),
        region_w=region_w,
        region_h=region_h,
        support_count=1,
    )


def store_of(volumes) -> VolumeStore:
    return VolumeStore.from_volumes(volumes)


def random_volume(rng, image_id="img", grid_h=8, grid_w=8, channels=2, stride_px=8.0):
    grids = {
        (0, ch): rng.uniform(0.0, 1.0, size=(grid_h, grid_w)).astype(np.float32)
        for ch in range(channels)
    }
    return make_volume(image_id, grids, stride_px=stride_px, offset_px=stride_px / 2.0)
