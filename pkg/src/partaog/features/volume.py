"""Feature volumes: stacks of post-ReLU conv slices with image-plane geometry.

A slice is one (layer, channel) activation grid together with the metadata
needed to map grid cells back onto image pixels. Volumes are treated as
immutable once constructed; every transform returns a new volume.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import GridBoundsError, MissingSliceError
from ..geometry import Box, Point


@dataclass(frozen=True)
class SliceMeta:
    layer_index: int
    channel_index: int
    grid_h: int
    grid_w: int
    stride_px: float
    rf_size_px: float
    offset_px: float

    def __post_init__(self):
        if self.grid_h < 1 or self.grid_w < 1:
            raise ValueError("grid dims must be >= 1, got %dx%d" % (self.grid_h, self.grid_w))
        if self.stride_px <= 0:
            raise ValueError("stride_px must be positive, got %r" % (self.stride_px,))
        if self.rf_size_px < self.stride_px:
            raise ValueError(
                "rf_size_px %r smaller than stride_px %r" % (self.rf_size_px, self.stride_px)
            )

    @property
    def key(self) -> tuple[int, int]:
        return (self.layer_index, self.channel_index)


def unit_center(meta: SliceMeta, pos: tuple[int, int]) -> Point:
    """Image-plane center of grid cell pos = (row, col)."""
    row, col = pos
    return (meta.offset_px + col * meta.stride_px, meta.offset_px + row * meta.stride_px)


def unit_to_image(
    meta: SliceMeta, pos: tuple[int, int], image_w: float, image_h: float
) -> tuple[Point, Box]:
    """Map a grid cell to (center point, receptive field box clipped to the image)."""
    row, col = pos
    if not (0 <= row < meta.grid_h and 0 <= col < meta.grid_w):
        raise GridBoundsError(
            "position (%d, %d) outside %dx%d grid" % (row, col, meta.grid_h, meta.grid_w)
        )
    cx, cy = unit_center(meta, pos)
    half = meta.rf_size_px / 2.0
    field_box = Box(cx - half, cy - half, meta.rf_size_px, meta.rf_size_px)
    return (cx, cy), field_box.clip(image_w, image_h)


@dataclass(frozen=True)
class FeatureVolume:
    image_id: str
    image_w: int
    image_h: int
    slices: tuple[tuple[SliceMeta, np.ndarray], ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.image_w < 1 or self.image_h < 1:
            raise ValueError("image dims must be >= 1")
        index = {}
        frozen = []
        for meta, grid in self.slices:
            grid = np.ascontiguousarray(grid, dtype=np.float32)
            if grid.shape != (meta.grid_h, meta.grid_w):
                raise ValueError(
                    "grid shape %r does not match metadata %dx%d"
                    % (grid.shape, meta.grid_h, meta.grid_w)
                )
            if np.any(grid < 0):
                raise ValueError(
                    "negative activation in slice (%d, %d); volumes are post-ReLU"
                    % (meta.layer_index, meta.channel_index)
                )
            if meta.key in index:
                raise ValueError("duplicate slice key %r" % (meta.key,))
            grid.flags.writeable = False
            index[meta.key] = (meta, grid)
            frozen.append((meta, grid))
        object.__setattr__(self, "slices", tuple(frozen))
        object.__setattr__(self, "_index", index)

    def keys(self) -> list[tuple[int, int]]:
        return sorted(self._index)

    def has_slice(self, layer_index: int, channel_index: int) -> bool:
        return (layer_index, channel_index) in self._index

    def get_slice(self, layer_index: int, channel_index: int) -> tuple[SliceMeta, np.ndarray]:
        try:
            return self._index[(layer_index, channel_index)]
        except KeyError:
            raise MissingSliceError(
                "volume %r has no slice (layer=%d, channel=%d)"
                % (self.image_id, layer_index, channel_index)
            ) from None

    @property
    def top_layer_index(self) -> int:
        return max(meta.layer_index for meta, _ in self.slices)

    def top_layer_slices(self) -> list[tuple[SliceMeta, np.ndarray]]:
        """Slices of the highest layer, ordered by channel index."""
        top = self.top_layer_index
        picked = [
            (meta, grid) for meta, grid in self.slices if meta.layer_index == top
        ]
        picked.sort(key=lambda pair: pair[0].channel_index)
        return picked


def mirror_volume(v: FeatureVolume) -> FeatureVolume:
    """Horizontally flip every slice grid; metadata is unchanged.

    Applying it twice returns the original activations.
    """
    flipped = tuple(
        (meta, np.ascontiguousarray(grid[:, ::-1])) for meta, grid in v.slices
    )
    return FeatureVolume(v.image_id, v.image_w, v.image_h, flipped)
