"""Per-channel activation statistics used for z-scoring unit responses."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DatasetError, MissingSliceError

# Channels that are constant across the dataset get unit scale so their
# z-scores come out as zero instead of blowing up.
ZERO_STD_FLOOR = 1e-12


@dataclass(frozen=True)
class ChannelStats:
    """Mean and population std of every (layer, channel) over all cells of all images."""

    entries: dict[tuple[int, int], tuple[float, float]]
    image_count: int

    def mean_std(self, layer_index: int, channel_index: int) -> tuple[float, float]:
        try:
            return self.entries[(layer_index, channel_index)]
        except KeyError:
            raise MissingSliceError(
                "no statistics for slice (layer=%d, channel=%d)" % (layer_index, channel_index)
            ) from None

    def scale(self, layer_index: int, channel_index: int) -> float:
        _, std = self.mean_std(layer_index, channel_index)
        return std if std > ZERO_STD_FLOOR else 1.0

    def zscore(self, layer_index: int, channel_index: int, values) -> np.ndarray:
        mean, _ = self.mean_std(layer_index, channel_index)
        scale = self.scale(layer_index, channel_index)
        return (np.asarray(values, dtype=np.float64) - mean) / scale

    def keys(self) -> list[tuple[int, int]]:
        return sorted(self.entries)


def channel_stats(store) -> ChannelStats:
    """Accumulate per-channel statistics over every volume in the store.

    Deterministic: images are visited in manifest order, cells row-major,
    sums in float64.
    """
    ids = store.ids()
    if not ids:
        raise DatasetError("empty dataset")
    acc: dict[tuple[int, int], list[float]] = {}
    for image_id in ids:
        v = store.get(image_id)
        for meta, grid in v.slices:
            g = grid.astype(np.float64)
            s = acc.setdefault(meta.key, [0.0, 0.0, 0.0])
            s[0] += float(g.sum())
            s[1] += float(np.square(g).sum())
            s[2] += g.size
    entries = {}
    for key in sorted(acc):
        total, total_sq, count = acc[key]
        mean = total / count
        var = max(0.0, total_sq / count - mean * mean)
        entries[key] = (mean, float(np.sqrt(var)))
    return ChannelStats(entries, image_count=len(ids))


def stats_to_dict(stats: ChannelStats) -> dict:
    return {
        "image_count": stats.image_count,
        "channels": [
            [layer, channel, mean, std]
            for (layer, channel), (mean, std) in sorted(stats.entries.items())
        ],
    }


def stats_from_dict(doc: dict) -> ChannelStats:
    return ChannelStats(
        entries={
            (layer, channel): (mean, std)
            for layer, channel, mean, std in doc["channels"]
        },
        image_count=doc["image_count"],
    )
