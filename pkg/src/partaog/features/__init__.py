from .volume import FeatureVolume, SliceMeta, mirror_volume, unit_center, unit_to_image
from .io import (
    DatasetManifest,
    ManifestEntry,
    VolumeStore,
    load_manifest,
    load_volume,
    save_manifest,
    save_volume,
)
from .stats import ChannelStats, channel_stats

__all__ = [
    "ChannelStats",
    "DatasetManifest",
    "FeatureVolume",
    "ManifestEntry",
    "SliceMeta",
    "VolumeStore",
    "channel_stats",
    "load_manifest",
    "load_volume",
    "mirror_volume",
    "save_manifest",
    "save_volume",
    "unit_center",
    "unit_to_image",
]
