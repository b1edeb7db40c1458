"""Volume file format, dataset manifests, and the caching volume store.

Binary layout (little-endian throughout):

    magic     4 bytes  b"AOGF"
    version   u16      currently 1
    id_len    u16      byte length of the UTF-8 image id
    image_id  id_len bytes
    image_w   u32
    image_h   u32
    n_slices  u32
    per slice:
        layer    u16
        channel  u16
        grid_h   u16
        grid_w   u16
        stride   f32
        rf_size  f32
        offset   f32
        values   grid_h * grid_w f32, row-major

Manifests are line-delimited JSON records {image_id, volume_path, image_path?}
with paths relative to the manifest file.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DatasetError, VolumeFormatError
from .volume import FeatureVolume, SliceMeta, mirror_volume

MAGIC = b"AOGF"
FORMAT_VERSION = 1

_HEAD = struct.Struct("<4sHH")
_DIMS = struct.Struct("<III")  # image_w, image_h, n_slices
_SLICE_HEAD = struct.Struct("<HHHHfff")


def save_volume(v: FeatureVolume, path) -> None:
    path = Path(path)
    ident = v.image_id.encode("utf-8")
    if len(ident) > 0xFFFF:
        raise ValueError("image_id longer than 65535 bytes")
    parts = [_HEAD.pack(MAGIC, FORMAT_VERSION, len(ident)), ident]
    parts.append(_DIMS.pack(v.image_w, v.image_h, len(v.slices)))
    for meta, grid in v.slices:
        parts.append(
            _SLICE_HEAD.pack(
                meta.layer_index,
                meta.channel_index,
                meta.grid_h,
                meta.grid_w,
                meta.stride_px,
                meta.rf_size_px,
                meta.offset_px,
            )
        )
        parts.append(np.ascontiguousarray(grid, dtype="<f4").tobytes())
    path.write_bytes(b"".join(parts))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise VolumeFormatError("truncated while reading %s" % what, offset=self.pos)
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: struct.Struct, what: str):
        return fmt.unpack(self.take(fmt.size, what))


def load_volume(path) -> FeatureVolume:
    path = Path(path)
    r = _Reader(path.read_bytes())
    magic, version, id_len = r.unpack(_HEAD, "header")
    if magic != MAGIC:
        raise VolumeFormatError("bad magic %r, expected %r" % (magic, MAGIC), offset=0)
    if version != FORMAT_VERSION:
        raise VolumeFormatError("unsupported format version %d" % version, offset=4)
    try:
        image_id = r.take(id_len, "image id").decode("utf-8")
    except UnicodeDecodeError as exc:
        raise VolumeFormatError("image id is not valid UTF-8: %s" % exc, offset=_HEAD.size)
    image_w, image_h, n_slices = r.unpack(_DIMS, "image dims")
    slices = []
    for i in range(n_slices):
        head_off = r.pos
        layer, channel, grid_h, grid_w, stride, rf, offset = r.unpack(
            _SLICE_HEAD, "slice %d header" % i
        )
        values_off = r.pos
        raw = r.take(4 * grid_h * grid_w, "slice %d values" % i)
        grid = np.frombuffer(raw, dtype="<f4").reshape(grid_h, grid_w)
        neg = np.flatnonzero(grid.reshape(-1) < 0)
        if neg.size:
            raise VolumeFormatError(
                "negative activation %r in slice %d" % (float(grid.reshape(-1)[neg[0]]), i),
                offset=values_off + 4 * int(neg[0]),
            )
        try:
            meta = SliceMeta(layer, channel, grid_h, grid_w, stride, rf, offset)
        except ValueError as exc:
            raise VolumeFormatError("invalid slice metadata: %s" % exc, offset=head_off)
        slices.append((meta, grid))
    if r.pos != len(r.data):
        raise VolumeFormatError(
            "%d trailing bytes after last slice" % (len(r.data) - r.pos), offset=r.pos
        )
    try:
        return FeatureVolume(image_id, image_w, image_h, tuple(slices))
    except ValueError as exc:
        raise VolumeFormatError(str(exc), offset=0)


@dataclass(frozen=True)
class ManifestEntry:
    image_id: str
    volume_path: str
    image_path: str | None = None


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    category: str = ""
    root: Path | None = None
    source: Path | None = None  # manifest file this was loaded from, if any

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            if e.image_id in seen:
                raise DatasetError("duplicate image id %r in manifest" % e.image_id)
            seen.add(e.image_id)

    def __len__(self) -> int:
        return len(self.entries)

    def ids(self) -> list[str]:
        return [e.image_id for e in self.entries]

    def entry(self, image_id: str) -> ManifestEntry:
        for e in self.entries:
            if e.image_id == image_id:
                return e
        raise DatasetError("image id %r not in manifest" % image_id)

    def resolve(self, rel_path: str) -> Path:
        base = self.root if self.root is not None else Path(".")
        return base / rel_path


def save_manifest(manifest: DatasetManifest, path) -> None:
    path = Path(path)
    lines = []
    for e in manifest.entries:
        rec = {"image_id": e.image_id, "volume_path": e.volume_path}
        if e.image_path is not None:
            rec["image_path"] = e.image_path
        lines.append(json.dumps(rec, sort_keys=True))
    path.write_text("\n".join(lines) + ("\n" if lines else ""))


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    entries = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError("%s line %d: %s" % (path, lineno, exc))
        try:
            entries.append(
                ManifestEntry(rec["image_id"], rec["volume_path"], rec.get("image_path"))
            )
        except KeyError as exc:
            raise DatasetError("%s line %d: missing field %s" % (path, lineno, exc))
    return DatasetManifest(tuple(entries), category=path.stem, root=path.parent, source=path)


class VolumeStore:
    """Caching access to a dataset's volumes, keyed by image id.

    Loaded volumes, their mirrored variants, and per-channel z-scored stacks
    are cached for the lifetime of the store; volumes are immutable so the
    cache never invalidates.
    """

    def __init__(self, manifest: DatasetManifest):
        if len(manifest) == 0:
            raise DatasetError("empty dataset")
        self.manifest = manifest
        self._volumes: dict[str, FeatureVolume] = {}
        self._mirrored: dict[str, FeatureVolume] = {}
        self._stats = None
        self._zstacks: dict[tuple[int, int], np.ndarray] = {}

    @classmethod
    def from_volumes(cls, volumes, category: str = "") -> "VolumeStore":
        """Build an in-memory store from FeatureVolume objects (tests, benchmarks)."""
        volumes = list(volumes)
        manifest = DatasetManifest(
            tuple(ManifestEntry(v.image_id, v.image_id + ".aogf") for v in volumes),
            category=category,
        )
        store = cls(manifest)
        store._volumes = {v.image_id: v for v in volumes}
        return store

    def ids(self) -> list[str]:
        return self.manifest.ids()

    def __len__(self) -> int:
        return len(self.manifest)

    def get(self, image_id: str, flipped: bool = False) -> FeatureVolume:
        if flipped:
            if image_id not in self._mirrored:
                self._mirrored[image_id] = mirror_volume(self.get(image_id))
            return self._mirrored[image_id]
        if image_id not in self._volumes:
            entry = self.manifest.entry(image_id)
            vol_path = self.manifest.resolve(entry.volume_path)
            if not vol_path.exists():
                raise DatasetError("volume file %s not found" % vol_path)
            v = load_volume(vol_path)
            if v.image_id != image_id:
                raise DatasetError(
                    "volume %s carries id %r, manifest says %r" % (vol_path, v.image_id, image_id)
                )
            self._volumes[image_id] = v
        return self._volumes[image_id]

    def image_size(self, image_id: str) -> tuple[int, int]:
        v = self.get(image_id)
        return (v.image_w, v.image_h)

    def set_stats(self, stats) -> None:
        """Bind the normalization used by z-stack caches; must not change afterwards."""
        if self._stats is not None and self._stats is not stats and self._stats != stats:
            raise ValueError("store already bound to different channel statistics")
        self._stats = stats

    def zstack(self, layer_index: int, channel_index: int) -> tuple[list[str], np.ndarray]:
        """Z-scored grids of one (layer, channel) stacked over all ids, in ids() order.

        Requires set_stats() first. Returns (ids, float64 array of shape (N, H, W)).
        """
        if self._stats is None:
            raise ValueError("set_stats() before requesting z-stacks")
        key = (layer_index, channel_index)
        if key not in self._zstacks:
            ids = self.ids()
            grids = []
            for image_id in ids:
                _, grid = self.get(image_id).get_slice(layer_index, channel_index)
                grids.append(self._stats.zscore(layer_index, channel_index, grid))
            self._zstacks[key] = np.stack(grids)
        return self.ids(), self._zstacks[key]
