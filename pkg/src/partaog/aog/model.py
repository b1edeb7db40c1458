"""Four-layer part model: part (OR) -> templates (AND) -> patterns (OR) -> units.

The graph is held fully explicit at the top three layers. The terminal layer
(the units under each latent pattern) is implicit: it is the integer lattice
inside [mu - r, mu + r] per axis, clipped to the pattern's slice, so it never
needs to be stored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from ..errors import EmptyModelError
from ..features.stats import ChannelStats, stats_from_dict, stats_to_dict
from ..geometry import Box, Point
from .config import MiningConfig

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class LatentPattern:
    pattern_id: str
    layer_index: int
    channel_index: int
    mu: tuple[float, float]  # deformation-range center, grid (row, col), may be fractional
    window_radius: float
    delta_bar: tuple[float, float]  # mean displacement from the part center, image px (dx, dy)
    sigma_s: float
    w_def: float = 0.5

    def __post_init__(self):
        if self.window_radius < 0:
            raise ValueError("window_radius must be >= 0")
        if self.sigma_s <= 0:
            raise ValueError("sigma_s must be positive")


@dataclass(frozen=True)
class PartTemplate:
    template_id: int
    label: str
    patterns: tuple[LatentPattern, ...]
    region_w: float
    region_h: float
    support_count: int

    def __post_init__(self):
        if self.region_w <= 0 or self.region_h <= 0:
            raise ValueError("template region must be non-degenerate")
        ids = [p.pattern_id for p in self.patterns]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate pattern ids in template %r" % self.label)


@dataclass(frozen=True)
class AndOrGraph:
    part_name: str
    templates: tuple[PartTemplate, ...]
    normalization: ChannelStats | None = None
    mining_config: MiningConfig | None = None

    def __post_init__(self):
        ids = [t.template_id for t in self.templates]
        labels = [t.label for t in self.templates]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate template ids %r" % ids)
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate template labels %r" % labels)
        pattern_ids = [p.pattern_id for t in self.templates for p in t.patterns]
        if len(set(pattern_ids)) != len(pattern_ids):
            raise ValueError("a pattern id is shared between templates")

    def __len__(self) -> int:
        return len(self.templates)

    def labels(self) -> list[str]:
        return [t.label for t in self.templates]

    def template_by_id(self, template_id: int) -> PartTemplate:
        for t in self.templates:
            if t.template_id == template_id:
                return t
        raise EmptyModelError("no template with id %r" % template_id)

    def template_by_label(self, label: str) -> PartTemplate | None:
        for t in self.templates:
            if t.label == label:
                return t
        return None

    def with_template(self, template: PartTemplate) -> "AndOrGraph":
        """Replace the template with the same id, or append a new one."""
        out = []
        replaced = False
        for t in self.templates:
            if t.template_id == template.template_id:
                out.append(template)
                replaced = True
            else:
                out.append(t)
        if not replaced:
            out.append(template)
        return replace(self, templates=tuple(out))


@dataclass(frozen=True)
class PatternParse:
    pattern_id: str
    unit: tuple[int, int]  # chosen grid cell (row, col)
    unit_score: float
    region: Box  # receptive-field box of the chosen unit, clipped to the image


@dataclass(frozen=True)
class ParseGraph:
    image_id: str
    template_id: int
    part_box: Box
    part_center: Point
    part_score: float
    patterns: tuple[PatternParse, ...]


# --- serialization ---------------------------------------------------------


def _pattern_to_dict(p: LatentPattern) -> dict:
    return {
        "pattern_id": p.pattern_id,
        "layer_index": p.layer_index,
        "channel_index": p.channel_index,
        "mu": list(p.mu),
        "window_radius": p.window_radius,
        "delta_bar": list(p.delta_bar),
        "sigma_s": p.sigma_s,
        "w_def": p.w_def,
    }


def _pattern_from_dict(d: dict) -> LatentPattern:
    return LatentPattern(
        pattern_id=d["pattern_id"],
        layer_index=d["layer_index"],
        channel_index=d["channel_index"],
        mu=(d["mu"][0], d["mu"][1]),
        window_radius=d["window_radius"],
        delta_bar=(d["delta_bar"][0], d["delta_bar"][1]),
        sigma_s=d["sigma_s"],
        w_def=d["w_def"],
    )


def graph_to_dict(aog: AndOrGraph) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "part_name": aog.part_name,
        "templates": [
            {
                "template_id": t.template_id,
                "label": t.label,
                "region_w": t.region_w,
                "region_h": t.region_h,
                "support_count": t.support_count,
                "patterns": [_pattern_to_dict(p) for p in t.patterns],
            }
            for t in aog.templates
        ],
    }
    if aog.normalization is not None:
        doc["normalization"] = stats_to_dict(aog.normalization)
    if aog.mining_config is not None:
        doc["mining_config"] = aog.mining_config.to_dict()
    return doc


def graph_from_dict(doc: dict) -> AndOrGraph:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError("unsupported graph schema version %r" % version)
    templates = tuple(
        PartTemplate(
            template_id=t["template_id"],
            label=t["label"],
            patterns=tuple(_pattern_from_dict(p) for p in t["patterns"]),
            region_w=t["region_w"],
            region_h=t["region_h"],
            support_count=t["support_count"],
        )
        for t in doc["templates"]
    )
    normalization = None
    if "normalization" in doc:
        normalization = stats_from_dict(doc["normalization"])
    mining_config = None
    if "mining_config" in doc:
        mining_config = MiningConfig.from_dict(doc["mining_config"])
    return AndOrGraph(
        part_name=doc["part_name"],
        templates=templates,
        normalization=normalization,
        mining_config=mining_config,
    )


def save_graph(aog: AndOrGraph, path) -> None:
    Path(path).write_text(json.dumps(graph_to_dict(aog), sort_keys=True, indent=1) + "\n")


def load_graph(path) -> AndOrGraph:
    return graph_from_dict(json.loads(Path(path).read_text()))


def mirror_graph(aog: AndOrGraph, slice_dims, image_w: float) -> AndOrGraph:
    """Reflect a graph about the vertical image midline.

    slice_dims maps (layer_index, channel_index) -> (grid_h, grid_w); grids
    are needed because mu mirrors within its own slice. Intended for volumes
    whose slice geometry is horizontally centered (offset = stride / 2).
    """
    templates = []
    for t in aog.templates:
        patterns = []
        for p in t.patterns:
            _, grid_w = slice_dims[(p.layer_index, p.channel_index)]
            patterns.append(
                replace(
                    p,
                    mu=(p.mu[0], (grid_w - 1) - p.mu[1]),
                    delta_bar=(-p.delta_bar[0], p.delta_bar[1]),
                )
            )
        templates.append(replace(t, patterns=tuple(patterns)))
    return replace(aog, templates=tuple(templates))
