"""Pattern mining: grow part templates from a handful of annotations.

A candidate pattern is every (layer, channel, seed position) triple with the
seed position on the candidate-stride grid. Each candidate's deformation
center mu and prior displacement delta_bar are estimated from the annotated
images (mean best-unit position / mean displacement from the annotated box
center), then candidates are ranked by the additive mining objective

    mean over annotated images of (unit score + spatial term at the annotated
    center) + local_term_weight * mean over ALL dataset images of unit score

and the top n survive. Because the objective is additive per pattern, the
greedy top-n equals the exhaustive best subset. A final refinement pass
re-estimates mu/delta_bar from the kept candidates' argmax positions.
"""

from __future__ import annotations

import math

import numpy as np

from ..annotations import PartAnnotation, check_box_within
from ..errors import AnnotationError
from ..features.stats import ChannelStats
from .config import MiningConfig
from .model import AndOrGraph, LatentPattern, PartTemplate


def _clamp_mu(mu: float, radius: float, size: int) -> float:
    """Keep at least one integer cell inside [mu - r, mu + r] within [0, size)."""
    mu = min(max(mu, 0.0), float(size - 1))
    if math.floor(mu + radius) < math.ceil(mu - radius):
        mu = float(round(mu))
    return mu


def _window(mu, radius, grid_h, grid_w):
    r0 = max(0, math.ceil(mu[0] - radius))
    r1 = min(grid_h - 1, math.floor(mu[0] + radius))
    c0 = max(0, math.ceil(mu[1] - radius))
    c1 = min(grid_w - 1, math.floor(mu[1] + radius))
    rows = np.repeat(np.arange(r0, r1 + 1), c1 - c0 + 1)
    cols = np.tile(np.arange(c0, c1 + 1), r1 - r0 + 1)
    return rows, cols


class _SliceBlock:
    """One (layer, channel) prepared for mining: annotated stack + dataset stack."""

    def __init__(self, meta, sample_z: np.ndarray, centers: np.ndarray, dataset_z: np.ndarray):
        self.meta = meta
        self.sample_z = sample_z  # (m, H, W) z-grids of the annotated images
        self.centers = centers  # (m, 2) annotated part centers, px (x, y)
        self.dataset_z = dataset_z  # (N, H, W) z-grids of every dataset image


class _Candidate:
    __slots__ = ("layer", "channel", "mu0", "mu", "delta", "value")

    def __init__(self, layer, channel, mu0):
        self.layer = layer
        self.channel = channel
        self.mu0 = mu0
        self.mu = (float(mu0[0]), float(mu0[1]))
        self.delta = (0.0, 0.0)
        self.value = -math.inf

    @property
    def sort_key(self):
        return (self.layer, self.channel, self.mu0[0], self.mu0[1])


def _best_units(block: _SliceBlock, z: np.ndarray, cand: _Candidate, radius, w_def):
    """Argmax unit per image of z (stacked) within the candidate's window."""
    meta = block.meta
    rows, cols = _window(cand.mu, radius, meta.grid_h, meta.grid_w)
    dr = rows - cand.mu[0]
    dc = cols - cand.mu[1]
    pen = w_def * (dr * dr + dc * dc) / (radius + 1.0) ** 2
    gathered = z[:, rows, cols] - pen
    idx = np.argmax(gathered, axis=1)
    scores = gathered[np.arange(z.shape[0]), idx]
    return rows[idx], cols[idx], scores


def _estimate(cand: _Candidate, block: _SliceBlock, radius, w_def) -> None:
    """Set cand.mu / cand.delta from the best unit of each annotated image."""
    meta = block.meta
    rows, cols, _ = _best_units(block, block.sample_z, cand, radius, w_def)
    px = meta.offset_px + cols * meta.stride_px
    py = meta.offset_px + rows * meta.stride_px
    mu_r = _clamp_mu(float(np.mean(rows)), radius, meta.grid_h)
    mu_c = _clamp_mu(float(np.mean(cols)), radius, meta.grid_w)
    cand.mu = (mu_r, mu_c)
    cand.delta = (
        float(np.mean(px - block.centers[:, 0])),
        float(np.mean(py - block.centers[:, 1])),
    )


def _evaluate(cand: _Candidate, block: _SliceBlock, radius, w_def, sigma_s, local_weight) -> None:
    """Rank value: mean annotated (unit + spatial) + weighted mean dataset unit score."""
    meta = block.meta
    rows, cols, scores = _best_units(block, block.sample_z, cand, radius, w_def)
    px = meta.offset_px + cols * meta.stride_px
    py = meta.offset_px + rows * meta.stride_px
    ddx = px - block.centers[:, 0] - cand.delta[0]
    ddy = py - block.centers[:, 1] - cand.delta[1]
    two_sigma_sq = 2.0 * sigma_s * sigma_s
    ann = float(np.mean(scores - (ddx * ddx + ddy * ddy) / two_sigma_sq))
    _, _, dataset_scores = _best_units(block, block.dataset_z, cand, radius, w_def)
    cand.value = ann + local_weight * float(np.mean(dataset_scores))


def _prepare_blocks(annots, store, stats) -> dict[tuple[int, int], _SliceBlock]:
    volumes = []
    centers = []
    for a in annots:
        v = store.get(a.image_id, flipped=a.flipped)
        box = a.box.mirror_x(v.image_w) if a.flipped else a.box
        check_box_within(
            PartAnnotation(a.image_id, box, a.template_label, a.flipped), v.image_w, v.image_h
        )
        on_grid = False
        for meta, _ in v.slices:
            col = (box.center[0] - meta.offset_px) / meta.stride_px
            row = (box.center[1] - meta.offset_px) / meta.stride_px
            if -0.5 <= row <= meta.grid_h - 0.5 and -0.5 <= col <= meta.grid_w - 0.5:
                on_grid = True
                break
        if not on_grid:
            raise AnnotationError(
                "annotated box center %r of image %r falls outside every slice grid"
                % (list(box.center), a.image_id)
            )
        volumes.append(v)
        centers.append(box.center)
    centers = np.array(centers, dtype=np.float64)
    blocks = {}
    for key in volumes[0].keys():
        layer, channel = key
        meta, _ = volumes[0].get_slice(layer, channel)
        sample_z = np.stack(
            [stats.zscore(layer, channel, v.get_slice(layer, channel)[1]) for v in volumes]
        )
        _, dataset_z = store.zstack(layer, channel)
        blocks[key] = _SliceBlock(meta, sample_z, centers, dataset_z)
    return blocks


def mine_template(
    label: str,
    annots,
    store,
    stats: ChannelStats,
    cfg: MiningConfig,
    template_id: int = 0,
) -> PartTemplate:
    """Mine one part template from the annotations carrying its label."""
    annots = list(annots)
    if not annots:
        raise AnnotationError("cannot mine template %r without annotations" % label)
    for a in annots:
        if a.template_label != label:
            raise AnnotationError(
                "annotation for %r mixed into template %r" % (a.template_label, label)
            )
    store.set_stats(stats)
    blocks = _prepare_blocks(annots, store, stats)

    region_w = 0.0
    region_h = 0.0
    diag = 0.0
    for a in annots:
        region_w += a.box.w
        region_h += a.box.h
        w, h = store.image_size(a.image_id)
        diag += math.hypot(w, h)
    region_w /= len(annots)
    region_h /= len(annots)
    if cfg.sigma_override is not None:
        sigma_s = cfg.sigma_override
    else:
        sigma_s = cfg.sigma_factor * (diag / len(annots))

    radius = cfg.window_radius
    w_def = cfg.deformation_weight
    candidates = []
    for key in sorted(blocks):
        block = blocks[key]
        for r0 in range(0, block.meta.grid_h, cfg.candidate_stride):
            for c0 in range(0, block.meta.grid_w, cfg.candidate_stride):
                cand = _Candidate(key[0], key[1], (r0, c0))
                _estimate(cand, block, radius, w_def)
                _evaluate(cand, block, radius, w_def, sigma_s, cfg.local_term_weight)
                candidates.append(cand)

    # candidates that converged to the same estimated pattern are one pattern
    seen = set()
    unique = []
    for cand in candidates:
        key = (cand.layer, cand.channel, cand.mu, cand.delta)
        if key not in seen:
            seen.add(key)
            unique.append(cand)
    unique.sort(key=lambda c: (-c.value,) + c.sort_key)
    kept = unique[: cfg.patterns_per_template]

    for _ in range(cfg.refine_iterations):
        for cand in kept:
            _estimate(cand, blocks[(cand.layer, cand.channel)], radius, w_def)

    patterns = tuple(
        LatentPattern(
            pattern_id="t%dp%d" % (template_id, i),
            layer_index=cand.layer,
            channel_index=cand.channel,
            mu=cand.mu,
            window_radius=radius,
            delta_bar=cand.delta,
            sigma_s=sigma_s,
            w_def=w_def,
        )
        for i, cand in enumerate(kept)
    )
    return PartTemplate(
        template_id=template_id,
        label=label,
        patterns=patterns,
        region_w=region_w,
        region_h=region_h,
        support_count=len(annots),
    )


def refine_template(
    template: PartTemplate, annots, store, stats: ChannelStats, cfg: MiningConfig
) -> PartTemplate:
    """Re-mine a template from an enlarged annotation set, keeping its identity."""
    return mine_template(
        template.label, annots, store, stats, cfg, template_id=template.template_id
    )


def grow_aog(
    aog: AndOrGraph,
    annot: PartAnnotation,
    label_annots,
    store,
    stats: ChannelStats,
    cfg: MiningConfig,
) -> AndOrGraph:
    """Fold one new annotation into the graph.

    A new label mines a new template (fresh id); an existing label re-mines
    its template in place. Other branches are untouched. label_annots must be
    every annotation carrying annot's label, including annot itself.
    """
    if annot not in label_annots:
        raise AnnotationError("label_annots must include the new annotation")
    existing = aog.template_by_label(annot.template_label)
    if existing is None:
        next_id = max((t.template_id for t in aog.templates), default=-1) + 1
        template = mine_template(
            annot.template_label, label_annots, store, stats, cfg, template_id=next_id
        )
    else:
        template = refine_template(existing, label_annots, store, stats, cfg)
    return aog.with_template(template)
