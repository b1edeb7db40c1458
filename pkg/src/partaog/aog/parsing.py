"""Hierarchical parsing: units -> latent patterns -> templates -> part.

Scoring, bottom to top:

    unit score     z-scored activation minus a quadratic deformation penalty,
                   w_def * |pos - mu|^2 / (window_radius + 1)^2
    pattern (OR)   max unit score over the deformation window
    geometry       each chosen unit votes (unit center px - delta_bar); the
                   template center is the sigma^-2-weighted mean of the votes,
                   which is the closed-form argmax of the summed spatial terms
    template (AND) sum over patterns of (unit score + spatial term at center)
    part (OR)      max over templates

parse_many is the batch twin of parse: it evaluates one pattern across every
image with a single gather, accumulating in the same order as the single-image
path, so both return bit-identical results.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import EmptyModelError, GridBoundsError
from ..geometry import Box
from .model import AndOrGraph, LatentPattern, ParseGraph, PartTemplate, PatternParse


def window_cells(p: LatentPattern, grid_h: int, grid_w: int) -> tuple[np.ndarray, np.ndarray]:
    """Integer grid cells inside [mu - r, mu + r] per axis, clipped to the slice.

    Returned as (rows, cols) index vectors of the row-major flattened window.
    """
    r0 = max(0, math.ceil(p.mu[0] - p.window_radius))
    r1 = min(grid_h - 1, math.floor(p.mu[0] + p.window_radius))
    c0 = max(0, math.ceil(p.mu[1] - p.window_radius))
    c1 = min(grid_w - 1, math.floor(p.mu[1] + p.window_radius))
    if r1 < r0 or c1 < c0:
        raise GridBoundsError(
            "pattern %r window [%r +- %r] misses the %dx%d grid"
            % (p.pattern_id, p.mu, p.window_radius, grid_h, grid_w)
        )
    rows = np.arange(r0, r1 + 1)
    cols = np.arange(c0, c1 + 1)
    rr = np.repeat(rows, cols.size)
    cc = np.tile(cols, rows.size)
    return rr, cc


def _penalties(p: LatentPattern, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    dr = rows - p.mu[0]
    dc = cols - p.mu[1]
    denom = (p.window_radius + 1.0) ** 2
    return p.w_def * (dr * dr + dc * dc) / denom


def score_unit(v, p: LatentPattern, pos: tuple[int, int], stats) -> float:
    """Score of one unit under pattern p; pos must lie inside p's window."""
    meta, grid = v.get_slice(p.layer_index, p.channel_index)
    row, col = pos
    if not (
        abs(row - p.mu[0]) <= p.window_radius and abs(col - p.mu[1]) <= p.window_radius
    ) or not (0 <= row < meta.grid_h and 0 <= col < meta.grid_w):
        raise GridBoundsError(
            "position %r outside pattern %r window" % (pos, p.pattern_id)
        )
    z = float(stats.zscore(p.layer_index, p.channel_index, grid[row, col]))
    dr = row - p.mu[0]
    dc = col - p.mu[1]
    denom = (p.window_radius + 1.0) ** 2
    return z - p.w_def * (dr * dr + dc * dc) / denom


def parse_pattern(v, p: LatentPattern, stats) -> tuple[tuple[int, int], float]:
    """OR maximization: best unit in the window, ties to the smallest (row, col)."""
    meta, grid = v.get_slice(p.layer_index, p.channel_index)
    rows, cols = window_cells(p, meta.grid_h, meta.grid_w)
    z = stats.zscore(p.layer_index, p.channel_index, grid[rows, cols])
    scores = z - _penalties(p, rows, cols)
    best = int(np.argmax(scores))  # first occurrence = lexicographic smallest cell
    return (int(rows[best]), int(cols[best])), float(scores[best])


def spatial_compat(part_center, pattern_pos_img, p: LatentPattern) -> float:
    """Log spatial term: -|(pattern position - part center) - delta_bar|^2 / (2 sigma_s^2)."""
    dx = pattern_pos_img[0] - part_center[0] - p.delta_bar[0]
    dy = pattern_pos_img[1] - part_center[1] - p.delta_bar[1]
    return -(dx * dx + dy * dy) / (2.0 * p.sigma_s * p.sigma_s)


def _template_parse(v, t: PartTemplate, stats) -> ParseGraph:
    if not t.patterns:
        raise EmptyModelError("template %r has no patterns" % t.label)
    chosen = []
    num_x = 0.0
    num_y = 0.0
    den = 0.0
    for p in t.patterns:
        meta, _ = v.get_slice(p.layer_index, p.channel_index)
        pos, unit_score = parse_pattern(v, p, stats)
        cx = meta.offset_px + pos[1] * meta.stride_px
        cy = meta.offset_px + pos[0] * meta.stride_px
        w = 1.0 / (p.sigma_s * p.sigma_s)
        num_x += w * (cx - p.delta_bar[0])
        num_y += w * (cy - p.delta_bar[1])
        den += w
        chosen.append((p, meta, pos, unit_score, (cx, cy)))
    center = (num_x / den, num_y / den)
    score = 0.0
    records = []
    for p, meta, pos, unit_score, pos_img in chosen:
        score += unit_score + spatial_compat(center, pos_img, p)
        half = meta.rf_size_px / 2.0
        region = Box(
            pos_img[0] - half, pos_img[1] - half, meta.rf_size_px, meta.rf_size_px
        ).clip(v.image_w, v.image_h)
        records.append(PatternParse(p.pattern_id, pos, unit_score, region))
    part_box = Box.from_center(center[0], center[1], t.region_w, t.region_h).clip(
        v.image_w, v.image_h
    )
    return ParseGraph(
        image_id=v.image_id,
        template_id=t.template_id,
        part_box=part_box,
        part_center=center,
        part_score=score,
        patterns=tuple(records),
    )


def parse_template(v, t: PartTemplate, stats) -> ParseGraph:
    """AND aggregation of one template over a volume."""
    return _template_parse(v, t, stats)


def parse(v, aog: AndOrGraph, stats) -> ParseGraph:
    """Full parse: best template by score, ties to the smallest template id."""
    if len(aog) == 0:
        raise EmptyModelError("graph has no part templates")
    best = None
    for t in aog.templates:
        pg = _template_parse(v, t, stats)
        if (
            best is None
            or pg.part_score > best.part_score
            or (pg.part_score == best.part_score and pg.template_id < best.template_id)
        ):
            best = pg
    return best


def _shared_meta(store, ids, layer_index, channel_index):
    """Metadata of one slice if identical across ids, else None."""
    meta = None
    for image_id in ids:
        m, _ = store.get(image_id).get_slice(layer_index, channel_index)
        if meta is None:
            meta = m
        elif m != meta:
            return None
    return meta


def parse_many(store, aog: AndOrGraph, stats, ids=None) -> dict[str, ParseGraph]:
    """Parse every listed image; bit-identical to calling parse() per image.

    Falls back to the per-image path when slice geometry differs across the
    dataset (the batch gather needs uniform grids).
    """
    if len(aog) == 0:
        raise EmptyModelError("graph has no part templates")
    if ids is None:
        ids = store.ids()
    ids = list(ids)
    store.set_stats(stats)

    needed = sorted({(p.layer_index, p.channel_index) for t in aog.templates for p in t.patterns})
    metas = {}
    for key in needed:
        meta = _shared_meta(store, ids, key[0], key[1])
        if meta is None:
            return {image_id: parse(store.get(image_id), aog, stats) for image_id in ids}
        metas[key] = meta

    stack_ids, _ = store.zstack(*needed[0])
    index = {image_id: i for i, image_id in enumerate(stack_ids)}
    sel = np.array([index[i] for i in ids], dtype=np.intp)
    n = len(ids)
    sizes = [store.image_size(i) for i in ids]

    best: list[ParseGraph | None] = [None] * n
    for t in aog.templates:
        if not t.patterns:
            raise EmptyModelError("template %r has no patterns" % t.label)
        num_x = np.zeros(n)
        num_y = np.zeros(n)
        den = 0.0
        picks = []
        for p in t.patterns:
            meta = metas[(p.layer_index, p.channel_index)]
            _, z = store.zstack(p.layer_index, p.channel_index)
            rows, cols = window_cells(p, meta.grid_h, meta.grid_w)
            gathered = z[sel[:, None], rows[None, :], cols[None, :]] - _penalties(p, rows, cols)
            flat = np.argmax(gathered, axis=1)
            unit_scores = gathered[np.arange(n), flat]
            prow = rows[flat]
            pcol = cols[flat]
            cx = meta.offset_px + pcol * meta.stride_px
            cy = meta.offset_px + prow * meta.stride_px
            w = 1.0 / (p.sigma_s * p.sigma_s)
            num_x += w * (cx - p.delta_bar[0])
            num_y += w * (cy - p.delta_bar[1])
            den += w
            picks.append((p, meta, prow, pcol, unit_scores, cx, cy))
        center_x = num_x / den
        center_y = num_y / den
        score = np.zeros(n)
        for p, meta, prow, pcol, unit_scores, cx, cy in picks:
            dx = cx - center_x - p.delta_bar[0]
            dy = cy - center_y - p.delta_bar[1]
            score += unit_scores + (-(dx * dx + dy * dy) / (2.0 * p.sigma_s * p.sigma_s))
        for i in range(n):
            prev = best[i]
            if prev is not None and not (
                score[i] > prev.part_score
                or (score[i] == prev.part_score and t.template_id < prev.template_id)
            ):
                continue
            image_w, image_h = sizes[i]
            records = []
            for p, meta, prow, pcol, unit_scores, cx, cy in picks:
                half = meta.rf_size_px / 2.0
                region = Box(
                    float(cx[i]) - half, float(cy[i]) - half, meta.rf_size_px, meta.rf_size_px
                ).clip(image_w, image_h)
                records.append(
                    PatternParse(
                        p.pattern_id,
                        (int(prow[i]), int(pcol[i])),
                        float(unit_scores[i]),
                        region,
                    )
                )
            part_box = Box.from_center(
                float(center_x[i]), float(center_y[i]), t.region_w, t.region_h
            ).clip(image_w, image_h)
            best[i] = ParseGraph(
                image_id=ids[i],
                template_id=t.template_id,
                part_box=part_box,
                part_center=(float(center_x[i]), float(center_y[i])),
                part_score=float(score[i]),
                patterns=tuple(records),
            )
    return {image_id: best[i] for i, image_id in enumerate(ids)}
