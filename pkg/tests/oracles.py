"""Independent reference implementations used to check the engine.

Everything here is written as plain loops over explicit formulas, sharing no
code with the package under test. The engine's vectorized paths must agree
with these slow-but-obvious versions on every case the tests construct.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def window_positions(mu, radius, grid_h, grid_w):
    """All integer cells (row, col) with |row - mu0| <= r and |col - mu1| <= r."""
    cells = []
    for row in range(grid_h):
        if not (mu[0] - radius <= row <= mu[0] + radius):
            continue
        for col in range(grid_w):
            if mu[1] - radius <= col <= mu[1] + radius:
                cells.append((row, col))
    return cells


def unit_score_at(grid, stats, p, pos):
    """z-scored activation minus the quadratic deformation penalty."""
    mean, std = stats.mean_std(p.layer_index, p.channel_index)
    scale = std if std > 1e-12 else 1.0
    z = (float(grid[pos[0], pos[1]]) - mean) / scale
    dr = pos[0] - p.mu[0]
    dc = pos[1] - p.mu[1]
    return z - p.w_def * (dr * dr + dc * dc) / (p.window_radius + 1.0) ** 2


def scan_pattern(v, p, stats):
    """Exhaustive window scan; returns (best position, best score).

    Row-major scan with a strict > comparison, so ties resolve to the
    lexicographically smallest cell.
    """
    meta, grid = v.get_slice(p.layer_index, p.channel_index)
    best_pos = None
    best_score = -math.inf
    for pos in window_positions(p.mu, p.window_radius, meta.grid_h, meta.grid_w):
        s = unit_score_at(grid, stats, p, pos)
        if s > best_score:
            best_pos, best_score = pos, s
    return best_pos, best_score


def spatial_term(center, pos_img, delta_bar, sigma_s):
    dx = pos_img[0] - center[0] - delta_bar[0]
    dy = pos_img[1] - center[1] - delta_bar[1]
    return -(dx * dx + dy * dy) / (2.0 * sigma_s * sigma_s)


def grid_search_center(picks, span, step=1.0):
    """Argmax of the summed spatial terms over a dense grid of centers.

    picks is a list of (pos_img, delta_bar, sigma_s). The grid is centered on
    the mean adjusted vote and extends +-span per axis at the given step.
    """
    votes = [(px - dx, py - dy) for (px, py), (dx, dy), _ in picks]
    cx0 = sum(v[0] for v in votes) / len(votes)
    cy0 = sum(v[1] for v in votes) / len(votes)
    steps = int(math.ceil(span / step))
    best = None
    best_val = -math.inf
    for i in range(-steps, steps + 1):
        for j in range(-steps, steps + 1):
            c = (cx0 + i * step, cy0 + j * step)
            val = sum(
                spatial_term(c, pos_img, delta, sigma) for pos_img, delta, sigma in picks
            )
            if val > best_val:
                best, best_val = c, val
    return best, best_val


def enumerate_parse(v, aog, stats):
    """True joint maximum of the part score by brute force.

    For every template, every combination of one unit per pattern is scored
    with the center placed at its own optimum (the inverse-variance-weighted
    mean of the adjusted votes, which maximizes a sum of concave quadratics).
    Returns the best score over all templates and combinations.
    """
    best_total = -math.inf
    for t in aog.templates:
        per_pattern = []
        for p in t.patterns:
            meta, grid = v.get_slice(p.layer_index, p.channel_index)
            options = []
            for pos in window_positions(p.mu, p.window_radius, meta.grid_h, meta.grid_w):
                cx = meta.offset_px + pos[1] * meta.stride_px
                cy = meta.offset_px + pos[0] * meta.stride_px
                options.append((unit_score_at(grid, stats, p, pos), (cx, cy)))
            per_pattern.append(options)
        for combo in itertools.product(*per_pattern):
            num_x = num_y = den = 0.0
            for (_, (cx, cy)), p in zip(combo, t.patterns):
                w = 1.0 / (p.sigma_s * p.sigma_s)
                num_x += w * (cx - p.delta_bar[0])
                num_y += w * (cy - p.delta_bar[1])
                den += w
            center = (num_x / den, num_y / den)
            total = 0.0
            for (unit, pos_img), p in zip(combo, t.patterns):
                total += unit + spatial_term(center, pos_img, p.delta_bar, p.sigma_s)
            if total > best_total:
                best_total = total
    return best_total


def best_grid_center(picks):
    """Best integer-pixel center of the summed spatial terms.

    The sum is separable and concave per axis, so the integer optimum lies at
    the floor or ceil of the continuous optimum on each axis.
    """
    num_x = num_y = den = 0.0
    for (px, py), (dx, dy), sigma in picks:
        w = 1.0 / (sigma * sigma)
        num_x += w * (px - dx)
        num_y += w * (py - dy)
        den += w
    cx = num_x / den
    cy = num_y / den
    best = None
    best_val = -math.inf
    for x in {math.floor(cx), math.ceil(cx)}:
        for y in {math.floor(cy), math.ceil(cy)}:
            val = sum(spatial_term((x, y), pos, d, s) for pos, d, s in picks)
            if val > best_val:
                best, best_val = (x, y), val
    return best, best_val


def dense_grid_center(picks):
    """best_grid_center by brute force over every integer center in the vote hull."""
    votes_x = [px - dx for (px, _), (dx, _), _ in picks]
    votes_y = [py - dy for (_, py), (_, dy), _ in picks]
    best = None
    best_val = -math.inf
    for x in range(math.floor(min(votes_x)) - 2, math.ceil(max(votes_x)) + 3):
        for y in range(math.floor(min(votes_y)) - 2, math.ceil(max(votes_y)) + 3):
            val = sum(spatial_term((x, y), pos, d, s) for pos, d, s in picks)
            if val > best_val:
                best, best_val = (x, y), val
    return best, best_val


def enumerate_parse_grid(v, aog, stats):
    """Exhaustive parse with part centers restricted to the 1-px integer grid.

    Maximizes over (template, one unit per pattern, integer-pixel center);
    template ties resolve to the smallest template id. Returns the best
    (score, template_id).
    """
    best_score = -math.inf
    best_template = None
    for t in aog.templates:
        per_pattern = []
        for p in t.patterns:
            meta, grid = v.get_slice(p.layer_index, p.channel_index)
            options = []
            for pos in window_positions(p.mu, p.window_radius, meta.grid_h, meta.grid_w):
                cx = meta.offset_px + pos[1] * meta.stride_px
                cy = meta.offset_px + pos[0] * meta.stride_px
                options.append((unit_score_at(grid, stats, p, pos), (cx, cy)))
            per_pattern.append(options)
        t_best = -math.inf
        for combo in itertools.product(*per_pattern):
            picks = [
                (pos_img, p.delta_bar, p.sigma_s)
                for (_, pos_img), p in zip(combo, t.patterns)
            ]
            units = sum(unit for unit, _ in combo)
            _, sval = best_grid_center(picks)
            total = units + sval
            if total > t_best:
                t_best = total
        if t_best > best_score:
            best_score, best_template = t_best, t.template_id
    return best_score, best_template


def enumerate_parse_dense(v, aog, stats):
    """Exhaustive parse scanning every integer-pixel center inside the image.

    At a fixed center the objective separates per pattern, so the joint max
    over (units, center) equals a per-pattern max at each center. Returns the
    best (score, template_id), template ties to the smallest id.
    """
    xs = np.arange(0.0, float(v.image_w) + 1.0)
    ys = np.arange(0.0, float(v.image_h) + 1.0)
    best_score = -math.inf
    best_template = None
    for t in aog.templates:
        total = np.zeros((ys.size, xs.size))
        for p in t.patterns:
            meta, grid = v.get_slice(p.layer_index, p.channel_index)
            units, vx, vy = [], [], []
            for pos in window_positions(p.mu, p.window_radius, meta.grid_h, meta.grid_w):
                units.append(unit_score_at(grid, stats, p, pos))
                vx.append(meta.offset_px + pos[1] * meta.stride_px - p.delta_bar[0])
                vy.append(meta.offset_px + pos[0] * meta.stride_px - p.delta_bar[1])
            s2 = 2.0 * p.sigma_s * p.sigma_s
            dx2 = (np.array(vx)[:, None, None] - xs[None, None, :]) ** 2
            dy2 = (np.array(vy)[:, None, None] - ys[None, :, None]) ** 2
            value = np.array(units)[:, None, None] - dx2 / s2 - dy2 / s2
            total += value.max(axis=0)
        t_best = float(total.max())
        if t_best > best_score:
            best_score, best_template = t_best, t.template_id
    return best_score, best_template


def direct_kl(priors, q, lam):
    """KL loss by direct summation over both label values."""
    total = 0.0
    for image_id in priors:
        p = priors[image_id]
        qv = q[image_id]
        if p > 0.0:
            total += p * math.log(p / qv)
        if p < 1.0:
            total += (1.0 - p) * math.log((1.0 - p) / (1.0 - qv))
    return lam * total


# --- mining reference ---------------------------------------------------------


def _clamp_mu_ref(mu, radius, size):
    mu = min(max(mu, 0.0), float(size - 1))
    has_cell = any(mu - radius <= cell <= mu + radius for cell in range(size))
    if not has_cell:
        mu = float(round(mu))
    return mu


def _best_unit_ref(grid, stats, layer, channel, mu, radius, w_def):
    """Row-major scan of one z-scored grid within [mu - r, mu + r]."""
    mean, std = stats.mean_std(layer, channel)
    scale = std if std > 1e-12 else 1.0
    best = None
    best_score = -math.inf
    for row, col in window_positions(mu, radius, grid.shape[0], grid.shape[1]):
        dr = row - mu[0]
        dc = col - mu[1]
        z = (float(grid[row, col]) - mean) / scale
        s = z - w_def * (dr * dr + dc * dc) / (radius + 1.0) ** 2
        if s > best_score:
            best, best_score = (row, col), s
    return best, best_score


def candidate_values(label_annots, store, stats, cfg):
    """Reference candidate table: (layer, channel, mu0) -> estimated pattern + value.

    Follows the documented procedure step by step: estimate mu as the mean
    best-unit cell over the annotated images, delta_bar as the mean pixel
    displacement from the annotated centers, then score the candidate as the
    mean annotated (unit + spatial) term plus the weighted mean of the best
    unit score over the whole dataset. Annotations must all be unflipped.
    """
    samples = []
    for a in label_annots:
        v = store.get(a.image_id)
        samples.append((v, a.box.center))

    region_diag = sum(
        math.hypot(*store.image_size(a.image_id)) for a in label_annots
    ) / len(label_annots)
    sigma_s = cfg.sigma_override if cfg.sigma_override is not None else cfg.sigma_factor * region_diag

    radius = cfg.window_radius
    w_def = cfg.deformation_weight
    table = []
    first = samples[0][0]
    for layer, channel in first.keys():
        meta, _ = first.get_slice(layer, channel)
        for r0 in range(0, meta.grid_h, cfg.candidate_stride):
            for c0 in range(0, meta.grid_w, cfg.candidate_stride):
                rows = []
                cols = []
                for v, _ in samples:
                    _, grid = v.get_slice(layer, channel)
                    (row, col), _ = _best_unit_ref(
                        grid, stats, layer, channel, (float(r0), float(c0)), radius, w_def
                    )
                    rows.append(row)
                    cols.append(col)
                mu = (
                    _clamp_mu_ref(sum(rows) / len(rows), radius, meta.grid_h),
                    _clamp_mu_ref(sum(cols) / len(cols), radius, meta.grid_w),
                )
                # delta comes from the units found in the seed window, before
                # the window recenters on the estimated mu
                dxs = []
                dys = []
                for (row, col), (_, center) in zip(zip(rows, cols), samples):
                    dxs.append(meta.offset_px + col * meta.stride_px - center[0])
                    dys.append(meta.offset_px + row * meta.stride_px - center[1])
                delta = (sum(dxs) / len(dxs), sum(dys) / len(dys))

                ann_terms = []
                for v, center in samples:
                    _, grid = v.get_slice(layer, channel)
                    (row, col), score = _best_unit_ref(
                        grid, stats, layer, channel, mu, radius, w_def
                    )
                    pos_img = (
                        meta.offset_px + col * meta.stride_px,
                        meta.offset_px + row * meta.stride_px,
                    )
                    ann_terms.append(score + spatial_term(center, pos_img, delta, sigma_s))
                dataset_terms = []
                for image_id in store.ids():
                    _, grid = store.get(image_id).get_slice(layer, channel)
                    _, score = _best_unit_ref(grid, stats, layer, channel, mu, radius, w_def)
                    dataset_terms.append(score)
                value = sum(ann_terms) / len(ann_terms) + cfg.local_term_weight * (
                    sum(dataset_terms) / len(dataset_terms)
                )
                table.append(
                    {
                        "layer": layer,
                        "channel": channel,
                        "mu0": (r0, c0),
                        "mu": mu,
                        "delta": delta,
                        "value": value,
                    }
                )
    return table


def best_pattern_pair(table):
    """Exhaustive best pair under the additive objective, after deduplication.

    Candidates whose estimates coincide are one pattern; the best pair is the
    two distinct estimated patterns with the largest summed value, broken by
    the deterministic (value desc, layer, channel, seed) candidate order.
    """
    seen = set()
    unique = []
    for cand in table:
        key = (cand["layer"], cand["channel"], cand["mu"], cand["delta"])
        if key not in seen:
            seen.add(key)
            unique.append(cand)
    unique.sort(
        key=lambda c: (-c["value"], c["layer"], c["channel"], c["mu0"][0], c["mu0"][1])
    )
    best = None
    best_total = -math.inf
    for i in range(len(unique)):
        for j in range(i + 1, len(unique)):
            total = unique[i]["value"] + unique[j]["value"]
            if total > best_total:
                best, best_total = (unique[i], unique[j]), total
    return best
