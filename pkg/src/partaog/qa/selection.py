"""Appearance descriptors and distances driving question selection.

The descriptor of an image is its flattened top-conv-layer activation vector,
reweighted per dimension by how informative that dimension is across the
dataset: w_i is proportional to exp(mean z-scored response of dimension i),
normalized so the largest weight is 1.
"""

from __future__ import annotations

import numpy as np

from ..errors import UndefinedDistanceError


def descriptor_weights(store, stats) -> np.ndarray:
    """Per-dimension weights of the top conv-layer, computed over the whole store."""
    store.set_stats(stats)
    first = store.get(store.ids()[0])
    top = first.top_layer_index
    means = []
    for meta, _ in first.top_layer_slices():
        _, z = store.zstack(top, meta.channel_index)
        means.append(z.mean(axis=0).reshape(-1))
    mean_vec = np.concatenate(means)
    w = np.exp(mean_vec)
    return w / w.max()


def image_descriptor(v, weights: np.ndarray) -> np.ndarray:
    """phi = weights * flattened top-layer activations (channel-major, row-major)."""
    parts = [grid.reshape(-1).astype(np.float64) for _, grid in v.top_layer_slices()]
    f = np.concatenate(parts)
    if f.shape != weights.shape:
        raise ValueError(
            "descriptor length %d does not match weight length %d" % (f.size, weights.size)
        )
    return weights * f


def appearance_dist(phi_a, phi_b, template_a=None, template_b=None) -> float:
    """Cosine distance between descriptors; infinite across template assignments.

    Identical descriptors are exactly 0. If exactly one descriptor is all-zero
    the distance is 1 (treated as orthogonal); two all-zero descriptors have
    no defined angle and raise.
    """
    if template_a is not None and template_b is not None and template_a != template_b:
        return float("inf")
    a = np.asarray(phi_a, dtype=np.float64)
    b = np.asarray(phi_b, dtype=np.float64)
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 and nb == 0.0:
        raise UndefinedDistanceError("cosine distance between two zero descriptors")
    if np.array_equal(a, b):
        return 0.0
    if na == 0.0 or nb == 0.0:
        return 1.0
    cos = float(np.dot(a, b)) / (na * nb)
    return 1.0 - min(1.0, max(-1.0, cos))


def distance_matrix(phi: np.ndarray) -> np.ndarray:
    """Pairwise cosine distances between descriptor rows.

    Zero rows are distance 1 from everything else; the diagonal is exactly 0.
    """
    norms = np.linalg.norm(phi, axis=1)
    safe = np.where(norms == 0.0, 1.0, norms)
    unit = phi / safe[:, None]
    gram = np.clip(unit @ unit.T, -1.0, 1.0)
    dist = 1.0 - gram
    np.fill_diagonal(dist, 0.0)
    return dist
