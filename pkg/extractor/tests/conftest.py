"""Shared fixtures: a small seeded image folder and one reusable network."""

import numpy as np
import pytest
from PIL import Image

from partaog_extractor import build_vgg16, conv_geometry


@pytest.fixture(scope="session")
def network():
    return build_vgg16(seed=0)


@pytest.fixture(scope="session")
def table(network):
    return conv_geometry(network.features)


def write_png(path, rng, size=96):
    pixels = rng.randint(0, 256, size=(size, size, 3)).astype(np.uint8)
    Image.fromarray(pixels).save(path)
    return path


def image_pairs(tmp_path, count, seed=0):
    rng = np.random.RandomState(seed)
    return [
        ("img_%04d" % i, write_png(tmp_path / ("img_%04d.png" % i), rng))
        for i in range(count)
    ]
