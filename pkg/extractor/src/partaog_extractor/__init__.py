"""VGG-16 bridge writing feature volumes in the part-localization engine's format."""

from .extract import ExtractConfig, default_layers, extract
from .network import ConvLayer, build_vgg16, capture_activations, conv_geometry, select_layers

__all__ = [
    "ConvLayer",
    "ExtractConfig",
    "build_vgg16",
    "capture_activations",
    "conv_geometry",
    "default_layers",
    "extract",
    "select_layers",
]
