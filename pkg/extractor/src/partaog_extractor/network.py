"""VGG-16 access: conv-layer table, receptive-field geometry, activation capture."""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn
from torchvision import models

from partaog.errors import ConfigError


@dataclass(frozen=True)
class ConvLayer:
    name: str
    conv_index: int
    module_index: int
    channels: int
    stride_px: float
    rf_size_px: float
    offset_px: float


def _pool_params(m: nn.MaxPool2d) -> tuple[int, int, int]:
    pick = lambda v: v[0] if isinstance(v, tuple) else v
    return pick(m.kernel_size), pick(m.stride), pick(m.padding)


def conv_geometry(features: nn.Sequential) -> list[ConvLayer]:
    """Walk a VGG-style feature stack accumulating stride, field size, and offset.

    Offsets are continuous image coordinates (pixel i spans [i, i+1]), matching
    the geometry convention of the volume format: the first unit of a stride-1
    same-padded conv is centered on pixel 0, coordinate 0.5.
    """
    layers = []
    jump, rf, start = 1.0, 1.0, 0.5
    block, within, conv_index = 1, 0, 0
    for module_index, m in enumerate(features):
        if isinstance(m, nn.Conv2d):
            k, s, p = m.kernel_size[0], m.stride[0], m.padding[0]
        elif isinstance(m, nn.MaxPool2d):
            k, s, p = _pool_params(m)
        else:
            continue
        start += ((k - 1) / 2.0 - p) * jump
        rf += (k - 1) * jump
        jump *= s
        if isinstance(m, nn.Conv2d):
            within += 1
            layers.append(
                ConvLayer(
                    name="conv%d_%d" % (block, within),
                    conv_index=conv_index,
                    module_index=module_index,
                    channels=m.out_channels,
                    stride_px=jump,
                    rf_size_px=rf,
                    offset_px=start,
                )
            )
            conv_index += 1
        else:
            block += 1
            within = 0
    return layers


def build_vgg16(seed: int = 0, weights_path=None) -> nn.Module:
    """VGG-16 in eval mode; seeded random init unless a state dict is supplied."""
    torch.manual_seed(seed)
    model = models.vgg16(weights=None)
    if weights_path is not None:
        state = torch.load(weights_path, map_location="cpu", weights_only=True)
        model.load_state_dict(state)
    model.eval()
    return model


def select_layers(table: list[ConvLayer], names) -> list[ConvLayer]:
    """Resolve layer names against the table, keeping network order."""
    by_name = {layer.name: layer for layer in table}
    unknown = [n for n in names if n not in by_name]
    if unknown:
        raise ConfigError(
            "unknown conv layers %s; available: %s"
            % (", ".join(unknown), ", ".join(layer.name for layer in table))
        )
    picked = [by_name[n] for n in set(names)]
    picked.sort(key=lambda layer: layer.conv_index)
    return picked


def capture_activations(model: nn.Module, layers, batch: torch.Tensor) -> dict:
    """Forward a batch through the feature stack, keeping post-ReLU maps by name.

    Only the prefix of the stack up to the topmost requested layer is run.
    """
    features = model.features
    captured: dict[str, torch.Tensor] = {}
    hooks = []
    top = 0
    for layer in layers:
        relu = features[layer.module_index + 1]
        if not isinstance(relu, nn.ReLU):
            raise ConfigError("no ReLU after conv module %d" % layer.module_index)
        hooks.append(relu.register_forward_hook(_keep(captured, layer.name)))
        top = max(top, layer.module_index + 1)
    try:
        with torch.no_grad():
            features[: top + 1](batch)
    finally:
        for hook in hooks:
            hook.remove()
    return captured


def _keep(store: dict, name: str):
    def hook(module, inputs, output):
        store[name] = output.detach().clone()

    return hook
