"""Receptive-field arithmetic and activation capture against the real network."""

import pytest
import torch

from partaog.errors import ConfigError
from partaog_extractor import capture_activations, select_layers


class TestConvGeometry:
    def test_thirteen_convs_named_by_block(self, table):
        names = [layer.name for layer in table]
        assert len(names) == 13
        assert names[:2] == ["conv1_1", "conv1_2"]
        assert names[-3:] == ["conv5_1", "conv5_2", "conv5_3"]

    def test_strides_double_at_each_pool(self, table):
        by_name = {layer.name: layer for layer in table}
        assert by_name["conv1_2"].stride_px == 1.0
        assert by_name["conv2_1"].stride_px == 2.0
        assert by_name["conv3_1"].stride_px == 4.0
        assert by_name["conv4_1"].stride_px == 8.0
        assert by_name["conv5_3"].stride_px == 16.0

    def test_receptive_fields_at_block_tops(self, table):
        by_name = {layer.name: layer for layer in table}
        assert by_name["conv3_3"].rf_size_px == 40.0
        assert by_name["conv4_3"].rf_size_px == 92.0
        assert by_name["conv5_3"].rf_size_px == 196.0

    def test_offsets_center_the_first_unit(self, table):
        by_name = {layer.name: layer for layer in table}
        assert by_name["conv1_1"].offset_px == 0.5
        assert by_name["conv3_1"].offset_px == 2.0
        assert by_name["conv4_1"].offset_px == 4.0
        assert by_name["conv5_1"].offset_px == 8.0

    def test_field_never_smaller_than_stride(self, table):
        for layer in table:
            assert layer.rf_size_px >= layer.stride_px

    def test_channel_counts_follow_the_block_plan(self, table):
        by_name = {layer.name: layer for layer in table}
        assert by_name["conv3_3"].channels == 256
        assert by_name["conv4_3"].channels == 512
        assert by_name["conv5_3"].channels == 512


class TestSelectLayers:
    def test_resolves_in_network_order_and_dedupes(self, table):
        picked = select_layers(table, ["conv5_3", "conv3_1", "conv5_3"])
        assert [layer.name for layer in picked] == ["conv3_1", "conv5_3"]

    def test_unknown_layer_is_a_config_error(self, table):
        with pytest.raises(ConfigError, match="conv9_9"):
            select_layers(table, ["conv9_9"])


class TestCaptureActivations:
    def test_maps_are_post_relu_and_stride_shaped(self, network, table):
        layers = select_layers(table, ["conv3_2", "conv4_3", "conv5_3"])
        batch = torch.randn(1, 3, 224, 224, generator=torch.Generator().manual_seed(3))
        captured = capture_activations(network, layers, batch)
        for layer in layers:
            maps = captured[layer.name]
            side = int(224 / layer.stride_px)
            assert maps.shape == (1, layer.channels, side, side)
            assert float(maps.min()) >= 0.0

    def test_prefix_run_matches_a_full_forward(self, network, table):
        layers = select_layers(table, ["conv3_1"])
        batch = torch.randn(1, 3, 64, 64, generator=torch.Generator().manual_seed(4))
        prefix = capture_activations(network, layers, batch)["conv3_1"]
        store = {}
        relu = network.features[layers[0].module_index + 1]
        handle = relu.register_forward_hook(lambda m, i, o: store.update(full=o.detach().clone()))
        try:
            with torch.no_grad():
                network.features(batch)
        finally:
            handle.remove()
        assert torch.equal(prefix, store["full"])
