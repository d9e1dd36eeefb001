"""WDM bloğu ve Binocular ağı"""

import pytest
import torch

from errors import ShapeError
from models.autodiff import mse_loss
from models.binocular import (
    BinocularConfig,
    BinocularNet,
    WdmConfig,
    build_binocular,
    build_wdm,
    forward,
    parameter_count,
)


# =============================================================================
# WDM
# =============================================================================

class TestWdm:
    @pytest.mark.parametrize("widths", [(1, 1, 1, 1), (4, 2, 3, 5), (8, 8, 8, 8)])
    def test_output_channels(self, widths):
        module = build_wdm(WdmConfig(in_channels=3, out_channels=6, branch_widths=widths))
        out = module(torch.rand(2, 3, 9, 7))
        assert out.shape == (2, 6, 9, 7)
        assert torch.all(out >= 0)

    def test_parameter_names(self):
        module = build_wdm(WdmConfig(in_channels=1, out_channels=2))
        names = {name for name, _ in module.named_parameters()}
        assert {"a_weight", "b_reduce_weight", "c_weight", "d_weight", "compress_weight"} <= names
        assert module.compress_weight.shape == (2, 16, 3, 3)
        assert module.c_weight.shape == (4, 4, 5, 5)

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            WdmConfig(in_channels=0, out_channels=2)
        with pytest.raises(ValueError):
            WdmConfig(in_channels=1, out_channels=2, branch_widths=(1, 0, 1, 1))

    def test_seeded_init(self):
        cfg = WdmConfig(in_channels=2, out_channels=3)
        a = build_wdm(cfg, torch.Generator().manual_seed(4))
        b = build_wdm(cfg, torch.Generator().manual_seed(4))
        for (_, pa), (_, pb) in zip(a.named_parameters(), b.named_parameters()):
            assert torch.equal(pa, pb)

    def test_every_parameter_receives_gradient(self):
        module = build_wdm(WdmConfig(in_channels=2, out_channels=3), torch.Generator().manual_seed(8))
        x = torch.rand(4, 2, 9, 9, generator=torch.Generator().manual_seed(2))
        module(x).sum().backward()
        dead = [name for name, p in module.named_parameters() if p.grad is None or not torch.any(p.grad != 0)]
        assert dead == []


# =============================================================================
# Binocular
# =============================================================================

class TestBinocularNet:
    def test_output_shape(self, tiny_net):
        out = forward(tiny_net, torch.rand(3, 2, 16, 16))
        assert out.shape == (3, 1, 16, 16)

    def test_eval_deterministic(self, tiny_net):
        batch = torch.rand(2, 2, 16, 16)
        assert torch.equal(tiny_net(batch, training=False), tiny_net(batch, training=False))

    def test_dropout_active_in_training(self, tiny_net):
        batch = torch.rand(2, 2, 16, 16)
        tiny_net.dropout_generator.manual_seed(1)
        a = tiny_net(batch, training=True)
        tiny_net.dropout_generator.manual_seed(1)
        b = tiny_net(batch, training=True)
        c = tiny_net(batch, training=True)
        assert torch.equal(a, b)
        assert not torch.equal(b, c)

    @pytest.mark.parametrize("shape", [(2, 1, 16, 16), (2, 2, 16, 8), (2, 16, 16)])
    def test_shape_errors(self, tiny_net, shape):
        with pytest.raises(ShapeError):
            tiny_net(torch.rand(shape))

    def test_parameter_count_deterministic(self, tiny_config):
        assert parameter_count(BinocularNet(tiny_config, seed=1)) == parameter_count(
            BinocularNet(tiny_config, seed=2)
        )
        bigger = tiny_config.model_copy(update={"segment_count": 2})
        assert parameter_count(BinocularNet(bigger)) > parameter_count(BinocularNet(tiny_config))

    def test_same_seed_same_weights(self, tiny_config):
        a, b = BinocularNet(tiny_config, seed=5), BinocularNet(tiny_config, seed=5)
        for (name, pa), (_, pb) in zip(a.named_parameters(), b.named_parameters()):
            assert torch.equal(pa, pb), name

    def test_four_segments_by_default(self):
        net = build_binocular(BinocularConfig(input_shape=(8, 8), base_width=2))
        assert len(net.left) == len(net.right) == len(net.interaction) == 4
        assert len(net.head) == 2
        assert net.interaction[0].cfg.in_channels == 4 + 4 * 2
        assert net.interaction[1].cfg.in_channels == 4 + 4 * 2

    def test_aux_head(self):
        net = BinocularNet(BinocularConfig(input_shape=(8, 8), base_width=2, aux_head=True))
        out, aux = net.forward_with_aux(torch.rand(1, 2, 8, 8))
        assert out.shape == aux.shape == (1, 1, 8, 8)
        _, none = BinocularNet(BinocularConfig(input_shape=(8, 8), base_width=2)).forward_with_aux(
            torch.rand(1, 2, 8, 8)
        )
        assert none is None

    def test_float64(self):
        net = BinocularNet(BinocularConfig(input_shape=(8, 8), base_width=2, dtype="float64"))
        assert net(torch.rand(1, 2, 8, 8)).dtype == torch.float64

    def test_config_validation(self):
        with pytest.raises(ValueError):
            BinocularConfig(dropout_p=1.0)
        with pytest.raises(ValueError):
            BinocularConfig(dtype="float16")
        with pytest.raises(ValueError):
            BinocularConfig(input_shape=(0, 8))


# =============================================================================
# Genel özellikler
# =============================================================================

@pytest.fixture
def wide_net() -> BinocularNet:
    cfg = BinocularConfig(
        input_shape=(16, 16), segment_count=2, head_units=2, base_width=4, dtype="float64"
    )
    return build_binocular(cfg, seed=5)


@pytest.fixture
def batch() -> torch.Tensor:
    return torch.rand(4, 2, 16, 16, generator=torch.Generator().manual_seed(6), dtype=torch.float64)


def test_every_parameter_receives_gradient(wide_net, batch):
    target = torch.rand(4, 1, 16, 16, generator=torch.Generator().manual_seed(7), dtype=torch.float64)
    mse_loss(wide_net(batch), target).backward()
    dead = [name for name, p in wide_net.named_parameters() if p.grad is None or not torch.any(p.grad != 0)]
    assert dead == []


def test_batch_independence(wide_net, batch):
    single = wide_net(batch[:2])
    doubled = wide_net(torch.cat([batch[:2], batch[2:]]))
    torch.testing.assert_close(doubled[:2], single, rtol=0, atol=1e-12)


def test_swapped_channels_change_output(wide_net, batch):
    swapped = batch.flip(1)
    assert not torch.allclose(wide_net(batch), wide_net(swapped))
