"""Pirometri: ileri model, kapalı form dönüşüm ve sıcaklık haritası"""

import numpy as np
import pytest
from skimage.draw import disk

from data.scene_generator import FramePair
from errors import PyrometryError, ShapeError
from physics.pyrometry import (
    PyrometryConfig,
    intensity_ratio,
    temperature_from_ratio,
    temperature_map,
    wien_radiance,
)


# =============================================================================
# İleri model ve dönüşüm
# =============================================================================

class TestRatioInversion:
    def test_round_trip_grid(self, cfg):
        t = np.arange(1500.0, 4000.0 + 1e-9, 10.0)
        ratio = wien_radiance(cfg.lambda1, t, cfg) / wien_radiance(cfg.lambda2, t, cfg)
        result = temperature_from_ratio(ratio, cfg)
        np.testing.assert_allclose(result.temperature, t, rtol=1e-9)
        assert not result.out_of_range.any()

    def test_round_trip_2500(self, cfg):
        r = intensity_ratio(2500.0, cfg)
        assert float(temperature_from_ratio(r, cfg).temperature) == pytest.approx(2500.0, rel=1e-9)

    def test_reference_ratio_3000(self, cfg):
        r = float(intensity_ratio(3000.0, cfg))
        assert r == pytest.approx(0.680, abs=1e-3)
        assert float(temperature_from_ratio(0.680, cfg).temperature) == pytest.approx(3000.0, rel=2e-3)

    def test_scalar_gives_zero_dim(self, cfg):
        result = temperature_from_ratio(0.68, cfg)
        assert result.temperature.shape == ()
        assert result.out_of_range.shape == ()

    def test_singular_ratio_is_flagged(self, cfg):
        # Logaritma argümanı 1: T → ∞
        singular = (cfg.lambda2 / cfg.lambda1) ** 5
        result = temperature_from_ratio(singular, cfg)
        assert bool(result.out_of_range)
        assert float(result.temperature) == cfg.t_max

    def test_below_range_clamps_to_t_min(self, cfg):
        lo, _ = cfg.invertible_range()
        result = temperature_from_ratio(lo * 0.5, cfg)
        assert bool(result.out_of_range)
        assert float(result.temperature) == cfg.t_min

    @pytest.mark.parametrize("bad", [0.0, -1.0, np.nan, np.inf])
    def test_invalid_ratio_raises(self, cfg, bad):
        with pytest.raises(PyrometryError):
            temperature_from_ratio(np.array([0.5, bad]), cfg)

    def test_non_positive_inputs_raise(self, cfg):
        with pytest.raises(PyrometryError):
            wien_radiance(-550e-9, 3000.0, cfg)
        with pytest.raises(PyrometryError):
            wien_radiance(550e-9, 0.0, cfg)

    def test_emissivity_ratio_cancels(self):
        grey = PyrometryConfig(emissivity_ratio=0.8)
        r = intensity_ratio(2800.0, grey)
        assert float(temperature_from_ratio(r, grey).temperature) == pytest.approx(2800.0, rel=1e-9)

    def test_config_order_validated(self):
        with pytest.raises(ValueError):
            PyrometryConfig(lambda1=700e-9, lambda2=600e-9)
        with pytest.raises(ValueError):
            PyrometryConfig(t_min=5000.0, t_max=300.0)


# =============================================================================
# Sıcaklık haritası
# =============================================================================

def _render_field(field: np.ndarray, cfg: PyrometryConfig) -> FramePair:
    i1 = wien_radiance(cfg.lambda1, field, cfg)
    i2 = wien_radiance(cfg.lambda2, field, cfg)
    gain = 0.8 * cfg.full_scale_counts / max(i1.max(), i2.max())
    return FramePair(ch1=gain * i1, ch2=gain * i2)


class TestTemperatureMap:
    def test_constant_disk(self, cfg):
        field = np.full((32, 32), 400.0)
        rr, cc = disk((16, 16), 6, shape=field.shape)
        field[rr, cc] = 2800.0
        tmap = temperature_map(_render_field(field, cfg), cfg)

        on_disk = np.zeros(field.shape, dtype=bool)
        on_disk[rr, cc] = True
        np.testing.assert_allclose(tmap.values[on_disk], 2800.0, rtol=1e-9)
        assert np.all(tmap.values[~on_disk] == cfg.sentinel)

    def test_all_zero_frames(self, cfg):
        zeros = np.zeros((16, 16))
        tmap = temperature_map(FramePair(ch1=zeros, ch2=zeros.copy()), cfg)
        assert np.all(tmap.values == cfg.sentinel)
        assert not tmap.foreground_mask(cfg.sentinel).any()

    def test_gaussian_field_round_trip(self, cfg):
        r, c = np.mgrid[0:32, 0:32]
        field = 1000.0 + 2500.0 * np.exp(-((r - 15.3) ** 2 + (c - 16.7) ** 2) / (2 * 4.0 ** 2))
        pair = _render_field(field, cfg)
        tmap = temperature_map(pair, cfg)

        valid = (pair.ch1 > cfg.default_floor) & (pair.ch2 > cfg.default_floor)
        assert valid.any()
        np.testing.assert_allclose(tmap.values[valid], field[valid], rtol=1e-6)
        assert np.all(tmap.values[~valid] == cfg.sentinel)

    def test_shape_mismatch(self, cfg):
        pair = FramePair(ch1=np.ones((4, 4)), ch2=np.ones((4, 4)))
        pair.ch2 = np.ones((4, 5))
        with pytest.raises(ShapeError):
            temperature_map(pair, cfg)

    @pytest.mark.parametrize("gain", [0.5, 2.0, 3.0])
    def test_common_gain_leaves_map_unchanged(self, cfg, gain):
        field = np.full((32, 32), 400.0)
        rr, cc = disk((15, 17), 7, shape=field.shape)
        field[rr, cc] = np.linspace(2800.0, 3400.0, rr.size)
        pair = _render_field(field, cfg)
        scaled = FramePair(ch1=gain * pair.ch1, ch2=gain * pair.ch2)
        np.testing.assert_allclose(
            temperature_map(scaled, cfg).values, temperature_map(pair, cfg).values, rtol=1e-12
        )
