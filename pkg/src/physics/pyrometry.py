"""
İki Dalga Boylu Oran Pirometrisi
Wien yaklaşımı ile spektral ışıma, kanal oranı ve kapalı form sıcaklık dönüşümü
"""

from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple, Optional, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator

from errors import PyrometryError, ShapeError

if TYPE_CHECKING:
    from data.scene_generator import FramePair


ArrayLike = Union[float, np.ndarray]


class PyrometryConfig(BaseModel):
    """Pirometri sabitleri ve sıcaklık sınırları"""

    model_config = ConfigDict(frozen=True)

    lambda1: float = Field(default=550e-9, gt=0)  # m
    lambda2: float = Field(default=620e-9, gt=0)  # m
    c2: float = Field(default=1.4388e-2, gt=0)  # m·K (ikinci ışınım sabiti)
    emissivity_ratio: float = Field(default=1.0, gt=0)  # ε1/ε2, gri cisim = 1
    t_min: float = 300.0  # K, aynı zamanda arka plan değeri
    t_max: float = 5000.0  # K
    full_scale_counts: float = Field(default=4095.0, gt=0)  # 12-bit sensör
    floor_fraction: float = Field(default=0.02, ge=0, lt=1)

    @model_validator(mode="after")
    def _check_order(self) -> "PyrometryConfig":
        if not self.lambda1 < self.lambda2:
            raise ValueError(
                f"lambda1 < lambda2 olmalı: {self.lambda1} >= {self.lambda2}"
            )
        if not 0 < self.t_min < self.t_max:
            raise ValueError(f"0 < t_min < t_max olmalı: {self.t_min}, {self.t_max}")
        return self

    @property
    def sentinel(self) -> float:
        """Arka plan / geçersiz piksel değeri"""
        return self.t_min

    @property
    def default_floor(self) -> float:
        """Varsayılan yoğunluk eşiği (sayım)"""
        return self.floor_fraction * self.full_scale_counts

    def invertible_range(self) -> Tuple[float, float]:
        """[t_min, t_max] aralığına karşılık gelen oran aralığı"""
        lo = float(intensity_ratio(self.t_min, self))
        hi = float(intensity_ratio(self.t_max, self))
        return lo, hi


@dataclass
class TemperatureMap:
    """Kelvin cinsinden 2B sıcaklık alanı"""

    values: np.ndarray
    pixel_pitch: float = 20e-6  # m/piksel
    out_of_range: Optional[np.ndarray] = None

    @property
    def height(self) -> int:
        return int(self.values.shape[0])

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    def foreground_mask(self, sentinel: float) -> np.ndarray:
        """Arka plan değerinin üstündeki pikseller"""
        return self.values > sentinel


class InversionResult(NamedTuple):
    temperature: np.ndarray
    out_of_range: np.ndarray


def wien_radiance(
    wavelength: ArrayLike,
    temperature: ArrayLike,
    cfg: Optional[PyrometryConfig] = None,
    emissivity: ArrayLike = 1.0,
) -> np.ndarray:
    """
    Wien yaklaşımı ile spektral ışıma: ε·λ⁻⁵·exp(−c2/(λT)).

    Ortak çarpan (2hc²) atılmıştır; oranlarda sadeleşir.
    """
    cfg = cfg or PyrometryConfig()
    lam = np.asarray(wavelength, dtype=np.float64)
    t = np.asarray(temperature, dtype=np.float64)

    if np.any(lam <= 0) or np.any(t <= 0):
        raise PyrometryError(
            f"Dalga boyu ve sıcaklık pozitif olmalı (λ min={lam.min()}, T min={t.min()})"
        )

    return np.asarray(emissivity, dtype=np.float64) * lam**-5 * np.exp(-cfg.c2 / (lam * t))


def intensity_ratio(temperature: ArrayLike, cfg: Optional[PyrometryConfig] = None) -> np.ndarray:
    """İleri model: I(λ1)/I(λ2) oranı"""
    cfg = cfg or PyrometryConfig()
    i1 = wien_radiance(cfg.lambda1, temperature, cfg, emissivity=cfg.emissivity_ratio)
    i2 = wien_radiance(cfg.lambda2, temperature, cfg)
    return i1 / i2


def temperature_from_ratio(
    ratio: ArrayLike,
    cfg: Optional[PyrometryConfig] = None,
) -> InversionResult:
    """
    Oran → sıcaklık: T = c2·(1/λ2 − 1/λ1) / ln((R/εr)·(λ1/λ2)⁵).

    Tersinir aralık dışındaki oranlar [t_min, t_max] aralığına kırpılır ve
    out_of_range maskesinde işaretlenir.
    """
    cfg = cfg or PyrometryConfig()
    r = np.asarray(ratio, dtype=np.float64)

    if np.any(~np.isfinite(r)) or np.any(r <= 0):
        raise PyrometryError("Yoğunluk oranı sonlu ve pozitif olmalı")

    numerator = cfg.c2 * (1.0 / cfg.lambda2 - 1.0 / cfg.lambda1)
    log_arg = np.log((r / cfg.emissivity_ratio) * (cfg.lambda1 / cfg.lambda2) ** 5)

    with np.errstate(divide="ignore", invalid="ignore"):
        t = numerator / log_arg

    r_lo, r_hi = cfg.invertible_range()
    below = r < r_lo
    above = r > r_hi
    out_of_range = below | above | ~np.isfinite(t)

    t = np.where(below, cfg.t_min, t)
    t = np.where(above | ~np.isfinite(t), cfg.t_max, t)
    t = np.clip(t, cfg.t_min, cfg.t_max)

    return InversionResult(temperature=t, out_of_range=out_of_range)


def temperature_map(
    pair: "FramePair",
    cfg: Optional[PyrometryConfig] = None,
    intensity_floor: Optional[float] = None,
    pixel_pitch: float = 20e-6,
) -> TemperatureMap:
    """
    Hizalanmış iki kanaldan piksel bazında sıcaklık haritası üret.

    Her iki kanal da eşiğin üstündeyse oran dönüşümü uygulanır, aksi halde
    piksel arka plan değerini (t_min) alır.
    """
    cfg = cfg or PyrometryConfig()
    floor = cfg.default_floor if intensity_floor is None else intensity_floor

    ch1 = np.asarray(pair.ch1, dtype=np.float64)
    ch2 = np.asarray(pair.ch2, dtype=np.float64)
    if ch1.shape != ch2.shape:
        raise ShapeError(f"Kanal boyutları farklı: {ch1.shape} != {ch2.shape}")

    valid = (ch1 > floor) & (ch2 > floor)
    values = np.full(ch1.shape, cfg.sentinel, dtype=np.float64)
    out_of_range = np.zeros(ch1.shape, dtype=bool)

    if np.any(valid):
        result = temperature_from_ratio(ch1[valid] / ch2[valid], cfg)
        values[valid] = result.temperature
        out_of_range[valid] = result.out_of_range

        n_out = int(out_of_range.sum())
        if n_out:
            logger.debug(f"{n_out} piksel tersinir oran aralığı dışında, kırpıldı")

    return TemperatureMap(values=values, pixel_pitch=pixel_pitch, out_of_range=out_of_range)


# Test
if __name__ == "__main__":
    cfg = PyrometryConfig()
    r = intensity_ratio(3000.0, cfg)
    print(f"R(3000 K) = {float(r):.4f}")
    print(f"T(R) = {float(temperature_from_ratio(r, cfg).temperature):.2f} K")
