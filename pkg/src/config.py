"""
BinoTherm Konfigürasyon Ayarları
Tek düz KEY=value dosyası + CLI bayrak geçersiz kılmaları (bayraklar kazanır)
"""

import json
from pathlib import Path
from typing import Any, Optional, Tuple

from pydantic import ValidationError, model_validator
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict

from baseline.registration import SearchSpec, SplitSpec
from bench.throughput import BenchSpec
from data.scene_generator import MisalignmentRanges, NoiseSpec, SceneRanges
from errors import ConfigError, MissingArtifactError
from models.binocular.network import BinocularConfig
from models.binocular.trainer import TrainSchedule
from physics.pyrometry import PyrometryConfig


class Settings(BaseSettings):
    """Çalışma ayarları (RunConfig); her anahtarın varsayılanı vardır"""

    model_config = SettingsConfigDict(
        env_file=None,
        env_file_encoding="utf-8",
        extra="forbid",
        case_sensitive=True,
    )

    # Genel
    SEED: int = 7
    THREADS: int = 1
    CHANNEL_HEIGHT: int = 32
    CHANNEL_WIDTH: int = 32
    SENSOR_HEIGHT: int = 48
    SENSOR_WIDTH: int = 128
    PIXEL_PITCH: float = 20e-6

    # Pirometri
    PYRO_LAMBDA1: float = 550e-9
    PYRO_LAMBDA2: float = 620e-9
    PYRO_C2: float = 1.4388e-2
    PYRO_EMISSIVITY_RATIO: float = 1.0
    PYRO_T_MIN: float = 300.0
    PYRO_T_MAX: float = 5000.0
    PYRO_FULL_SCALE: float = 4095.0
    PYRO_FLOOR_FRACTION: float = 0.02

    # Sentetik sahne
    SCENE_FRAMES: int = 2000
    SCENE_SPLIT_RATIO: float = 0.8
    SCENE_TRACK_LENGTH: int = 10
    SCENE_PEAK_T: Tuple[float, float] = (2000.0, 3500.0)
    SCENE_AMBIENT_T: Tuple[float, float] = (900.0, 1300.0)
    SCENE_SIGMA_MAJOR: Tuple[float, float] = (2.5, 5.0)
    SCENE_SIGMA_MINOR: Tuple[float, float] = (1.5, 3.0)
    SCENE_TAIL_LENGTH: Tuple[float, float] = (3.0, 10.0)
    SCENE_CENTER_JITTER: float = 2.0
    MIS_ROTATION_DEG: float = 15.0
    MIS_SCALE: Tuple[float, float] = (0.9, 1.1)
    MIS_MAX_SHIFT: float = 4.0
    NOISE_SIGMA_COUNTS: float = 2.0
    NOISE_SPATTER_RATE: float = 0.3
    NOISE_SPATTER_RADIUS: Tuple[float, float] = (0.8, 1.8)
    NOISE_PEAK_FRACTION: float = 0.8

    # Kayıt (temel yöntem)
    SPLIT_WINDOW: int = 15
    SPLIT_OFFSET_FRACTION: float = 0.02
    SPLIT_MIN_AREA: int = 4
    REG_ROTATION_RANGE: float = 15.0
    REG_ROTATION_STEP: float = 1.0
    REG_SCALE_RANGE: Tuple[float, float] = (0.9, 1.1)
    REG_SCALE_STEP: float = 0.02
    REG_REFINE_SWEEPS: int = 3
    REG_SUCCESS_THRESHOLD: float = 0.6
    REG_MASK_DILATION: int = 2

    # Ağ
    NET_SEGMENT_COUNT: int = 4
    NET_HEAD_UNITS: int = 2
    NET_BASE_WIDTH: int = 8
    NET_DROPOUT: float = 0.2
    NET_DTYPE: str = "float32"

    # Eğitim
    TRAIN_LEARNING_RATES: Tuple[float, ...] = (1e-4, 1e-5, 1e-6, 1e-7)
    TRAIN_BATCH_SIZES: Tuple[int, ...] = (50, 20, 5)
    TRAIN_EPOCHS_PER_COMBO: int = 20
    TRAIN_MAX_COMBOS: int = 0  # 0 = tüm kombinasyonlar
    TRAIN_AUGMENT: bool = True
    TRAIN_AUX_WEIGHT: float = 0.0

    # Değerlendirme
    EVAL_TAU: float = 0.5
    EVAL_DIFF_SAMPLES: int = 8
    EVAL_BATCH_SIZE: int = 32

    # Kıyaslama
    BENCH_BATCH_SIZES: Tuple[int, ...] = (1, 8, 32)
    BENCH_WARMUP: int = 3
    BENCH_REPEATS: int = 5
    BENCH_BATCHES_PER_REPEAT: int = 4
    BENCH_MODES: Tuple[str, ...] = ("serial", "pipelined")
    BENCH_BASELINE_FRAMES: int = 10

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type,
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        # Ortam değişkenleri okunmaz: çıktılar yalnızca (dosya, bayraklar) fonksiyonudur
        return init_settings, dotenv_settings

    @model_validator(mode="after")
    def _cross_check(self) -> "Settings":
        if self.THREADS < 1:
            raise ValueError(f"THREADS en az 1 olmalı: {self.THREADS}")
        if not 0 < self.SCENE_SPLIT_RATIO < 1:
            raise ValueError(f"SCENE_SPLIT_RATIO (0, 1) aralığında olmalı: {self.SCENE_SPLIT_RATIO}")
        # Alt modül doğrulayıcılarını çalıştır
        self.pyrometry()
        self.scene_ranges()
        self.misalignment_ranges()
        self.binocular()
        self.schedule()
        self.bench_spec()
        return self

    # Modül konfigürasyonları
    @property
    def channel_shape(self) -> Tuple[int, int]:
        return (self.CHANNEL_HEIGHT, self.CHANNEL_WIDTH)

    @property
    def sensor_shape(self) -> Tuple[int, int]:
        return (self.SENSOR_HEIGHT, self.SENSOR_WIDTH)

    def pyrometry(self) -> PyrometryConfig:
        return PyrometryConfig(
            lambda1=self.PYRO_LAMBDA1,
            lambda2=self.PYRO_LAMBDA2,
            c2=self.PYRO_C2,
            emissivity_ratio=self.PYRO_EMISSIVITY_RATIO,
            t_min=self.PYRO_T_MIN,
            t_max=self.PYRO_T_MAX,
            full_scale_counts=self.PYRO_FULL_SCALE,
            floor_fraction=self.PYRO_FLOOR_FRACTION,
        )

    def scene_ranges(self) -> SceneRanges:
        return SceneRanges(
            peak_T=self.SCENE_PEAK_T,
            ambient_T=self.SCENE_AMBIENT_T,
            sigma_major=self.SCENE_SIGMA_MAJOR,
            sigma_minor=self.SCENE_SIGMA_MINOR,
            tail_length=self.SCENE_TAIL_LENGTH,
            center_jitter=self.SCENE_CENTER_JITTER,
        )

    def misalignment_ranges(self) -> MisalignmentRanges:
        return MisalignmentRanges(
            rotation_deg=self.MIS_ROTATION_DEG,
            scale=self.MIS_SCALE,
            max_shift=self.MIS_MAX_SHIFT,
        )

    def noise(self) -> NoiseSpec:
        return NoiseSpec(
            sigma_counts=self.NOISE_SIGMA_COUNTS,
            spatter_rate=self.NOISE_SPATTER_RATE,
            spatter_radius=self.NOISE_SPATTER_RADIUS,
            peak_fraction=self.NOISE_PEAK_FRACTION,
        )

    def split_spec(self) -> SplitSpec:
        return SplitSpec(
            window=self.SPLIT_WINDOW,
            offset_fraction=self.SPLIT_OFFSET_FRACTION,
            min_area=self.SPLIT_MIN_AREA,
        )

    def search_spec(self) -> SearchSpec:
        return SearchSpec(
            rotation_range=self.REG_ROTATION_RANGE,
            rotation_step=self.REG_ROTATION_STEP,
            scale_range=self.REG_SCALE_RANGE,
            scale_step=self.REG_SCALE_STEP,
            refine_sweeps=self.REG_REFINE_SWEEPS,
            success_threshold=self.REG_SUCCESS_THRESHOLD,
            mask_dilation=self.REG_MASK_DILATION,
        )

    def binocular(self) -> BinocularConfig:
        return BinocularConfig(
            input_shape=self.channel_shape,
            segment_count=self.NET_SEGMENT_COUNT,
            head_units=self.NET_HEAD_UNITS,
            base_width=self.NET_BASE_WIDTH,
            dropout_p=self.NET_DROPOUT,
            aux_head=self.TRAIN_AUX_WEIGHT > 0,
            dtype=self.NET_DTYPE,
        )

    def schedule(self) -> TrainSchedule:
        return TrainSchedule(
            learning_rates=self.TRAIN_LEARNING_RATES,
            batch_sizes=self.TRAIN_BATCH_SIZES,
            epochs_per_combo=self.TRAIN_EPOCHS_PER_COMBO,
            max_combos=self.TRAIN_MAX_COMBOS or None,
            augment=self.TRAIN_AUGMENT,
            aux_weight=self.TRAIN_AUX_WEIGHT,
        )

    def bench_spec(self) -> BenchSpec:
        return BenchSpec(
            batch_sizes=self.BENCH_BATCH_SIZES,
            warmup=self.BENCH_WARMUP,
            repeats=self.BENCH_REPEATS,
            batches_per_repeat=self.BENCH_BATCHES_PER_REPEAT,
            modes=self.BENCH_MODES,
            baseline_frames=self.BENCH_BASELINE_FRAMES,
        )

    def dump_env(self, path: Path) -> None:
        """Ayarları sıralı KEY=value satırları olarak yaz (listeler JSON)"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        data = self.model_dump(mode="json")
        lines = []
        for key in sorted(data):
            value = data[key]
            text = value if isinstance(value, str) else json.dumps(value)
            lines.append(f"{key}={text}")
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("\n".join(lines) + "\n")


def load_settings(config_path: Optional[Path] = None, **overrides: Any) -> Settings:
    """
    Konfigürasyon dosyasını yükle; None olmayan geçersiz kılmalar dosyaya üstün gelir.

    Raises:
        MissingArtifactError: dosya yoksa
        ConfigError: bilinmeyen anahtar veya geçersiz değer
    """
    if config_path is not None and not Path(config_path).exists():
        raise MissingArtifactError(f"konfigürasyon dosyası bulunamadı: {config_path}")
    clean = {k: v for k, v in overrides.items() if v is not None}
    try:
        return Settings(_env_file=config_path, **clean)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"geçersiz konfigürasyon ({config_path or 'varsayılan'}): {problems}") from e


# Varsayılan ayarlar (CLI yardım metinleri bu değerleri gösterir)
settings = Settings()
