"""
Ortak test fikstürleri
src/ dizinini sys.path'e ekler ve küçük geçici veri setleri üretir
"""

import sys
from pathlib import Path

import numpy as np
import pytest
import torch

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from data.manifest import DatasetManifest  # noqa: E402
from data.scene_generator import NoiseSpec, SceneGenerator  # noqa: E402
from models.binocular.network import BinocularConfig, build_binocular  # noqa: E402
from physics.pyrometry import PyrometryConfig  # noqa: E402

SMALL_CHANNEL = (16, 16)
SMALL_SENSOR = (24, 48)


# =============================================================================
# Temel fikstürler
# =============================================================================

@pytest.fixture
def cfg() -> PyrometryConfig:
    return PyrometryConfig()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(42)


@pytest.fixture
def small_generator() -> SceneGenerator:
    """16×16 kanallı, gürültüsüz küçük sahne üreticisi"""
    return SceneGenerator(
        noise=NoiseSpec.none(),
        channel_shape=SMALL_CHANNEL,
        sensor_shape=SMALL_SENSOR,
        track_length=4,
    )


# =============================================================================
# Veri seti fikstürleri
# =============================================================================

@pytest.fixture
def gen_dataset(tmp_path, small_generator) -> DatasetManifest:
    """gen aşaması çıktısı: 12 kare, etiketsiz"""
    return small_generator.write_dataset(12, tmp_path / "gen", seed=3, split_ratio=0.75)


@pytest.fixture
def labelled_dataset(tmp_path, gen_dataset) -> DatasetManifest:
    """
    Etiket olarak gerçek sıcaklık alanını kullanan manifest.

    Kayıt adımını atlar; yükleyici, eğitim ve değerlendirme testleri için.
    """
    changes = {
        r.frame_id: {"label_path": r.truth_path, "label_status": "success"}
        for r in gen_dataset
    }
    manifest = gen_dataset.updated(changes)
    manifest.save(tmp_path / "label" / "manifest.jsonl")
    return manifest


@pytest.fixture
def tiny_config() -> BinocularConfig:
    return BinocularConfig(
        input_shape=SMALL_CHANNEL,
        segment_count=1,
        head_units=1,
        base_width=2,
        dropout_p=0.2,
    )


@pytest.fixture
def tiny_net(tiny_config):
    torch.manual_seed(0)
    return build_binocular(tiny_config, seed=11)
