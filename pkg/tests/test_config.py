"""Konfigürasyon: dosya + geçersiz kılmalar"""

from pathlib import Path

import pytest

from config import Settings, load_settings
from errors import ConfigError, MissingArtifactError

CONFIGS = Path(__file__).parent.parent / "configs"


def test_defaults():
    cfg = load_settings()
    assert cfg.channel_shape == (32, 32)
    assert cfg.sensor_shape == (48, 128)
    assert cfg.schedule().combos()[0] == (1e-4, 50)
    assert cfg.pyrometry().lambda1 == pytest.approx(550e-9)


def test_override_wins(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("SEED=5\nSCENE_FRAMES=40\n", encoding="utf-8")
    cfg = load_settings(path, SEED=11, SCENE_FRAMES=None)
    assert cfg.SEED == 11
    assert cfg.SCENE_FRAMES == 40


def test_list_values(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("TRAIN_LEARNING_RATES=[1e-3, 1e-4]\nBENCH_BATCH_SIZES=[2, 4]\n", encoding="utf-8")
    cfg = load_settings(path)
    assert cfg.TRAIN_LEARNING_RATES == (1e-3, 1e-4)
    assert cfg.bench_spec().batch_sizes == (2, 4)


@pytest.mark.parametrize("name", ["desk.env", "smoke.env"])
def test_shipped_configs_load(name):
    cfg = load_settings(CONFIGS / name)
    assert cfg.SCENE_FRAMES > 0


def test_desk_schedule():
    schedule = load_settings(CONFIGS / "desk.env").schedule()
    assert schedule.learning_rates == (1e-4, 1e-5, 1e-6, 1e-7)
    assert schedule.batch_sizes == (50, 20, 5)
    assert schedule.combos() == [(1e-4, 50), (1e-4, 20), (1e-4, 5), (1e-5, 50)]
    assert schedule.total_epochs == 20


def test_dump_and_reload(tmp_path):
    original = load_settings(CONFIGS / "smoke.env", SEED=21)
    original.dump_env(tmp_path / "dump.env")
    reloaded = load_settings(tmp_path / "dump.env")
    assert reloaded.model_dump() == original.model_dump()
    lines = (tmp_path / "dump.env").read_text(encoding="utf-8").splitlines()
    assert lines == sorted(lines)


def test_unknown_key(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("MYSTERY_KNOB=1\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="MYSTERY_KNOB"):
        load_settings(path)


def test_wavelength_order(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("PYRO_LAMBDA1=700e-9\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_settings(path)


def test_invalid_split_ratio():
    with pytest.raises(ConfigError):
        load_settings(SCENE_SPLIT_RATIO=1.5)


def test_missing_file(tmp_path):
    with pytest.raises(MissingArtifactError):
        load_settings(tmp_path / "absent.env")


def test_environment_ignored(monkeypatch):
    monkeypatch.setenv("SEED", "123")
    assert Settings().SEED == 7
