"""Sentetik sahne üretimi, kompozit yerleşim ve manifest"""

import numpy as np
import pytest
from skimage.registration import phase_cross_correlation

from data.geometry import MisalignmentParams, similarity_transform, unwarp_similarity, warp_similarity
from data.manifest import DatasetManifest
from data.mprf import read_image
from data.scene_generator import (
    FramePair,
    MisalignmentRanges,
    NoiseSpec,
    SceneGenerator,
    SceneRanges,
    channel_origins,
    composite,
    derive_seed,
    make_scene,
    render_pair,
    tile_channels,
)
from errors import CompositeError, MissingArtifactError
from physics.pyrometry import temperature_map


# =============================================================================
# Sahne
# =============================================================================

class TestMakeScene:
    def test_deterministic(self):
        a, b = make_scene(123), make_scene(123)
        np.testing.assert_array_equal(a.field.values, b.field.values)
        assert a.to_dict() == b.to_dict()

    def test_different_seeds_differ(self):
        assert not np.array_equal(make_scene(1).field.values, make_scene(2).field.values)

    @pytest.mark.parametrize("seed", range(6))
    def test_peak_and_center(self, seed):
        scene = make_scene(seed)
        values = scene.field.values
        assert values.max() == scene.peak_T
        assert values.min() >= scene.ambient_T - 1e-9
        r, c = np.unravel_index(np.argmax(values), values.shape)
        assert np.hypot(r - scene.mp_center[0], c - scene.mp_center[1]) <= 2.5
        assert abs(scene.mp_center[0] - 15.5) <= 2.0
        assert abs(scene.mp_center[1] - 15.5) <= 2.0

    def test_continuous_field_matches_grid(self):
        scene = make_scene(11)
        r, c = np.mgrid[0:32, 0:32]
        np.testing.assert_allclose(scene.temperature_at(r, c), scene.field.values, rtol=1e-12)
        assert scene.temperature_at(np.array([-1000.0]), np.array([-1000.0]))[0] == pytest.approx(
            scene.ambient_T, abs=1e-6
        )

    def test_fixed_peak(self):
        assert make_scene(5, peak_T=2750.0).field.values.max() == 2750.0

    def test_too_small_shape(self):
        with pytest.raises(ValueError):
            make_scene(0, shape=(8, 8))

    def test_ranges_validated(self):
        with pytest.raises(ValueError):
            SceneRanges(peak_T=(3000.0, 2000.0))
        with pytest.raises(ValueError):
            SceneRanges(ambient_T=(900.0, 2500.0), peak_T=(2000.0, 3500.0))


# =============================================================================
# İşleme
# =============================================================================

class TestRenderPair:
    def test_noise_free_identity_round_trip(self, cfg):
        scene = make_scene(9)
        pair = render_pair(scene, cfg, noise=NoiseSpec.none())
        tmap = temperature_map(pair, cfg)
        valid = (pair.ch1 > cfg.default_floor) & (pair.ch2 > cfg.default_floor)
        assert valid.sum() > 10
        np.testing.assert_allclose(tmap.values[valid], scene.field.values[valid], rtol=1e-6)

    def test_gain_maps_peak_to_80_percent(self, cfg):
        pair = render_pair(make_scene(4), cfg, noise=NoiseSpec.none())
        brightest = max(pair.ch1.max(), pair.ch2.max())
        assert brightest == pytest.approx(0.8 * cfg.full_scale_counts, rel=1e-12)

    def test_same_seed_same_noise(self, cfg):
        scene = make_scene(3)
        mis = MisalignmentParams(rotation_deg=4.0, scale=1.02, dx=1.0, dy=-1.5)
        noise = NoiseSpec(spatter_rate=3.0)
        a = render_pair(scene, cfg, mis, noise, seed=17)
        b = render_pair(scene, cfg, mis, noise, seed=17)
        np.testing.assert_array_equal(a.ch1, b.ch1)
        np.testing.assert_array_equal(a.ch2, b.ch2)

    def test_counts_clipped(self, cfg):
        pair = render_pair(make_scene(3), cfg, noise=NoiseSpec(sigma_counts=500.0, spatter_rate=5.0), seed=1)
        for image in (pair.ch1, pair.ch2):
            assert image.min() >= 0.0
            assert image.max() <= cfg.full_scale_counts

    def test_integer_shift_moves_ch2(self, cfg):
        scene = make_scene(8)
        aligned = render_pair(scene, cfg, noise=NoiseSpec.none())
        moved = render_pair(scene, cfg, MisalignmentParams(dx=3.0, dy=-2.0), NoiseSpec.none())
        np.testing.assert_array_equal(moved.ch1, aligned.ch1)
        # x' = x + (dx, dy): sütun +3, satır −2
        np.testing.assert_allclose(moved.ch2[0:30, 3:32], aligned.ch2[2:32, 0:29], rtol=1e-9)

    def test_ch2_samples_continuous_field(self, cfg):
        scene = make_scene(8)
        mis = MisalignmentParams(rotation_deg=6.0, scale=1.04, dx=3.0, dy=-2.0)
        pair = render_pair(scene, cfg, mis, NoiseSpec.none())
        peak = similarity_transform(mis, pair.ch2.shape)(
            np.array([[scene.mp_center[1], scene.mp_center[0]]])
        )[0]
        brightest = np.unravel_index(np.argmax(pair.ch2), pair.ch2.shape)
        assert abs(brightest[0] - peak[1]) <= 1.0
        assert abs(brightest[1] - peak[0]) <= 1.0

    def test_inverse_warp_realigns_ch2(self, cfg):
        scene = make_scene(8)
        mis = MisalignmentParams(rotation_deg=6.0, scale=1.04, dx=3.0, dy=-2.0)
        aligned = render_pair(scene, cfg, noise=NoiseSpec.none())
        moved = render_pair(scene, cfg, mis, NoiseSpec.none())
        restored = unwarp_similarity(moved.ch2, mis, order=3)
        shift, _, _ = phase_cross_correlation(
            aligned.ch2, restored, upsample_factor=100, normalization=None
        )
        assert np.hypot(*shift) < 0.1

    def test_misalignment_sample_within_ranges(self):
        ranges = MisalignmentRanges()
        rng = np.random.default_rng(0)
        for _ in range(200):
            p = ranges.sample(rng)
            assert abs(p.rotation_deg) <= 15.0
            assert 0.9 <= p.scale <= 1.1
            assert np.hypot(p.dx, p.dy) <= 4.0 + 1e-12

    @pytest.mark.parametrize("bounds", [
        {"rotation_deg": 20.0},
        {"rotation_deg": -1.0},
        {"scale": (0.8, 1.1)},
        {"scale": (0.95, 1.2)},
        {"scale": (1.05, 0.95)},
        {"max_shift": 6.0},
    ])
    def test_misalignment_ranges_bounded(self, bounds):
        with pytest.raises(ValueError):
            MisalignmentRanges(**bounds)


class TestGeometry:
    def test_translation_convention(self):
        image = np.zeros((16, 16))
        image[5, 7] = 1.0
        moved = warp_similarity(image, MisalignmentParams(dx=3.0, dy=-2.0))
        # x' = x + (dx, dy): sütun +3, satır −2
        assert moved[3, 10] == pytest.approx(1.0)

    def test_unwarp_inverts_warp(self):
        r, c = np.mgrid[0:32, 0:32]
        image = np.exp(-((r - 16) ** 2 + (c - 15) ** 2) / 30.0)
        params = MisalignmentParams(rotation_deg=5.0, scale=1.03, dx=1.5, dy=-0.5)
        restored = unwarp_similarity(warp_similarity(image, params), params)
        np.testing.assert_allclose(restored[8:24, 8:24], image[8:24, 8:24], atol=5e-2)


# =============================================================================
# Kompozit
# =============================================================================

class TestComposite:
    def test_layout_and_tiles(self, cfg):
        pair = render_pair(make_scene(2), cfg, noise=NoiseSpec.none())
        frame = composite(pair)
        assert frame.shape == (48, 128)
        ch1, ch2 = tile_channels(frame, (32, 32))
        np.testing.assert_array_equal(ch1, pair.ch1)
        np.testing.assert_array_equal(ch2, pair.ch2)

        (r1, c1), (r2, c2) = channel_origins((32, 32))
        assert (r1, c1) == (8, 16)
        assert (r2, c2) == (8, 80)

    def test_empty_scene_is_background(self):
        zeros = np.zeros((32, 32))
        assert not composite(FramePair(ch1=zeros, ch2=zeros.copy())).any()

    def test_channel_too_large(self):
        big = np.zeros((32, 70))
        with pytest.raises(CompositeError):
            composite(FramePair(ch1=big, ch2=big.copy()))


def test_derive_seed_stable():
    assert derive_seed(7, 2, 0) == derive_seed(7, 2, 0)
    assert derive_seed(7, 2, 0) != derive_seed(7, 2, 1)
    assert 0 <= derive_seed(1, 2, 3) < 2**63


# =============================================================================
# Veri seti
# =============================================================================

class TestWriteDataset:
    def test_split_counts(self, tmp_path, small_generator):
        manifest = small_generator.write_dataset(100, tmp_path, seed=5, split_ratio=0.8)
        assert len(manifest) == 100
        assert len(manifest.by_split("train")) == 80
        assert len(manifest.by_split("test")) == 20
        lines = (tmp_path / "manifest.jsonl").read_text(encoding="utf-8").splitlines()
        assert len(lines) == 100

    def test_byte_identical_rerun(self, tmp_path, small_generator):
        small_generator.write_dataset(10, tmp_path / "a", seed=7)
        small_generator.write_dataset(10, tmp_path / "b", seed=7)
        for rel in ["manifest.jsonl", "frames/f000003.mprf", "truth/f000009.mprf"]:
            assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()

    def test_tracks_and_truth(self, gen_dataset, small_generator):
        records = list(gen_dataset)
        assert [r.track_id for r in records[:5]] == [0, 0, 0, 0, 1]
        assert [r.track_index for r in records[:5]] == [0, 1, 2, 3, 0]
        for r in records:
            truth = read_image(r.truth_path)
            assert truth.shape == small_generator.channel_shape
            assert read_image(r.composite_path).shape == small_generator.sensor_shape
            assert r.label_status == "pending" and r.label_path is None

    def test_track_peaks_linear(self, small_generator):
        peaks = [p for p, tid, _ in small_generator.track_peaks(4, seed=1) if tid == 0]
        steps = np.diff(peaks)
        np.testing.assert_allclose(steps, steps[0])

    def test_invalid_arguments(self, tmp_path, small_generator):
        with pytest.raises(ValueError):
            small_generator.write_dataset(0, tmp_path)
        with pytest.raises(ValueError):
            small_generator.write_dataset(4, tmp_path, split_ratio=1.0)

    def test_generator_rejects_bad_layout(self):
        with pytest.raises(CompositeError):
            SceneGenerator(channel_shape=(32, 32), sensor_shape=(24, 48))


class TestManifest:
    def test_save_load_relative_paths(self, tmp_path, gen_dataset):
        path = tmp_path / "gen" / "manifest.jsonl"
        assert str(tmp_path) not in path.read_text(encoding="utf-8")
        loaded = DatasetManifest.load(path)
        assert [r.frame_id for r in loaded] == [r.frame_id for r in gen_dataset]
        assert loaded.get("f000000").composite_path == gen_dataset.get("f000000").composite_path
        assert loaded.get("f000004").misalignment == gen_dataset.get("f000004").misalignment

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(MissingArtifactError):
            DatasetManifest.load(tmp_path / "manifest.jsonl")

    def test_missing_frame_named(self, tmp_path, gen_dataset):
        gen_dataset.get("f000002").composite_path.unlink()
        with pytest.raises(MissingArtifactError, match="f000002"):
            DatasetManifest.load(tmp_path / "gen" / "manifest.jsonl")

    def test_invalid_status_rejected(self, gen_dataset):
        with pytest.raises(ValueError):
            gen_dataset.updated({"f000000": {"label_status": "maybe"}})

    def test_labelled_only_filter(self, labelled_dataset):
        train = labelled_dataset.by_split("train", labelled_only=True)
        assert len(train) == 9
        assert all(r.has_label for r in train)
