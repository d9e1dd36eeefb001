"""
Sentetik Eriyik Havuzu Sahne Üreticisi
Gerçek sıcaklık alanları üretir, iki dalga boyunda hizasız ve gürültülü
görüntülere dönüştürür ve tek sanal sensöre yan yana yerleştirir
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator
from skimage.draw import ellipse
from tqdm import tqdm

from data.geometry import MisalignmentParams, source_coordinates
from data.manifest import DatasetManifest, ManifestRecord
from data.mprf import write_frame
from errors import CompositeError
from physics.pyrometry import PyrometryConfig, TemperatureMap, wien_radiance

SENSOR_SHAPE: Tuple[int, int] = (48, 128)  # satır × sütun (128 × 48 sensör)


def _ordered(name: str, bounds: Tuple[float, float]) -> None:
    if bounds[0] > bounds[1]:
        raise ValueError(f"{name} aralığı dejenere: {bounds}")


class SceneRanges(BaseModel):
    """Sahne parametrelerinin örnekleme aralıkları"""

    model_config = ConfigDict(frozen=True)

    peak_T: Tuple[float, float] = (2000.0, 3500.0)
    ambient_T: Tuple[float, float] = (900.0, 1300.0)
    sigma_major: Tuple[float, float] = (2.5, 5.0)
    sigma_minor: Tuple[float, float] = (1.5, 3.0)
    tail_length: Tuple[float, float] = (3.0, 10.0)
    center_jitter: float = 2.0  # piksel, görüntü merkezinden en fazla sapma

    @model_validator(mode="after")
    def _check(self) -> "SceneRanges":
        for name in ("peak_T", "ambient_T", "sigma_major", "sigma_minor", "tail_length"):
            _ordered(name, getattr(self, name))
        if self.sigma_minor[0] <= 0 or self.sigma_major[0] <= 0:
            raise ValueError("sigma değerleri pozitif olmalı")
        if self.ambient_T[1] >= self.peak_T[0]:
            raise ValueError(
                f"ortam sıcaklığı tepe sıcaklığının altında olmalı: {self.ambient_T} / {self.peak_T}"
            )
        return self


class MisalignmentRanges(BaseModel):
    """
    Kare başına çekilen hizasızlık aralıkları.

    Sınırlar temel yöntemin arama uzayını aşamaz: |dönüş| ≤ 15°,
    ölçek ⊂ [0.9, 1.1], |kaydırma| ≤ 4 piksel.
    """

    model_config = ConfigDict(frozen=True)

    rotation_deg: float = Field(default=15.0, ge=0.0, le=15.0)
    scale: Tuple[float, float] = (0.9, 1.1)
    max_shift: float = Field(default=4.0, ge=0.0, le=4.0)

    @model_validator(mode="after")
    def _check(self) -> "MisalignmentRanges":
        _ordered("scale", self.scale)
        if self.scale[0] < 0.9 or self.scale[1] > 1.1:
            raise ValueError(f"ölçek aralığı [0.9, 1.1] içinde olmalı: {self.scale}")
        return self

    def sample(self, rng: np.random.Generator) -> MisalignmentParams:
        # Kaydırma |shift| ≤ max_shift olacak şekilde disk içinden
        radius = self.max_shift * np.sqrt(rng.uniform())
        angle = rng.uniform(0.0, 2.0 * np.pi)
        return MisalignmentParams(
            rotation_deg=float(rng.uniform(-self.rotation_deg, self.rotation_deg)),
            scale=float(rng.uniform(*self.scale)),
            dx=float(radius * np.cos(angle)),
            dy=float(radius * np.sin(angle)),
        )


class NoiseSpec(BaseModel):
    """Sensör gürültüsü ve sıçrantı (spatter) modeli"""

    model_config = ConfigDict(frozen=True)

    sigma_counts: float = 2.0
    spatter_rate: float = 0.3  # kanal başına beklenen sıçrantı sayısı
    spatter_radius: Tuple[float, float] = (0.8, 1.8)
    peak_fraction: float = 0.8  # sahne tepesi tam ölçeğin %80'i

    @classmethod
    def none(cls) -> "NoiseSpec":
        return cls(sigma_counts=0.0, spatter_rate=0.0)


@dataclass
class MeltPoolScene:
    """Eriyik havuzu sahnesi (gerçek sıcaklık alanı + üretim parametreleri)"""
    field: TemperatureMap
    mp_center: Tuple[float, float]  # (satır, sütun), alt piksel
    peak_T: float
    sigma_major: float
    sigma_minor: float
    tail_direction: float  # radyan
    tail_length: float
    ambient_T: float
    seed: int = 0
    profile_peak: float = 1.0  # ızgaradaki normalize edilmemiş profil tepesi

    def temperature_at(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Sürekli sıcaklık alanını alt piksel konumlarında örnekle"""
        profile = _profile(
            np.asarray(rows, dtype=np.float64), np.asarray(cols, dtype=np.float64),
            self.mp_center, self.sigma_major, self.sigma_minor,
            self.tail_direction, self.tail_length,
        )
        profile = np.minimum(profile / self.profile_peak, 1.0)
        return self.ambient_T + (self.peak_T - self.ambient_T) * profile

    def to_dict(self) -> dict:
        """Alan dizisi hariç metadata"""
        data = asdict(self)
        data.pop("field")
        data["shape"] = list(self.field.values.shape)
        return data


@dataclass
class FramePair:
    """İki dalga boyu kanal görüntüsü (sayım) + hizasızlık metadata"""
    ch1: np.ndarray
    ch2: np.ndarray
    misalignment: MisalignmentParams = field(default_factory=MisalignmentParams)
    scene_ref: str = ""
    crop_origins: Optional[Tuple[Tuple[int, int], Tuple[int, int]]] = None

    def __post_init__(self):
        if self.ch1.shape != self.ch2.shape:
            raise ValueError(f"Kanal boyutları farklı: {self.ch1.shape} != {self.ch2.shape}")


def _profile(
    r: np.ndarray,
    c: np.ndarray,
    center: Tuple[float, float],
    sigma_major: float,
    sigma_minor: float,
    direction: float,
    tail_length: float,
) -> np.ndarray:
    """Gauss sıcak nokta ile kuyruk izinin zarfı (normalize edilmemiş)"""
    dr, dc = r - center[0], c - center[1]
    along = dc * np.cos(direction) + dr * np.sin(direction)
    across = -dc * np.sin(direction) + dr * np.cos(direction)

    spot = np.exp(-0.5 * ((along / sigma_major) ** 2 + (across / sigma_minor) ** 2))
    tail = np.where(
        along > 0,
        np.exp(-along / tail_length) * np.exp(-0.5 * (across / sigma_minor) ** 2),
        0.0,
    )
    return np.maximum(spot, tail)


def make_scene(
    rng_seed: int,
    shape: Tuple[int, int] = (32, 32),
    ranges: Optional[SceneRanges] = None,
    peak_T: Optional[float] = None,
    pixel_pitch: float = 20e-6,
) -> MeltPoolScene:
    """
    Anizotropik Gauss sıcak nokta + üstel soğuma kuyruğu üret.

    Profil ızgara üzerinde normalize edilir; alanın en büyük pikseli tam
    olarak peak_T olur.
    """
    ranges = ranges or SceneRanges()
    rows, cols = shape
    if rows < 16 or cols < 16:
        raise ValueError(f"Sahne en az 16×16 olmalı, gelen: {shape}")

    rng = np.random.default_rng(rng_seed)
    peak = float(rng.uniform(*ranges.peak_T)) if peak_T is None else float(peak_T)
    ambient = float(rng.uniform(*ranges.ambient_T))
    sigma_major = float(rng.uniform(*ranges.sigma_major))
    sigma_minor = float(min(rng.uniform(*ranges.sigma_minor), sigma_major))
    tail_length = float(rng.uniform(*ranges.tail_length))
    direction = float(rng.uniform(0.0, 2.0 * np.pi))
    center = (
        (rows - 1) / 2.0 + float(rng.uniform(-ranges.center_jitter, ranges.center_jitter)),
        (cols - 1) / 2.0 + float(rng.uniform(-ranges.center_jitter, ranges.center_jitter)),
    )

    if not ambient < peak:
        raise ValueError(f"ortam {ambient} K tepe {peak} K'den küçük olmalı")

    r, c = np.mgrid[0:rows, 0:cols].astype(np.float64)
    profile = _profile(r, c, center, sigma_major, sigma_minor, direction, tail_length)
    profile_peak = float(profile.max())
    profile /= profile_peak

    values = ambient + (peak - ambient) * profile
    values[np.unravel_index(np.argmax(profile), profile.shape)] = peak

    return MeltPoolScene(
        field=TemperatureMap(values=values, pixel_pitch=pixel_pitch),
        mp_center=center,
        peak_T=peak,
        sigma_major=sigma_major,
        sigma_minor=sigma_minor,
        tail_direction=direction,
        tail_length=tail_length,
        ambient_T=ambient,
        seed=int(rng_seed),
        profile_peak=profile_peak,
    )


def _add_spatter(image: np.ndarray, rng: np.random.Generator, noise: NoiseSpec, full_scale: float) -> int:
    """Doygun küçük elipsler ekle; eklenen sayıyı döndür"""
    count = int(rng.poisson(noise.spatter_rate)) if noise.spatter_rate > 0 else 0
    rows, cols = image.shape
    for _ in range(count):
        rr, cc = ellipse(
            float(rng.uniform(0, rows - 1)),
            float(rng.uniform(0, cols - 1)),
            float(rng.uniform(*noise.spatter_radius)),
            float(rng.uniform(*noise.spatter_radius)),
            shape=image.shape,
            rotation=float(rng.uniform(0, np.pi)),
        )
        image[rr, cc] = full_scale
    return count


def render_pair(
    scene: MeltPoolScene,
    cfg: Optional[PyrometryConfig] = None,
    mis: Optional[MisalignmentParams] = None,
    noise: Optional[NoiseSpec] = None,
    seed: int = 0,
    scene_ref: str = "",
) -> FramePair:
    """
    Sahneyi iki kanala işle.

    ch1 = λ1 ışıması, ch2 = λ2 ışımasının benzerlik çarpıtması; ikisi de aynı
    kazançla sayıma ölçeklenir (oran korunur), sonra gürültü ve sıçrantı eklenir.

    Çarpıtma, ch2 ızgarasındaki her pikselin kaynak konumunda sürekli alan
    örneklenerek yapılır; yeniden örnekleme bulanıklığı eklenmez.
    """
    cfg = cfg or PyrometryConfig()
    mis = mis or MisalignmentParams.identity()
    noise = noise if noise is not None else NoiseSpec()
    rng = np.random.default_rng(seed)

    t = scene.field.values
    t2 = t
    if mis != MisalignmentParams.identity():
        t2 = scene.temperature_at(*source_coordinates(mis, t.shape))
    i1 = wien_radiance(cfg.lambda1, t, cfg, emissivity=cfg.emissivity_ratio)
    i2 = wien_radiance(cfg.lambda2, t2, cfg)

    gain = noise.peak_fraction * cfg.full_scale_counts / max(i1.max(), i2.max())
    ch1 = gain * i1
    ch2 = gain * i2

    for image in (ch1, ch2):
        if noise.sigma_counts > 0:
            image += rng.normal(0.0, noise.sigma_counts, size=image.shape)
        _add_spatter(image, rng, noise, cfg.full_scale_counts)
        np.clip(image, 0.0, cfg.full_scale_counts, out=image)

    return FramePair(ch1=ch1, ch2=ch2, misalignment=mis, scene_ref=scene_ref)


def channel_origins(
    channel_shape: Tuple[int, int],
    sensor_shape: Tuple[int, int] = SENSOR_SHAPE,
) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    """Kanal döşemelerinin sensördeki sol üst köşeleri (ch1 sol, ch2 sağ yarı)"""
    h, w = channel_shape
    rows, cols = sensor_shape
    half = cols // 2
    if h > rows or w > half:
        raise CompositeError(
            f"Kanal {channel_shape} sensör yarısına sığmıyor ({rows}×{half})"
        )
    top = (rows - h) // 2
    left = (half - w) // 2
    return (top, left), (top, half + left)


def composite(pair: FramePair, sensor_shape: Tuple[int, int] = SENSOR_SHAPE) -> np.ndarray:
    """İki kanalı tek sensör karesine yan yana yerleştir"""
    (r1, c1), (r2, c2) = channel_origins(pair.ch1.shape, sensor_shape)
    h, w = pair.ch1.shape

    frame = np.zeros(sensor_shape, dtype=np.float64)
    frame[r1:r1 + h, c1:c1 + w] = pair.ch1
    frame[r2:r2 + h, c2:c2 + w] = pair.ch2
    return frame


def tile_channels(frame: np.ndarray, channel_shape: Tuple[int, int]) -> Tuple[np.ndarray, np.ndarray]:
    """Sabit sensör yerleşimine göre iki kanalı kes (ön işlemesiz model girdisi)"""
    (r1, c1), (r2, c2) = channel_origins(channel_shape, frame.shape)
    h, w = channel_shape
    return frame[r1:r1 + h, c1:c1 + w], frame[r2:r2 + h, c2:c2 + w]


def derive_seed(*keys: int) -> int:
    """Anahtar dizisinden deterministik 63-bit tohum"""
    return int(np.random.SeedSequence(list(keys)).generate_state(2, dtype=np.uint64)[0] >> np.uint64(1))


@dataclass(frozen=True)
class _FrameJob:
    index: int
    seed: int
    out_dir: Path
    channel_shape: Tuple[int, int]
    sensor_shape: Tuple[int, int]
    peak_T: float
    track_id: int
    track_index: int
    cfg: PyrometryConfig
    ranges: SceneRanges
    mis_ranges: MisalignmentRanges
    noise: NoiseSpec
    pixel_pitch: float


def _generate_frame(job: _FrameJob) -> dict:
    """Tek kareyi üret ve diske yaz (süreç havuzunda çalışır)"""
    frame_id = f"f{job.index:06d}"
    scene_seed = derive_seed(job.seed, 2, job.index)

    scene = make_scene(scene_seed, job.channel_shape, job.ranges, peak_T=job.peak_T,
                       pixel_pitch=job.pixel_pitch)
    mis = job.mis_ranges.sample(np.random.default_rng(derive_seed(job.seed, 3, job.index)))
    pair = render_pair(scene, job.cfg, mis, job.noise,
                       seed=derive_seed(job.seed, 4, job.index), scene_ref=frame_id)

    composite_path = job.out_dir / "frames" / f"{frame_id}.mprf"
    truth_path = job.out_dir / "truth" / f"{frame_id}.mprf"
    write_frame(composite_path, composite(pair, job.sensor_shape))
    write_frame(truth_path, scene.field.values)

    return {
        "frame_id": frame_id,
        "composite_path": composite_path,
        "truth_path": truth_path,
        "misalignment": mis,
        "augment_seed": derive_seed(job.seed, 5, job.index) % (2**31),
        "track_id": job.track_id,
        "track_index": job.track_index,
        "scene_seed": scene_seed,
    }


class SceneGenerator:
    """
    Sentetik veri seti fabrikası.

    Kareler tarama izleri (track) halinde gruplanır; iz boyunca tepe sıcaklığı
    iki örneklenmiş uç değer arasında doğrusal değişir.
    """

    def __init__(
        self,
        cfg: Optional[PyrometryConfig] = None,
        ranges: Optional[SceneRanges] = None,
        mis_ranges: Optional[MisalignmentRanges] = None,
        noise: Optional[NoiseSpec] = None,
        channel_shape: Tuple[int, int] = (32, 32),
        sensor_shape: Tuple[int, int] = SENSOR_SHAPE,
        track_length: int = 10,
        pixel_pitch: float = 20e-6,
    ):
        self.cfg = cfg or PyrometryConfig()
        self.ranges = ranges or SceneRanges()
        self.mis_ranges = mis_ranges or MisalignmentRanges()
        self.noise = noise if noise is not None else NoiseSpec()
        self.channel_shape = tuple(channel_shape)
        self.sensor_shape = tuple(sensor_shape)
        self.track_length = max(1, int(track_length))
        self.pixel_pitch = pixel_pitch

        # Yerleşim hatasını erken yakala
        channel_origins(self.channel_shape, self.sensor_shape)

    def track_peaks(self, n_frames: int, seed: int) -> List[Tuple[float, int, int]]:
        """Her kare için (peak_T, track_id, track_index)"""
        peaks = []
        for index in range(n_frames):
            track_id, track_index = divmod(index, self.track_length)
            rng = np.random.default_rng(derive_seed(seed, 1, track_id))
            start, end = rng.uniform(*self.ranges.peak_T, size=2)
            frac = track_index / (self.track_length - 1) if self.track_length > 1 else 0.0
            peaks.append((float(start + (end - start) * frac), track_id, track_index))
        return peaks

    def write_dataset(
        self,
        n_frames: int,
        out_dir: Path,
        seed: int = 7,
        split_ratio: float = 0.8,
        threads: int = 1,
    ) -> DatasetManifest:
        """
        Kompozit kareleri, gerçek alanları ve manifesti yaz.

        Args:
            n_frames: Kare sayısı
            out_dir: Çıktı dizini (frames/, truth/, manifest.jsonl)
            seed: Ana tohum; tüm çıktılar (seed, konfigürasyon) fonksiyonudur
            split_ratio: Eğitim oranı (80/20)
            threads: Süreç sayısı (1 = sıralı)

        Returns:
            DatasetManifest
        """
        if n_frames < 1:
            raise ValueError(f"n_frames pozitif olmalı: {n_frames}")
        if not 0 < split_ratio < 1:
            raise ValueError(f"split_ratio (0, 1) aralığında olmalı: {split_ratio}")

        out_dir = Path(out_dir).resolve()
        out_dir.mkdir(parents=True, exist_ok=True)
        logger.info(f"Veri seti üretiliyor: {n_frames} kare → {out_dir}")

        jobs = [
            _FrameJob(
                index=i, seed=seed, out_dir=out_dir,
                channel_shape=self.channel_shape, sensor_shape=self.sensor_shape,
                peak_T=peak, track_id=track_id, track_index=track_index,
                cfg=self.cfg, ranges=self.ranges, mis_ranges=self.mis_ranges,
                noise=self.noise, pixel_pitch=self.pixel_pitch,
            )
            for i, (peak, track_id, track_index) in enumerate(self.track_peaks(n_frames, seed))
        ]

        if threads > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                rows = list(tqdm(pool.map(_generate_frame, jobs, chunksize=16),
                                 total=len(jobs), desc="gen", disable=None))
        else:
            rows = [_generate_frame(job) for job in tqdm(jobs, desc="gen", disable=None)]

        # Rastgele 80/20 bölme, kayıtlı tohumla
        order = np.random.default_rng(derive_seed(seed, 6)).permutation(n_frames)
        n_train = int(round(split_ratio * n_frames))
        train_idx = set(int(i) for i in order[:n_train])

        records = [
            ManifestRecord(
                frame_id=row["frame_id"],
                composite_path=row["composite_path"],
                label_path=None,
                misalignment=row["misalignment"],
                split="train" if i in train_idx else "test",
                augment_seed=row["augment_seed"],
                truth_path=row["truth_path"],
                label_status="pending",
                track_id=row["track_id"],
                track_index=row["track_index"],
                scene_seed=row["scene_seed"],
            )
            for i, row in enumerate(rows)
        ]
        manifest = DatasetManifest(records)
        manifest.save(out_dir / "manifest.jsonl")

        logger.info(f"Veri seti hazır: {n_train} eğitim / {n_frames - n_train} test")
        return manifest


def write_dataset(
    n_frames: int,
    out_dir: Path,
    seed: int = 7,
    split_ratio: float = 0.8,
    generator: Optional[SceneGenerator] = None,
    threads: int = 1,
) -> DatasetManifest:
    """Varsayılan üreticiyle veri seti yaz"""
    generator = generator or SceneGenerator()
    return generator.write_dataset(n_frames, out_dir, seed=seed, split_ratio=split_ratio, threads=threads)


# Test
if __name__ == "__main__":
    scene = make_scene(7)
    pair = render_pair(scene, mis=MisalignmentParams(rotation_deg=6.0, scale=1.04, dx=3, dy=-2))
    frame = composite(pair)
    print(f"Tepe: {scene.peak_T:.0f} K, sensör: {frame.shape}, max sayım: {frame.max():.0f}")
