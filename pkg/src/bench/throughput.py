"""
Verim Kıyaslaması
Gruplu model çıkarımı (disk → bellek → hesap aşamaları) ve kayıt tabanlı temel yöntem süreleri
"""

import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import torch
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, field_validator
from torch.utils.data import DataLoader, Dataset

from baseline.label_generator import process_frame
from baseline.registration import SearchSpec, SplitSpec
from data.dataset_loader import load_frame_input
from data.manifest import DatasetManifest
from data.mprf import read_image
from errors import BenchError
from physics.pyrometry import PyrometryConfig

BENCH_COLUMNS = ["mode", "batch_size", "repeat", "load_s", "transfer_s", "compute_s", "frames", "fps"]
BASELINE_COLUMNS = ["frame_id", "split_s", "register_s", "map_s", "total_s", "status"]
MODES = ("serial", "pipelined")


class BenchSpec(BaseModel):
    """Kıyaslama taraması"""

    model_config = ConfigDict(frozen=True)

    batch_sizes: Tuple[int, ...] = (1, 8, 32)
    warmup: int = Field(default=3, ge=0)  # grup
    repeats: int = Field(default=5, ge=1)
    batches_per_repeat: int = Field(default=4, ge=1)
    modes: Tuple[str, ...] = MODES
    baseline_frames: int = Field(default=10, ge=1)

    @field_validator("batch_sizes")
    @classmethod
    def _positive(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if not v or any(b < 1 for b in v):
            raise ValueError(f"grup boyutları pozitif olmalı: {v}")
        return v

    @field_validator("modes")
    @classmethod
    def _known_modes(cls, v: Tuple[str, ...]) -> Tuple[str, ...]:
        unknown = set(v) - set(MODES)
        if unknown:
            raise ValueError(f"bilinmeyen kip: {sorted(unknown)}")
        return v


@dataclass
class BenchReport:
    """(kip, grup boyutu) başına tekrarların medyanı"""
    mode: str
    batch_size: int
    load_s: float
    transfer_s: float
    compute_s: float
    fps: float
    fps_cv: float
    warmup_batches: int
    frames_per_repeat: int
    dominant_stage: str
    speedup_vs_baseline: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class BaselineTiming:
    """Temel yöntemin kare başına süreleri"""
    frame: pd.DataFrame

    @property
    def median_s(self) -> float:
        return float(self.frame["total_s"].median())

    @property
    def p95_s(self) -> float:
        return float(self.frame["total_s"].quantile(0.95))

    def stage_medians(self) -> dict:
        return {f"{stage}_median_s": float(self.frame[f"{stage}_s"].median())
                for stage in ("split", "register", "map")}


class _FrameDataset(Dataset):
    """Kare yollarını döngüsel olarak okuyan Dataset (etiket gerekmez)"""

    def __init__(self, paths: Sequence[Path], length: int, channel_shape, cfg: PyrometryConfig):
        self.paths = list(paths)
        self.length = length
        self.channel_shape = channel_shape
        self.cfg = cfg

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, index: int) -> torch.Tensor:
        path = self.paths[index % len(self.paths)]
        return torch.from_numpy(load_frame_input(path, self.channel_shape, self.cfg))


def _serial_batches(paths, batch_size, n_batches, channel_shape, cfg) -> Iterator[torch.Tensor]:
    cursor = 0
    for _ in range(n_batches):
        items = []
        for _ in range(batch_size):
            items.append(load_frame_input(paths[cursor % len(paths)], channel_shape, cfg))
            cursor += 1
        yield torch.from_numpy(np.stack(items))


def _pipelined_batches(paths, batch_size, n_batches, channel_shape, cfg) -> Iterator[torch.Tensor]:
    dataset = _FrameDataset(paths, batch_size * n_batches, channel_shape, cfg)
    loader = DataLoader(dataset, batch_size=batch_size, shuffle=False, num_workers=1, prefetch_factor=2)
    yield from loader


@torch.inference_mode()
def _run_mode(
    net: torch.nn.Module,
    mode: str,
    paths: Sequence[Path],
    batch_size: int,
    spec: BenchSpec,
    channel_shape: Tuple[int, int],
    cfg: PyrometryConfig,
) -> List[list]:
    """Bir (kip, grup boyutu) için ısınma + zamanlanmış tekrarlar"""
    n_batches = spec.warmup + spec.repeats * spec.batches_per_repeat
    source = _serial_batches if mode == "serial" else _pipelined_batches
    batches = iter(source(paths, batch_size, n_batches, channel_shape, cfg))

    staging = torch.empty((batch_size, 2, *channel_shape), dtype=net.dtype)

    def step() -> Tuple[float, float, float]:
        t0 = time.perf_counter()
        host = next(batches)  # disk → bellek (pipelined kipte bekleme süresi)
        t1 = time.perf_counter()
        staging.copy_(host)  # bellek → hesap tamponu
        t2 = time.perf_counter()
        net(staging, training=False)
        t3 = time.perf_counter()
        return t1 - t0, t2 - t1, t3 - t2

    for _ in range(spec.warmup):
        step()

    rows = []
    for repeat in range(spec.repeats):
        load = transfer = compute = 0.0
        wall_start = time.perf_counter()
        for _ in range(spec.batches_per_repeat):
            l, t, c = step()
            load, transfer, compute = load + l, transfer + t, compute + c
        wall = time.perf_counter() - wall_start
        frames = batch_size * spec.batches_per_repeat
        rows.append([mode, batch_size, repeat, load, transfer, compute, frames, frames / wall])
    return rows


def bench_inference(
    net: torch.nn.Module,
    manifest: DatasetManifest,
    spec: Optional[BenchSpec] = None,
    cfg: Optional[PyrometryConfig] = None,
    channel_shape: Tuple[int, int] = (32, 32),
) -> Tuple[List[BenchReport], pd.DataFrame]:
    """
    Grup boyutu taraması: her (kip, boyut) için tekrar başına aşama süreleri ve fps.

    Returns:
        (medyan raporları, tüm tekrarların satırları)
    """
    spec = spec or BenchSpec()
    cfg = cfg or PyrometryConfig()
    paths = [r.composite_path for r in manifest]
    if not paths:
        raise BenchError("kıyaslama için manifestte kare yok")
    largest = max(spec.batch_sizes)
    if len(paths) < largest:
        raise BenchError(f"yetersiz kare: {len(paths)} < en büyük grup boyutu {largest}")

    net.eval()
    rows = []
    for mode in spec.modes:
        for batch_size in spec.batch_sizes:
            rows.extend(_run_mode(net, mode, paths, batch_size, spec, tuple(channel_shape), cfg))

    frame = pd.DataFrame(rows, columns=BENCH_COLUMNS)
    reports = []
    for (mode, batch_size), group in frame.groupby(["mode", "batch_size"], sort=False):
        fps = group["fps"].to_numpy()
        load_s, compute_s = float(group["load_s"].median()), float(group["compute_s"].median())
        report = BenchReport(
            mode=mode,
            batch_size=int(batch_size),
            load_s=load_s,
            transfer_s=float(group["transfer_s"].median()),
            compute_s=compute_s,
            fps=float(np.median(fps)),
            fps_cv=float(fps.std() / fps.mean()) if fps.mean() > 0 else 0.0,
            warmup_batches=spec.warmup,
            frames_per_repeat=int(group["frames"].iloc[0]),
            dominant_stage="load" if load_s > compute_s else "compute",
        )
        reports.append(report)
        logger.info(
            f"{mode} batch={batch_size}: {report.fps:.1f} kare/s (cv {report.fps_cv:.1%}), "
            f"baskın aşama: {report.dominant_stage}"
        )
    return reports, frame


def bench_baseline(
    manifest: DatasetManifest,
    n_frames: int = 10,
    cfg: Optional[PyrometryConfig] = None,
    search: Optional[SearchSpec] = None,
    split_spec: Optional[SplitSpec] = None,
    channel_shape: Tuple[int, int] = (32, 32),
) -> BaselineTiming:
    """Böl + kaydet + harita aşamalarının kare başına süreleri"""
    cfg = cfg or PyrometryConfig()
    search = search or SearchSpec()
    split_spec = split_spec or SplitSpec()
    records = list(manifest)[:n_frames]
    if not records:
        raise BenchError("temel yöntem kıyaslaması için kare yok")

    rows = []
    for record in records:
        frame = read_image(record.composite_path)
        outcome = process_frame(frame, channel_shape, cfg, search, split_spec)
        total = outcome.split_s + outcome.register_s + outcome.map_s
        status = "success" if outcome.label is not None else "failed"
        rows.append([record.frame_id, outcome.split_s, outcome.register_s, outcome.map_s, total, status])

    timing = BaselineTiming(pd.DataFrame(rows, columns=BASELINE_COLUMNS))
    logger.info(f"Temel yöntem: medyan {timing.median_s:.3f} s/kare, p95 {timing.p95_s:.3f} s")
    return timing


def speedup(baseline_median_s: float, fps: float) -> float:
    """Temel yöntem s/kare ÷ model s/kare"""
    return baseline_median_s * fps


def run_bench(
    net: torch.nn.Module,
    manifest: DatasetManifest,
    out_dir: Path,
    spec: Optional[BenchSpec] = None,
    cfg: Optional[PyrometryConfig] = None,
    search: Optional[SearchSpec] = None,
    split_spec: Optional[SplitSpec] = None,
    channel_shape: Tuple[int, int] = (32, 32),
    random_init: bool = False,
) -> dict:
    """Çıkarım + temel yöntem kıyaslaması; bench.csv, baseline.csv ve summary.json yazar"""
    spec = spec or BenchSpec()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    reports, frame = bench_inference(net, manifest, spec, cfg, channel_shape)
    timing = bench_baseline(manifest, spec.baseline_frames, cfg, search, split_spec, channel_shape)
    for report in reports:
        report.speedup_vs_baseline = speedup(timing.median_s, report.fps)

    frame.to_csv(out_dir / "bench.csv", index=False, float_format="%.6g")
    timing.frame.to_csv(out_dir / "baseline.csv", index=False, float_format="%.6g")

    best = max(reports, key=lambda r: r.fps)
    summary = {
        "random_init": random_init,
        "reports": [r.to_dict() for r in reports],
        "baseline_median_s_per_frame": timing.median_s,
        "baseline_p95_s_per_frame": timing.p95_s,
        **timing.stage_medians(),
        "best_mode": best.mode,
        "best_batch_size": best.batch_size,
        "best_fps": best.fps,
        "speedup_vs_baseline": best.speedup_vs_baseline,
    }
    with open(out_dir / "summary.json", "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2, ensure_ascii=False)

    logger.info(
        f"Kıyaslama bitti: en iyi {best.fps:.1f} kare/s ({best.mode}, batch={best.batch_size}), "
        f"hızlanma {best.speedup_vs_baseline:.0f}×"
    )
    return summary
