"""
Temel Yöntem Etiket Üretimi
Her kare için: böl → kaydet → ch2'yi çarpıt → sıcaklık haritası → etiket MPRF
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from tqdm import tqdm

from baseline.registration import (
    RegistrationResult,
    SearchSpec,
    SplitSpec,
    register,
    split_frame,
)
from data.geometry import unwarp_similarity
from data.manifest import DatasetManifest, ManifestRecord
from data.mprf import read_image, write_frame
from data.scene_generator import FramePair, channel_origins
from errors import BinoThermError
from physics.pyrometry import PyrometryConfig, temperature_map

REPORT_COLUMNS = ["frame_id", "status", "score", "rot_deg", "scale", "dx", "dy", "elapsed_s"]


@dataclass
class FrameOutcome:
    """Tek karenin temel yöntem sonucu ve aşama süreleri"""
    label: Optional[np.ndarray]
    result: Optional[RegistrationResult]
    split_s: float
    register_s: float
    map_s: float
    error: str = ""


def paste_into_tile(
    values: np.ndarray,
    crop_origin: Tuple[int, int],
    tile_origin: Tuple[int, int],
    fill: float,
) -> np.ndarray:
    """Kesit koordinatlarındaki haritayı sabit kanal döşemesi koordinatlarına taşı"""
    h, w = values.shape
    out = np.full((h, w), fill, dtype=np.float64)
    dr = crop_origin[0] - tile_origin[0]
    dc = crop_origin[1] - tile_origin[1]

    # out[y, x] = values[y - dr, x - dc]
    y0, y1 = max(0, dr), min(h, h + dr)
    x0, x1 = max(0, dc), min(w, w + dc)
    if y0 < y1 and x0 < x1:
        out[y0:y1, x0:x1] = values[y0 - dr:y1 - dr, x0 - dc:x1 - dc]
    return out


def process_frame(
    frame: np.ndarray,
    channel_shape: Tuple[int, int],
    cfg: PyrometryConfig,
    search: SearchSpec,
    split_spec: SplitSpec,
) -> FrameOutcome:
    """Tek kompozit kareden etiket üret (aşama süreleriyle)"""
    t0 = time.perf_counter()
    try:
        pair = split_frame(frame, channel_shape, split_spec, cfg.full_scale_counts)
    except BinoThermError as e:
        return FrameOutcome(None, None, time.perf_counter() - t0, 0.0, 0.0, str(e))

    t1 = time.perf_counter()
    try:
        result = register(pair, search, cfg)
    except BinoThermError as e:
        return FrameOutcome(None, None, t1 - t0, time.perf_counter() - t1, 0.0, str(e))

    t2 = time.perf_counter()
    if not result.success:
        return FrameOutcome(None, result, t1 - t0, t2 - t1, 0.0)

    moved = unwarp_similarity(pair.ch2, result.transform, order=search.interpolation_order)
    aligned = FramePair(ch1=pair.ch1, ch2=np.clip(moved, 0.0, None))
    tmap = temperature_map(aligned, cfg)
    tile_origin, _ = channel_origins(channel_shape, frame.shape)
    label = paste_into_tile(tmap.values, pair.crop_origins[0], tile_origin, cfg.sentinel)
    t3 = time.perf_counter()

    return FrameOutcome(label, result, t1 - t0, t2 - t1, t3 - t2)


@dataclass(frozen=True)
class _LabelJob:
    record: ManifestRecord
    label_path: Path
    channel_shape: Tuple[int, int]
    cfg: PyrometryConfig
    search: SearchSpec
    split_spec: SplitSpec


def _label_one(job: _LabelJob) -> dict:
    """Süreç havuzu işçisi: G/Ç hataları dahil tüm hataları kayda dönüştürür"""
    record = job.record
    row = {"frame_id": record.frame_id, "status": "failed", "score": np.nan,
           "rot_deg": np.nan, "scale": np.nan, "dx": np.nan, "dy": np.nan,
           "elapsed_s": 0.0, "error": ""}
    try:
        frame = read_image(record.composite_path)
        outcome = process_frame(frame, job.channel_shape, job.cfg, job.search, job.split_spec)
        row["elapsed_s"] = outcome.split_s + outcome.register_s + outcome.map_s
        row["error"] = outcome.error

        if outcome.result is not None:
            t = outcome.result.transform
            row.update(score=outcome.result.score, rot_deg=t.rotation_deg,
                       scale=t.scale, dx=t.dx, dy=t.dy)
        if outcome.label is not None:
            write_frame(job.label_path, outcome.label)
            row["status"] = "success"
    except (BinoThermError, OSError) as e:
        row["error"] = str(e)
    return row


class LabelGenerator:
    """
    Manifestteki tüm kareler için temel yöntem etiketlerini üretir.

    Başarısız kareler eğitimden dışlanır (label_status = failed); hatalar
    toplu işlemi durdurmaz.
    """

    def __init__(
        self,
        cfg: Optional[PyrometryConfig] = None,
        search: Optional[SearchSpec] = None,
        split_spec: Optional[SplitSpec] = None,
        channel_shape: Tuple[int, int] = (32, 32),
    ):
        self.cfg = cfg or PyrometryConfig()
        self.search = search or SearchSpec()
        self.split_spec = split_spec or SplitSpec()
        self.channel_shape = tuple(channel_shape)

    def run(
        self,
        manifest: DatasetManifest,
        out_dir: Path,
        threads: int = 1,
    ) -> Tuple[DatasetManifest, pd.DataFrame]:
        """
        Etiketleri yaz, güncellenmiş manifest ve raporu döndür.

        Args:
            manifest: Kaynak manifest (gen aşaması)
            out_dir: labels/, manifest.jsonl ve report.csv hedefi
            threads: Süreç sayısı

        Returns:
            (güncellenmiş manifest, rapor DataFrame)
        """
        out_dir = Path(out_dir).resolve()
        jobs = [
            _LabelJob(
                record=r,
                label_path=out_dir / "labels" / f"{r.frame_id}.mprf",
                channel_shape=self.channel_shape,
                cfg=self.cfg, search=self.search, split_spec=self.split_spec,
            )
            for r in manifest
        ]
        logger.info(f"Etiket üretimi başlıyor: {len(jobs)} kare")

        if threads > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                rows = list(tqdm(pool.map(_label_one, jobs, chunksize=4),
                                 total=len(jobs), desc="label", disable=None))
        else:
            rows = [_label_one(job) for job in tqdm(jobs, desc="label", disable=None)]

        changes: Dict[str, dict] = {}
        for job, row in zip(jobs, rows):
            if row["status"] == "success":
                changes[row["frame_id"]] = {"label_path": job.label_path, "label_status": "success"}
            else:
                changes[row["frame_id"]] = {"label_path": None, "label_status": "failed"}
                logger.warning(f"{row['frame_id']}: etiket üretilemedi ({row['error'] or 'düşük NCC'})")

        report = pd.DataFrame(rows).sort_values("frame_id").reset_index(drop=True)
        updated = manifest.updated(changes)

        updated.save(out_dir / "manifest.jsonl")
        report[REPORT_COLUMNS].to_csv(out_dir / "report.csv", index=False, float_format="%.6g")

        rate = float((report["status"] == "success").mean()) if len(report) else 0.0
        logger.info(f"Etiket üretimi bitti: başarı oranı {rate:.1%}")
        return updated, report


def generate_labels(
    manifest: DatasetManifest,
    out_dir: Path,
    cfg: Optional[PyrometryConfig] = None,
    search: Optional[SearchSpec] = None,
    split_spec: Optional[SplitSpec] = None,
    channel_shape: Tuple[int, int] = (32, 32),
    threads: int = 1,
) -> Tuple[DatasetManifest, pd.DataFrame]:
    """Varsayılan ayarlarla etiket üret"""
    generator = LabelGenerator(cfg, search, split_spec, channel_shape)
    return generator.run(manifest, out_dir, threads=threads)


def success_rate(report: pd.DataFrame) -> float:
    """Rapordaki başarılı kare oranı"""
    if report.empty:
        return 0.0
    return float((report["status"] == "success").mean())
