"""
Model Değerlendirmesi ve Trend Serileri
Test kümesinde R², fark haritaları ve temel yöntem / model tepe-ortalama sıcaklık serileri
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import torch
from loguru import logger
from scipy.stats import pearsonr
from tqdm import tqdm

from data.dataset_loader import LoaderTable, denormalize_temperature, load_batch
from data.manifest import DatasetManifest, ManifestRecord
from data.mprf import read_image, write_frame
from errors import BinoThermError, EvaluationError, MissingArtifactError
from evaluation.metrics import R2Accumulator, detect_mp, mp_stats
from physics.pyrometry import PyrometryConfig

TREND_COLUMNS = [
    "frame_id", "track_id", "track_index",
    "baseline_max_T", "baseline_mean_T", "model_max_T", "model_mean_T",
]
METRIC_COLUMNS = ["frame_id", "foreground_pixels", "mae_fg_K", "rmse_fg_K", "max_abs_fg_K"]


@dataclass
class TrendReport:
    """Kare başına eşlenmiş istatistikler ve seri korelasyonları"""
    frame: pd.DataFrame
    pearson_mean_T: float
    pearson_max_T: float
    skipped: List[str]


def _pearson(a: pd.Series, b: pd.Series) -> float:
    ok = a.notna() & b.notna()
    x, y = a[ok].to_numpy(), b[ok].to_numpy()
    if len(x) < 2 or np.ptp(x) == 0 or np.ptp(y) == 0:
        return float("nan")
    return float(pearsonr(x, y)[0])


def _stats_or_nan(values: np.ndarray, tau: float, sentinel: float) -> tuple:
    try:
        stats = mp_stats(values, detect_mp(values, tau, sentinel))
        return stats.max_T, stats.mean_T
    except EvaluationError:
        return np.nan, np.nan


def trend_series(
    records: Sequence[ManifestRecord],
    predict: Callable[[ManifestRecord], np.ndarray],
    cfg: Optional[PyrometryConfig] = None,
    tau: float = 0.5,
    out_path: Optional[Path] = None,
) -> TrendReport:
    """
    Temel yöntem etiketleri ve model çıktıları için kare başına {max_T, mean_T}.

    Args:
        records: Değerlendirilecek kayıtlar (etiketsizler uyarıyla atlanır)
        predict: Kayıt → kelvin cinsinden tahmin haritası
        cfg: Pirometri ayarları (arka plan değeri için)
        tau: Bölge büyütme eşiği (T_max oranı)
        out_path: trend.csv hedefi

    Returns:
        TrendReport
    """
    cfg = cfg or PyrometryConfig()
    rows, skipped = [], []
    for record in records:
        if not record.has_label:
            skipped.append(record.frame_id)
            continue
        baseline = read_image(record.label_path).astype(np.float64)
        prediction = np.asarray(predict(record), dtype=np.float64)
        b_max, b_mean = _stats_or_nan(baseline, tau, cfg.sentinel)
        m_max, m_mean = _stats_or_nan(prediction, tau, cfg.sentinel)
        rows.append([record.frame_id, record.track_id, record.track_index, b_max, b_mean, m_max, m_mean])

    if skipped:
        logger.warning(f"Trend serisi: {len(skipped)} etiketsiz kare atlandı")

    frame = pd.DataFrame(rows, columns=TREND_COLUMNS)
    report = TrendReport(
        frame=frame,
        pearson_mean_T=_pearson(frame["baseline_mean_T"], frame["model_mean_T"]),
        pearson_max_T=_pearson(frame["baseline_max_T"], frame["model_max_T"]),
        skipped=skipped,
    )
    if out_path is not None:
        frame.to_csv(out_path, index=False, float_format="%.6f")
    logger.info(
        f"Trend serisi: {len(frame)} kare, Pearson mean_T={report.pearson_mean_T:.4f}, "
        f"max_T={report.pearson_max_T:.4f}"
    )
    return report


@torch.inference_mode()
def predict_maps(
    net: torch.nn.Module,
    table: LoaderTable,
    ids: Sequence[str],
    batch_size: int = 32,
) -> Dict[str, np.ndarray]:
    """Kareler için kelvin cinsinden tahmin haritaları ([t_min, t_max] aralığına kırpılmış)"""
    cfg = table.cfg
    out: Dict[str, np.ndarray] = {}
    for start in tqdm(range(0, len(ids), batch_size), desc="predict", disable=None):
        chunk = list(ids[start:start + batch_size])
        inputs, _ = load_batch(table, chunk, dtype=net.dtype)
        pred = net(inputs, training=False).double().numpy()[:, 0]
        for fid, p in zip(chunk, pred):
            out[fid] = np.clip(denormalize_temperature(p, cfg), cfg.t_min, cfg.t_max)
    return out


def _write_preview(path: Path, truth: np.ndarray, pred: np.ndarray, cfg: PyrometryConfig) -> None:
    """Gerçek / tahmin / fark üçlüsü PNG"""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    diff = pred - truth
    limit = max(float(np.abs(diff).max()), 1.0)
    fig, axes = plt.subplots(1, 3, figsize=(9, 3))
    for ax, image, title, kwargs in (
        (axes[0], truth, "Temel yöntem (K)", {"vmin": cfg.t_min, "vmax": float(truth.max())}),
        (axes[1], pred, "Binocular (K)", {"vmin": cfg.t_min, "vmax": float(truth.max())}),
        (axes[2], diff, "Fark (K)", {"vmin": -limit, "vmax": limit, "cmap": "coolwarm"}),
    ):
        im = ax.imshow(image, **kwargs)
        ax.set_title(title)
        ax.axis("off")
        fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


class Evaluator:
    """
    Test bölmesinde modeli temel yöntem etiketlerine karşı değerlendirir.

    Çıktılar: metrics.csv, trend.csv, diff/<frame_id>.mprf, summary.json
    """

    def __init__(
        self,
        net: torch.nn.Module,
        manifest: DatasetManifest,
        cfg: Optional[PyrometryConfig] = None,
        channel_shape: tuple = (32, 32),
        tau: float = 0.5,
        batch_size: int = 32,
    ):
        self.net = net
        self.manifest = manifest
        self.cfg = cfg or PyrometryConfig()
        self.table = LoaderTable.from_manifest(manifest, channel_shape, self.cfg)
        self.tau = tau
        self.batch_size = batch_size

    def run(self, out_dir: Path, diff_samples: int = 8, previews: bool = False) -> dict:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        records = self.manifest.by_split("test")
        labelled = [r for r in records if r.has_label]
        if not labelled:
            raise MissingArtifactError("test bölmesinde başarılı etiketli kare yok")

        preds = predict_maps(self.net, self.table, [r.frame_id for r in labelled], self.batch_size)
        sentinel = self.cfg.sentinel

        acc_fg, acc_all = R2Accumulator(), R2Accumulator()
        abs_sum, fg_count, rows = 0.0, 0, []
        diff_dir = out_dir / "diff"
        for i, record in enumerate(labelled):
            truth = read_image(record.label_path).astype(np.float64)
            pred = preds[record.frame_id]
            fg = truth > sentinel
            acc_fg.update(pred, truth, fg)
            acc_all.update(pred, truth)

            err = pred[fg] - truth[fg]
            abs_sum += float(np.abs(err).sum())
            fg_count += int(fg.sum())
            rows.append([
                record.frame_id, int(fg.sum()),
                float(np.abs(err).mean()) if err.size else np.nan,
                float(np.sqrt(np.mean(err ** 2))) if err.size else np.nan,
                float(np.abs(err).max()) if err.size else np.nan,
            ])

            if i < diff_samples:
                write_frame(diff_dir / f"{record.frame_id}.mprf", pred - truth)
                if previews:
                    _write_preview(diff_dir / f"{record.frame_id}.png", truth, pred, self.cfg)

        pd.DataFrame(rows, columns=METRIC_COLUMNS).to_csv(
            out_dir / "metrics.csv", index=False, float_format="%.6f"
        )
        trend = trend_series(labelled, lambda r: preds[r.frame_id], self.cfg, self.tau,
                             out_path=out_dir / "trend.csv")

        def _finalize(acc: R2Accumulator) -> Optional[float]:
            try:
                return acc.finalize()
            except BinoThermError as e:
                logger.warning(f"R² hesaplanamadı: {e}")
                return None

        summary = {
            "frames": len(labelled),
            "skipped_unlabelled": len(records) - len(labelled),
            "r2": _finalize(acc_fg),
            "r2_foreground": _finalize(acc_fg),
            "r2_all_pixels": _finalize(acc_all),
            "mae_foreground_K": abs_sum / fg_count if fg_count else None,
            "foreground_pixels": fg_count,
            "pearson_mean_T": None if np.isnan(trend.pearson_mean_T) else trend.pearson_mean_T,
            "pearson_max_T": None if np.isnan(trend.pearson_max_T) else trend.pearson_max_T,
            "mode": {"foreground_only": True, "tau": self.tau, "reference": "baseline_labels"},
        }
        with open(out_dir / "summary.json", "w", encoding="utf-8") as f:
            json.dump(summary, f, indent=2, ensure_ascii=False)

        logger.info(
            f"Değerlendirme: {len(labelled)} kare, R²(ön plan)={summary['r2_foreground']}, "
            f"R²(tüm)={summary['r2_all_pixels']}, MAE={summary['mae_foreground_K']}"
        )
        return summary
