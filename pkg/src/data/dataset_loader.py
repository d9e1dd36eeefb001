"""
Veri Yükleyici - Referans Tablosu
Manifestteki kare/etiket adreslerinden tembel (lazy) olarak girdi ve etiket yükler
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch
from loguru import logger
from torch.utils.data import DataLoader, Dataset

from data.augmentation import AugmentSpec, apply_augment, enumerate_augments
from data.manifest import DatasetManifest
from data.mprf import read_image
from data.scene_generator import tile_channels
from errors import MissingArtifactError, ShapeError
from physics.pyrometry import PyrometryConfig


@dataclass(frozen=True)
class LoaderEntry:
    """Referans tablosu satırı"""
    frame_id: str
    frame_path: Path
    label_path: Path
    split: str


def normalize_temperature(values: np.ndarray, cfg: PyrometryConfig) -> np.ndarray:
    """Kelvin → [0, 1]; arka plan (t_min) 0'a düşer"""
    return (np.asarray(values, dtype=np.float64) - cfg.t_min) / (cfg.t_max - cfg.t_min)


def denormalize_temperature(values: np.ndarray, cfg: PyrometryConfig) -> np.ndarray:
    """[0, 1] → kelvin"""
    return cfg.t_min + np.asarray(values, dtype=np.float64) * (cfg.t_max - cfg.t_min)


def load_frame_input(
    path: Path,
    channel_shape: Tuple[int, int],
    cfg: PyrometryConfig,
) -> np.ndarray:
    """Kompozit kareyi oku, sabit yerleşimle kanallara ayır, [0, 1]'e ölçekle → (2, H, W)"""
    frame = read_image(path)
    ch1, ch2 = tile_channels(frame, channel_shape)
    return np.stack([ch1, ch2]).astype(np.float64) / cfg.full_scale_counts


class LoaderTable:
    """
    Kare ve etiket adreslerinin referans tablosu.

    Sadece başarılı etiketli kayıtlar alınır. Dosyalar istendiğinde okunur.
    """

    def __init__(
        self,
        entries: Sequence[LoaderEntry],
        channel_shape: Tuple[int, int] = (32, 32),
        cfg: Optional[PyrometryConfig] = None,
    ):
        self.entries: Dict[str, LoaderEntry] = {}
        for entry in entries:
            if entry.frame_id in self.entries:
                raise ValueError(f"{entry.frame_id}: tabloda iki kez var")
            self.entries[entry.frame_id] = entry
        self.channel_shape = tuple(channel_shape)
        self.cfg = cfg or PyrometryConfig()

    @classmethod
    def from_manifest(
        cls,
        manifest: DatasetManifest,
        channel_shape: Tuple[int, int] = (32, 32),
        cfg: Optional[PyrometryConfig] = None,
    ) -> "LoaderTable":
        entries = [
            LoaderEntry(r.frame_id, r.composite_path, r.label_path, r.split)
            for r in manifest if r.has_label
        ]
        skipped = len(manifest) - len(entries)
        if skipped:
            logger.info(f"Referans tablosu: {skipped} kare etiketsiz, atlandı")
        return cls(entries, channel_shape, cfg)

    def __len__(self) -> int:
        return len(self.entries)

    def ids(self, split: Optional[str] = None) -> List[str]:
        """Bölmeye göre frame_id listesi (manifest sırası)"""
        return [fid for fid, e in self.entries.items() if split is None or e.split == split]

    def load_item(
        self, frame_id: str, augment: Optional[AugmentSpec] = None
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Tek kare: ((2, H, W) girdi, (1, H, W) etiket), ikisi de normalize"""
        try:
            entry = self.entries[frame_id]
        except KeyError:
            raise MissingArtifactError(f"{frame_id}: referans tablosunda yok") from None

        inputs = load_frame_input(entry.frame_path, self.channel_shape, self.cfg)
        label = read_image(entry.label_path)
        if label.shape != self.channel_shape:
            raise ShapeError(f"{entry.label_path}: etiket boyutu {label.shape} != {self.channel_shape}")
        label = normalize_temperature(label, self.cfg)[np.newaxis]

        if augment is not None and not augment.is_identity:
            stacked = apply_augment(np.concatenate([inputs, label]), augment, cval=0.0)
            inputs, label = stacked[:2], stacked[2:]
        return inputs, label


def load_batch(
    table: LoaderTable,
    ids: Sequence[str],
    augment: Optional[Sequence[Optional[AugmentSpec]]] = None,
    rng: Optional[np.random.Generator] = None,
    dtype: torch.dtype = torch.float32,
) -> Tuple[torch.Tensor, torch.Tensor]:
    """
    Bir grup kareyi yükle.

    Args:
        table: Referans tablosu
        ids: frame_id listesi
        augment: Öğe başına varyant (None ise rng verilmişse her öğeye rastgele bir varyant)
        rng: Varyant örnekleme üreteci
        dtype: Tensör tipi

    Returns:
        (girdiler N×2×H×W, etiketler N×1×H×W)
    """
    if augment is None and rng is not None:
        variants = enumerate_augments(table.channel_shape)
        augment = [variants[int(i)] for i in rng.integers(0, len(variants), size=len(ids))]
    if augment is not None and len(augment) != len(ids):
        raise ShapeError(f"varyant sayısı {len(augment)} != kare sayısı {len(ids)}")

    items = [
        table.load_item(fid, None if augment is None else augment[i])
        for i, fid in enumerate(ids)
    ]
    inputs = torch.from_numpy(np.stack([x for x, _ in items])).to(dtype)
    labels = torch.from_numpy(np.stack([y for _, y in items])).to(dtype)
    return inputs, labels


class PairDataset(Dataset):
    """Önceden belirlenmiş (frame_id, varyant) planı üzerinde torch Dataset"""

    def __init__(
        self,
        table: LoaderTable,
        plan: Sequence[Tuple[str, Optional[AugmentSpec]]],
        dtype: torch.dtype = torch.float32,
    ):
        self.table = table
        self.plan = list(plan)
        self.dtype = dtype

    def __len__(self) -> int:
        return len(self.plan)

    def __getitem__(self, index: int) -> Tuple[torch.Tensor, torch.Tensor]:
        frame_id, augment = self.plan[index]
        inputs, label = self.table.load_item(frame_id, augment)
        return torch.from_numpy(inputs).to(self.dtype), torch.from_numpy(label).to(self.dtype)


def make_loader(
    table: LoaderTable,
    plan: Sequence[Tuple[str, Optional[AugmentSpec]]],
    batch_size: int,
    workers: int = 0,
    dtype: torch.dtype = torch.float32,
) -> DataLoader:
    """
    Plan sırasını koruyan DataLoader.

    workers > 0 ise ayrı süreçte en fazla 2 grup önceden yüklenir;
    workers = 0 eşzamanlı (determinizm modu) yüklemedir.
    """
    kwargs = {"num_workers": workers}
    if workers > 0:
        kwargs["prefetch_factor"] = 2
    return DataLoader(
        PairDataset(table, plan, dtype),
        batch_size=batch_size,
        shuffle=False,
        drop_last=False,
        **kwargs,
    )
