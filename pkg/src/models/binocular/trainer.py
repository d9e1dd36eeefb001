"""
Binocular Eğitimi
Öğrenme oranı × grup boyutu kombinasyonları üzerinde aşamalı ADAM + MSE eğitimi
"""

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Set, Tuple

import numpy as np
import pandas as pd
import torch
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, field_validator

from data.augmentation import AugmentSpec, enumerate_augments
from data.dataset_loader import LoaderTable, make_loader
from data.scene_generator import derive_seed
from errors import MissingArtifactError, NonFiniteError
from models.autodiff.checkpoint import save_checkpoint
from models.autodiff.ops import mse_loss
from models.autodiff.optim import AdamState, adam_step
from models.binocular.network import BinocularNet, parameter_count

# mean_train_loss yalnızca ana MSE; mean_total_loss yardımcı terimi de içerir
LOSS_COLUMNS = [
    "combo_index", "lr", "batch_size", "epoch", "mean_train_loss", "mean_total_loss",
]


class TrainSchedule(BaseModel):
    """LR-öncelikli azalan sırada kombinasyon takvimi"""

    model_config = ConfigDict(frozen=True)

    learning_rates: Tuple[float, ...] = (1e-4, 1e-5, 1e-6, 1e-7)
    batch_sizes: Tuple[int, ...] = (50, 20, 5)
    epochs_per_combo: int = Field(default=20, ge=1)
    max_combos: Optional[int] = Field(default=None, ge=1)  # kısaltılmış takvim
    augment: bool = True
    aux_weight: float = Field(default=0.0, ge=0.0)

    @field_validator("learning_rates")
    @classmethod
    def _positive_lr(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if not v or any(lr <= 0 for lr in v):
            raise ValueError(f"öğrenme oranları pozitif olmalı: {v}")
        return v

    @field_validator("batch_sizes")
    @classmethod
    def _positive_batch(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if not v or any(b < 1 for b in v):
            raise ValueError(f"grup boyutları pozitif olmalı: {v}")
        return v

    def combos(self) -> List[Tuple[float, int]]:
        """(lr, batch) çiftleri: LR azalan, LR içinde batch azalan"""
        pairs = [
            (lr, bs)
            for lr in sorted(self.learning_rates, reverse=True)
            for bs in sorted(self.batch_sizes, reverse=True)
        ]
        return pairs[:self.max_combos] if self.max_combos else pairs

    @property
    def total_epochs(self) -> int:
        return len(self.combos()) * self.epochs_per_combo


@dataclass
class TrainResult:
    """Eğitim çıktıları"""
    loss_history: pd.DataFrame
    checkpoints: List[Path] = field(default_factory=list)
    seen_frames: Set[str] = field(default_factory=set)
    elapsed_s: float = 0.0

    @property
    def final_checkpoint(self) -> Optional[Path]:
        return self.checkpoints[-1] if self.checkpoints else None


def set_determinism(threads: int) -> None:
    """threads = 1: tek iş parçacığı ve deterministik algoritmalar"""
    if threads <= 1:
        torch.set_num_threads(1)
        torch.use_deterministic_algorithms(True)
    else:
        torch.set_num_threads(threads)
        torch.use_deterministic_algorithms(False)


def ratio_target(inputs: torch.Tensor, floor: float) -> torch.Tensor:
    """Yardımcı denetim hedefi: eşik üstü piksellerde ch1/ch2, diğerlerinde 0"""
    ch1, ch2 = inputs[:, 0:1], inputs[:, 1:2]
    valid = (ch1 > floor) & (ch2 > floor)
    return torch.where(valid, ch1 / ch2.clamp_min(floor), torch.zeros_like(ch1)).detach()


def epoch_plan(
    table: LoaderTable,
    seed: int,
    combo_index: int,
    epoch: int,
    augment: bool,
) -> List[Tuple[str, Optional[AugmentSpec]]]:
    """Karıştırılmış eğitim sırası + öğe başına tek düzgün örneklenmiş varyant"""
    train_ids = table.ids("train")
    rng = np.random.default_rng(derive_seed(seed, 7, combo_index, epoch))
    order = [train_ids[int(i)] for i in rng.permutation(len(train_ids))]
    if not augment:
        return [(fid, None) for fid in order]
    variants = enumerate_augments(table.channel_shape)
    picks = rng.integers(0, len(variants), size=len(order))
    return [(fid, variants[int(i)]) for fid, i in zip(order, picks)]


def train(
    net: BinocularNet,
    table: LoaderTable,
    schedule: Optional[TrainSchedule] = None,
    seed: int = 7,
    out_dir: Optional[Path] = None,
    threads: int = 1,
) -> TrainResult:
    """
    Takvimdeki her kombinasyon için epochs_per_combo epoch eğit.

    Args:
        net: Eğitilecek ağ (parametreler yerinde güncellenir)
        table: Referans tablosu (train bölmesi kullanılır)
        schedule: LR × batch takvimi
        seed: Karıştırma, varyant ve dropout tohumlarının kökü
        out_dir: loss_history.csv, kontrol noktaları ve train_summary.json hedefi
        threads: 1 = eşzamanlı yükleme; > 1 = tek işçiyle önden yükleme

    Returns:
        TrainResult
    """
    schedule = schedule or TrainSchedule()
    train_ids = table.ids("train")
    if not train_ids:
        raise MissingArtifactError(
            "eğitim için başarılı etiketli train karesi yok (manifestte label_status=success kaydı bulunamadı)"
        )

    workers = 1 if threads > 1 else 0
    floor = table.cfg.floor_fraction
    combos = schedule.combos()
    rows, checkpoints, seen = [], [], set()
    start = time.perf_counter()

    logger.info(
        f"Eğitim başlıyor: {len(train_ids)} kare, {len(combos)} kombinasyon × "
        f"{schedule.epochs_per_combo} epoch, {parameter_count(net)} parametre"
    )

    for combo_index, (lr, batch_size) in enumerate(combos):
        state = AdamState(learning_rate=lr)
        for epoch in range(1, schedule.epochs_per_combo + 1):
            plan = epoch_plan(table, seed, combo_index, epoch, schedule.augment)
            net.dropout_generator.manual_seed(derive_seed(seed, 8, combo_index, epoch))
            loader = make_loader(table, plan, batch_size, workers=workers, dtype=net.dtype)

            main_total = total = 0.0
            for batch_index, (inputs, labels) in enumerate(loader):
                for p in net.parameters():
                    p.grad = None
                try:
                    pred, aux = net.forward_with_aux(inputs, training=True)
                    main = mse_loss(pred, labels)
                    loss = main
                    if schedule.aux_weight > 0 and aux is not None:
                        loss = loss + schedule.aux_weight * mse_loss(aux, ratio_target(inputs, floor))
                    loss.backward()
                    adam_step(dict(net.named_parameters()), None, state)
                except NonFiniteError as e:
                    raise NonFiniteError(
                        f"kombinasyon {combo_index}, epoch {epoch}, grup {batch_index}: {e}"
                    ) from e
                main_total += float(main.item()) * inputs.shape[0]
                total += float(loss.item()) * inputs.shape[0]

            seen.update(fid for fid, _ in plan)
            mean_loss = main_total / len(plan)
            rows.append([combo_index, lr, batch_size, epoch, mean_loss, total / len(plan)])
            logger.info(
                f"Kombinasyon {combo_index} (lr={lr:g}, batch={batch_size}) "
                f"epoch {epoch}/{schedule.epochs_per_combo}: kayıp {mean_loss:.6g}"
            )

        if out_dir is not None:
            path = Path(out_dir) / f"ckpt_{combo_index}_{schedule.epochs_per_combo}.bnck"
            save_checkpoint(net, path)
            checkpoints.append(path)

    history = pd.DataFrame(rows, columns=LOSS_COLUMNS)
    result = TrainResult(history, checkpoints, seen, time.perf_counter() - start)

    if out_dir is not None:
        out_dir = Path(out_dir)
        history.to_csv(out_dir / "loss_history.csv", index=False, float_format="%.10g")
        summary = {
            "final_checkpoint": result.final_checkpoint.name if result.final_checkpoint else None,
            "checkpoints": [p.name for p in checkpoints],
            "combos": [{"lr": lr, "batch_size": bs} for lr, bs in combos],
            "epochs_per_combo": schedule.epochs_per_combo,
            "train_frames": len(train_ids),
            "parameter_count": parameter_count(net),
            "network": net.cfg.model_dump(),
            "final_loss": float(history["mean_train_loss"].iloc[-1]),
        }
        with open(out_dir / "train_summary.json", "w", encoding="utf-8") as f:
            json.dump(summary, f, indent=2, ensure_ascii=False)

    logger.info(
        f"Eğitim bitti: {result.elapsed_s:.1f} s, son kayıp {history['mean_train_loss'].iloc[-1]:.6g}"
    )
    return result
