"""
Değerlendirme Metrikleri
Piksel bazında R², eriyik havuzu bölge büyütme ve tepe/ortalama sıcaklık istatistikleri
"""

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Tuple, Union

import numpy as np
from skimage.measure import label

from errors import EvaluationError, ShapeError
from physics.pyrometry import TemperatureMap

MapLike = Union[TemperatureMap, np.ndarray]


def _values(m: MapLike) -> np.ndarray:
    return np.asarray(m.values if isinstance(m, TemperatureMap) else m, dtype=np.float64)


@dataclass
class R2Accumulator:
    """
    Akan (streaming) R² biriktiricisi.

    (count, mean, M2, SS_res) tutar; parçalar paralel varyans formülüyle birleşir.
    """
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0  # Σ(y − ȳ)²
    ss_res: float = 0.0  # Σ(y − ŷ)²

    def update(self, pred: np.ndarray, truth: np.ndarray, mask: Optional[np.ndarray] = None) -> "R2Accumulator":
        pred = np.asarray(pred, dtype=np.float64)
        truth = np.asarray(truth, dtype=np.float64)
        if pred.shape != truth.shape:
            raise ShapeError(f"tahmin {pred.shape} != gerçek {truth.shape}")
        if mask is not None:
            pred, truth = pred[mask], truth[mask]

        n = truth.size
        if n == 0:
            return self
        batch_mean = float(truth.mean())
        batch = R2Accumulator(
            count=n,
            mean=batch_mean,
            m2=float(np.sum((truth - batch_mean) ** 2)),
            ss_res=float(np.sum((truth - pred) ** 2)),
        )
        merged = self.merge(batch)
        self.count, self.mean, self.m2, self.ss_res = merged.count, merged.mean, merged.m2, merged.ss_res
        return self

    def merge(self, other: "R2Accumulator") -> "R2Accumulator":
        """İki parçayı birleştir (Chan et al. paralel varyans)"""
        if other.count == 0:
            return R2Accumulator(self.count, self.mean, self.m2, self.ss_res)
        if self.count == 0:
            return R2Accumulator(other.count, other.mean, other.m2, other.ss_res)
        n = self.count + other.count
        delta = other.mean - self.mean
        return R2Accumulator(
            count=n,
            mean=self.mean + delta * other.count / n,
            m2=self.m2 + other.m2 + delta * delta * self.count * other.count / n,
            ss_res=self.ss_res + other.ss_res,
        )

    def finalize(self) -> float:
        if self.count < 1:
            raise EvaluationError("R² için en az bir piksel gerekli")
        if self.m2 <= 0:
            raise EvaluationError(f"gerçek değerlerin varyansı sıfır ({self.count} piksel): R² tanımsız")
        return 1.0 - self.ss_res / self.m2


def r_squared(
    pred_maps: Iterable[MapLike],
    truth_maps: Iterable[MapLike],
    foreground_only: bool = True,
    sentinel: float = 300.0,
) -> float:
    """
    Tüm küme üzerinde piksel bazında R² = 1 − SS_res / SS_tot.

    foreground_only: sadece gerçek değeri arka plan değerinin üstünde olan pikseller
    """
    acc = R2Accumulator()
    for pred, truth in zip(pred_maps, truth_maps):
        p, t = _values(pred), _values(truth)
        acc.update(p, t, mask=(t > sentinel) if foreground_only else None)
    return acc.finalize()


@dataclass
class MpRegion:
    """Eriyik havuzu bölgesi"""
    seed_pixel: Tuple[int, int]  # (satır, sütun)
    members: np.ndarray  # bool maske
    threshold_fraction: float
    t_max: float

    @property
    def size(self) -> int:
        return int(self.members.sum())

    @property
    def pixels(self) -> set:
        return {(int(r), int(c)) for r, c in zip(*np.nonzero(self.members))}


def detect_mp(m: MapLike, tau: float = 0.5, sentinel: float = 300.0) -> MpRegion:
    """
    En sıcak pikselden (satır öncelikli ilk argmax) başlayarak 8-bağlı bölge büyüt;
    T ≥ τ·T_max olan pikseller dahil edilir.

    Arka plan değerindeki (T ≤ sentinel) pikseller eşik ne olursa olsun bölgeye
    girmez; τ·T_max sentinel altına düştüğünde bölge arka plan üzerinden
    yayılmaz.
    """
    values = _values(m)
    if values.ndim != 2:
        raise ShapeError(f"detect_mp 2B harita bekler: {values.shape}")
    if not np.any(values > sentinel):
        raise EvaluationError("harita tamamen arka plan: eriyik havuzu bulunamadı")
    if not 0 < tau <= 1:
        raise ValueError(f"tau (0, 1] aralığında olmalı: {tau}")

    flat = int(np.argmax(values))
    seed = np.unravel_index(flat, values.shape)
    t_max = float(values[seed])

    candidates = (values >= tau * t_max) & (values > sentinel)
    labels = label(candidates, connectivity=2)
    members = labels == labels[seed]
    return MpRegion(seed_pixel=(int(seed[0]), int(seed[1])), members=members,
                    threshold_fraction=tau, t_max=t_max)


class MpStats(NamedTuple):
    max_T: float  # en büyük 3 değerin ortalaması
    mean_T: float


def mp_stats(m: MapLike, region: MpRegion) -> MpStats:
    """Bölgenin top-3 ortalaması ve ortalama sıcaklığı (eşitlikte satır öncelikli sıra)"""
    values = _values(m)
    flat_idx = np.flatnonzero(region.members)
    if flat_idx.size == 0:
        raise EvaluationError("boş eriyik havuzu bölgesi")
    member_values = values.ravel()[flat_idx]
    order = np.lexsort((flat_idx, -member_values))
    top = member_values[order[:3]]
    return MpStats(max_T=float(top.mean()), mean_T=float(member_values.mean()))
