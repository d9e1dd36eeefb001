"""
Kompozit Kare Bölme ve Benzerlik Kaydı
Yavaş temel yöntem: kareyi kanallara ayır, kanal 2'yi kanal 1'e kaydet

Özellik eşleştirme (KAZE) yerine yoğunluk tabanlı arama kullanılır: kaba
dönüş/ölçek ızgarası + her düğümde çapraz korelasyon ile öteleme, ardından
eksen bazında sınırlı skaler optimizasyon.
"""

import time
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field
from scipy.ndimage import binary_dilation
from scipy.optimize import minimize_scalar
from skimage.filters import threshold_local
from skimage.measure import label, regionprops
from skimage.registration import phase_cross_correlation

from data.geometry import MisalignmentParams, unwarp_similarity
from data.scene_generator import FramePair
from errors import RegistrationError
from physics.pyrometry import PyrometryConfig


class SplitSpec(BaseModel):
    """Uyarlamalı eşik ve bileşen seçimi ayarları"""

    model_config = ConfigDict(frozen=True)

    window: int = 15  # piksel, tek sayı
    offset_fraction: float = 0.02  # dinamik aralığın oranı
    min_area: int = 4


class SearchSpec(BaseModel):
    """Kaba ızgara + yerel iyileştirme arama uzayı"""

    model_config = ConfigDict(frozen=True)

    rotation_range: float = 15.0
    rotation_step: float = 1.0
    scale_range: Tuple[float, float] = (0.9, 1.1)
    scale_step: float = 0.02
    refine_sweeps: int = 3
    rotation_window: float = 1.0
    scale_window: float = 0.02
    shift_window: float = 1.0
    success_threshold: float = 0.6
    mask_dilation: int = 2
    interpolation_order: int = Field(default=3, ge=1, le=5)  # 1 bilineer, 3 kübik

    def rotations(self) -> np.ndarray:
        n = int(round(2 * self.rotation_range / self.rotation_step))
        return np.linspace(-self.rotation_range, self.rotation_range, n + 1)

    def scales(self) -> np.ndarray:
        lo, hi = self.scale_range
        n = int(round((hi - lo) / self.scale_step))
        return np.linspace(lo, hi, n + 1)


@dataclass
class RegistrationResult:
    """Kayıt sonucu"""
    transform: MisalignmentParams
    score: float  # üs düzeltmeli maskeli NCC, [-1, 1]
    status: str  # success, failed
    elapsed: float  # saniye

    @property
    def success(self) -> bool:
        return self.status == "success"


def split_frame(
    frame: np.ndarray,
    channel_shape: Tuple[int, int] = (32, 32),
    spec: Optional[SplitSpec] = None,
    full_scale: float = 4095.0,
) -> FramePair:
    """
    Kompozit kareyi iki kanala ayır (uyarlamalı eşik → maske → bileşenler).

    İki en büyük 8-bağlı bileşen merkezlerine ortalanmış kanal boyutlu
    pencerelerle kesilir; soldaki ch1, sağdaki ch2 olur.
    """
    spec = spec or SplitSpec()
    image = np.asarray(frame, dtype=np.float64)
    offset = spec.offset_fraction * full_scale

    local = threshold_local(image, block_size=spec.window, method="mean", offset=offset)
    mask = image > np.maximum(local, offset)

    labels = label(mask, connectivity=2)
    regions = [r for r in regionprops(labels) if r.area >= spec.min_area]
    if len(regions) < 2:
        raise RegistrationError(
            f"Kare bölünemedi: {len(regions)} bileşen bulundu (en az 2 gerekli)"
        )

    regions.sort(key=lambda r: (-r.area, r.label))
    left, right = sorted(regions[:2], key=lambda r: r.centroid[1])

    h, w = channel_shape
    padded = np.pad(image, ((h, h), (w, w)))
    crops, origins = [], []
    for region in (left, right):
        top = int(round(region.centroid[0])) - h // 2
        lft = int(round(region.centroid[1])) - w // 2
        crops.append(padded[top + h:top + 2 * h, lft + w:lft + 2 * w].copy())
        origins.append((top, lft))

    return FramePair(ch1=crops[0], ch2=crops[1], crop_origins=(origins[0], origins[1]))


def masked_ncc(a: np.ndarray, b: np.ndarray, mask: np.ndarray) -> float:
    """Maske içindeki normalize çapraz korelasyon"""
    x = a[mask]
    y = b[mask]
    if x.size < 2:
        return 0.0
    x = x - x.mean()
    y = y - y.mean()
    denom = np.sqrt(np.dot(x, x) * np.dot(y, y))
    if denom <= 0:
        return 0.0
    return float(np.dot(x, y) / denom)


class _Objective:
    """
    Aday dönüşüm için NCC hesaplayıcı.

    Wien yaklaşımında I2^(λ2/λ1) ∝ I1 olduğundan ch2 bu üsle düzeltilir;
    doğru dönüşümde iki kanal sıcaklıktan bağımsız olarak orantılıdır.
    """

    def __init__(self, pair: FramePair, floor: float, dilation: int, exponent: float, order: int):
        self.ch1 = np.asarray(pair.ch1, dtype=np.float64)
        ch2 = np.asarray(pair.ch2, dtype=np.float64)
        self.ch2 = np.clip(ch2, 0.0, None) ** exponent
        self.order = order
        self.mask = binary_dilation(self.ch1 > floor, iterations=dilation)
        self.ch1_clean = np.where(self.ch1 > floor, self.ch1, 0.0)
        self.ch2_clean = np.where(ch2 > floor, self.ch2, 0.0)
        self.evaluations = 0

    def score(self, params: MisalignmentParams) -> float:
        self.evaluations += 1
        aligned = unwarp_similarity(self.ch2, params, order=self.order)
        return masked_ncc(self.ch1, aligned, self.mask)

    def translation_for(self, rotation_deg: float, scale: float) -> MisalignmentParams:
        """Verilen dönüş/ölçek için ötelemeyi çapraz korelasyon tepesinden bul"""
        base = MisalignmentParams(rotation_deg=rotation_deg, scale=scale)
        moved = unwarp_similarity(self.ch2_clean, base, order=self.order)
        if not np.any(moved):
            return base

        # moved(x) ≈ ch1(x − A⁻¹t): kayma u = A⁻¹t, t = A·u
        shift, _, _ = phase_cross_correlation(
            moved, self.ch1_clean, upsample_factor=10, normalization=None
        )
        u_col, u_row = float(shift[1]), float(shift[0])
        theta = np.deg2rad(rotation_deg)
        dx = scale * (np.cos(theta) * u_col - np.sin(theta) * u_row)
        dy = scale * (np.sin(theta) * u_col + np.cos(theta) * u_row)
        return MisalignmentParams(rotation_deg=rotation_deg, scale=scale, dx=dx, dy=dy)


def alignment_score(
    pair: FramePair,
    params: MisalignmentParams,
    search: Optional[SearchSpec] = None,
    cfg: Optional[PyrometryConfig] = None,
) -> float:
    """Verilen dönüşümde kayıt amacının değeri (register ile aynı maske ve üs)"""
    search = search or SearchSpec()
    cfg = cfg or PyrometryConfig()
    objective = _Objective(
        pair, cfg.default_floor, search.mask_dilation,
        exponent=cfg.lambda2 / cfg.lambda1, order=search.interpolation_order,
    )
    return objective.score(params)


def register(
    pair: FramePair,
    search: Optional[SearchSpec] = None,
    cfg: Optional[PyrometryConfig] = None,
    intensity_floor: Optional[float] = None,
) -> RegistrationResult:
    """
    Kanal 2'yi kanal 1'e benzerlik dönüşümü ile kaydet.

    Args:
        pair: Hizasız kanal çifti
        search: Arama uzayı ve başarı eşiği
        cfg: Pirometri ayarları (yoğunluk eşiği için)
        intensity_floor: Ön plan eşiği (None ise cfg varsayılanı)

    Returns:
        RegistrationResult (score < success_threshold ise status = failed)
    """
    search = search or SearchSpec()
    cfg = cfg or PyrometryConfig()
    floor = cfg.default_floor if intensity_floor is None else intensity_floor

    if not np.any(pair.ch1 > 0) or not np.any(pair.ch2 > 0):
        raise RegistrationError("Kayıt için iki kanal da boş olmamalı")

    start = time.perf_counter()
    objective = _Objective(
        pair, floor, search.mask_dilation,
        exponent=cfg.lambda2 / cfg.lambda1, order=search.interpolation_order,
    )

    if not np.any(objective.mask):
        elapsed = time.perf_counter() - start
        return RegistrationResult(MisalignmentParams.identity(), 0.0, "failed", elapsed)

    # Kaba ızgara
    best_params, best_score = MisalignmentParams.identity(), -np.inf
    for rotation in search.rotations():
        for scale in search.scales():
            candidate = objective.translation_for(float(rotation), float(scale))
            value = objective.score(candidate)
            if value > best_score:
                best_params, best_score = candidate, value

    # Yerel iyileştirme: eksen bazında sınırlı Brent/altın oran araması
    windows = {
        "rotation_deg": (search.rotation_window, 1e-3),
        "scale": (search.scale_window, 1e-5),
        "dx": (search.shift_window, 1e-3),
        "dy": (search.shift_window, 1e-3),
    }
    for _ in range(search.refine_sweeps):
        for axis, (window, tol) in windows.items():
            current = getattr(best_params, axis)

            def loss(v: float, axis: str = axis) -> float:
                params = MisalignmentParams(**{**best_params.to_dict(), axis: float(v)})
                return -objective.score(params)

            res = minimize_scalar(
                loss,
                bounds=(current - window, current + window),
                method="bounded",
                options={"xatol": tol},
            )
            if -res.fun > best_score:
                best_params = MisalignmentParams(**{**best_params.to_dict(), axis: float(res.x)})
                best_score = float(-res.fun)

    elapsed = time.perf_counter() - start
    status = "success" if best_score >= search.success_threshold else "failed"
    logger.debug(
        f"Kayıt: {status} ncc={best_score:.4f} θ={best_params.rotation_deg:.2f}° "
        f"s={best_params.scale:.4f} t=({best_params.dx:.2f}, {best_params.dy:.2f}) "
        f"{objective.evaluations} değerlendirme, {elapsed:.3f} s"
    )
    return RegistrationResult(best_params, float(best_score), status, elapsed)
