"""
Sonlu Fark Türev Denetimi
Ters yön türevleri merkezi farklarla karşılaştırır (64-bit doğrulama)

ReLU / maks. havuz kırılma noktaları: ±eps pertürbasyonu aktivasyon desenini
değiştiren koordinatlar atlanır. Desen sabitken kayıp tek bir parametrede
ikinci derecedendir ve merkezi fark yuvarlama hatası dışında kesindir.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional

import torch
from loguru import logger

from models.autodiff.ops import activation_patterns


@dataclass
class GradCheckReport:
    """Türev denetimi sonucu"""
    errors: Dict[str, float]
    checked: int
    skipped: int

    @property
    def worst(self) -> Optional[float]:
        return worst_error(self.errors)


def _pattern_equal(a: List[torch.Tensor], b: List[torch.Tensor]) -> bool:
    return len(a) == len(b) and all(torch.equal(x, y) for x, y in zip(a, b))


def _evaluate(loss_fn: Callable[[], torch.Tensor]):
    with activation_patterns() as pattern:
        value = loss_fn().item()
    return value, pattern


def max_relative_error(
    loss_fn: Callable[[], torch.Tensor],
    params: Mapping[str, torch.Tensor],
    samples_per_param: int = 8,
    eps: float = 1e-6,
    floor: float = 1e-6,
    seed: int = 0,
    skip_kinks: bool = True,
) -> "GradCheckReport":
    """
    Parametre başına örneklenmiş koordinatlarda en büyük göreli hata.

    Göreli hata = |analitik − sayısal| / max(|analitik|, |sayısal|, floor).

    Args:
        loss_fn: Parametrelerden skaler kayıp üreten fonksiyon (dropout kapalı)
        params: isim -> requires_grad tensör (float64 önerilir)
        samples_per_param: Parametre başına denetlenen eleman sayısı
        eps: Merkezi fark adımı
        floor: Sıfıra yakın türevler için payda alt sınırı
        seed: Koordinat örnekleme tohumu
        skip_kinks: Aktivasyon desenini değiştiren koordinatları atla

    Returns:
        GradCheckReport: isim -> en büyük göreli hata (tüm koordinatları
        atlanan parametre 0.0) ve denetlenen / atlanan koordinat sayıları
    """
    for p in params.values():
        p.grad = None
    loss = loss_fn()
    loss.backward()
    analytic = {name: p.grad.detach().clone() for name, p in params.items()}

    generator = torch.Generator().manual_seed(seed)
    errors: Dict[str, float] = {}
    skipped = checked = 0

    with torch.no_grad():
        _, base_pattern = _evaluate(loss_fn)
        for name, p in params.items():
            flat = p.view(-1)
            n = min(samples_per_param, flat.numel())
            coords = torch.randperm(flat.numel(), generator=generator)[:n]
            worst = 0.0
            for idx in coords.tolist():
                original = flat[idx].item()
                flat[idx] = original + eps
                plus, plus_pattern = _evaluate(loss_fn)
                flat[idx] = original - eps
                minus, minus_pattern = _evaluate(loss_fn)
                flat[idx] = original

                if skip_kinks and not (
                    _pattern_equal(plus_pattern, base_pattern)
                    and _pattern_equal(minus_pattern, base_pattern)
                ):
                    skipped += 1
                    continue

                checked += 1
                numeric = (plus - minus) / (2.0 * eps)
                a = analytic[name].view(-1)[idx].item()
                denom = max(abs(a), abs(numeric), floor)
                worst = max(worst, abs(a - numeric) / denom)
            errors[name] = worst

    worst_name = max(errors, key=errors.get) if errors else None
    if worst_name is not None:
        logger.debug(
            f"Türev denetimi: en kötü {worst_name} = {errors[worst_name]:.2e} "
            f"({checked} koordinat, {skipped} kırılma noktası atlandı)"
        )
    return GradCheckReport(errors=errors, checked=checked, skipped=skipped)


def worst_error(errors: Dict[str, float]) -> Optional[float]:
    """Sözlükteki en büyük hata (boşsa None)"""
    return max(errors.values()) if errors else None
