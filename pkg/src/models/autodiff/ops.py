"""
Denetimli Katman İşlemleri
Binocular mimarisinin ihtiyaç duyduğu işlemler; ters yön türev torch autograd'dan gelir

Her işlem boyutları açıkça denetler (genel yayınım yok) ve çıktıda NaN/Inf
bulursa NonFiniteError fırlatır.
"""

from contextlib import contextmanager
from typing import Iterator, List, Optional, Sequence

import torch
import torch.nn.functional as F

from errors import NonFiniteError, ShapeError

# Etkin aktivasyon deseni kaydı (None = kayıt yok)
_pattern_log: Optional[List[torch.Tensor]] = None


@contextmanager
def activation_patterns() -> Iterator[List[torch.Tensor]]:
    """
    Blok içindeki ReLU işaret maskelerini ve maks. havuz indekslerini kaydet.

    Sonlu fark denetimi, ±eps pertürbasyonunun bir kırılma noktasını geçip
    geçmediğini bu desenleri karşılaştırarak anlar.
    """
    global _pattern_log
    previous, _pattern_log = _pattern_log, []
    try:
        yield _pattern_log
    finally:
        _pattern_log = previous


def ensure_finite(tensor: torch.Tensor, where: str) -> torch.Tensor:
    """Tensör sonlu değilse hata fırlat"""
    if not torch.isfinite(tensor).all():
        raise NonFiniteError(f"{where}: sonlu olmayan değer (NaN/Inf) tespit edildi")
    return tensor


def conv2d(
    x: torch.Tensor,
    kernel: torch.Tensor,
    bias: Optional[torch.Tensor] = None,
    padding: str = "same",
) -> torch.Tensor:
    """
    2B çapraz korelasyon (çekirdek ters çevrilmez).

    x: [N, C, H, W], kernel: [F, C, kh, kw]; "same" sıfır dolgu ile H, W korunur.
    """
    if x.dim() != 4 or kernel.dim() != 4:
        raise ShapeError(f"conv2d 4B girdi ve çekirdek bekler: {tuple(x.shape)}, {tuple(kernel.shape)}")
    if x.shape[1] != kernel.shape[1]:
        raise ShapeError(
            f"conv2d kanal uyuşmazlığı: girdi C={x.shape[1]}, çekirdek C={kernel.shape[1]}"
        )
    kh, kw = kernel.shape[2:]
    if kh % 2 == 0 or kw % 2 == 0:
        raise ShapeError(f"conv2d çekirdek boyutları tek olmalı: {kh}×{kw}")
    if padding not in ("same", "valid"):
        raise ShapeError(f"conv2d dolgu 'same' veya 'valid' olmalı: {padding}")
    if bias is not None and bias.shape != (kernel.shape[0],):
        raise ShapeError(f"conv2d bias boyutu {tuple(bias.shape)}, beklenen ({kernel.shape[0]},)")

    out = F.conv2d(x, kernel, bias, padding=padding)
    return ensure_finite(out, "conv2d")


def maxpool2d(x: torch.Tensor, window: int = 3, stride: int = 1) -> torch.Tensor:
    """'same' dolgulu maksimum havuzlama; türev ilk (satır öncelikli) maksimuma gider"""
    if window < 1 or window % 2 == 0:
        raise ShapeError(f"maxpool2d penceresi pozitif tek sayı olmalı: {window}")
    if x.dim() != 4:
        raise ShapeError(f"maxpool2d 4B girdi bekler: {tuple(x.shape)}")
    if _pattern_log is not None:
        out, indices = F.max_pool2d(x, kernel_size=window, stride=stride, padding=window // 2, return_indices=True)
        _pattern_log.append(indices.detach())
    else:
        out = F.max_pool2d(x, kernel_size=window, stride=stride, padding=window // 2)
    return ensure_finite(out, "maxpool2d")


def relu(x: torch.Tensor) -> torch.Tensor:
    if _pattern_log is not None:
        _pattern_log.append((x > 0).detach())
    return ensure_finite(torch.relu(x), "relu")


def _same_shape(a: torch.Tensor, b: torch.Tensor, op: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op} boyut uyuşmazlığı: {tuple(a.shape)} != {tuple(b.shape)}")


def add(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    _same_shape(a, b, "add")
    return ensure_finite(a + b, "add")


def sub(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    _same_shape(a, b, "sub")
    return ensure_finite(a - b, "sub")


def concat_channels(tensors: Sequence[torch.Tensor]) -> torch.Tensor:
    """Kanal ekseni (dim=1) boyunca birleştir; diğer boyutlar eşit olmalı"""
    if not tensors:
        raise ShapeError("concat_channels en az bir tensör bekler")
    ref = tensors[0].shape
    for t in tensors[1:]:
        if t.dim() != len(ref) or t.shape[0] != ref[0] or t.shape[2:] != ref[2:]:
            raise ShapeError(
                f"concat_channels kanal dışı boyutlar farklı: {tuple(ref)} / {tuple(t.shape)}"
            )
    return torch.cat(list(tensors), dim=1)


def dropout(
    x: torch.Tensor,
    p: float,
    training: bool,
    generator: Optional[torch.Generator] = None,
) -> torch.Tensor:
    """
    Ters ölçekli dropout: eğitimde her eleman p olasılıkla sıfırlanır ve kalanlar
    1/(1−p) ile ölçeklenir; çıkarımda birim dönüşüm.
    """
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout olasılığı [0, 1) aralığında olmalı: {p}")
    if not training or p == 0.0:
        return x

    keep = torch.rand(x.shape, generator=generator, dtype=x.dtype, device=x.device) >= p
    return x * keep.to(x.dtype) / (1.0 - p)


def mse_loss(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Tüm elemanlar üzerinde ortalama kare hata"""
    _same_shape(pred, target, "mse_loss")
    return ensure_finite(F.mse_loss(pred, target, reduction="mean"), "mse_loss")
