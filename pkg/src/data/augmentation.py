"""
Veri Artırma
11 dönüş × 8 dihedral eleman × 7 sütun kaydırma = 616 varyant

Sıra: önce dihedral (yansıma/çevirme), sonra dönüş + kaydırma çarpıtması
(bilineer, sıfır dolgu). Aynı dönüşüm iki kanala ve etikete uygulanır.
"""

from dataclasses import dataclass
from itertools import product
from typing import List, Tuple

import numpy as np
from loguru import logger

from data.geometry import MisalignmentParams, unwarp_similarity, warp_similarity

ROTATIONS: Tuple[int, ...] = tuple(range(-10, 11, 2))
SHIFTS: Tuple[int, ...] = (-6, -4, -2, 0, 2, 4, 6)
DIHEDRAL_ALL: Tuple[int, ...] = tuple(range(8))
# Kare olmayan girdilerde boyutu koruyan elemanlar: birim, 180°, satır çevirme, sütun çevirme
DIHEDRAL_RECT: Tuple[int, ...] = (0, 2, 4, 5)


@dataclass(frozen=True, order=True)
class AugmentSpec:
    """Tek artırma varyantı"""
    rotation_deg: int = 0
    dihedral: int = 0  # 0-3: 90°·k dönüş, 4: satır çevirme, 5: sütun çevirme, 6: transpoz, 7: ters transpoz
    shift: int = 0  # piksel, sütun (tarama) yönü

    @property
    def is_identity(self) -> bool:
        return self.rotation_deg == 0 and self.dihedral == 0 and self.shift == 0

    @property
    def warp_params(self) -> MisalignmentParams:
        return MisalignmentParams(rotation_deg=float(self.rotation_deg), scale=1.0, dx=float(self.shift))


def enumerate_augments(shape: Tuple[int, int] = (32, 32)) -> List[AugmentSpec]:
    """
    Tüm artırma varyantlarını sabit sırada listele.

    Kare girdilerde 616, kare olmayanlarda 308 varyant (dihedral küme 4'e düşer).
    """
    square = shape[0] == shape[1]
    dihedral = DIHEDRAL_ALL if square else DIHEDRAL_RECT
    if not square:
        logger.warning(
            f"Kare olmayan girdi {shape}: dihedral küme 4 elemana düştü, "
            f"{len(ROTATIONS) * len(dihedral) * len(SHIFTS)} varyant"
        )
    return [AugmentSpec(r, d, s) for r, d, s in product(ROTATIONS, dihedral, SHIFTS)]


def _dihedral(image: np.ndarray, element: int) -> np.ndarray:
    if element < 4:
        return np.rot90(image, k=element, axes=(-2, -1))
    if element == 4:
        return np.flip(image, axis=-2)
    if element == 5:
        return np.flip(image, axis=-1)
    if element == 6:
        return np.swapaxes(image, -2, -1)
    if element == 7:
        return np.rot90(np.swapaxes(image, -2, -1), k=2, axes=(-2, -1))
    raise ValueError(f"geçersiz dihedral eleman: {element}")


def _dihedral_inverse(image: np.ndarray, element: int) -> np.ndarray:
    if element < 4:
        return np.rot90(image, k=-element, axes=(-2, -1))
    # Yansımalar kendi tersidir
    return _dihedral(image, element)


def _per_channel(image: np.ndarray, fn) -> np.ndarray:
    if image.ndim == 2:
        return fn(image)
    return np.stack([fn(channel) for channel in image])


def apply_augment(image: np.ndarray, spec: AugmentSpec, cval: float = 0.0) -> np.ndarray:
    """(H, W) veya (C, H, W) görüntüye varyantı uygula"""
    if spec.dihedral not in DIHEDRAL_ALL:
        raise ValueError(f"geçersiz dihedral eleman: {spec.dihedral}")
    if spec.dihedral not in DIHEDRAL_RECT and image.shape[-2] != image.shape[-1]:
        raise ValueError(f"dihedral {spec.dihedral} kare olmayan {image.shape} girdiye uygulanamaz")

    out = np.ascontiguousarray(_dihedral(np.asarray(image, dtype=np.float64), spec.dihedral))
    if spec.rotation_deg == 0 and spec.shift == 0:
        return out
    params = spec.warp_params
    return _per_channel(out, lambda ch: warp_similarity(ch, params, cval=cval))


def invert_augment(image: np.ndarray, spec: AugmentSpec, cval: float = 0.0) -> np.ndarray:
    """apply_augment'in tersi (çarpıtma kenarında kaybolan pikseller geri gelmez)"""
    out = np.asarray(image, dtype=np.float64)
    if spec.rotation_deg != 0 or spec.shift != 0:
        params = spec.warp_params
        out = _per_channel(out, lambda ch: unwarp_similarity(ch, params, cval=cval))
    return np.ascontiguousarray(_dihedral_inverse(out, spec.dihedral))
